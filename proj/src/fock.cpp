#include "ringtransport/fock.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

namespace ringtransport::fock {

namespace {

// (-1)^(number of occupied modes below `mode`)
double jw_sign(std::uint32_t x, int mode) {
    const std::uint32_t below = x & ((std::uint32_t{1} << mode) - 1u);
    return (std::popcount(below) % 2) ? -1.0 : 1.0;
}

bool occupied(std::uint32_t x, int mode) { return (x >> mode) & 1u; }

} // namespace

LindbladOracle::LindbladOracle(const CMatrix& h, std::vector<Channel> channels, std::size_t max_dim)
    : modes_(static_cast<int>(h.rows())), channels_(std::move(channels)) {
    if (h.rows() != h.cols()) throw ConfigError("fock oracle: h must be square");
    if (modes_ < 1 || modes_ > 24 || (std::size_t{1} << modes_) > max_dim)
        throw ConfigError("fock oracle: Hilbert dimension exceeds the cap");
    for (const Channel& c : channels_)
        if (c.mode < 0 || c.mode >= modes_ || c.gain < 0.0 || c.drain < 0.0)
            throw ConfigError("fock oracle: invalid channel");

    const std::uint32_t D = std::uint32_t{1} << modes_;
    states_.assign(modes_ + 1, {});
    local_.assign(D, 0);
    for (std::uint32_t x = 0; x < D; ++x) {
        auto& block = states_[std::popcount(x)];
        local_[x] = static_cast<std::uint32_t>(block.size());
        block.push_back(x);
    }

    H_.resize(modes_ + 1);
    decay_.resize(modes_ + 1);
    for (int N = 0; N <= modes_; ++N) {
        const auto& st = states_[N];
        std::vector<Eigen::Triplet<cplx>> trip;
        for (std::uint32_t col = 0; col < st.size(); ++col) {
            const std::uint32_t y = st[col];
            for (int j = 0; j < modes_; ++j) {
                if (!occupied(y, j)) continue;
                const std::uint32_t z = y ^ (1u << j);
                const double sj = jw_sign(y, j);
                for (int i = 0; i < modes_; ++i) {
                    if (h(i, j) == cplx{0.0, 0.0} || occupied(z, i)) continue;
                    const std::uint32_t x = z | (1u << i);
                    trip.emplace_back(local_[x], col, h(i, j) * sj * jw_sign(z, i));
                }
            }
        }
        H_[N].resize(static_cast<Eigen::Index>(st.size()), static_cast<Eigen::Index>(st.size()));
        H_[N].setFromTriplets(trip.begin(), trip.end());
        H_[N].makeCompressed();

        decay_[N] = RVector::Zero(static_cast<Eigen::Index>(st.size()));
        for (std::size_t a = 0; a < st.size(); ++a)
            for (const Channel& c : channels_)
                decay_[N](a) += occupied(st[a], c.mode) ? c.drain : c.gain;
    }

    drain_jumps_.assign(channels_.size(), std::vector<std::vector<Jump>>(modes_ + 1));
    gain_jumps_.assign(channels_.size(), std::vector<std::vector<Jump>>(modes_ + 1));
    for (std::size_t c = 0; c < channels_.size(); ++c) {
        const int m = channels_[c].mode;
        for (int N = 0; N <= modes_; ++N) {
            for (std::uint32_t x : states_[N]) {
                if (!occupied(x, m) && N + 1 <= modes_) {
                    // a |x + m> = sign |x>
                    const std::uint32_t src = x | (1u << m);
                    drain_jumps_[c][N].push_back({local_[src], local_[x], jw_sign(x, m)});
                }
                if (occupied(x, m) && N >= 1) {
                    // a^dagger |x - m> = sign |x>
                    const std::uint32_t src = x ^ (1u << m);
                    gain_jumps_[c][N].push_back({local_[src], local_[x], jw_sign(x, m)});
                }
            }
        }
    }
}

double LindbladOracle::max_rate() const {
    double r = 0.0;
    for (int N = 0; N <= modes_; ++N)
        for (int k = 0; k < H_[N].outerSize(); ++k)
            for (Eigen::SparseMatrix<cplx, Eigen::RowMajor>::InnerIterator it(H_[N], k); it; ++it)
                r = std::max(r, std::abs(it.value()));
    for (const Channel& c : channels_) r = std::max({r, c.gain, c.drain});
    return r;
}

BlockState LindbladOracle::product_state(const RVector& occ) const {
    if (occ.size() != modes_) throw ConfigError("product_state: wrong number of occupations");
    BlockState R(modes_ + 1);
    for (int N = 0; N <= modes_; ++N) {
        const auto& st = states_[N];
        R[N] = CMatrix::Zero(static_cast<Eigen::Index>(st.size()), static_cast<Eigen::Index>(st.size()));
        for (std::size_t a = 0; a < st.size(); ++a) {
            double p = 1.0;
            for (int m = 0; m < modes_; ++m) p *= occupied(st[a], m) ? occ(m) : 1.0 - occ(m);
            R[N](a, a) = p;
        }
    }
    return R;
}

BlockState LindbladOracle::rhs(const BlockState& R) const { return apply(R, false); }

BlockState LindbladOracle::apply(const BlockState& R, bool hermitian) const {
    BlockState out(modes_ + 1);
    for (int N = 0; N <= modes_; ++N) {
        if (hermitian) {
            // R H = (H R)^dagger
            const CMatrix X = H_[N] * R[N];
            out[N] = -kI * (X - X.adjoint());
        } else {
            out[N] = -kI * (H_[N] * R[N] - R[N] * H_[N]);
        }
        const RVector& d = decay_[N];
        for (Eigen::Index b = 0; b < d.size(); ++b)
            for (Eigen::Index a = 0; a < d.size(); ++a) out[N](a, b) -= 0.5 * (d(a) + d(b)) * R[N](a, b);
    }
    for (std::size_t c = 0; c < channels_.size(); ++c) {
        const double dr = channels_[c].drain;
        const double gn = channels_[c].gain;
        for (int N = 0; N <= modes_; ++N) {
            if (dr > 0.0 && N + 1 <= modes_) {
                const auto& J = drain_jumps_[c][N];
                const CMatrix& src = R[N + 1];
                for (const Jump& u : J)
                    for (const Jump& v : J)
                        out[N](u.to, v.to) += dr * u.sign * v.sign * src(u.from, v.from);
            }
            if (gn > 0.0 && N >= 1) {
                const auto& J = gain_jumps_[c][N];
                const CMatrix& src = R[N - 1];
                for (const Jump& u : J)
                    for (const Jump& v : J)
                        out[N](u.to, v.to) += gn * u.sign * v.sign * src(u.from, v.from);
            }
        }
    }
    return out;
}

BlockState LindbladOracle::evolve(BlockState R, double t_span, double dt) const {
    if (t_span <= 0.0) return R;
    if (!(dt > 0.0)) throw ConfigError("fock oracle: dt must be positive");
    const auto steps = static_cast<long>(std::ceil(t_span / dt - 1e-9));
    const double h = t_span / static_cast<double>(steps);
    auto axpy = [](const BlockState& a, double s, const BlockState& b) {
        BlockState r(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + s * b[i];
        return r;
    };
    for (long s = 0; s < steps; ++s) {
        const BlockState k1 = apply(R, true);
        const BlockState k2 = apply(axpy(R, 0.5 * h, k1), true);
        const BlockState k3 = apply(axpy(R, 0.5 * h, k2), true);
        const BlockState k4 = apply(axpy(R, h, k3), true);
        for (std::size_t i = 0; i < R.size(); ++i)
            R[i] += (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    for (const CMatrix& b : R)
        if (!numerics::all_finite(b)) throw NumericalError("fock oracle: non-finite state");
    return R;
}

BlockState LindbladOracle::stationary() const {
    std::vector<Eigen::Index> offset(modes_ + 2, 0);
    for (int N = 0; N <= modes_; ++N) {
        const auto n = static_cast<Eigen::Index>(states_[N].size());
        offset[N + 1] = offset[N] + n * n;
    }
    const Eigen::Index total = offset[modes_ + 1];
    if (total > 4096) throw ConfigError("fock oracle: stationary solve limited to small systems");
    auto zero_state = [&]() {
        BlockState R(modes_ + 1);
        for (int N = 0; N <= modes_; ++N) {
            const auto n = static_cast<Eigen::Index>(states_[N].size());
            R[N] = CMatrix::Zero(n, n);
        }
        return R;
    };
    CMatrix G(total, total);
    BlockState unit = zero_state();
    for (int N = 0; N <= modes_; ++N) {
        const Eigen::Index n = unit[N].rows();
        for (Eigen::Index col = 0; col < n * n; ++col) {
            unit[N](col % n, col / n) = 1.0;
            const BlockState img = rhs(unit);
            for (int M = 0; M <= modes_; ++M)
                G.col(offset[N] + col).segment(offset[M], img[M].size()) =
                    Eigen::Map<const CVector>(img[M].data(), img[M].size());
            unit[N](col % n, col / n) = 0.0;
        }
    }
    // replace the first equation by the trace condition
    CVector b = CVector::Zero(total);
    G.row(0).setZero();
    for (int N = 0; N <= modes_; ++N) {
        const Eigen::Index n = unit[N].rows();
        for (Eigen::Index a = 0; a < n; ++a) G(0, offset[N] + a * n + a) = 1.0;
    }
    b(0) = 1.0;
    const CVector x = numerics::solve_linear(G, b);
    BlockState R = zero_state();
    for (int N = 0; N <= modes_; ++N) {
        R[N] = Eigen::Map<const CMatrix>(x.data() + offset[N], R[N].rows(), R[N].cols());
        R[N] = 0.5 * (R[N] + R[N].adjoint()).eval();
    }
    return R;
}

CMatrix LindbladOracle::spdm(const BlockState& R) const {
    CMatrix G = CMatrix::Zero(modes_, modes_);
    for (int N = 0; N <= modes_; ++N) {
        const auto& st = states_[N];
        for (std::uint32_t ly = 0; ly < st.size(); ++ly) {
            const std::uint32_t y = st[ly];
            for (int i = 0; i < modes_; ++i) {
                if (!occupied(y, i)) continue;
                G(i, i) += R[N](ly, ly);
                const std::uint32_t z = y ^ (1u << i);
                const double si = jw_sign(y, i);
                for (int j = 0; j < modes_; ++j) {
                    if (j == i || occupied(z, j)) continue;
                    const std::uint32_t x = z | (1u << j);
                    // <x| a_j^dagger a_i |y> R(y, x)
                    G(i, j) += si * jw_sign(z, j) * R[N](ly, local_[x]);
                }
            }
        }
    }
    return G;
}

double LindbladOracle::trace(const BlockState& R) const {
    double t = 0.0;
    for (const CMatrix& b : R) t += b.trace().real();
    return t;
}

double LindbladOracle::min_eigenvalue(const BlockState& R) const {
    double lo = std::numeric_limits<double>::infinity();
    for (const CMatrix& b : R) {
        Eigen::SelfAdjointEigenSolver<CMatrix> s(b, Eigen::EigenvaluesOnly);
        lo = std::min(lo, s.eigenvalues().minCoeff());
    }
    return lo;
}

OracleResult fock_space_oracle(const ModelParams& params, const OracleSettings& settings) {
    params.validate();
    const OperatorSet ops = build_operators(params);
    const BlockLayout& lay = ops.layout;
    if (lay.dim() > 12) throw ConfigError("fock oracle: 2M + L must not exceed 12");

    const CMatrix rho0 = thermal_total_spdm(params);
    std::vector<Channel> channels;
    for (int m = 0; m < lay.dim(); ++m) {
        const bool contact = m < lay.chain_offset() || m >= lay.contactL_offset();
        if (!contact) continue;
        const double n = rho0(m, m).real();
        channels.push_back({m, params.gamma * n, params.gamma * (1.0 - n)});
    }
    const LindbladOracle oracle(ops.H_total, channels);
    const double rate = oracle.max_rate();
    const double dt = std::min(settings.dt, rate > 0.0 ? 0.01 / rate : settings.dt);
    const RVector occ = rho0.diagonal().real();
    const BlockState R = oracle.evolve(oracle.product_state(occ), settings.t_final, dt);

    OracleResult out;
    out.spdm = oracle.spdm(R);
    out.rho_s = out.spdm.block(lay.chain_offset(), lay.chain_offset(), lay.L, lay.L);
    out.bond_currents = bond_currents(out.rho_s, params.Js);
    out.current = mean_current(out.rho_s, params.Js);
    out.t_final = settings.t_final;
    out.converged = true;
    out.residual = 0.0;
    out.trace = oracle.trace(R);
    out.min_eigenvalue = oracle.min_eigenvalue(R);
    return out;
}

CMatrix open_chain_stationary_spdm(const MarkovChain& chain) {
    if (chain.L < 2) throw ConfigError("open chain needs L >= 2");
    const CMatrix h = chain_hamiltonian(chain.L, chain.Js);
    const double g = chain.gamma_tilde;
    std::vector<Channel> channels{{0, g * chain.n1, g * (1.0 - chain.n1)},
                                  {chain.L - 1, g * chain.nL, g * (1.0 - chain.nL)}};
    const LindbladOracle oracle(h, channels);
    return oracle.spdm(oracle.stationary());
}

} // namespace ringtransport::fock
