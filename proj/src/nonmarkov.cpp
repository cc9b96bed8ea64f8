#include "ringtransport/nonmarkov.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

namespace ringtransport {

namespace {

double bessel_j0(double x) { return std::cyl_bessel_j(0.0, std::abs(x)); }

void require_gamma(const ModelParams& p) {
    if (!(p.gamma > 0.0)) throw ConfigError("memory kernels need gamma > 0 to converge");
}

// Fermi momentum of a zero-temperature contact: occupied modes have |kappa| < kF.
double fermi_momentum(double mu, double Jr) {
    const double x = std::clamp(-mu / Jr, -1.0, 1.0);
    return std::acos(x);
}

CMatrix site_projector_in_eigenbasis(const CMatrix& Phi, int site) {
    const CVector row = Phi.row(site).transpose();
    // C_nm = <Phi_n|l><l|Phi_m>
    return row.conjugate() * row.transpose();
}

} // namespace

cplx kernel_jF(double t, const ContactSpec& contact, const ModelParams& params) {
    const double Jr = params.Jr;
    const double phase = Jr * t;
    auto wave = [phase](double k) { return std::exp(cplx{0.0, -phase * std::cos(k)}); };
    if (contact.beta.is_infinite()) {
        if (contact.mu >= Jr) return bessel_j0(phase);
        if (contact.mu <= -Jr) return 0.0;
        const double kF = fermi_momentum(contact.mu, Jr);
        const int panels = 1 + static_cast<int>(std::ceil(std::abs(phase) * kF / kPi));
        return numerics::integrate_gauss_legendre(wave, 0.0, kF, panels) / kPi;
    }
    const double beta = contact.beta.value();
    if (beta == 0.0) return 0.5 * bessel_j0(phase);
    const double n = 4096.0 + 2.0 * std::ceil(std::abs(phase)) + 64.0 * std::ceil(beta * Jr);
    if (n > static_cast<double>(1 << 24))
        throw NumericalError("kernel_jF: inverse temperature too large for the periodic rule");
    auto f = [&](double k) {
        return wave(k) * fermi_function(-Jr * std::cos(k), contact);
    };
    return numerics::integrate_periodic(f, -kPi, 2.0 * kPi, static_cast<int>(n)) / (2.0 * kPi);
}

double mean_filling(const ContactSpec& contact, const ModelParams& params) {
    return kernel_jF(0.0, contact, params).real();
}

double contact_dos(double mu, double Jr) {
    const double a = std::abs(Jr);
    if (std::abs(mu) == a) throw ConfigError("contact_dos: singular at the band edge");
    if (std::abs(mu) > a) return 0.0;
    return a / (kPi * std::sqrt(a * a - mu * mu));
}

KernelTable::KernelTable(const ModelParams& params, double dt, std::size_t size)
    : dt_(dt), J0_(size), JF1_(size), JFL_(size), chain_(chain_eigensystem(params)) {
    if (!(dt > 0.0)) throw ConfigError("KernelTable: dt must be positive");
    for (std::size_t i = 0; i < size; ++i) {
        const double tau = dt * static_cast<double>(i);
        J0_[i] = bessel_j0(params.Jr * tau);
        // the memory integral runs over negative tau
        JF1_[i] = kernel_jF(-tau, params.left, params);
        JFL_[i] = kernel_jF(-tau, params.right, params);
    }
}

CMatrix KernelTable::U_s(std::size_t i) const {
    const double tau = dt_ * static_cast<double>(i);
    CVector ph(chain_.values.size());
    for (Eigen::Index n = 0; n < ph.size(); ++n) ph(n) = std::exp(cplx{0.0, -chain_.values(n) * tau});
    return chain_.vectors * ph.asDiagonal() * chain_.vectors.adjoint();
}

HistoryBuffer::HistoryBuffer(int L, std::size_t capacity)
    : L_(L), capacity_(capacity), data_(capacity * static_cast<std::size_t>(L * L)) {
    if (capacity == 0) throw ConfigError("HistoryBuffer: zero capacity");
}

void HistoryBuffer::push(const CMatrix& rho) {
    head_ = (head_ + 1) % capacity_;
    std::copy(rho.data(), rho.data() + L_ * L_, data_.begin() + head_ * L_ * L_);
    size_ = std::min(size_ + 1, capacity_);
}

Eigen::Map<const CMatrix> HistoryBuffer::at(std::size_t k) const {
    if (k >= size_) throw ConfigError("HistoryBuffer: index beyond stored history");
    const std::size_t slot = (head_ + capacity_ - k) % capacity_;
    return Eigen::Map<const CMatrix>(data_.data() + slot * L_ * L_, L_, L_);
}

double nonmarkov_time_step(const ModelParams& params, double requested) {
    double dt = std::min(requested, 0.02 / std::max(params.Js, params.Jr));
    if (params.gamma > 0.0) dt = std::min(dt, 0.2 / params.gamma);
    return dt;
}

double memory_window(const ModelParams& params, const NonMarkovSettings& settings) {
    require_gamma(params);
    return settings.memory_scale * 2.0 * std::log(1.0 / settings.memory_cutoff) / params.gamma;
}

namespace {

// Right-hand side in the chain eigenbasis given the two memory integrals.
//   source = sum_l C_l T_l,  Q_ij = int e^{-gamma s/2} J0 rho_ij(t - s) e^{i E_j s}
CMatrix reduced_rhs(const CMatrix& rho, const RVector& E, const CMatrix& source,
                    const CMatrix& Csum, const CMatrix& Q, double eps2) {
    CMatrix out(rho.rows(), rho.cols());
    for (Eigen::Index j = 0; j < rho.cols(); ++j)
        for (Eigen::Index i = 0; i < rho.rows(); ++i)
            out(i, j) = cplx{0.0, -(E(i) - E(j))} * rho(i, j);
    const CMatrix L = 0.25 * eps2 * (source - Csum * Q);
    out += L + L.adjoint();
    return out;
}

} // namespace

NonMarkovResult evolve_nonmarkov(const ModelParams& params, const NonMarkovSettings& settings,
                                 const TrajectorySink& sink) {
    require_gamma(params);
    params.validate();
    const double dt = nonmarkov_time_step(params, settings.dt);
    const double tau_mem = memory_window(params, settings);
    const auto n_mem = static_cast<std::size_t>(std::ceil(tau_mem / dt));
    if (n_mem + 1 > settings.max_memory_samples) {
        std::ostringstream msg;
        msg << "memory window needs " << n_mem + 1 << " samples, limit is "
            << settings.max_memory_samples;
        throw NumericalError(msg.str());
    }

    const KernelTable table(params, dt, n_mem + 1);
    const int L = params.L;
    const RVector& E = table.chain().values;
    const CMatrix& Phi = table.chain().vectors;
    const CMatrix C1 = site_projector_in_eigenbasis(Phi, 0);
    const CMatrix CL = site_projector_in_eigenbasis(Phi, L - 1);
    const CMatrix Csum = C1 + CL;
    const double eps2 = params.epsilon * params.epsilon;

    // g(k, j) = e^{-gamma s_k / 2} J0(Jr s_k) e^{i E_j s_k}; h_l(k, j) likewise with JF_l
    CMatrix g(n_mem + 1, L), h1(n_mem + 1, L), hL(n_mem + 1, L);
    for (std::size_t k = 0; k <= n_mem; ++k) {
        const double s = dt * static_cast<double>(k);
        const double damp = std::exp(-0.5 * params.gamma * s);
        for (int j = 0; j < L; ++j) {
            const cplx ph = std::exp(cplx{0.0, E(j) * s});
            g(k, j) = damp * table.J0(k) * ph;
            h1(k, j) = damp * table.JF(0, k) * ph;
            hL(k, j) = damp * table.JF(1, k) * ph;
        }
    }
    // Trapezoid over [0, t] (or the memory window) for the source integrals.
    auto source_at = [&](std::size_t steps, CVector& run1, CVector& runL) {
        const std::size_t K = std::min(steps, n_mem);
        CMatrix T1 = CMatrix::Zero(L, L), TL = CMatrix::Zero(L, L);
        if (K > 0) {
            for (int j = 0; j < L; ++j) {
                T1(j, j) = run1(j) - 0.5 * dt * (h1(0, j) + h1(K, j));
                TL(j, j) = runL(j) - 0.5 * dt * (hL(0, j) + hL(K, j));
            }
        }
        return CMatrix(C1 * T1 + CL * TL);
    };
    CVector run1 = dt * h1.row(0).transpose();  // sum_{k <= K} dt h(k)
    CVector runL = dt * hL.row(0).transpose();

    HistoryBuffer history(L, n_mem + 1);
    CMatrix rho = CMatrix::Zero(L, L);
    history.push(rho);

    // Memory integral over stored history, excluding the newest point's half weight.
    // Entries k = 1..K of the grid at time t + dt correspond to history indices k - 1.
    auto memory_rest = [&](std::size_t steps_next) {
        const std::size_t K = std::min(steps_next, n_mem);
        CMatrix Q = CMatrix::Zero(L, L);
        for (std::size_t k = 1; k <= K; ++k) {
            const double w = (k == K) ? 0.5 * dt : dt;
            const auto past = history.at(k - 1);
            for (int j = 0; j < L; ++j) {
                const cplx gj = w * g(k, j);
                for (int i = 0; i < L; ++i) Q(i, j) += gj * past(i, j);
            }
        }
        return Q;
    };
    auto with_newest = [&](const CMatrix& rest, const CMatrix& newest, std::size_t steps) {
        if (steps == 0) return CMatrix(CMatrix::Zero(L, L));
        CMatrix Q = rest;
        for (int j = 0; j < L; ++j) Q.col(j) += 0.5 * dt * g(0, j) * newest.col(j);
        return Q;
    };

    const double window = stationarity_window(params, settings.window_factor);
    const double sample_dt = std::max(dt, window / 200.0);
    const long stride = std::max(1L, static_cast<long>(std::llround(sample_dt / dt)));
    const CMatrix J = current_operator(L, params.Js);

    NonMarkovResult out;
    out.memory_samples = n_mem + 1;
    std::deque<std::pair<double, double>> samples;
    CMatrix Q_now = CMatrix::Zero(L, L);  // memory integral at the current time
    CMatrix src_now = CMatrix::Zero(L, L);
    std::size_t step = 0;
    double t = 0.0;
    bool converged = false;
    double residual = std::numeric_limits<double>::infinity();
    double drift = 0.0;

    while (t < settings.t_max) {
        const CMatrix f0 = reduced_rhs(rho, E, src_now, Csum, Q_now, eps2);
        const CMatrix pred = rho + dt * f0;

        if (step + 1 <= n_mem) {
            run1 += dt * h1.row(step + 1).transpose();
            runL += dt * hL.row(step + 1).transpose();
        }
        const CMatrix src_next = source_at(step + 1, run1, runL);
        const CMatrix rest = memory_rest(step + 1);
        const CMatrix f1 =
            reduced_rhs(pred, E, src_next, Csum, with_newest(rest, pred, step + 1), eps2);
        rho += 0.5 * dt * (f0 + f1);
        if (!numerics::all_finite(rho))
            throw NumericalError("evolve_nonmarkov: non-finite state");
        drift = std::max(drift, numerics::hermiticity_defect(rho));
        rho = 0.5 * (rho + rho.adjoint()).eval();

        history.push(rho);
        Q_now = with_newest(rest, rho, step + 1);
        src_now = src_next;
        ++step;
        t = dt * static_cast<double>(step);

        if (step % stride == 0) {
            const CMatrix site = Phi * rho * Phi.adjoint();
            const double j = (J * site).trace().real();
            samples.emplace_back(t, j);
            while (!samples.empty() && samples.front().first < t - window) samples.pop_front();
            if (sink) sink({t, j, site.trace().real()});
            if (t >= window && samples.size() > 2) {
                double lo = samples.front().second, hi = lo;
                for (const auto& s : samples) {
                    lo = std::min(lo, s.second);
                    hi = std::max(hi, s.second);
                }
                residual = (hi - lo) / std::max(std::abs(j), 1e-10);
                if (residual <= settings.tolerance) {
                    converged = true;
                    break;
                }
            }
        }
    }

    const CMatrix site = Phi * rho * Phi.adjoint();
    out.rho_s = site;
    out.bond_currents = bond_currents(site, params.Js);
    out.current = mean_current(site, params.Js);
    out.t_final = t;
    out.converged = converged;
    out.residual = residual;
    out.hermiticity_drift = drift;
    return out;
}

namespace {

// a_j = int_0^inf ds e^{-gamma s / 2} JF(-Jr s) e^{i E_j s}
//     = (1/pi) int_0^pi dk n(k) / (gamma/2 - i(E_j + Jr cos k))
cplx source_integral(double Ej, const ContactSpec& c, const ModelParams& p) {
    const double Jr = p.Jr;
    auto f = [&](double k) {
        const double occ = c.beta.is_infinite()
                               ? (c.mu + Jr * std::cos(k) > 0.0 ? 1.0 : 0.0)
                               : fermi_function(-Jr * std::cos(k), c);
        return occ / cplx{0.5 * p.gamma, -(Ej + Jr * std::cos(k))};
    };
    double upper = kPi;
    if (c.beta.is_infinite()) {
        if (c.mu <= -Jr) return 0.0;
        upper = c.mu >= Jr ? kPi : fermi_momentum(c.mu, Jr);
    }
    std::vector<double> cuts{0.0};
    if (std::abs(Ej) < Jr) {
        const double ks = std::acos(-Ej / Jr);  // resonance of the denominator
        if (ks > 0.0 && ks < upper) cuts.push_back(ks);
    }
    if (!c.beta.is_infinite() && std::abs(c.mu) < Jr) {
        const double kF = fermi_momentum(c.mu, Jr);
        if (kF > 0.0 && kF < upper) cuts.push_back(kF);
    }
    cuts.push_back(upper);
    std::sort(cuts.begin(), cuts.end());
    cplx total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        total += numerics::integrate_adaptive(f, cuts[i], cuts[i + 1], 1e-12, 30).value;
    return total / kPi;
}

cplx bessel_integral(double Ej, const ModelParams& p) {
    // Laplace transform of J0: 1 / sqrt(s^2 + Jr^2) at s = gamma/2 - i E_j, principal branch.
    const cplx s{0.5 * p.gamma, -Ej};
    return 1.0 / std::sqrt(s * s + p.Jr * p.Jr);
}

// Left side of i[E, X] + (eps^2/4)(Csum X B + B^dagger X Csum) = rhs in the eigenbasis.
CMatrix reduced_operator(const RVector& E, const CMatrix& Csum, const CMatrix& B, const CMatrix& X,
                         double eps2) {
    CMatrix out(X.rows(), X.cols());
    for (Eigen::Index j = 0; j < X.cols(); ++j)
        for (Eigen::Index i = 0; i < X.rows(); ++i) out(i, j) = cplx{0.0, E(i) - E(j)} * X(i, j);
    out += 0.25 * eps2 * (Csum * X * B + B.adjoint() * X * Csum);
    return out;
}

CMatrix solve_reduced_stationary(const RVector& E, const CMatrix& Csum, const CMatrix& B,
                                 const CMatrix& rhs, double eps2) {
    auto apply = [&](const CMatrix& X) { return reduced_operator(E, Csum, B, X, eps2); };
    CMatrix X = numerics::solve_matrix_equation(apply, rhs);
    return 0.5 * (X + X.adjoint());
}

} // namespace

StationaryResult stationary_nonmarkov(const ModelParams& params) {
    require_gamma(params);
    params.validate();
    const auto chain = chain_eigensystem(params);
    const RVector& E = chain.values;
    const CMatrix& Phi = chain.vectors;
    const int L = params.L;
    StationaryResult out;
    out.t_final = std::numeric_limits<double>::infinity();
    out.converged = true;
    if (params.epsilon == 0.0) {
        // isolated chain: keep the empty initial state
        out.rho_s = CMatrix::Zero(L, L);
        out.bond_currents = RVector::Zero(L - 1);
        out.residual = 0.0;
        return out;
    }
    const CMatrix C1 = site_projector_in_eigenbasis(Phi, 0);
    const CMatrix CL = site_projector_in_eigenbasis(Phi, L - 1);
    CMatrix A1 = CMatrix::Zero(L, L), AL = CMatrix::Zero(L, L), B = CMatrix::Zero(L, L);
    for (int n = 0; n < L; ++n) {
        A1(n, n) = source_integral(E(n), params.left, params);
        AL(n, n) = source_integral(E(n), params.right, params);
        B(n, n) = bessel_integral(E(n), params);
    }
    const double eps2 = params.epsilon * params.epsilon;
    const CMatrix S = C1 * A1 + CL * AL;
    const CMatrix rhs = 0.25 * eps2 * (S + S.adjoint());
    const CMatrix X = solve_reduced_stationary(E, C1 + CL, B, rhs, eps2);

    out.rho_s = Phi * X * Phi.adjoint();
    out.bond_currents = bond_currents(out.rho_s, params.Js);
    out.current = mean_current(out.rho_s, params.Js);
    out.residual = (reduced_operator(E, C1 + CL, B, X, eps2) - rhs).cwiseAbs().maxCoeff();
    return out;
}

LinearResponseMatrices linear_response_matrices(const ModelParams& params, double mu) {
    require_gamma(params);
    const auto chain = chain_eigensystem(params);
    const int L = params.L;
    LinearResponseMatrices m;
    m.E = chain.values;
    m.Phi = chain.vectors;
    m.C1 = site_projector_in_eigenbasis(m.Phi, 0);
    m.CL = site_projector_in_eigenbasis(m.Phi, L - 1);
    m.d_mu = std::abs(mu) == std::abs(params.Jr) ? 0.0 : contact_dos(mu, params.Jr);
    m.A = CMatrix::Zero(L, L);
    m.B = CMatrix::Zero(L, L);
    for (int n = 0; n < L; ++n) {
        // the kappa integral of the occupation step gives d(mu) / Jr per unit bias
        m.A(n, n) = (m.d_mu / params.Jr) / cplx{0.5 * params.gamma, mu - m.E(n)};
        m.B(n, n) = bessel_integral(m.E(n), params);
    }
    return m;
}

LinearResponseResult linear_response_stationary(const ModelParams& params, double mu) {
    require_gamma(params);
    params.validate();
    LinearResponseResult out;
    out.rho1 = CMatrix::Zero(params.L, params.L);
    if (std::abs(mu) >= std::abs(params.Jr)) {
        out.in_band = false;
        return out;
    }
    if (params.epsilon == 0.0) return out;
    const LinearResponseMatrices m = linear_response_matrices(params, mu);
    const double eps2 = params.epsilon * params.epsilon;
    const CMatrix S = m.C1 * m.A;
    const CMatrix rhs = 0.25 * eps2 * (S + S.adjoint());
    const CMatrix X = solve_reduced_stationary(m.E, m.C1 + m.CL, m.B, rhs, eps2);
    out.rho1 = m.Phi * X * m.Phi.adjoint();
    return out;
}

double conductance_current(const CMatrix& rho1, double delta_mu, const ModelParams& params) {
    return delta_mu * (current_operator(params.L, params.Js) * rho1).trace().real();
}

} // namespace ringtransport
