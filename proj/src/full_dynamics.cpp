#include "ringtransport/full_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>
#include <vector>

#include <Eigen/Eigenvalues>

namespace ringtransport {

FullSPDM::FullSPDM(CMatrix matrix, BlockLayout layout)
    : matrix_(std::move(matrix)), layout_(layout) {
    if (matrix_.rows() != layout_.dim() || matrix_.cols() != layout_.dim())
        throw ConfigError("FullSPDM: matrix does not match layout");
}

FullSPDM::ConstBlock FullSPDM::contact1() const {
    const int o = layout_.contact1_offset();
    return matrix_.block(o, o, layout_.M, layout_.M);
}

FullSPDM::ConstBlock FullSPDM::chain() const {
    const int o = layout_.chain_offset();
    return matrix_.block(o, o, layout_.L, layout_.L);
}

FullSPDM::Block FullSPDM::chain() {
    const int o = layout_.chain_offset();
    return matrix_.block(o, o, layout_.L, layout_.L);
}

FullSPDM::ConstBlock FullSPDM::contactL() const {
    if (!layout_.right_attached) throw ConfigError("FullSPDM: right contact detached");
    const int o = layout_.contactL_offset();
    return matrix_.block(o, o, layout_.M, layout_.M);
}

FullSPDM::ConstBlock FullSPDM::coherence1() const {
    return matrix_.block(layout_.contact1_offset(), layout_.chain_offset(), layout_.M, layout_.L);
}

FullSPDM::ConstBlock FullSPDM::coherenceL() const {
    if (!layout_.right_attached) throw ConfigError("FullSPDM: right contact detached");
    return matrix_.block(layout_.contactL_offset(), layout_.chain_offset(), layout_.M, layout_.L);
}

FullSPDM::ConstBlock FullSPDM::contact_contact() const {
    if (!layout_.right_attached) throw ConfigError("FullSPDM: right contact detached");
    return matrix_.block(layout_.contact1_offset(), layout_.contactL_offset(), layout_.M,
                         layout_.M);
}

RVector bond_currents(const CMatrix& rho_s, double Js) {
    const Eigen::Index L = rho_s.rows();
    RVector out(std::max<Eigen::Index>(L - 1, 0));
    for (Eigen::Index l = 0; l + 1 < L; ++l) out(l) = Js * rho_s(l + 1, l).imag();
    return out;
}

double mean_current(const CMatrix& rho_s, double Js) {
    const int L = static_cast<int>(rho_s.rows());
    return (current_operator(L, Js) * rho_s).trace().real();
}

namespace {

RVector contact_mask(const BlockLayout& lay) {
    RVector mask = RVector::Zero(lay.dim());
    mask.segment(lay.contact1_offset(), lay.M).setOnes();
    if (lay.right_attached) mask.segment(lay.contactL_offset(), lay.M).setOnes();
    return mask;
}

// gamma P rho0 P - (gamma/2)(P rho + rho P), with P = diag(mask).
void add_dissipator(CMatrix& out, const CMatrix& rho, const RVector& mask, const CMatrix& source,
                    double gamma) {
    const Eigen::Index n = rho.rows();
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
            out(i, j) -= 0.5 * gamma * (mask(i) + mask(j)) * rho(i, j);
    out += source;
}

} // namespace

CMatrix full_rhs(const FullSPDM& rho, const OperatorSet& ops, const ModelParams& params) {
    const CMatrix& r = rho.matrix();
    if (r.rows() != ops.H_total.rows() || r.cols() != ops.H_total.cols())
        throw ConfigError("full_rhs: dimension mismatch");
    CMatrix out = -kI * (ops.H_total * r - r * ops.H_total);
    const RVector mask = contact_mask(ops.layout);
    const CMatrix source =
        params.gamma * thermal_total_spdm(params, ops.layout.right_attached);
    add_dissipator(out, r, mask, source, params.gamma);
    return out;
}

double effective_time_step(const ModelParams& params, double requested) {
    double rate = std::max(params.Js, params.Jr);
    rate = std::max(rate, params.gamma);
    if (params.gamma > 0.0) rate = std::max(rate, params.epsilon * params.epsilon / params.gamma);
    return std::min(0.02 / rate, requested);
}

double stationarity_window(const ModelParams& params, double window_factor) {
    double slowest = std::numeric_limits<double>::infinity();
    if (params.gamma > 0.0) {
        slowest = params.gamma;
        const double gt = params.epsilon * params.epsilon / params.gamma;
        if (gt > 0.0) slowest = std::min(slowest, gt);
    }
    if (!std::isfinite(slowest)) return std::numeric_limits<double>::infinity();
    return window_factor / slowest;
}

FullDynamics::FullDynamics(const ModelParams& params, bool right_attached)
    : params_(params), ops_(build_operators(params, right_attached)) {
    H_sparse_ = ops_.H_total.sparseView(1.0, 0.0);
    H_sparse_.makeCompressed();
    contact_mask_ = contact_mask(ops_.layout);
    source_ = params_.gamma * thermal_total_spdm(params_, right_attached);
}

CMatrix FullDynamics::rhs(const CMatrix& rho) const {
    // rho and H are Hermitian, so rho H = (H rho)^dagger.
    const CMatrix X = H_sparse_ * rho;
    CMatrix out = -kI * (X - X.adjoint());
    add_dissipator(out, rho, contact_mask_, source_, params_.gamma);
    return out;
}

CMatrix FullDynamics::initial_state() const {
    return thermal_total_spdm(params_, ops_.layout.right_attached);
}

CMatrix FullDynamics::evolve(CMatrix rho, double t_span, double dt) const {
    if (t_span <= 0.0) return rho;
    const auto steps = static_cast<long>(std::ceil(t_span / dt - 1e-9));
    const double h = t_span / static_cast<double>(steps);
    auto f = [this](double, const CMatrix& y) { return rhs(y); };
    double t = 0.0;
    for (long s = 0; s < steps; ++s) {
        rho = numerics::rk4_step(f, rho, t, h);
        t += h;
    }
    return rho;
}

std::pair<double, double> eigenvalue_range(const CMatrix& rho) {
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(rho, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw NumericalError("eigenvalue_range: eigensolver failed");
    return {solver.eigenvalues().minCoeff(), solver.eigenvalues().maxCoeff()};
}

namespace {

StationaryResult finish(const CMatrix& rho_s, const ModelParams& params) {
    StationaryResult out;
    out.rho_s = rho_s;
    out.bond_currents = bond_currents(rho_s, params.Js);
    out.current = mean_current(rho_s, params.Js);
    return out;
}

void check_occupancy(const CMatrix& rho, double tol, double t) {
    const auto [lo, hi] = eigenvalue_range(rho);
    if (lo < -tol || hi > 1.0 + tol) {
        std::ostringstream msg;
        msg << "occupancy bounds violated at t = " << t << " (eigenvalues in [" << lo << ", "
            << hi << "])";
        throw NumericalError(msg.str());
    }
}

} // namespace

StationaryResult evolve_to_stationary(const ModelParams& params,
                                      const EvolutionSettings& settings,
                                      const TrajectorySink& sink) {
    const FullDynamics dyn(params);
    const BlockLayout lay = dyn.operators().layout;
    const double dt = effective_time_step(params, settings.dt);
    const double window = stationarity_window(params, settings.window_factor);
    const double sample_dt = std::isfinite(window) ? std::max(dt, window / 200.0) : 100.0 * dt;
    const long sample_stride = std::max(1L, static_cast<long>(std::llround(sample_dt / dt)));

    CMatrix rho = dyn.initial_state();
    auto f = [&dyn](double, const CMatrix& y) { return dyn.rhs(y); };
    auto chain_of = [&lay](const CMatrix& r) {
        return CMatrix(r.block(lay.chain_offset(), lay.chain_offset(), lay.L, lay.L));
    };

    std::deque<std::pair<double, double>> samples;
    double t = 0.0;
    long step = 0;
    bool converged = false;
    double residual = std::numeric_limits<double>::infinity();

    while (t < settings.t_max) {
        rho = numerics::rk4_step(f, rho, t, dt);
        ++step;
        t = step * dt;
        if (settings.check_interval > 0 && step % settings.check_interval == 0)
            check_occupancy(rho, settings.positivity_tol, t);
        if (step % sample_stride != 0) continue;

        const CMatrix rs = chain_of(rho);
        const double j = mean_current(rs, params.Js);
        if (sink) sink({t, j, rs.trace().real()});
        samples.emplace_back(t, j);
        while (!samples.empty() && samples.front().first < t - window) samples.pop_front();
        if (t >= window) {
            double lo = j;
            double hi = j;
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
    check_occupancy(rho, settings.positivity_tol, t);
    StationaryResult out = finish(chain_of(rho), params);
    out.t_final = t;
    out.converged = converged;
    out.residual = residual;
    return out;
}

namespace {

// Contact modes k and M - k are degenerate and share the thermal occupation, so
// only their symmetric combination couples to the chain; the antisymmetric
// combination stays at its thermal value and has no coherence with anything.
// This builds H, rho0 and the contact mask restricted to the coupled subspace,
// ordered (contact 1 | chain | contact L).
struct CoupledSubspace {
    CMatrix H;
    RVector rho0;
    RVector mask;
    int chain_offset = 0;
};

CoupledSubspace coupled_subspace(const ModelParams& p) {
    const double v = p.epsilon / (2.0 * std::sqrt(static_cast<double>(p.M)));
    struct Mode {
        int k;
        double weight;  // 1 for unpaired modes, sqrt(2) for symmetric pairs
    };
    std::vector<Mode> modes;
    for (int k = 1; 2 * k <= p.M; ++k) {
        const bool paired = (2 * k != p.M);
        modes.push_back({k, paired ? std::sqrt(2.0) : 1.0});
    }
    modes.push_back({p.M, 1.0});

    const int nc = static_cast<int>(modes.size());
    const int dim = 2 * nc + p.L;
    CoupledSubspace out;
    out.chain_offset = nc;
    out.H = CMatrix::Zero(dim, dim);
    out.rho0 = RVector::Zero(dim);
    out.mask = RVector::Zero(dim);
    out.H.block(nc, nc, p.L, p.L) = chain_hamiltonian(p.L, p.Js);
    for (int side = 0; side < 2; ++side) {
        const int off = side == 0 ? 0 : nc + p.L;
        const int site = side == 0 ? nc : nc + p.L - 1;
        const ContactSpec& c = side == 0 ? p.left : p.right;
        for (int i = 0; i < nc; ++i) {
            out.H(off + i, off + i) = ring_mode_energy(modes[i].k, p.M, p.Jr);
            out.H(off + i, site) = v * modes[i].weight;
            out.H(site, off + i) = v * modes[i].weight;
            out.rho0(off + i) = fermi_occupation(modes[i].k, c, p);
            out.mask(off + i) = 1.0;
        }
    }
    return out;
}

} // namespace

StationaryResult solve_stationary_full(const ModelParams& params) {
    if (!(params.gamma > 0.0))
        throw ConfigError("stationary solve of the full dynamics requires gamma > 0");
    params.validate();
    const CoupledSubspace sys = coupled_subspace(params);
    const int dim = static_cast<int>(sys.H.rows());

    CMatrix rho = CMatrix::Zero(dim, dim);
    double residual = 0.0;
    if (params.epsilon == 0.0) {
        // Decoupled chain keeps its (empty) initial state.
        rho.diagonal() = sys.rho0.cast<cplx>();
    } else {
        CMatrix K = kI * sys.H;
        K.diagonal() += (0.5 * params.gamma) * sys.mask.cast<cplx>();
        CMatrix Q = CMatrix::Zero(dim, dim);
        Q.diagonal() = (params.gamma * sys.rho0).cast<cplx>();
        rho = numerics::solve_lyapunov(K, Q);
        rho = 0.5 * (rho + rho.adjoint()).eval();
        residual = (K * rho + rho * K.adjoint() - Q).cwiseAbs().maxCoeff();
    }
    StationaryResult out =
        finish(CMatrix(rho.block(sys.chain_offset, sys.chain_offset, params.L, params.L)), params);
    out.t_final = std::numeric_limits<double>::infinity();
    out.converged = true;
    out.residual = residual;
    return out;
}

} // namespace ringtransport
