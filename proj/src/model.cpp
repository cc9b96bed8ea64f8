#include "ringtransport/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace ringtransport {

InverseTemperature::InverseTemperature(double beta) : infinite_(false), beta_(beta) {
    if (std::isinf(beta) && beta > 0) {
        infinite_ = true;
        beta_ = 0.0;
        return;
    }
    if (!(beta >= 0.0)) throw ConfigError("inverse temperature must be >= 0 or inf");
}

InverseTemperature InverseTemperature::parse(const std::string& text) {
    if (text == "inf" || text == "infinity" || text == "Inf") return infinite();
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &pos);
    } catch (const std::exception&) {
        throw ConfigError("cannot parse inverse temperature '" + text + "'");
    }
    if (pos != text.size()) throw ConfigError("cannot parse inverse temperature '" + text + "'");
    return InverseTemperature(v);
}

double InverseTemperature::value() const {
    if (infinite_) throw ConfigError("inverse temperature is infinite");
    return beta_;
}

std::string InverseTemperature::to_string() const {
    if (infinite_) return "inf";
    std::ostringstream out;
    out.precision(17);
    out << beta_;
    return out.str();
}

void ModelParams::validate(std::size_t max_dim) const {
    if (L < 2) throw ConfigError("model.L must be >= 2");
    if (M < 3) throw ConfigError("model.M must be >= 3");
    if (!(Js > 0.0)) throw ConfigError("model.Js must be > 0");
    if (!(Jr > 0.0)) throw ConfigError("model.Jr must be > 0");
    if (!(epsilon >= 0.0)) throw ConfigError("model.epsilon must be >= 0");
    if (!(gamma >= 0.0)) throw ConfigError("model.gamma must be >= 0");
    if (!std::isfinite(left.mu) || !std::isfinite(right.mu))
        throw ConfigError("contact chemical potentials must be finite");
    const std::size_t dim = 2 * static_cast<std::size_t>(M) + static_cast<std::size_t>(L);
    if (dim > max_dim) {
        std::ostringstream msg;
        msg << "single-particle dimension " << dim << " exceeds cap " << max_dim;
        throw ConfigError(msg.str());
    }
}

ModelParams ModelParams::standard() {
    return ModelParams{};
}

CMatrix chain_hamiltonian(int L, double Js) {
    CMatrix H = CMatrix::Zero(L, L);
    for (int l = 0; l + 1 < L; ++l) {
        H(l + 1, l) = -0.5 * Js;
        H(l, l + 1) = -0.5 * Js;
    }
    return H;
}

CMatrix current_operator(int L, double Js) {
    CMatrix J = CMatrix::Zero(L, L);
    // -(Js / 2i) = i Js / 2
    const cplx pref = kI * (0.5 * Js / (L - 1));
    for (int l = 0; l + 1 < L; ++l) {
        J(l + 1, l) = pref;
        J(l, l + 1) = -pref;
    }
    return J;
}

namespace {

// cos(2 pi k / M), exact at multiples of a quarter turn so that Fermi-edge
// modes are detected without round-off.
double cos_turn_fraction(int k, int M) {
    long kk = ((static_cast<long>(k) % M) + M) % M;
    kk = std::min(kk, M - kk);  // degenerate partners k, M - k get identical energies
    if ((4 * kk) % M == 0) {
        switch ((4 * kk) / M) {
        case 0: return 1.0;
        case 1: return 0.0;
        case 2: return -1.0;
        case 3: return 0.0;
        default: break;
        }
    }
    return std::cos(2.0 * kPi * static_cast<double>(kk) / M);
}

} // namespace

double ring_mode_energy(int k, int M, double Jr) {
    return -Jr * cos_turn_fraction(k, M);
}

double fermi_function(double energy, const ContactSpec& contact) {
    const double x = contact.mu - energy;  // J_r cos + mu
    if (contact.beta.is_infinite()) {
        if (x > 0.0) return 1.0;
        if (x < 0.0) return 0.0;
        return 0.5;
    }
    const double bx = contact.beta.value() * x;
    // 1 / (exp(-bx) + 1), evaluated without overflow
    if (bx >= 0.0) return 1.0 / (std::exp(-bx) + 1.0);
    const double e = std::exp(bx);
    return e / (1.0 + e);
}

double fermi_occupation(int k, const ContactSpec& contact, const ModelParams& params) {
    if (k < 1 || k > params.M) throw ConfigError("fermi_occupation: mode index out of range");
    return fermi_function(ring_mode_energy(k, params.M, params.Jr), contact);
}

CMatrix thermal_contact_spdm(const ContactSpec& contact, const ModelParams& params) {
    CMatrix rho = CMatrix::Zero(params.M, params.M);
    for (int k = 1; k <= params.M; ++k) rho(k - 1, k - 1) = fermi_occupation(k, contact, params);
    return rho;
}

CMatrix thermal_total_spdm(const ModelParams& params, bool right_attached) {
    const BlockLayout layout = BlockLayout::of(params, right_attached);
    CMatrix rho = CMatrix::Zero(layout.dim(), layout.dim());
    rho.block(layout.contact1_offset(), layout.contact1_offset(), params.M, params.M) =
        thermal_contact_spdm(params.left, params);
    if (right_attached)
        rho.block(layout.contactL_offset(), layout.contactL_offset(), params.M, params.M) =
            thermal_contact_spdm(params.right, params);
    return rho;
}

OperatorSet build_operators(const ModelParams& params, bool right_attached, std::size_t max_dim) {
    params.validate(max_dim);
    OperatorSet ops;
    ops.layout = BlockLayout::of(params, right_attached);
    const int M = params.M;
    const int L = params.L;

    ops.H_s = chain_hamiltonian(L, params.Js);
    ops.H_r = CMatrix::Zero(M, M);
    for (int k = 1; k <= M; ++k) ops.H_r(k - 1, k - 1) = ring_mode_energy(k, M, params.Jr);

    const double v = 1.0 / (2.0 * std::sqrt(static_cast<double>(M)));
    ops.V_1 = CMatrix::Zero(M, L);
    ops.V_L = CMatrix::Zero(M, L);
    ops.V_1.col(0).setConstant(v);
    ops.V_L.col(L - 1).setConstant(v);

    const BlockLayout& lay = ops.layout;
    ops.H_total = CMatrix::Zero(lay.dim(), lay.dim());
    ops.H_total.block(lay.contact1_offset(), lay.contact1_offset(), M, M) = ops.H_r;
    ops.H_total.block(lay.chain_offset(), lay.chain_offset(), L, L) = ops.H_s;
    ops.H_total.block(lay.contact1_offset(), lay.chain_offset(), M, L) = params.epsilon * ops.V_1;
    ops.H_total.block(lay.chain_offset(), lay.contact1_offset(), L, M) =
        params.epsilon * ops.V_1.adjoint();
    if (right_attached) {
        ops.H_total.block(lay.contactL_offset(), lay.contactL_offset(), M, M) = ops.H_r;
        ops.H_total.block(lay.contactL_offset(), lay.chain_offset(), M, L) =
            params.epsilon * ops.V_L;
        ops.H_total.block(lay.chain_offset(), lay.contactL_offset(), L, M) =
            params.epsilon * ops.V_L.adjoint();
    }
    ops.J_op = current_operator(L, params.Js);
    return ops;
}

numerics::Spectrum chain_eigensystem(const ModelParams& params) {
    if (params.L < 2) throw ConfigError("chain_eigensystem: L must be >= 2");
    return numerics::hermitian_eigendecomposition(chain_hamiltonian(params.L, params.Js));
}

FermiLevel kappa_to_mu(double kappa_F, double Jr, int M) {
    if (!(kappa_F >= 0.0 && kappa_F <= kPi)) throw ConfigError("kappa_F must lie in [0, pi]");
    if (M < 1) throw ConfigError("kappa_to_mu: M must be positive");
    return {-Jr * std::cos(kappa_F), Jr * std::sin(kappa_F) * (2.0 * kPi / M)};
}

ModelParams with_bias(ModelParams params, double mu, double delta_mu, BiasSplit split) {
    if (split == BiasSplit::Symmetric) {
        params.left.mu = mu + 0.5 * delta_mu;
        params.right.mu = mu - 0.5 * delta_mu;
    } else {
        params.left.mu = mu + delta_mu;
        params.right.mu = mu;
    }
    return params;
}

} // namespace ringtransport
