#include "ringtransport/markov.hpp"

#include <limits>

#include "ringtransport/nonmarkov.hpp"

namespace ringtransport {

double effective_rate(double epsilon, double gamma) {
    if (!(gamma > 0.0)) throw ConfigError("effective_rate: gamma must be positive");
    return epsilon * epsilon / gamma;
}

bool markov_regime(double epsilon, double gamma) { return gamma >= 5.0 * epsilon; }

MarkovChain markov_chain(const ModelParams& params) {
    params.validate();
    MarkovChain c;
    c.L = params.L;
    c.Js = params.Js;
    c.gamma_tilde = effective_rate(params.epsilon, params.gamma);
    c.n1 = mean_filling(params.left, params);
    c.nL = mean_filling(params.right, params);
    return c;
}

namespace {

void check(const MarkovChain& c) {
    if (c.L < 2) throw ConfigError("Markov chain needs L >= 2");
    if (!(c.gamma_tilde > 0.0)) throw ConfigError("Markov chain needs a positive effective rate");
}

} // namespace

CMatrix markov_rhs(const CMatrix& rho, const MarkovChain& c) {
    check(c);
    const CMatrix H = chain_hamiltonian(c.L, c.Js);
    CMatrix out = -kI * (H * rho - rho * H);
    const int ends[2] = {0, c.L - 1};
    const double fill[2] = {c.n1, c.nL};
    for (int e = 0; e < 2; ++e) {
        const int l = ends[e];
        out.row(l) -= 0.5 * c.gamma_tilde * rho.row(l);
        out.col(l) -= 0.5 * c.gamma_tilde * rho.col(l);
        out(l, l) += c.gamma_tilde * fill[e];
    }
    return out;
}

StationaryResult stationary_markov(const MarkovChain& c) {
    check(c);
    // rhs is affine: rhs(rho) = S(rho) + source with source = rhs(0)
    const CMatrix zero = CMatrix::Zero(c.L, c.L);
    const CMatrix source = markov_rhs(zero, c);
    auto apply = [&](const CMatrix& X) { return CMatrix(markov_rhs(X, c) - source); };
    CMatrix rho = numerics::solve_matrix_equation(apply, CMatrix(-source));
    rho = 0.5 * (rho + rho.adjoint()).eval();

    StationaryResult out;
    out.rho_s = rho;
    out.bond_currents = bond_currents(rho, c.Js);
    out.current = mean_current(rho, c.Js);
    out.t_final = std::numeric_limits<double>::infinity();
    out.converged = true;
    out.residual = markov_rhs(rho, c).cwiseAbs().maxCoeff();
    return out;
}

StationaryResult stationary_markov(const ModelParams& params) {
    return stationary_markov(markov_chain(params));
}

double closed_form_current(const MarkovChain& c) {
    check(c);
    const double js2 = c.Js * c.Js;
    const double g = c.gamma_tilde;
    return js2 * g / (js2 + g * g) * (c.n1 - c.nL) / 2.0;
}

double closed_form_current(const ModelParams& params) {
    return closed_form_current(markov_chain(params));
}

} // namespace ringtransport
