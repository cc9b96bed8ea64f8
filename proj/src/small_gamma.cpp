#include "ringtransport/small_gamma.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace ringtransport {

namespace {

void require_gamma(const ModelParams& p) {
    if (!(p.gamma > 0.0)) throw ConfigError("small-gamma solution requires gamma > 0");
}

// rho0 in the eigenbasis: V^T diag(n) V, n the contact occupations (chain empty).
RMatrix source_in_eigenbasis(const ModelParams& p, const TotalSpectrum& s) {
    const CMatrix rho0 = thermal_total_spdm(p);
    const RVector occ = rho0.diagonal().real();
    return s.vectors.transpose() * occ.asDiagonal() * s.vectors;
}

CMatrix eigenbasis_spdm(const ModelParams& p, const TotalSpectrum& s) {
    const RMatrix src = source_in_eigenbasis(p, s);
    const Eigen::Index n = src.rows();
    CMatrix out(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
            out(i, j) = p.gamma * src(i, j) / cplx{p.gamma, s.values(i) - s.values(j)};
    return out;
}

} // namespace

TotalSpectrum total_spectrum(const ModelParams& params) {
    const OperatorSet ops = build_operators(params);
    const RMatrix H = ops.H_total.real();
    Eigen::SelfAdjointEigenSolver<RMatrix> solver(H);
    if (solver.info() != Eigen::Success) throw NumericalError("total_spectrum: eigensolver failed");
    TotalSpectrum s;
    s.values = solver.eigenvalues();
    s.vectors = solver.eigenvectors();
    s.chain_parts = s.vectors.middleRows(ops.layout.chain_offset(), params.L);
    return s;
}

CMatrix stationary_spdm_smallgamma(const ModelParams& params) {
    require_gamma(params);
    return stationary_spdm_smallgamma(params, total_spectrum(params));
}

CMatrix stationary_spdm_smallgamma(const ModelParams& params, const TotalSpectrum& spec) {
    require_gamma(params);
    const CMatrix rt = eigenbasis_spdm(params, spec);
    const CMatrix V = spec.vectors.cast<cplx>();
    CMatrix rho = V * rt * V.adjoint();
    return 0.5 * (rho + rho.adjoint());
}

double current_smallgamma(const ModelParams& params, int max_p) {
    require_gamma(params);
    return current_smallgamma(params, total_spectrum(params), max_p);
}

double current_smallgamma(const ModelParams& params, const TotalSpectrum& spec, int max_p) {
    require_gamma(params);
    const CMatrix rt = eigenbasis_spdm(params, spec);
    const CMatrix psi = spec.chain_parts.cast<cplx>();
    // jm(m, n) = <psi_m| j |psi_n>
    const CMatrix jm = psi.adjoint() * current_operator(params.L, params.Js) * psi;
    const Eigen::Index n = rt.rows();
    const Eigen::Index pmax = max_p < 0 ? n - 1 : std::min<Eigen::Index>(max_p, n - 1);
    double diag = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) diag += (rt(k, k) * jm(k, k)).real();
    double off = 0.0;
    for (Eigen::Index p = 1; p <= pmax; ++p)
        for (Eigen::Index k = 0; k + p < n; ++k) off += (rt(k, k + p) * jm(k + p, k)).real();
    return diag + 2.0 * off;
}

double default_broadening(const ModelParams& params) {
    return 4.0 * params.Jr / (2.0 * params.M + params.L);
}

double lorentzian(double x, double eta) { return eta / (kPi * (x * x + eta * eta)); }

std::vector<double> current_spectral_function(const ModelParams& params,
                                              const std::vector<double>& energies, double eta) {
    if (!(eta > 0.0)) throw ConfigError("broadening must be positive");
    const TotalSpectrum s = total_spectrum(params);
    const CMatrix psi = s.chain_parts.cast<cplx>();
    const CMatrix J = current_operator(params.L, params.Js);
    const Eigen::Index n = s.values.size();
    std::vector<double> weight(static_cast<std::size_t>(n), 0.0);
    for (Eigen::Index k = 0; k + 1 < n; ++k)
        weight[k] = std::abs((psi.col(k).adjoint() * J * psi.col(k + 1))(0, 0));
    std::vector<double> out(energies.size(), 0.0);
    for (std::size_t e = 0; e < energies.size(); ++e)
        for (Eigen::Index k = 0; k < n; ++k)
            out[e] += lorentzian(energies[e] - s.values(k), eta) * weight[k];
    return out;
}

std::vector<double> local_density_of_states(const ModelParams& params,
                                            const std::vector<double>& energies, double eta) {
    if (!(eta > 0.0)) throw ConfigError("broadening must be positive");
    const TotalSpectrum s = total_spectrum(params);
    const RVector norms = s.chain_parts.colwise().squaredNorm();
    std::vector<double> out(energies.size(), 0.0);
    for (std::size_t e = 0; e < energies.size(); ++e)
        for (Eigen::Index k = 0; k < norms.size(); ++k)
            out[e] += lorentzian(energies[e] - s.values(k), eta) * norms(k);
    return out;
}

} // namespace ringtransport
