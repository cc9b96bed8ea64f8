// small_gamma.hpp - spectral stationary solution of the uniformly relaxing model
//
// Approximates the full dynamics by d(rho)/dt = -i[H, rho] - gamma (rho - rho0),
// rho0 = thermal contacts plus an empty chain, solved in the eigenbasis of H.
#pragma once

#include <vector>

#include "ringtransport/model.hpp"

namespace ringtransport {

struct TotalSpectrum {
    RVector values;       // ascending
    RMatrix vectors;      // real orthonormal eigenvectors of the total Hamiltonian
    RMatrix chain_parts;  // L x dim, rows of `vectors` on the chain sites
};

TotalSpectrum total_spectrum(const ModelParams& params);

// Stationary total SPDM. rho_nm = gamma <n|rho0|m> / (gamma + i(E_n - E_m)) in the eigenbasis.
CMatrix stationary_spdm_smallgamma(const ModelParams& params);
CMatrix stationary_spdm_smallgamma(const ModelParams& params, const TotalSpectrum& spec);

// Spectral current sum. max_p < 0 keeps all offsets p = m - n; otherwise only 0 <= p <= max_p.
double current_smallgamma(const ModelParams& params, int max_p = -1);
double current_smallgamma(const ModelParams& params, const TotalSpectrum& spec, int max_p = -1);

// Level spacing scale 4 Jr / (2M + L).
double default_broadening(const ModelParams& params);

// sum_n L_eta(E - E_n) |<psi_n|j|psi_{n+1}>|, Lorentzian L_eta of half-width eta.
std::vector<double> current_spectral_function(const ModelParams& params,
                                              const std::vector<double>& energies, double eta);
// sum_n L_eta(E - E_n) <psi_n|psi_n>
std::vector<double> local_density_of_states(const ModelParams& params,
                                            const std::vector<double>& energies, double eta);

double lorentzian(double x, double eta);

} // namespace ringtransport
