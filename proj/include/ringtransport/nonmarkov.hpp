// nonmarkov.hpp - chain-only master equation with memory (contacts in the infinite-ring limit)
//
// d rho_s/dt = -i[H_s, rho_s] + eps^2 sum_l (L_l + L_l^dagger),
// L_l = (|l><l| / 4) int_{-t}^0 dtau e^{gamma tau / 2}
//       [JF_l(Jr tau) I - J0(Jr tau) rho_s(t + tau)] U_s(tau).
#pragma once

#include <cstddef>
#include <vector>

#include "ringtransport/full_dynamics.hpp"

namespace ringtransport {

// JF(Jr t) = (1/2pi) int dk exp(-i Jr cos(k) t) n(-Jr cos k) for one contact.
cplx kernel_jF(double t, const ContactSpec& contact, const ModelParams& params);

// JF at t = 0: band-averaged occupation of the contact.
double mean_filling(const ContactSpec& contact, const ModelParams& params);

// Jr / (pi sqrt(Jr^2 - mu^2)) inside the band, 0 outside; |mu| = |Jr| is rejected.
double contact_dos(double mu, double Jr);

// Kernels sampled on the uniform grid tau_i = i dt, i = 0..size-1.
class KernelTable {
public:
    KernelTable(const ModelParams& params, double dt, std::size_t size);

    double dt() const { return dt_; }
    std::size_t size() const { return J0_.size(); }
    double J0(std::size_t i) const { return J0_[i]; }
    // side 0: contact 1, side 1: contact L
    cplx JF(int side, std::size_t i) const { return side == 0 ? JF1_[i] : JFL_[i]; }
    const numerics::Spectrum& chain() const { return chain_; }
    // exp(-i H_s tau_i)
    CMatrix U_s(std::size_t i) const;

private:
    double dt_;
    std::vector<double> J0_;
    std::vector<cplx> JF1_;
    std::vector<cplx> JFL_;
    numerics::Spectrum chain_;
};

// Most recent `capacity` chain matrices; index 0 is the newest.
class HistoryBuffer {
public:
    HistoryBuffer(int L, std::size_t capacity);
    void push(const CMatrix& rho);
    std::size_t size() const { return size_; }
    std::size_t capacity() const { return capacity_; }
    Eigen::Map<const CMatrix> at(std::size_t k) const;

private:
    int L_;
    std::size_t capacity_;
    std::size_t size_ = 0;
    std::size_t head_ = 0;
    std::vector<cplx> data_;
};

struct NonMarkovSettings {
    double dt = 0.02;           // upper bound, as for the full dynamics
    double t_max = 5000.0;
    double tolerance = 1e-5;
    double window_factor = 10.0;
    double memory_cutoff = 1e-8;  // kernels are dropped once e^{-gamma tau / 2} falls below this
    double memory_scale = 1.0;    // multiplies the memory window
    std::size_t max_memory_samples = 5'000'000;
};

// min(requested, 0.02 / max(Js, Jr), 0.2 / gamma): resolves the band oscillation and the
// e^{-gamma s / 2} decay of the kernels on the history grid.
double nonmarkov_time_step(const ModelParams& params, double requested);

// Memory window 2 ln(1 / cutoff) / gamma, times memory_scale.
double memory_window(const ModelParams& params, const NonMarkovSettings& settings);

struct NonMarkovResult : StationaryResult {
    double hermiticity_drift = 0.0;
    std::size_t memory_samples = 0;
};

// Heun integration from rho_s = 0 with a trapezoid memory integral.
NonMarkovResult evolve_nonmarkov(const ModelParams& params, const NonMarkovSettings& settings = {},
                                 const TrajectorySink& sink = {});

// Exact t -> infinity fixed point of the same equation (kernels integrated analytically in time).
StationaryResult stationary_nonmarkov(const ModelParams& params);

// Linear response at zero temperature, all matrices in the chain eigenbasis.
struct LinearResponseMatrices {
    RVector E;     // chain eigenvalues
    CMatrix Phi;   // chain eigenvectors (columns)
    CMatrix A;     // diagonal
    CMatrix B;     // diagonal, Re B_nn >= 0
    CMatrix C1;
    CMatrix CL;
    double d_mu = 0.0;
};

LinearResponseMatrices linear_response_matrices(const ModelParams& params, double mu);

struct LinearResponseResult {
    CMatrix rho1;  // site basis
    bool in_band = true;
};

// Solves i[E, r] + (eps^2/4)[(C1 + CL) r B + h.c.] = (eps^2/4)(C1 A + h.c.).
// Outside the band the response vanishes and in_band is false.
LinearResponseResult linear_response_stationary(const ModelParams& params, double mu);

// delta_mu * Tr(j rho1)
double conductance_current(const CMatrix& rho1, double delta_mu, const ModelParams& params);

} // namespace ringtransport
