// full_dynamics.hpp - exact single-particle dynamics of chain plus both contacts

#pragma once

#include <functional>
#include <limits>

#include <Eigen/Sparse>

#include "ringtransport/model.hpp"

namespace ringtransport {

// Total SPDM with block views addressed through BlockLayout.
class FullSPDM {
public:
    using Block = Eigen::Block<CMatrix>;
    using ConstBlock = Eigen::Block<const CMatrix>;

    FullSPDM(CMatrix matrix, BlockLayout layout);

    const CMatrix& matrix() const { return matrix_; }
    CMatrix& matrix() { return matrix_; }
    const BlockLayout& layout() const { return layout_; }

    ConstBlock contact1() const;
    ConstBlock chain() const;
    ConstBlock contactL() const;
    ConstBlock coherence1() const;      // rho_c1, M x L: <chain^dagger contact 1>
    ConstBlock coherenceL() const;      // rho_cL, M x L
    ConstBlock contact_contact() const; // rho_{r1 rL}, M x M
    Block chain();

private:
    CMatrix matrix_;
    BlockLayout layout_;
};

struct StationaryResult {
    CMatrix rho_s;
    double current = 0.0;
    RVector bond_currents;
    double t_final = 0.0;
    bool converged = false;
    double residual = std::numeric_limits<double>::quiet_NaN();
};

// Per-bond particle current Js * Im rho(l+1, l), l = 1..L-1, positive from site 1 towards L.
RVector bond_currents(const CMatrix& rho_s, double Js);

// Tr(J_op rho_s); equals the average of bond_currents.
double mean_current(const CMatrix& rho_s, double Js);

// -i[H, rho] + gamma P rho0 P - (gamma/2)(P rho + rho P), P projecting on all contact modes.
CMatrix full_rhs(const FullSPDM& rho, const OperatorSet& ops, const ModelParams& params);

struct EvolutionSettings {
    double dt = 0.02;          // upper bound; the step also respects 0.02 / max rate
    double t_max = 5000.0;
    double tolerance = 1e-5;   // relative spread of the current over the trailing window
    double window_factor = 10.0;
    double positivity_tol = 1e-6;
    int check_interval = 2000;  // steps between occupancy-bound checks
};

// Step size: min(0.02 / max(Js, Jr, gamma, gamma_tilde), requested).
double effective_time_step(const ModelParams& params, double requested);

// Trailing window over which stationarity of the current is judged:
// window_factor / min(gamma, gamma_tilde), ignoring vanishing rates.
double stationarity_window(const ModelParams& params, double window_factor);

struct TrajectorySample {
    double t;
    double current;
    double chain_trace;
};
using TrajectorySink = std::function<void(const TrajectorySample&)>;

// Sparse evaluation of full_rhs for time stepping.
class FullDynamics {
public:
    explicit FullDynamics(const ModelParams& params, bool right_attached = true);

    const OperatorSet& operators() const { return ops_; }
    const ModelParams& params() const { return params_; }

    CMatrix rhs(const CMatrix& rho) const;
    CMatrix initial_state() const;  // thermal contacts, empty chain, no coherences
    CMatrix evolve(CMatrix rho, double t_span, double dt) const;

private:
    ModelParams params_;
    OperatorSet ops_;
    Eigen::SparseMatrix<cplx, Eigen::RowMajor> H_sparse_;
    RVector contact_mask_;  // 1 on contact modes, 0 on chain sites
    CMatrix source_;        // gamma P rho0 P
};

// Integrates from the thermal initial state until the current is stationary.
// Returns converged = false when t_max is reached. Throws NumericalError on
// positivity violation beyond settings.positivity_tol.
StationaryResult evolve_to_stationary(const ModelParams& params, const EvolutionSettings& settings,
                                      const TrajectorySink& sink = {});

// Exact stationary state of the same equation from the Lyapunov form
// K rho + rho K^dagger = gamma P rho0 P with K = iH + (gamma/2) P. Requires gamma > 0.
StationaryResult solve_stationary_full(const ModelParams& params);

// Extreme eigenvalues of a Hermitian matrix (occupancy-bound checks).
std::pair<double, double> eigenvalue_range(const CMatrix& rho);

} // namespace ringtransport
