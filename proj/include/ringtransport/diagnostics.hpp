// diagnostics.hpp - transporting-state spectrum, peak finding, slope fits, regime labels
#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "ringtransport/model.hpp"

namespace ringtransport {

// One (method, gamma, kappa_F) result row. max_eig_fraction is NaN when not computed.
struct SweepRecord {
    std::string method;
    double gamma = 0.0;
    double kappa_F = 0.0;
    double mu = 0.0;
    double delta_mu = 0.0;
    double current = std::numeric_limits<double>::quiet_NaN();
    double max_eig_fraction = std::numeric_limits<double>::quiet_NaN();
    bool converged = false;
    double residual = std::numeric_limits<double>::quiet_NaN();
    double t_final = std::numeric_limits<double>::quiet_NaN();
    double runtime_seconds = 0.0;
    std::string error;  // not part of the CSV
};

struct TransportingSpectrum {
    RVector values;  // descending by magnitude
    double purity = 0.0;  // |lambda_max| / sum |lambda|
};

// Throws NumericalError if rho1 is not Hermitian to tol (relative to its largest entry).
TransportingSpectrum transporting_spectrum(const CMatrix& rho1, double tol = 1e-8);

struct Peak {
    std::size_t index = 0;  // sample index (middle of a flat top)
    double x = 0.0;
    double value = 0.0;
    double prominence = 0.0;
};

// Interior local maxima whose prominence is at least min_fraction of the series range.
// Runs of equal values count as one sample. Needs >= 5 samples with x ascending.
std::vector<Peak> detect_peaks(const std::vector<double>& x, const std::vector<double>& y,
                               double min_fraction = 0.1);

struct SlopeFit {
    double slope = 0.0;
    double std_error = 0.0;
    double intercept = 0.0;  // of log10 j against log10 gamma
    std::size_t points = 0;
};

// Least-squares slope of log j against log gamma over the samples with gamma in [lo, hi].
SlopeFit asymptotic_slope(const std::vector<double>& gamma, const std::vector<double>& current,
                          double lo, double hi);

// Heuristic regimes: III when gamma >= 5 eps (memoryless), I when gamma <= eps^2 / Js, else II.
enum class Regime { I, II, III };
Regime classify_regime(double gamma, double epsilon, double Js);
std::string regime_label(Regime r);

} // namespace ringtransport
