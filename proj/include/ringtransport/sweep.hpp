// sweep.hpp - grid evaluation across methods, CSV emission and method comparison
#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ringtransport/config.hpp"
#include "ringtransport/diagnostics.hpp"

namespace ringtransport {

// Extra output of a single point, for `simulate`.
struct PointDetail {
    CMatrix rho_s;
    RVector bond_currents;
    std::optional<TransportingSpectrum> spectrum;
};

// Model parameters of one grid point: gamma, mu = -Jr cos(kappa_F), symmetric bias.
ModelParams point_params(const SweepConfig& config, double gamma, double kappa_F);

// Never throws for numerical trouble: the error text goes to record.error, converged = false.
SweepRecord evaluate_point(const SweepConfig& config, Method method, double gamma, double kappa_F,
                           PointDetail* detail = nullptr);

// Rows sorted by (method name, gamma, kappa_F) whatever the scheduling.
std::vector<SweepRecord> run_sweep(const SweepConfig& config, int workers);

inline const char* kCsvColumns =
    "method,gamma,kappa_F,mu,delta_mu,current,max_eig_fraction,converged,residual,t_final,"
    "runtime_seconds";

void write_csv(std::ostream& out, const SweepConfig& config, const std::vector<SweepRecord>& rows);

// Parses rows written by write_csv; header comments "# key = value" go to header if given.
std::vector<SweepRecord> read_csv(std::istream& in, ConfigMap* header = nullptr);

std::string gnuplot_script(const std::string& csv_path);

struct Deviation {
    std::string method;
    double gamma = 0.0;
    double kappa_F = 0.0;
    double reference_current = 0.0;
    double current = 0.0;
    double relative = 0.0;  // |j - j_ref| / |j_ref|, NaN when either is missing
    std::string regime;
};

struct DeviationSummary {
    std::string method;
    double gamma = 0.0;
    double max = 0.0;
    double median = 0.0;
    std::string regime;
};

struct CompareReport {
    std::string reference;
    std::vector<SweepRecord> rows;
    std::vector<Deviation> deviations;
    std::vector<DeviationSummary> summary;
};

// Needs >= 2 methods. Duplicated methods are compared like distinct ones.
CompareReport run_compare(const SweepConfig& config, int workers);
void write_compare(std::ostream& out, const CompareReport& report);

} // namespace ringtransport
