// ringtransport - command-line front end
//
// Exit codes: 0 success, 1 configuration error, 2 non-converged point with --strict,
// 3 numerical failure (including a failed oracle check).

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include "ringtransport/fock.hpp"
#include "ringtransport/markov.hpp"
#include "ringtransport/small_gamma.hpp"
#include "ringtransport/sweep.hpp"

using namespace ringtransport;

namespace {

constexpr int kOk = 0;
constexpr int kConfig = 1;
constexpr int kNotConverged = 2;
constexpr int kNumerical = 3;

// Flag values captured per subcommand; applied over the config file after parsing.
struct Options {
    std::string config_file;
    bool strict = false;
    std::map<std::string, std::string> values;
};

void add_config_options(CLI::App* app, Options& opts) {
    app->add_option("-c,--config", opts.config_file, "configuration file (key = value lines)");
    app->add_flag("--strict", opts.strict, "exit with 2 if any point did not converge");
    const std::map<std::string, std::string> aliases = {
        {"sweep.methods", "--method,--methods"}, {"sweep.gamma", "--gamma"},
        {"sweep.kappa_F", "--kappa"},            {"sweep.delta_mu", "--delta-mu"},
        {"run.workers", "-j,--workers"},         {"output.csv", "-o,--output"},
        {"contact.beta", "--beta"},              {"model.epsilon", "--epsilon"},
    };
    for (const auto& key : config_keys()) {
        std::string names = "--" + key.name;
        if (auto it = aliases.find(key.name); it != aliases.end()) names += "," + it->second;
        std::string help = key.help;
        if (!key.default_value.empty()) help += " [" + key.default_value + "]";
        app->add_option(names, opts.values[key.name], help)->group("Configuration");
    }
}

SweepConfig load(CLI::App* app, const Options& opts) {
    ConfigMap map;
    if (!opts.config_file.empty()) map.merge_file(opts.config_file);
    for (const auto& key : config_keys())
        if (app->count("--" + key.name) > 0) map.set(key.name, opts.values.at(key.name));
    return resolve_config(map);
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

int report_point(const SweepConfig& c, bool strict, std::ostream& out, const std::string& spectral_csv) {
    if (c.methods.size() != 1 || c.gamma.size() != 1 || c.kappa_F.size() != 1)
        throw ConfigError("simulate takes one method, one gamma and one kappa_F");
    const Method method = c.methods.front();
    PointDetail detail;
    const SweepRecord r = evaluate_point(c, method, c.gamma.front(), c.kappa_F.front(), &detail);
    out << "method           " << r.method << "\n"
        << "gamma            " << fmt(r.gamma) << "\n"
        << "kappa_F / pi     " << fmt(r.kappa_F / kPi) << "\n"
        << "mu               " << fmt(r.mu) << "\n"
        << "delta_mu         " << fmt(r.delta_mu) << "\n"
        << "regime           "
        << regime_label(classify_regime(r.gamma, c.base.epsilon, c.base.Js)) << " (heuristic)\n";
    if (!r.error.empty()) {
        out << "error            " << r.error << "\n";
        return kNumerical;
    }
    out << "current          " << fmt(r.current) << "\n"
        << "converged        " << (r.converged ? "true" : "false") << "\n"
        << "residual         " << fmt(r.residual) << "\n"
        << "t_final          " << fmt(r.t_final) << "\n";
    if (detail.bond_currents.size() > 0) {
        out << "bond currents   ";
        for (Eigen::Index i = 0; i < detail.bond_currents.size(); ++i) out << ' ' << fmt(detail.bond_currents(i));
        out << "\n";
    }
    if (method != Method::NonMarkovAlgebraic && detail.rho_s.size() > 0) {
        out << "occupations     ";
        for (Eigen::Index i = 0; i < detail.rho_s.rows(); ++i) out << ' ' << fmt(detail.rho_s(i, i).real());
        out << "\n";
    }
    if (detail.spectrum) {
        out << "rho1 eigenvalues";
        for (Eigen::Index i = 0; i < detail.spectrum->values.size(); ++i)
            out << ' ' << fmt(detail.spectrum->values(i));
        out << "\nmax_eig_fraction " << fmt(detail.spectrum->purity) << "\n";
    }
    if (!spectral_csv.empty()) {
        const ModelParams p = point_params(c, r.gamma, r.kappa_F);
        const double eta = c.eta.value_or(default_broadening(p));
        std::vector<double> energies;
        const double span = 1.2 * (std::abs(p.Jr) + std::abs(p.Js));
        for (int i = 0; i <= 2000; ++i) energies.push_back(-span + 2.0 * span * i / 2000.0);
        const auto ldos = local_density_of_states(p, energies, eta);
        const auto jE = current_spectral_function(p, energies, eta);
        std::ofstream f(spectral_csv);
        if (!f) throw ConfigError("cannot write '" + spectral_csv + "'");
        f << "# eta = " << fmt(eta) << "\nenergy,ldos,current_density\n";
        for (std::size_t i = 0; i < energies.size(); ++i)
            f << fmt(energies[i]) << ',' << fmt(ldos[i]) << ',' << fmt(jE[i]) << "\n";
        out << "spectral data    " << spectral_csv << "\n";
    }
    return (strict && !r.converged) ? kNotConverged : kOk;
}

int finish_rows(const std::vector<SweepRecord>& rows, bool strict, double seconds) {
    std::size_t failed = 0, errors = 0;
    for (const auto& r : rows) {
        if (!r.converged) ++failed;
        if (!r.error.empty()) {
            ++errors;
            std::cerr << "point " << r.method << " gamma=" << fmt(r.gamma) << " kappa_F=" << fmt(r.kappa_F)
                      << ": " << r.error << "\n";
        }
    }
    std::cerr << rows.size() << " points, " << failed << " not converged (" << errors
              << " failed), " << fmt(seconds) << " s\n";
    return (strict && failed > 0) ? kNotConverged : kOk;
}

std::ostream& open_output(const std::string& path, std::unique_ptr<std::ofstream>& file) {
    if (path.empty() || path == "-") return std::cout;
    file = std::make_unique<std::ofstream>(path);
    if (!*file) throw ConfigError("cannot write '" + path + "'");
    return *file;
}

int run_sweep_cmd(const SweepConfig& c, bool strict) {
    const auto start = std::chrono::steady_clock::now();
    const auto rows = run_sweep(c, resolve_workers(c.workers));
    std::unique_ptr<std::ofstream> file;
    write_csv(open_output(c.csv_path, file), c, rows);
    if (!c.script_path.empty()) {
        std::ofstream s(c.script_path);
        if (!s) throw ConfigError("cannot write '" + c.script_path + "'");
        s << gnuplot_script(c.csv_path.empty() ? "sweep.csv" : c.csv_path);
    }
    return finish_rows(rows, strict,
                       std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
}

int run_compare_cmd(const SweepConfig& c, bool strict) {
    const auto start = std::chrono::steady_clock::now();
    const CompareReport rep = run_compare(c, resolve_workers(c.workers));
    std::unique_ptr<std::ofstream> file;
    write_compare(open_output(c.csv_path, file), rep);
    return finish_rows(rep.rows, strict,
                       std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
}

int run_peaks_cmd(const std::string& input, double fraction_flag, const std::string& output) {
    std::ifstream file;
    std::istream* in = &std::cin;
    if (input != "-") {
        file.open(input);
        if (!file) throw ConfigError("cannot read '" + input + "'");
        in = &file;
    }
    ConfigMap header;
    const auto rows = read_csv(*in, &header);
    const double fraction = fraction_flag >= 0.0 ? fraction_flag : std::stod(header.get("diagnostics.peak_fraction"));
    ModelParams p;
    p.L = std::stoi(header.get("model.L"));
    p.Js = std::stod(header.get("model.Js"));
    p.Jr = std::stod(header.get("model.Jr"));
    const RVector levels = chain_eigensystem(p).values;

    std::map<std::pair<std::string, double>, std::vector<const SweepRecord*>> series;
    for (const auto& r : rows) series[{r.method, r.gamma}].push_back(&r);

    std::unique_ptr<std::ofstream> outfile;
    std::ostream& out = open_output(output, outfile);
    out << "# peak prominence >= " << fmt(fraction) << " of the series range; levels of the isolated chain\n";
    out << "method,gamma,kappa_F,kappa_F_over_pi,mu,current,prominence,nearest_level,offset_in_grid_steps\n";
    for (const auto& [key, pts] : series) {
        std::vector<double> x, y;
        for (const SweepRecord* r : pts) {
            if (!std::isfinite(r->current)) continue;
            x.push_back(r->kappa_F);
            y.push_back(r->current);
        }
        if (x.size() < 5) {
            std::cerr << "skipping " << key.first << " gamma=" << fmt(key.second) << ": fewer than 5 samples\n";
            continue;
        }
        const double step = (x.back() - x.front()) / static_cast<double>(x.size() - 1);
        for (const Peak& pk : detect_peaks(x, y, fraction)) {
            const double mu = -p.Jr * std::cos(pk.x);
            Eigen::Index best = 0;
            (levels.array() - mu).abs().minCoeff(&best);
            // distance in kappa to the level's Fermi momentum
            const double kl = std::acos(std::clamp(-levels(best) / p.Jr, -1.0, 1.0));
            out << key.first << ',' << fmt(key.second) << ',' << fmt(pk.x) << ',' << fmt(pk.x / kPi) << ','
                << fmt(mu) << ',' << fmt(pk.value) << ',' << fmt(pk.prominence) << ','
                << fmt(levels(best)) << ',' << fmt((pk.x - kl) / step) << "\n";
        }
    }
    return kOk;
}

struct CheckLine {
    std::string name;
    double value;
    double limit;
};

int run_oracle_check(std::ostream& out) {
    std::vector<CheckLine> lines;
    {
        ModelParams p;
        p.L = 2;
        p.M = 3;
        p.epsilon = 0.4;
        p.gamma = 0.1;
        p = with_bias(p, 0.0, 0.2);
        p.left.beta = p.right.beta = InverseTemperature(0.0);
        const fock::OracleResult o = fock::fock_space_oracle(p);
        const CMatrix rho = FullDynamics(p).evolve(thermal_total_spdm(p), 50.0, 0.01);
        lines.push_back({"full SPDM vs many-body, L=2 M=3 beta=0, t=50", (rho - o.spdm).cwiseAbs().maxCoeff(), 1e-6});
        lines.push_back({"many-body trace", std::abs(o.trace - 1.0), 1e-10});
        lines.push_back({"many-body positivity (-min eigenvalue)", std::max(0.0, -o.min_eigenvalue), 1e-8});
        p.left.beta = p.right.beta = InverseTemperature(2.0);
        const fock::OracleResult o2 = fock::fock_space_oracle(p);
        const CMatrix rho2 = FullDynamics(p).evolve(thermal_total_spdm(p), 50.0, 0.01);
        lines.push_back({"full SPDM vs many-body, L=2 M=3 beta=2, t=50", (rho2 - o2.spdm).cwiseAbs().maxCoeff(), 1e-6});
    }
    for (double gt : {0.1, 1.0, 10.0}) {
        const MarkovChain chain{3, 1.0, gt, 0.6, 0.4};
        const CMatrix g = fock::open_chain_stationary_spdm(chain);
        lines.push_back({"open chain L=3 vs Markov SPDM, gamma_tilde=" + fmt(gt),
                         (g - stationary_markov(chain).rho_s).cwiseAbs().maxCoeff(), 1e-8});
    }
    bool ok = true;
    for (const auto& l : lines) {
        const bool pass = l.value <= l.limit;
        ok = ok && pass;
        out << (pass ? "PASS " : "FAIL ") << l.name << ": " << fmt(l.value) << " (limit " << fmt(l.limit) << ")\n";
    }
    return ok ? kOk : kNumerical;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Transport through a tight-binding chain between dissipative ring contacts"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("ringtransport ") + RINGTRANSPORT_VERSION);

    Options sim_opts, sweep_opts, cmp_opts;
    std::string spectral_csv;
    auto* simulate = app.add_subcommand("simulate", "evaluate one point with one method");
    add_config_options(simulate, sim_opts);
    simulate->add_option("--spectral-csv", spectral_csv,
                         "write the broadened LDOS and current spectral function of the total system");

    auto* sweep = app.add_subcommand("sweep", "evaluate a gamma x kappa_F grid and write CSV");
    add_config_options(sweep, sweep_opts);

    auto* compare = app.add_subcommand("compare", "relative deviations between methods");
    add_config_options(compare, cmp_opts);

    std::string peaks_input = "-";
    std::string peaks_output;
    double peaks_fraction = -1.0;
    auto* peaks = app.add_subcommand("peaks", "resonance peaks of each current series in a sweep CSV");
    peaks->add_option("input", peaks_input, "sweep CSV ('-' for stdin)");
    peaks->add_option("--fraction", peaks_fraction, "minimum prominence (default: from the CSV header)");
    peaks->add_option("-o,--output", peaks_output, "output path (default stdout)");

    auto* oracle = app.add_subcommand("oracle-check", "many-body equivalence checks on small systems");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    try {
        if (*simulate) return report_point(load(simulate, sim_opts), sim_opts.strict, std::cout, spectral_csv);
        if (*sweep) return run_sweep_cmd(load(sweep, sweep_opts), sweep_opts.strict);
        if (*compare) return run_compare_cmd(load(compare, cmp_opts), cmp_opts.strict);
        if (*peaks) return run_peaks_cmd(peaks_input, peaks_fraction, peaks_output);
        if (*oracle) return run_oracle_check(std::cout);
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kConfig;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kNumerical;
    }
    return kOk;
}
