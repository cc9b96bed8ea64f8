#include "ringtransport/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <thread>

#include "ringtransport/fock.hpp"
#include "ringtransport/markov.hpp"
#include "ringtransport/small_gamma.hpp"

#ifndef RINGTRANSPORT_VERSION
#define RINGTRANSPORT_VERSION "dev"
#endif

namespace ringtransport {

ModelParams point_params(const SweepConfig& config, double gamma, double kappa_F) {
    const FermiLevel level = kappa_to_mu(kappa_F, config.base.Jr, config.base.M);
    const double dmu = config.fixed_delta_mu.value_or(level.delta_mu);
    ModelParams p = with_bias(config.base, level.mu, dmu);
    p.gamma = gamma;
    return p;
}

namespace {

// Chain SPDM and bookkeeping of one stationary solve.
struct Solve {
    CMatrix rho_s;
    bool converged = true;
    double residual = std::numeric_limits<double>::quiet_NaN();
    double t_final = std::numeric_limits<double>::infinity();
};

Solve from(const StationaryResult& r) { return {r.rho_s, r.converged, r.residual, r.t_final}; }

Solve solve(const SweepConfig& c, Method method, const ModelParams& p) {
    switch (method) {
    case Method::Full:
        if (c.full_evolve) return from(evolve_to_stationary(p, c.evolution));
        return from(solve_stationary_full(p));
    case Method::SmallGamma: {
        const CMatrix total = stationary_spdm_smallgamma(p);
        return {total.block(p.M, p.M, p.L, p.L), true};
    }
    case Method::NonMarkov:
        if (c.nonmarkov_evolve) return from(evolve_nonmarkov(p, c.nonmarkov));
        return from(stationary_nonmarkov(p));
    case Method::Markov:
        return from(stationary_markov(p));
    case Method::Oracle: {
        return from(fock::fock_space_oracle(p, c.oracle));
    }
    case Method::NonMarkovAlgebraic:
        break;
    }
    throw ConfigError("solve: method has no stationary state");
}

bool has_equilibrium_reference(const SweepConfig& c, Method m) {
    switch (m) {
    case Method::Full: return !c.full_evolve;
    case Method::NonMarkov: return !c.nonmarkov_evolve;
    case Method::SmallGamma:
    case Method::Markov: return true;
    default: return false;
    }
}

void fill(SweepRecord& rec, const SweepConfig& c, Method method, const ModelParams& p,
          PointDetail* detail) {
    const double mu = 0.5 * (p.left.mu + p.right.mu);
    const double dmu = p.left.mu - p.right.mu;
    rec.mu = mu;
    rec.delta_mu = dmu;

    if (method == Method::NonMarkovAlgebraic) {
        const LinearResponseResult lr = linear_response_stationary(p, mu);
        rec.current = conductance_current(lr.rho1, dmu, p);
        rec.converged = true;
        rec.t_final = std::numeric_limits<double>::infinity();
        if (c.transporting_state && lr.in_band && lr.rho1.cwiseAbs().maxCoeff() > 0.0) {
            const TransportingSpectrum ts = transporting_spectrum(lr.rho1);
            rec.max_eig_fraction = ts.purity;
            if (detail) detail->spectrum = ts;
        }
        if (detail) {
            detail->rho_s = lr.rho1;
            detail->bond_currents = dmu * bond_currents(lr.rho1, p.Js);
        }
        return;
    }

    const Solve s = solve(c, method, p);
    rec.current = mean_current(s.rho_s, p.Js);
    rec.converged = s.converged;
    rec.residual = s.residual;
    rec.t_final = s.t_final;
    if (detail) {
        detail->rho_s = s.rho_s;
        detail->bond_currents = bond_currents(s.rho_s, p.Js);
    }
    if (c.transporting_state && dmu != 0.0 && has_equilibrium_reference(c, method)) {
        // rho^(1) as a one-sided difference: (mu + dmu/2, mu - dmu/2) against both at mu - dmu/2
        ModelParams base = p;
        base.left.mu = p.right.mu;
        const Solve eq = solve(c, method, base);
        const CMatrix rho1 = (s.rho_s - eq.rho_s) / dmu;
        const CMatrix h = 0.5 * (rho1 + rho1.adjoint());
        if (h.cwiseAbs().maxCoeff() > 0.0) {
            const TransportingSpectrum ts = transporting_spectrum(h);
            rec.max_eig_fraction = ts.purity;
            if (detail) detail->spectrum = ts;
        }
    }
}

} // namespace

SweepRecord evaluate_point(const SweepConfig& config, Method method, double gamma, double kappa_F,
                           PointDetail* detail) {
    SweepRecord rec;
    rec.method = method_name(method);
    rec.gamma = gamma;
    rec.kappa_F = kappa_F;
    const auto start = std::chrono::steady_clock::now();
    try {
        const ModelParams p = point_params(config, gamma, kappa_F);
        rec.mu = 0.5 * (p.left.mu + p.right.mu);
        rec.delta_mu = p.left.mu - p.right.mu;
        fill(rec, config, method, p, detail);
        if (!std::isfinite(rec.current)) {
            rec.converged = false;
            rec.error = "non-finite current";
        }
    } catch (const std::exception& e) {
        rec.current = std::numeric_limits<double>::quiet_NaN();
        rec.max_eig_fraction = std::numeric_limits<double>::quiet_NaN();
        rec.converged = false;
        rec.error = e.what();
    }
    if (config.record_runtime)
        rec.runtime_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rec;
}

std::vector<SweepRecord> run_sweep(const SweepConfig& config, int workers) {
    struct Task {
        Method method;
        double gamma;
        double kappa_F;
    };
    std::vector<Task> tasks;
    for (Method m : config.methods)
        for (double g : config.gamma)
            for (double k : config.kappa_F) tasks.push_back({m, g, k});

    std::vector<SweepRecord> rows(tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++)
            rows[i] = evaluate_point(config, tasks[i].method, tasks[i].gamma, tasks[i].kappa_F);
    };
    const int n = std::max(1, std::min<int>(workers, static_cast<int>(tasks.size())));
    std::vector<std::thread> pool;
    for (int t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    std::stable_sort(rows.begin(), rows.end(), [](const SweepRecord& a, const SweepRecord& b) {
        if (a.method != b.method) return a.method < b.method;
        if (a.gamma != b.gamma) return a.gamma < b.gamma;
        return a.kappa_F < b.kappa_F;
    });
    return rows;
}

namespace {

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

double parse_field(const std::string& s) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError("CSV: bad number '" + s + "'");
}

} // namespace

void write_csv(std::ostream& out, const SweepConfig& config, const std::vector<SweepRecord>& rows) {
    out << "# ringtransport " << RINGTRANSPORT_VERSION << "\n";
    out << "# kappa_F in radians; mu = -Jr cos(kappa_F); bias split symmetrically\n";
    out << config.source.header();
    out << kCsvColumns << "\n";
    for (const auto& r : rows) {
        out << r.method << ',' << fmt(r.gamma) << ',' << fmt(r.kappa_F) << ',' << fmt(r.mu) << ','
            << fmt(r.delta_mu) << ',' << fmt(r.current) << ',' << fmt(r.max_eig_fraction) << ','
            << (r.converged ? "true" : "false") << ',' << fmt(r.residual) << ',' << fmt(r.t_final)
            << ',' << fmt(r.runtime_seconds) << "\n";
    }
}

std::vector<SweepRecord> read_csv(std::istream& in, ConfigMap* header) {
    std::vector<SweepRecord> rows;
    std::string line;
    bool seen_columns = false;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto eq = line.find('=');
            if (header && eq != std::string::npos) {
                std::string key = line.substr(1, eq - 1);
                key.erase(0, key.find_first_not_of(' '));
                key.erase(key.find_last_not_of(' ') + 1);
                try {
                    header->set(key, line.substr(eq + 1));
                } catch (const ConfigError&) {
                    // foreign comment
                }
            }
            continue;
        }
        if (!seen_columns) {
            if (line != kCsvColumns) throw ConfigError("CSV: unexpected column header '" + line + "'");
            seen_columns = true;
            continue;
        }
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string item;
        while (std::getline(ss, item, ',')) f.push_back(item);
        if (f.size() != 11) throw ConfigError("CSV line " + std::to_string(number) + ": expected 11 fields");
        SweepRecord r;
        r.method = f[0];
        r.gamma = parse_field(f[1]);
        r.kappa_F = parse_field(f[2]);
        r.mu = parse_field(f[3]);
        r.delta_mu = parse_field(f[4]);
        r.current = parse_field(f[5]);
        r.max_eig_fraction = parse_field(f[6]);
        if (f[7] != "true" && f[7] != "false")
            throw ConfigError("CSV line " + std::to_string(number) + ": converged must be true or false");
        r.converged = f[7] == "true";
        r.residual = parse_field(f[8]);
        r.t_final = parse_field(f[9]);
        r.runtime_seconds = parse_field(f[10]);
        rows.push_back(r);
    }
    if (!seen_columns) throw ConfigError("CSV: no column header");
    return rows;
}

std::string gnuplot_script(const std::string& csv_path) {
    std::ostringstream s;
    s << "# current map: log10 gamma against kappa_F / pi, one panel per method\n"
      << "set datafile separator ','\n"
      << "set logscale y\n"
      << "set xlabel 'kappa_F / pi'\n"
      << "set ylabel 'gamma'\n"
      << "set view map\n"
      << "set pm3d map\n"
      << "splot '" << csv_path << "' every ::1 using ($3/pi):2:6 with points palette pt 5 notitle\n";
    return s.str();
}

CompareReport run_compare(const SweepConfig& config, int workers) {
    if (config.methods.size() < 2) throw ConfigError("compare needs at least two methods");
    CompareReport rep;
    Method ref = config.reference.value_or(config.methods.front());
    rep.reference = method_name(ref);

    // evaluate each listed method separately so duplicates stay distinct
    std::vector<std::vector<SweepRecord>> per_method;
    std::vector<Method> order = config.methods;
    if (config.reference) order.insert(order.begin(), ref);
    for (Method m : order) {
        SweepConfig one = config;
        one.methods = {m};
        per_method.push_back(run_sweep(one, workers));
    }
    for (const auto& rows : per_method) rep.rows.insert(rep.rows.end(), rows.begin(), rows.end());

    const auto& base = per_method.front();
    for (std::size_t k = 1; k < per_method.size(); ++k) {
        const auto& rows = per_method[k];
        for (std::size_t i = 0; i < rows.size(); ++i) {
            Deviation d;
            d.method = rows[i].method;
            d.gamma = rows[i].gamma;
            d.kappa_F = rows[i].kappa_F;
            d.reference_current = base[i].current;
            d.current = rows[i].current;
            d.relative = std::abs(d.current - d.reference_current) / std::abs(d.reference_current);
            d.regime = regime_label(classify_regime(d.gamma, config.base.epsilon, config.base.Js));
            rep.deviations.push_back(d);
        }
        for (double g : config.gamma) {
            std::vector<double> rel;
            for (const auto& d : rep.deviations)
                if (d.method == rows.front().method && d.gamma == g && std::isfinite(d.relative))
                    rel.push_back(d.relative);
            DeviationSummary s;
            s.method = rows.front().method;
            s.gamma = g;
            s.regime = regime_label(classify_regime(g, config.base.epsilon, config.base.Js));
            if (rel.empty()) {
                s.max = s.median = std::numeric_limits<double>::quiet_NaN();
            } else {
                std::sort(rel.begin(), rel.end());
                s.max = rel.back();
                const std::size_t n = rel.size();
                s.median = n % 2 ? rel[n / 2] : 0.5 * (rel[n / 2 - 1] + rel[n / 2]);
            }
            rep.summary.push_back(s);
        }
    }
    return rep;
}

void write_compare(std::ostream& out, const CompareReport& rep) {
    out << "# reference method: " << rep.reference << "\n";
    out << "# regime labels are heuristics: III when gamma >= 5 eps, I when gamma <= eps^2 / Js, "
           "II otherwise\n";
    out << "method,gamma,kappa_F,reference_current,current,relative_deviation,regime\n";
    for (const auto& d : rep.deviations)
        out << d.method << ',' << fmt(d.gamma) << ',' << fmt(d.kappa_F) << ','
            << fmt(d.reference_current) << ',' << fmt(d.current) << ',' << fmt(d.relative) << ','
            << d.regime << "\n";
    out << "\n# summary per gamma\nmethod,gamma,max_deviation,median_deviation,regime\n";
    for (const auto& s : rep.summary)
        out << s.method << ',' << fmt(s.gamma) << ',' << fmt(s.max) << ',' << fmt(s.median) << ','
            << s.regime << "\n";
}

} // namespace ringtransport
