#include "ringtransport/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace ringtransport {

const std::vector<ConfigKey>& config_keys() {
    static const std::vector<ConfigKey> keys = {
        {"model.L", "5", "chain sites"},
        {"model.M", "100", "ring sites per contact"},
        {"model.Js", "1", "chain hopping"},
        {"model.Jr", "1", "ring hopping"},
        {"model.epsilon", "0.4", "chain-contact coupling"},
        {"model.max_dim", "4096", "cap on the single-particle dimension 2M + L"},
        {"contact.beta", "inf", "inverse temperature of both contacts (number or inf)"},
        {"contact1.beta", "", "override for the contact at site 1"},
        {"contactL.beta", "", "override for the contact at site L"},
        {"sweep.methods", "full", "comma list of full, smallgamma, nonmarkov, nonmarkov-algebraic, markov, oracle"},
        {"sweep.gamma", "0.1", "gamma grid: comma list of numbers, lin:a:b:n or log:a:b:n"},
        {"sweep.kappa_F", "0.5", "Fermi momentum grid in units of pi"},
        {"sweep.delta_mu", "spacing", "bias: spacing (one ring level spacing, Jr sin(kappa_F) 2 pi / M) or a number"},
        {"compare.reference", "", "baseline method for compare (default: first method)"},
        {"full.solver", "direct", "direct or evolve"},
        {"solver.dt", "0.02", "upper bound on the time step"},
        {"solver.t_max", "5000", "longest evolution time"},
        {"solver.tolerance", "1e-5", "relative spread of j over the trailing window"},
        {"solver.window_factor", "10", "window length in units of 1 / min(gamma, eps^2 / gamma)"},
        {"nonmarkov.solver", "direct", "direct or evolve"},
        {"nonmarkov.memory_cutoff", "1e-8", "kernel truncation threshold"},
        {"nonmarkov.memory_scale", "1", "multiplier on the memory window"},
        {"oracle.t_final", "50", "many-body evolution time"},
        {"oracle.dt", "0.01", "upper bound on the many-body time step"},
        {"smallgamma.eta", "auto", "broadening of spectral functions (auto: 4 Jr / (2M + L))"},
        {"diagnostics.transporting_state", "true", "compute the purity fraction of rho^(1)"},
        {"diagnostics.peak_fraction", "0.1", "minimum peak prominence as a fraction of the range"},
        {"output.csv", "", "CSV path (default: stdout)", false},
        {"output.script", "", "write a gnuplot script for the CSV here", false},
        {"output.record_runtime", "false", "store wall time per point (breaks byte-identical output)"},
        {"run.workers", "0", "worker threads (0: $RINGTRANSPORT_WORKERS or 1)", false},
    };
    return keys;
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

const ConfigKey* find_key(const std::string& name) {
    for (const auto& k : config_keys())
        if (k.name == name) return &k;
    return nullptr;
}

double to_double(const std::string& key, const std::string& text) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || trim(text.substr(used)) != "")
        throw ConfigError(key + ": expected a number, got '" + text + "'");
    return v;
}

int to_int(const std::string& key, const std::string& text) {
    const double v = to_double(key, text);
    if (v != std::floor(v) || std::abs(v) > 1e9)
        throw ConfigError(key + ": expected an integer, got '" + text + "'");
    return static_cast<int>(v);
}

bool to_bool(const std::string& key, const std::string& text) {
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    throw ConfigError(key + ": expected true or false, got '" + text + "'");
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(trim(item));
    return out;
}

} // namespace

ConfigMap::ConfigMap() {
    for (const auto& k : config_keys()) values_[k.name] = k.default_value;
}

void ConfigMap::set(const std::string& key, const std::string& value) {
    if (!find_key(key)) throw ConfigError("unknown configuration key '" + key + "'");
    values_[key] = trim(value);
}

const std::string& ConfigMap::get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown configuration key '" + key + "'");
    return it->second;
}

bool ConfigMap::is_default(const std::string& key) const {
    const ConfigKey* k = find_key(key);
    return k && get(key) == k->default_value;
}

void ConfigMap::merge_text(const std::string& text, const std::string& origin) {
    std::stringstream ss(text);
    std::string line;
    int number = 0;
    while (std::getline(ss, line)) {
        ++number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(number) + ": expected key = value");
        set(trim(line.substr(0, eq)), line.substr(eq + 1));
    }
}

void ConfigMap::merge_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    merge_text(buf.str(), path);
}

std::string ConfigMap::header() const {
    std::ostringstream out;
    for (const auto& k : config_keys())
        if (k.in_header) out << "# " << k.name << " = " << get(k.name) << "\n";
    return out.str();
}

namespace {

std::vector<double> parse_range(const std::string& t) {
    const auto parts = split(t, ':');
    if (parts.size() != 4) throw ConfigError("grid '" + t + "': expected kind:a:b:n");
    const double a = to_double("grid", parts[1]);
    const double b = to_double("grid", parts[2]);
    const int n = to_int("grid", parts[3]);
    if (n < 1) throw ConfigError("grid '" + t + "': need n >= 1");
    const bool log = parts[0] == "log";
    if (log && !(a > 0.0 && b > 0.0)) throw ConfigError("grid '" + t + "': log grid needs a, b > 0");
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) {
        const double f = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
        out[i] = log ? std::pow(10.0, std::log10(a) + f * (std::log10(b) - std::log10(a))) : a + f * (b - a);
    }
    // exact end points
    out.front() = a;
    if (n > 1) out.back() = b;
    return out;
}

} // namespace

std::vector<double> parse_grid(const std::string& text) {
    const std::string t = trim(text);
    if (t.empty()) throw ConfigError("empty grid");
    std::vector<double> out;
    for (const auto& item : split(t, ',')) {
        if (item.empty()) throw ConfigError("grid '" + t + "': empty entry");
        if (item.rfind("lin:", 0) == 0 || item.rfind("log:", 0) == 0) {
            const auto r = parse_range(item);
            out.insert(out.end(), r.begin(), r.end());
        } else {
            out.push_back(to_double("grid", item));
        }
    }
    return out;
}

Method parse_method(const std::string& name) {
    if (name == "full") return Method::Full;
    if (name == "smallgamma") return Method::SmallGamma;
    if (name == "nonmarkov") return Method::NonMarkov;
    if (name == "nonmarkov-algebraic") return Method::NonMarkovAlgebraic;
    if (name == "markov") return Method::Markov;
    if (name == "oracle") return Method::Oracle;
    throw ConfigError("unknown method '" + name + "'");
}

std::string method_name(Method m) {
    switch (m) {
    case Method::Full: return "full";
    case Method::SmallGamma: return "smallgamma";
    case Method::NonMarkov: return "nonmarkov";
    case Method::NonMarkovAlgebraic: return "nonmarkov-algebraic";
    case Method::Markov: return "markov";
    case Method::Oracle: return "oracle";
    }
    return "?";
}

SweepConfig resolve_config(const ConfigMap& map) {
    SweepConfig c;
    c.source = map;
    auto num = [&](const char* key) { return to_double(key, map.get(key)); };
    auto integer = [&](const char* key) { return to_int(key, map.get(key)); };
    auto flag = [&](const char* key) { return to_bool(key, map.get(key)); };

    ModelParams& p = c.base;
    p.L = integer("model.L");
    p.M = integer("model.M");
    p.Js = num("model.Js");
    p.Jr = num("model.Jr");
    p.epsilon = num("model.epsilon");
    const int max_dim = integer("model.max_dim");
    if (max_dim < 1) throw ConfigError("model.max_dim must be positive");
    c.max_dim = static_cast<std::size_t>(max_dim);
    const InverseTemperature beta = InverseTemperature::parse(map.get("contact.beta"));
    p.left.beta = map.get("contact1.beta").empty() ? beta : InverseTemperature::parse(map.get("contact1.beta"));
    p.right.beta = map.get("contactL.beta").empty() ? beta : InverseTemperature::parse(map.get("contactL.beta"));

    for (const auto& m : split(map.get("sweep.methods"), ',')) c.methods.push_back(parse_method(m));
    if (c.methods.empty()) throw ConfigError("sweep.methods is empty");
    try {
        c.gamma = parse_grid(map.get("sweep.gamma"));
        for (double k : parse_grid(map.get("sweep.kappa_F"))) c.kappa_F.push_back(k * kPi);
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("sweep grid: ") + e.what());
    }
    for (double g : c.gamma)
        if (!(g > 0.0) || !std::isfinite(g)) throw ConfigError("sweep.gamma: values must be positive");
    for (double k : c.kappa_F)
        if (!(k >= 0.0 && k <= kPi)) throw ConfigError("sweep.kappa_F: values must lie in [0, 1]");
    if (map.get("sweep.delta_mu") != "spacing") {
        c.fixed_delta_mu = num("sweep.delta_mu");
        if (!std::isfinite(*c.fixed_delta_mu)) throw ConfigError("sweep.delta_mu must be finite");
    }
    if (!map.get("compare.reference").empty()) c.reference = parse_method(map.get("compare.reference"));

    auto solver_choice = [&](const char* key) {
        const std::string& v = map.get(key);
        if (v != "direct" && v != "evolve")
            throw ConfigError(std::string(key) + ": expected direct or evolve, got '" + v + "'");
        return v == "evolve";
    };
    c.full_evolve = solver_choice("full.solver");
    c.nonmarkov_evolve = solver_choice("nonmarkov.solver");
    c.evolution.dt = c.nonmarkov.dt = num("solver.dt");
    c.evolution.t_max = c.nonmarkov.t_max = num("solver.t_max");
    c.evolution.tolerance = c.nonmarkov.tolerance = num("solver.tolerance");
    c.evolution.window_factor = c.nonmarkov.window_factor = num("solver.window_factor");
    if (!(c.evolution.dt > 0.0) || !(c.evolution.t_max > 0.0) || !(c.evolution.tolerance > 0.0) ||
        !(c.evolution.window_factor > 0.0))
        throw ConfigError("solver.*: dt, t_max, tolerance and window_factor must be positive");
    c.nonmarkov.memory_cutoff = num("nonmarkov.memory_cutoff");
    c.nonmarkov.memory_scale = num("nonmarkov.memory_scale");
    if (!(c.nonmarkov.memory_cutoff > 0.0 && c.nonmarkov.memory_cutoff < 1.0))
        throw ConfigError("nonmarkov.memory_cutoff must lie in (0, 1)");
    if (!(c.nonmarkov.memory_scale > 0.0)) throw ConfigError("nonmarkov.memory_scale must be positive");
    c.oracle.t_final = num("oracle.t_final");
    c.oracle.dt = num("oracle.dt");
    if (!(c.oracle.t_final >= 0.0) || !(c.oracle.dt > 0.0))
        throw ConfigError("oracle.t_final must be >= 0 and oracle.dt > 0");
    if (map.get("smallgamma.eta") != "auto") {
        c.eta = num("smallgamma.eta");
        if (!(*c.eta > 0.0)) throw ConfigError("smallgamma.eta must be positive");
    }
    c.transporting_state = flag("diagnostics.transporting_state");
    c.peak_fraction = num("diagnostics.peak_fraction");
    if (!(c.peak_fraction >= 0.0 && c.peak_fraction <= 1.0))
        throw ConfigError("diagnostics.peak_fraction must lie in [0, 1]");

    c.csv_path = map.get("output.csv");
    c.script_path = map.get("output.script");
    c.record_runtime = flag("output.record_runtime");
    c.workers = integer("run.workers");
    if (c.workers < 0) throw ConfigError("run.workers must be >= 0");

    ModelParams probe = p;
    probe.gamma = c.gamma.front();
    probe.validate(c.max_dim);
    const bool wants_oracle = std::find(c.methods.begin(), c.methods.end(), Method::Oracle) != c.methods.end();
    if (wants_oracle && 2 * p.M + p.L > 12)
        throw ConfigError("method oracle needs 2M + L <= 12 (many-body dimension cap 4096)");
    return c;
}

int resolve_workers(int flag) {
    if (flag > 0) return flag;
    if (const char* env = std::getenv(kWorkersEnv)) {
        try {
            const int n = to_int(kWorkersEnv, env);
            if (n > 0) return n;
        } catch (const ConfigError&) {
        }
        throw ConfigError(std::string(kWorkersEnv) + " must be a positive integer");
    }
    return 1;
}

} // namespace ringtransport
