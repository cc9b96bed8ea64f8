// config.hpp - flat "section.key = value" configuration shared by the CLI and sweeps
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ringtransport/fock.hpp"
#include "ringtransport/full_dynamics.hpp"
#include "ringtransport/nonmarkov.hpp"

namespace ringtransport {

struct ConfigKey {
    std::string name;
    std::string default_value;
    std::string help;
    bool in_header = true;  // false for paths and the worker count
};

// Every recognised key, in the order they are written to output headers.
const std::vector<ConfigKey>& config_keys();

// Raw string values; unknown keys are rejected on set.
class ConfigMap {
public:
    ConfigMap();  // all defaults

    void set(const std::string& key, const std::string& value);
    const std::string& get(const std::string& key) const;
    bool is_default(const std::string& key) const;

    // "key = value" lines; '#' starts a comment.
    void merge_text(const std::string& text, const std::string& origin = "<text>");
    void merge_file(const std::string& path);

    // "# key = value" lines for keys flagged in_header.
    std::string header() const;

private:
    std::map<std::string, std::string> values_;
};

// Comma list whose items are numbers, "lin:a:b:n" or "log:a:b:n". Values in list order.
std::vector<double> parse_grid(const std::string& text);

enum class Method { Full, SmallGamma, NonMarkov, NonMarkovAlgebraic, Markov, Oracle };
Method parse_method(const std::string& name);
std::string method_name(Method m);

struct SweepConfig {
    ModelParams base;  // mu and bias are set per point
    std::size_t max_dim = 4096;
    std::vector<Method> methods;
    std::vector<double> gamma;
    std::vector<double> kappa_F;            // radians
    std::optional<double> fixed_delta_mu;   // unset: one ring level spacing at kappa_F
    std::optional<Method> reference;        // compare baseline; unset: first method

    bool full_evolve = false;
    EvolutionSettings evolution;
    bool nonmarkov_evolve = false;
    NonMarkovSettings nonmarkov;
    fock::OracleSettings oracle;
    std::optional<double> eta;  // spectral broadening; unset: default_broadening
    bool transporting_state = true;
    double peak_fraction = 0.1;

    std::string csv_path;     // empty: stdout
    std::string script_path;  // empty: no plot script
    bool record_runtime = false;
    int workers = 0;  // 0: environment or 1

    ConfigMap source;
};

// Throws ConfigError with the offending key in the message.
SweepConfig resolve_config(const ConfigMap& map);

// Environment variable read for the default worker count.
inline constexpr const char* kWorkersEnv = "RINGTRANSPORT_WORKERS";
// flag > 0 wins, then the environment, then 1.
int resolve_workers(int flag);

} // namespace ringtransport
