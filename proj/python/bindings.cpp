#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <sstream>

#include "ringtransport/config.hpp"
#include "ringtransport/types.hpp"
#include "ringtransport/diagnostics.hpp"
#include "ringtransport/full_dynamics.hpp"
#include "ringtransport/markov.hpp"
#include "ringtransport/nonmarkov.hpp"
#include "ringtransport/small_gamma.hpp"
#include "ringtransport/sweep.hpp"

namespace py = pybind11;
using namespace ringtransport;

namespace {

ModelParams make_params(int L, int M, double epsilon, double gamma, double mu, double delta_mu, double beta) {
    ModelParams p;
    p.L = L;
    p.M = M;
    p.epsilon = epsilon;
    p.gamma = gamma;
    p = with_bias(p, mu, delta_mu);
    // negative beta means zero temperature
    const InverseTemperature b = beta < 0 ? InverseTemperature::infinite() : InverseTemperature(beta);
    p.left.beta = p.right.beta = b;
    return p;
}

py::dict stationary(const std::string& method, int L, int M, double epsilon, double gamma, double mu,
                    double delta_mu, double beta) {
    const ModelParams p = make_params(L, M, epsilon, gamma, mu, delta_mu, beta);
    const Method m = parse_method(method);
    py::dict out;
    StationaryResult r;
    switch (m) {
    case Method::SmallGamma:
        out["current"] = current_smallgamma(p);
        return out;
    case Method::Markov: r = stationary_markov(p); break;
    case Method::NonMarkov: r = stationary_nonmarkov(p); break;
    case Method::Full: r = solve_stationary_full(p); break;
    default: throw ConfigError("method not available here: " + method);
    }
    out["current"] = r.current;
    out["rho_s"] = r.rho_s;
    out["bond_currents"] = r.bond_currents;
    out["converged"] = r.converged;
    out["residual"] = r.residual;
    return out;
}

SweepConfig config_from(const std::string& text) {
    ConfigMap map;
    map.merge_text(text);
    return resolve_config(map);
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Stationary transport through a chain between two damped ring contacts";
    m.attr("__version__") = RINGTRANSPORT_VERSION;

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    m.def("stationary", &stationary, py::arg("method") = "full", py::arg("L") = 5, py::arg("M") = 100,
          py::arg("epsilon") = 0.4, py::arg("gamma") = 0.1, py::arg("mu") = 0.0, py::arg("delta_mu") = 0.0628,
          py::arg("beta") = -1.0,
          "Stationary chain state for one method (full, smallgamma, nonmarkov, markov). beta < 0 is zero temperature.");

    m.def("chain_levels", [](int L, double Js) {
        ModelParams p;
        p.L = L;
        p.Js = Js;
        return RVector(chain_eigensystem(p).values);
    }, py::arg("L") = 5, py::arg("Js") = 1.0);

    m.def("transporting_purity", [](int L, int M, double epsilon, double gamma, double mu) {
        ModelParams p;
        p.L = L;
        p.M = M;
        p.epsilon = epsilon;
        p.gamma = gamma;
        return transporting_spectrum(linear_response_stationary(p, mu).rho1).purity;
    }, py::arg("L") = 5, py::arg("M") = 100, py::arg("epsilon") = 0.4, py::arg("gamma") = 0.1, py::arg("mu") = 0.0,
       "Purity fraction of the linear-response transporting state.");

    m.def("sweep_csv", [](const std::string& config_text, int workers) {
        const SweepConfig cfg = config_from(config_text);
        std::vector<SweepRecord> rows;
        {
            py::gil_scoped_release release;
            rows = run_sweep(cfg, workers);
        }
        std::ostringstream out;
        write_csv(out, cfg, rows);
        return out.str();
    }, py::arg("config") = "", py::arg("workers") = 1,
       "Runs a sweep from key = value config text and returns the CSV text.");

    m.def("parse_grid", &parse_grid, py::arg("text"));

    m.def("find_peaks", [](const std::vector<double>& x, const std::vector<double>& y, double fraction) {
        py::list out;
        for (const Peak& p : detect_peaks(x, y, fraction))
            out.append(py::make_tuple(p.index, p.x, p.value, p.prominence));
        return out;
    }, py::arg("x"), py::arg("y"), py::arg("min_fraction") = 0.1,
       "Peaks as (index, x, value, prominence) tuples.");
}
