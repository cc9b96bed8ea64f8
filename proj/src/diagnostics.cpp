#include "ringtransport/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ringtransport {

TransportingSpectrum transporting_spectrum(const CMatrix& rho1, double tol) {
    if (rho1.rows() != rho1.cols() || rho1.rows() == 0)
        throw ConfigError("transporting_spectrum: need a non-empty square matrix");
    const double scale = std::max(rho1.cwiseAbs().maxCoeff(), 1e-300);
    const double defect = numerics::hermiticity_defect(rho1);
    if (defect > tol * scale) {
        std::ostringstream msg;
        msg << "transporting_spectrum: matrix is not Hermitian (defect " << defect << ")";
        throw NumericalError(msg.str());
    }
    const auto spec = numerics::hermitian_eigendecomposition(CMatrix(0.5 * (rho1 + rho1.adjoint())));
    std::vector<double> v(spec.values.data(), spec.values.data() + spec.values.size());
    std::stable_sort(v.begin(), v.end(), [](double a, double b) { return std::abs(a) > std::abs(b); });
    TransportingSpectrum out;
    out.values = Eigen::Map<RVector>(v.data(), static_cast<Eigen::Index>(v.size()));
    const double total = out.values.cwiseAbs().sum();
    out.purity = total > 0.0 ? std::abs(v.front()) / total : 0.0;
    return out;
}

std::vector<Peak> detect_peaks(const std::vector<double>& x, const std::vector<double>& y,
                               double min_fraction) {
    if (x.size() != y.size()) throw ConfigError("detect_peaks: x and y differ in length");
    if (y.size() < 5) throw ConfigError("detect_peaks: need at least 5 samples");
    for (std::size_t i = 1; i < x.size(); ++i)
        if (!(x[i] > x[i - 1])) throw ConfigError("detect_peaks: x must be strictly ascending");
    for (double v : y)
        if (!std::isfinite(v)) throw ConfigError("detect_peaks: non-finite sample");

    const auto [lo_it, hi_it] = std::minmax_element(y.begin(), y.end());
    const double range = *hi_it - *lo_it;
    std::vector<Peak> peaks;
    if (!(range > 0.0)) return peaks;

    // collapse flat runs
    struct Run {
        std::size_t first, last;
        double value;
    };
    std::vector<Run> runs;
    const double same = 1e-12 * std::max(std::abs(*hi_it), std::abs(*lo_it));
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (!runs.empty() && std::abs(y[i] - runs.back().value) <= same) runs.back().last = i;
        else runs.push_back({i, i, y[i]});
    }
    for (std::size_t r = 1; r + 1 < runs.size(); ++r) {
        const double v = runs[r].value;
        if (!(v > runs[r - 1].value && v > runs[r + 1].value)) continue;
        // prominence: descend on each side until a higher run or the end
        double left_min = v;
        for (std::size_t k = r; k-- > 0;) {
            if (runs[k].value > v) break;
            left_min = std::min(left_min, runs[k].value);
        }
        double right_min = v;
        for (std::size_t k = r + 1; k < runs.size(); ++k) {
            if (runs[k].value > v) break;
            right_min = std::min(right_min, runs[k].value);
        }
        const double prominence = v - std::max(left_min, right_min);
        if (prominence < min_fraction * range) continue;
        const std::size_t mid = (runs[r].first + runs[r].last) / 2;
        Peak p;
        p.index = mid;
        p.x = runs[r].first == runs[r].last ? x[mid] : 0.5 * (x[runs[r].first] + x[runs[r].last]);
        p.value = v;
        p.prominence = prominence;
        peaks.push_back(p);
    }
    return peaks;
}

SlopeFit asymptotic_slope(const std::vector<double>& gamma, const std::vector<double>& current,
                          double lo, double hi) {
    if (gamma.size() != current.size()) throw ConfigError("asymptotic_slope: length mismatch");
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < gamma.size(); ++i) {
        if (gamma[i] < lo || gamma[i] > hi) continue;
        if (!(current[i] > 0.0) || !(gamma[i] > 0.0))
            throw NumericalError("asymptotic_slope: non-positive value in the fit range");
        lx.push_back(std::log10(gamma[i]));
        ly.push_back(std::log10(current[i]));
    }
    const std::size_t n = lx.size();
    if (n < 4) throw ConfigError("asymptotic_slope: need at least 4 points in range");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    SlopeFit fit;
    fit.points = n;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = ly[i] - fit.intercept - fit.slope * lx[i];
        ss += r * r;
    }
    fit.std_error = std::sqrt(ss / static_cast<double>(n - 2) / sxx);
    return fit;
}

Regime classify_regime(double gamma, double epsilon, double Js) {
    if (gamma >= 5.0 * epsilon) return Regime::III;
    if (gamma <= epsilon * epsilon / Js) return Regime::I;
    return Regime::II;
}

std::string regime_label(Regime r) {
    switch (r) {
    case Regime::I: return "I";
    case Regime::II: return "II";
    case Regime::III: return "III";
    }
    return "?";
}

} // namespace ringtransport
