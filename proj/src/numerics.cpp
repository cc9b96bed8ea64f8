#include "ringtransport/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace ringtransport::numerics {

double hermiticity_defect(const CMatrix& A) {
    if (A.rows() != A.cols()) return std::numeric_limits<double>::infinity();
    if (A.size() == 0) return 0.0;
    return (A - A.adjoint()).cwiseAbs().maxCoeff();
}

double norm_inf(const CMatrix& A) {
    if (A.size() == 0) return 0.0;
    return A.cwiseAbs().rowwise().sum().maxCoeff();
}

bool all_finite(const CMatrix& A) {
    return A.allFinite();
}

Spectrum hermitian_eigendecomposition(const CMatrix& A, double herm_tol) {
    if (A.rows() != A.cols())
        throw ConfigError("hermitian_eigendecomposition: matrix is not square");
    const double scale = std::max(norm_inf(A), 1.0);
    const double defect = hermiticity_defect(A);
    if (defect > herm_tol * scale) {
        std::ostringstream msg;
        msg << "hermitian_eigendecomposition: non-Hermitian input (defect " << defect << ")";
        throw ConfigError(msg.str());
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(A);
    if (solver.info() != Eigen::Success)
        throw NumericalError("hermitian_eigendecomposition: QR iteration did not converge");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

namespace {

struct Panel {
    cplx value;
    double error;
};

// one 15-point Kronrod panel; the error is |K15 - G7| of the complex value
Panel kronrod_panel(const ComplexIntegrand& f, double a, double b) {
    using boost::math::quadrature::gauss;
    using boost::math::quadrature::gauss_kronrod;
    const auto& xk = gauss_kronrod<double, 15>::abscissa();
    const auto& wk = gauss_kronrod<double, 15>::weights();
    const auto& wg = gauss<double, 7>::weights();
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const cplx f0 = f(c);
    cplx k = wk[0] * f0;
    cplx g = wg[0] * f0;
    for (std::size_t i = 1; i < xk.size(); ++i) {
        const cplx pair = f(c - h * xk[i]) + f(c + h * xk[i]);
        k += wk[i] * pair;
        if (i % 2 == 0) g += wg[i / 2] * pair;
    }
    return {k * h, std::abs(k - g) * h};
}

struct Refiner {
    const ComplexIntegrand& f;
    unsigned max_depth;
    bool exhausted = false;

    Panel run(double a, double b, const Panel& whole, double budget, unsigned depth) {
        if (whole.error <= budget) return whole;
        if (depth >= max_depth) {
            exhausted = true;
            return whole;
        }
        const double m = 0.5 * (a + b);
        const Panel l = run(a, m, kronrod_panel(f, a, m), 0.5 * budget, depth + 1);
        const Panel r = run(m, b, kronrod_panel(f, m, b), 0.5 * budget, depth + 1);
        return {l.value + r.value, l.error + r.error};
    }
};

} // namespace

QuadratureResult integrate_adaptive(const ComplexIntegrand& f, double a, double b, double tol,
                                    unsigned max_depth) {
    if (a == b) return {cplx{0.0, 0.0}, 0.0};
    const Panel first = kronrod_panel(f, a, b);
    Refiner refine{f, max_depth};
    const Panel total = refine.run(a, b, first, tol * std::max(1.0, std::abs(first.value)), 0);
    if (!std::isfinite(total.value.real()) || !std::isfinite(total.value.imag()) ||
        total.error > tol * std::max(1.0, std::abs(total.value))) {
        std::ostringstream msg;
        msg << "integrate_adaptive: tolerance " << tol << " not reached (estimate " << total.error
            << ", depth budget " << max_depth << ")";
        throw NumericalError(msg.str());
    }
    return {total.value, total.error};
}

cplx integrate_periodic(const ComplexIntegrand& f, double a, double period, int n) {
    if (n <= 0) throw ConfigError("integrate_periodic: need at least one node");
    const double h = period / n;
    cplx sum{0.0, 0.0};
    for (int j = 0; j < n; ++j) sum += f(a + h * j);
    return sum * h;
}

cplx integrate_gauss_legendre(const ComplexIntegrand& f, double a, double b, int panels) {
    if (a == b) return {0.0, 0.0};
    panels = std::max(panels, 1);
    using boost::math::quadrature::gauss;
    const double width = (b - a) / panels;
    cplx sum{0.0, 0.0};
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * width;
        const double hi = (p + 1 == panels) ? b : lo + width;
        const double re = gauss<double, 20>::integrate([&](double x) { return f(x).real(); }, lo, hi);
        const double im = gauss<double, 20>::integrate([&](double x) { return f(x).imag(); }, lo, hi);
        sum += cplx{re, im};
    }
    return sum;
}

CVector solve_linear(const CMatrix& A, const CVector& b, double rcond_min) {
    if (A.rows() != A.cols() || A.rows() != b.size())
        throw ConfigError("solve_linear: dimension mismatch");
    if (A.rows() == 0) return CVector();
    Eigen::PartialPivLU<CMatrix> lu(A);
    const double rcond = lu.rcond();
    if (!(rcond >= rcond_min)) {
        std::ostringstream msg;
        msg << "solve_linear: singular or ill-conditioned system (rcond estimate " << rcond << ")";
        throw NumericalError(msg.str());
    }
    return lu.solve(b);
}

CMatrix solve_lyapunov(const CMatrix& K, const CMatrix& Q) {
    const Eigen::Index n = K.rows();
    if (K.cols() != n || Q.rows() != n || Q.cols() != n)
        throw ConfigError("solve_lyapunov: dimension mismatch");
    Eigen::ComplexSchur<CMatrix> schur(K);
    if (schur.info() != Eigen::Success)
        throw NumericalError("solve_lyapunov: Schur decomposition did not converge");
    const CMatrix& T = schur.matrixT();
    const CMatrix& U = schur.matrixU();
    const CMatrix F = U.adjoint() * Q * U;

    // T X + X T^dagger = F, columns from the last one down.
    CMatrix X = CMatrix::Zero(n, n);
    const double scale = std::max(norm_inf(K), 1.0);
    for (Eigen::Index j = n - 1; j >= 0; --j) {
        CVector rhs = F.col(j);
        const Eigen::Index tail = n - 1 - j;
        if (tail > 0) rhs -= X.rightCols(tail) * T.row(j).tail(tail).adjoint();
        const cplx shift = std::conj(T(j, j));
        CVector x(n);
        for (Eigen::Index i = n - 1; i >= 0; --i) {
            cplx acc = rhs(i);
            const Eigen::Index len = n - 1 - i;
            if (len > 0) acc -= (T.row(i).tail(len) * x.tail(len))(0);
            const cplx pivot = T(i, i) + shift;
            if (std::abs(pivot) < 1e-14 * scale)
                throw NumericalError("solve_lyapunov: singular (eigenvalues of K sum to zero)");
            x(i) = acc / pivot;
        }
        X.col(j) = x;
    }
    return U * X * U.adjoint();
}

} // namespace ringtransport::numerics
