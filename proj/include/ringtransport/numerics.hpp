// numerics.hpp - dense linear algebra, integration and quadrature primitives

#pragma once

#include <cmath>
#include <functional>
#include <string>

#include "ringtransport/types.hpp"

namespace ringtransport::numerics {

struct Spectrum {
    RVector values;   // ascending
    CMatrix vectors;  // columns are orthonormal eigenvectors
};

// max |A - A^dagger|
double hermiticity_defect(const CMatrix& A);

// Induced infinity norm (max absolute row sum); used as the scale for relative tolerances.
double norm_inf(const CMatrix& A);

bool all_finite(const CMatrix& A);

// Throws ConfigError when A is non-Hermitian beyond herm_tol * ||A||,
// NumericalError when the eigensolver does not converge.
Spectrum hermitian_eigendecomposition(const CMatrix& A, double herm_tol = 1e-12);

// Classical fourth-order Runge-Kutta step for y' = f(t, y).
template <class F>
CMatrix rk4_step(F&& f, const CMatrix& y, double t, double dt) {
    if (!(dt > 0.0)) throw ConfigError("rk4_step: dt must be positive");
    const CMatrix k1 = f(t, y);
    const CMatrix k2 = f(t + 0.5 * dt, CMatrix(y + (0.5 * dt) * k1));
    const CMatrix k3 = f(t + 0.5 * dt, CMatrix(y + (0.5 * dt) * k2));
    const CMatrix k4 = f(t + dt, CMatrix(y + dt * k3));
    CMatrix out = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!all_finite(out))
        throw NumericalError("rk4_step: non-finite state at t = " + std::to_string(t + dt));
    return out;
}

using ComplexIntegrand = std::function<cplx(double)>;

struct QuadratureResult {
    cplx value;
    double error_estimate;
};

// Adaptive Gauss-Kronrod (15 point) on [a, b]. tol is absolute for |value| <= 1 and
// relative above. Throws NumericalError if the error estimate stays above it.
QuadratureResult integrate_adaptive(const ComplexIntegrand& f, double a, double b,
                                    double tol = 1e-10, unsigned max_depth = 15);

// Trapezoid rule on n uniform nodes of a periodic integrand over [a, a + period).
cplx integrate_periodic(const ComplexIntegrand& f, double a, double period, int n);

// Composite Gauss-Legendre (20 nodes per panel) on [a, b].
cplx integrate_gauss_legendre(const ComplexIntegrand& f, double a, double b, int panels);

// Solves A x = b by partial-pivot LU. Throws NumericalError when the reciprocal
// condition estimate falls below rcond_min.
CVector solve_linear(const CMatrix& A, const CVector& b, double rcond_min = 1e-14);

// Solves K X + X K^dagger = Q (Bartels-Stewart on the complex Schur form of K).
CMatrix solve_lyapunov(const CMatrix& K, const CMatrix& Q);

// Solves S(X) = rhs for a linear map S on n x n matrices by assembling the
// n^2 x n^2 matrix of S column by column (column-major vectorization).
template <class Apply>
CMatrix solve_matrix_equation(Apply&& apply, const CMatrix& rhs, double rcond_min = 1e-14) {
    const Eigen::Index n = rhs.rows();
    const Eigen::Index n2 = n * n;
    CMatrix S(n2, n2);
    CMatrix unit = CMatrix::Zero(n, n);
    for (Eigen::Index col = 0; col < n2; ++col) {
        unit(col % n, col / n) = 1.0;
        const CMatrix image = apply(unit);
        S.col(col) = Eigen::Map<const CVector>(image.data(), n2);
        unit(col % n, col / n) = 0.0;
    }
    const CVector b = Eigen::Map<const CVector>(rhs.data(), n2);
    const CVector x = solve_linear(S, b, rcond_min);
    return Eigen::Map<const CMatrix>(x.data(), n, n);
}

} // namespace ringtransport::numerics
