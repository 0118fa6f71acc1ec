#pragma once

#include <complex>

namespace bianchi {

using cplx = std::complex<double>;

/// Modified Bessel I_s(w), real order s >= -1/2, principal branch.
cplx bessel_I(double s, cplx w);
/// Bessel J_s(w), real order s >= -1/2, principal branch.
cplx bessel_J(double s, cplx w);

// Regime-specific evaluators, exposed for the crossover checks.
cplx bessel_I_series(double s, cplx w);
cplx bessel_J_series(double s, cplx w);
cplx bessel_I_asymptotic(double s, cplx w);
cplx bessel_J_asymptotic(double s, cplx w);

/// Fast I_s(x) for real x >= 0 (positive series, no cancellation).
double bessel_I_real(double s, double x);
/// e^{-x} I_s(x) for real x >= 0, finite for any x.
double bessel_I_scaled_real(double s, double x);
/// J_s(x) for real x > 0.
double bessel_J_real(double s, double x);

/// K_s(x) for x > 0 from the cosh integral representation.
double bessel_K(double s, double x);
/// e^x K_s(x).
double bessel_K_scaled(double s, double x);
/// out[k] = K_{s+k}(x), k = 0..n-1, by upward recurrence.
void bessel_K_orders(double s, double x, int n, double* out);

/// (t + sqrt(t^2-1))^(-s) (t^2-1)^(-1/2) for t > 1.
double phi_s(double t, double s);
/// Same kernel in terms of u = t - 1 > 0, stable near the diagonal.
double phi_s_from_u(double u, double s);

/// J_s(4 pi sqrt z) J_s(4 pi sqrt zbar) for Re z >= 0, I-branch for Re z < 0.
cplx script_J(double s, cplx z);
/// Explicit branch selection; both agree on Re z = 0.
cplx script_J_jbranch(double s, cplx z);
cplx script_J_ibranch(double s, cplx z);

}  // namespace bianchi
