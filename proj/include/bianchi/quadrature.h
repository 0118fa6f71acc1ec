#pragma once

#include <complex>
#include <functional>
#include <vector>

namespace bianchi {

enum class SemiInfMap { exp_map, rational_map };

struct QuadConfig {
    double abs_tol = 1e-13;
    double rel_tol = 1e-11;
    int max_subdivisions = 4000;
    SemiInfMap semiinf_transform = SemiInfMap::rational_map;
};

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
    bool reliable = true;
    int panels = 0;
};

struct QuadResultC {
    std::complex<double> value;
    double error = 0.0;
    bool reliable = true;
};

/// Globally adaptive Gauss-Kronrod (15/31) on [a, b]; b may be +infinity.
/// Endpoints are never sampled, so integrable endpoint singularities are allowed.
QuadResult quad(const std::function<double(double)>& f, double a, double b, const QuadConfig& cfg = {});

/// Integral over [a, inf) of an integrand oscillating with the given half period
/// and algebraically decaying amplitude. Pieces [a + k h, a + (k+1) h] are
/// integrated adaptively and the partial sums are accelerated by repeated averaging.
/// Best results when a sits at a zero of the asymptotic oscillation.
QuadResult quad_oscillatory(const std::function<double(double)>& f, double a, double half_period,
                            const QuadConfig& cfg = {});

/// Same with explicit breakpoints x_0 < x_1 < ... at successive zeros of the oscillation.
QuadResult quad_oscillatory_breaks(const std::function<double(double)>& f, const std::function<double(int)>& breakpoint,
                                   const QuadConfig& cfg = {});

/// Real and imaginary parts integrated separately.
QuadResultC quad_complex(const std::function<std::complex<double>(double)>& f, double a, double b,
                         const QuadConfig& cfg = {});

/// Fixed Gauss-Legendre rule on [-1, 1]; supported sizes 10, 15, 20, 25, 30.
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
const GaussRule& gauss_legendre(int n);

}  // namespace bianchi
