#include "bianchi/specfun.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace bianchi {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kCrossover = 30.0;
constexpr double kSeriesLimit = 60.0;

using quad_t = __float128;

struct QComplex {
    quad_t re = 0;
    quad_t im = 0;
};

inline QComplex qmul(const QComplex& a, const QComplex& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}

inline quad_t qabs2(const QComplex& a) { return a.re * a.re + a.im * a.im; }

void check_order(double s) {
    if (!(s >= -0.5)) throw std::domain_error("Bessel order must be >= -1/2");
}

void check_branch(cplx w) {
    if (w.imag() == 0.0 && w.real() < 0.0) throw std::domain_error("Bessel argument on the branch cut (-inf, 0]");
}

// Sum_{k>=0} q^k / (k! (s+1)_k); the prefactor (w/2)^s / Gamma(s+1) is applied by the caller.
cplx hypergeometric_0F1_double(double s, cplx q) {
    cplx term = 1.0, sum = 1.0;
    for (int k = 1; k < 2000; ++k) {
        term *= q / (static_cast<double>(k) * (s + k));
        sum += term;
        if (std::abs(term) < 1e-17 * std::abs(sum) && k > std::sqrt(std::abs(q))) break;
    }
    return sum;
}

cplx hypergeometric_0F1_quad(double s, cplx q) {
    QComplex qq{static_cast<quad_t>(q.real()), static_cast<quad_t>(q.imag())};
    QComplex term{1, 0}, sum{1, 0};
    const quad_t qs = static_cast<quad_t>(s);
    const quad_t tiny = static_cast<quad_t>(1e-36);
    const double kmin = std::sqrt(std::abs(q));
    for (int k = 1; k < 4000; ++k) {
        term = qmul(term, qq);
        quad_t den = static_cast<quad_t>(k) * (qs + k);
        term.re /= den;
        term.im /= den;
        sum.re += term.re;
        sum.im += term.im;
        if (k > kmin && qabs2(term) < tiny * tiny * qabs2(sum)) break;
    }
    return {static_cast<double>(sum.re), static_cast<double>(sum.im)};
}

cplx series_core(double s, cplx w, bool modified) {
    check_order(s);
    check_branch(w);
    if (w == cplx(0.0, 0.0)) {
        if (s == 0.0) return 1.0;
        if (s > 0.0) return 0.0;
        throw std::domain_error("Bessel function singular at 0 for negative order");
    }
    cplx q = 0.25 * w * w;
    if (!modified) q = -q;
    // Ratio of the largest term to the result magnitude.
    double growth = modified ? std::abs(w) - std::abs(w.real()) : std::abs(w) - std::abs(w.imag());
    cplx sum = growth > 8.0 ? hypergeometric_0F1_quad(s, q) : hypergeometric_0F1_double(s, q);
    cplx pref = std::exp(s * std::log(0.5 * w) - std::lgamma(s + 1.0));
    return pref * sum;
}

// Hankel coefficients a_k(s) applied to 1/w, summed until the terms stop shrinking.
void hankel_sums(double s, cplx w, cplx& alternating, cplx& plain, cplx& even, cplx& odd) {
    double mu = 4.0 * s * s;
    cplx inv = 1.0 / w;
    cplx ak_over = 1.0;  // a_k(s) / w^k
    alternating = 1.0;
    plain = 1.0;
    even = 1.0;
    odd = 0.0;
    double last = std::numeric_limits<double>::infinity();
    for (int k = 1; k < 200; ++k) {
        double odd_k = 2.0 * k - 1.0;
        ak_over *= (mu - odd_k * odd_k) / (8.0 * k) * inv;
        double mag = std::abs(ak_over);
        if (mag > last) break;
        last = mag;
        double sign = (k % 2 == 0) ? 1.0 : -1.0;
        alternating += sign * ak_over;
        plain += ak_over;
        // J expansion: P = sum (-1)^m a_{2m}/w^{2m}, Q = sum (-1)^m a_{2m+1}/w^{2m+1}
        if (k % 2 == 0) {
            even += ((k / 2) % 2 == 0 ? 1.0 : -1.0) * ak_over;
        } else {
            odd += (((k - 1) / 2) % 2 == 0 ? 1.0 : -1.0) * ak_over;
        }
        if (mag < 1e-17) break;
    }
}

// Hankel expansions need |w| large against the order as well.
bool asymptotic_ok(double s, cplx w) {
    double aw = std::abs(w);
    return aw > kCrossover && aw > s * s && std::abs(std::arg(w)) <= 0.5 * kPi + 1e-12;
}

}  // namespace

cplx bessel_I_series(double s, cplx w) { return series_core(s, w, true); }

cplx bessel_J_series(double s, cplx w) { return series_core(s, w, false); }

cplx bessel_I_asymptotic(double s, cplx w) {
    check_order(s);
    check_branch(w);
    cplx alt, plain, even, odd;
    hankel_sums(s, w, alt, plain, even, odd);
    cplx root = std::sqrt(2.0 * kPi * w);
    cplx out = std::exp(w) / root * alt;
    if (w.imag() != 0.0) {
        double sgn = w.imag() > 0 ? 1.0 : -1.0;
        out += std::exp(cplx(0.0, sgn * (s + 0.5) * kPi) - w) / root * plain;
    }
    return out;
}

cplx bessel_J_asymptotic(double s, cplx w) {
    check_order(s);
    check_branch(w);
    cplx alt, plain, even, odd;
    hankel_sums(s, w, alt, plain, even, odd);
    cplx omega = w - 0.5 * s * kPi - 0.25 * kPi;
    return std::sqrt(2.0 / (kPi * w)) * (std::cos(omega) * even - std::sin(omega) * odd);
}

cplx bessel_I(double s, cplx w) {
    if (asymptotic_ok(s, w)) return bessel_I_asymptotic(s, w);
    if (std::abs(w) > std::max(kSeriesLimit, s * s)) throw std::domain_error("bessel_I: argument outside supported sector");
    return bessel_I_series(s, w);
}

cplx bessel_J(double s, cplx w) {
    if (asymptotic_ok(s, w)) return bessel_J_asymptotic(s, w);
    if (std::abs(w) > std::max(kSeriesLimit, s * s)) throw std::domain_error("bessel_J: argument outside supported sector");
    return bessel_J_series(s, w);
}

double bessel_I_real(double s, double x) {
    check_order(s);
    if (x < 0.0) throw std::domain_error("bessel_I_real expects x >= 0");
    if (x == 0.0) return s == 0.0 ? 1.0 : 0.0;
    if (x > 200.0 && x > 4.0 * s * s) return bessel_I_asymptotic(s, cplx(x, 0.0)).real();
    double q = 0.25 * x * x;
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 5000; ++k) {
        term *= q / (k * (s + k));
        sum += term;
        if (term < 1e-17 * sum) break;
    }
    return std::exp(s * std::log(0.5 * x) - std::lgamma(s + 1.0)) * sum;
}

double bessel_I_scaled_real(double s, double x) {
    if (x <= 200.0 || x <= 4.0 * s * s) return bessel_I_real(s, x) * std::exp(-x);
    cplx alt, plain, even, odd;
    hankel_sums(s, cplx(x, 0.0), alt, plain, even, odd);
    return alt.real() / std::sqrt(2.0 * kPi * x);
}

double bessel_J_real(double s, double x) {
    if (!(x > 0.0)) {
        if (x == 0.0) return s == 0.0 ? 1.0 : 0.0;
        throw std::domain_error("bessel_J_real expects x >= 0");
    }
    return bessel_J(s, cplx(x, 0.0)).real();
}

double bessel_K_scaled(double s, double x) {
    if (!(x > 0.0)) throw std::domain_error("bessel_K requires x > 0");
    s = std::abs(s);
    // Trapezoid rule on the even integrand exp(-x(cosh t - 1)) cosh(st); the
    // step keeps the discretization error below double precision.
    double h = std::min(0.25, kPi * kPi / (x + 45.0 + 2.0 * s));
    double t_peak = s > 0.0 ? std::asinh(s / x) : 0.0;
    double sum = 0.5;
    for (int k = 1; k < 100000; ++k) {
        double t = k * h;
        double f = std::exp(-x * (std::cosh(t) - 1.0) + s * t);
        if (s != 0.0) f = 0.5 * (f + std::exp(-x * (std::cosh(t) - 1.0) - s * t));
        sum += f;
        if (t > t_peak && f < 1e-18 * sum) break;
    }
    return h * sum;
}

double bessel_K(double s, double x) { return bessel_K_scaled(s, x) * std::exp(-x); }

void bessel_K_orders(double s, double x, int n, double* out) {
    if (n <= 0) return;
    double k0 = bessel_K(s, x);
    out[0] = k0;
    if (n == 1) return;
    double k1 = bessel_K(s + 1.0, x);
    out[1] = k1;
    for (int k = 2; k < n; ++k) {
        double nu = s + k - 1;
        out[k] = out[k - 2] + 2.0 * nu / x * out[k - 1];
    }
}

double phi_s_from_u(double u, double s) {
    if (!(u > 0.0)) throw std::domain_error("phi_s requires t > 1");
    double w = std::sqrt(u * (u + 2.0));
    if (s == 1.0) return 1.0 / (w * (1.0 + u + w));
    return std::exp(-s * std::log1p(u + w)) / w;
}

double phi_s(double t, double s) { return phi_s_from_u(t - 1.0, s); }

cplx script_J_jbranch(double s, cplx z) {
    if (z == cplx(0.0, 0.0)) throw std::domain_error("script_J undefined at 0");
    return bessel_J(s, 4.0 * kPi * std::sqrt(z)) * bessel_J(s, 4.0 * kPi * std::sqrt(std::conj(z)));
}

cplx script_J_ibranch(double s, cplx z) {
    if (z == cplx(0.0, 0.0)) throw std::domain_error("script_J undefined at 0");
    return bessel_I(s, 4.0 * kPi * std::sqrt(-z)) * bessel_I(s, 4.0 * kPi * std::sqrt(-std::conj(z)));
}

cplx script_J(double s, cplx z) { return z.real() >= 0.0 ? script_J_jbranch(s, z) : script_J_ibranch(s, z); }

}  // namespace bianchi
