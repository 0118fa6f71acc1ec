#include "bianchi/identities.h"

#include "bianchi/quadrature.h"
#include "bianchi/specfun.h"

#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>

namespace bianchi {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEps = 2.220446049250313e-16;

struct Outcome {
    cplx lhs;
    cplx rhs;
    double err = 0.0;
    double tol = 1e-8;
};

double get(const IdentityParams& p, const char* key) {
    auto it = p.find(key);
    if (it == p.end()) throw std::invalid_argument(std::string("missing identity parameter '") + key + "'");
    return it->second;
}

void require(bool cond, const char* what) {
    if (!cond) throw std::invalid_argument(std::string("identity hypothesis violated: ") + what);
}

QuadConfig tight() {
    QuadConfig cfg;
    cfg.abs_tol = 1e-15;
    cfg.rel_tol = 1e-13;
    cfg.max_subdivisions = 20000;
    return cfg;
}

// Integral over [0, inf) of g(x) times an oscillation whose asymptotic zeros sit at
// (n + phase) * half_period: a plain adaptive part up to the first zero past x_min,
// then piecewise summation with acceleration.
QuadResult split_oscillatory(const std::function<double(double)>& g, double half_period, double phase, double x_min,
                             const QuadConfig& cfg) {
    double n = std::ceil(x_min / half_period - phase);
    double x0 = (n + phase) * half_period;
    if (x0 <= 0.0) x0 += half_period * std::ceil((1.0 - x0 / half_period));
    QuadResult head = quad(g, 0.0, x0, cfg);
    QuadResult tail = quad_oscillatory(g, x0, half_period, cfg);
    return {head.value + tail.value, head.error + tail.error, head.reliable && tail.reliable, head.panels + tail.panels};
}

Outcome eq_A1(const IdentityParams& p) {
    double a = get(p, "a");
    require(a >= 0.0, "a >= 0");
    QuadResultC q = quad_complex([a](double th) { return std::exp(cplx(0.0, -a * std::sin(th))); }, 0.0, 2.0 * kPi,
                                 tight());
    return {q.value, 2.0 * kPi * bessel_J_real(0.0, a), q.error, 1e-8};
}

Outcome eq_A3(const IdentityParams& p) {
    double a = get(p, "a"), b = get(p, "b");
    require(a > 0.0, "a > 0");
    // t = u^2 turns the oscillation into J_0(b u) under a Gaussian envelope.
    QuadResult q = quad([=](double u) { return 2.0 * u * std::exp(-a * u * u) * bessel_J_real(0.0, std::abs(b) * u); },
                        0.0, INFINITY, tight());
    return {q.value, std::exp(-b * b / (4.0 * a)) / a, q.error, 1e-6};
}

Outcome eq_A4(const IdentityParams& p) {
    double s = get(p, "s"), a = get(p, "a"), b = get(p, "b");
    require(a > b && b > 0.0, "a > b > 0");
    require(s >= -0.5, "s >= -1/2 (real order domain)");
    auto g = [=](double t) {
        double x = a * b / t;
        return bessel_I_scaled_real(s, x) * std::exp(-0.5 * t - 0.5 * (a - b) * (a - b) / t) / t;
    };
    QuadResult q = quad(g, 0.0, INFINITY, tight());
    return {q.value, 2.0 * bessel_K(s, a) * bessel_I_real(s, b), q.error, 1e-8};
}

Outcome eq_A5(const IdentityParams& p) {
    double s = get(p, "s"), mu = get(p, "mu"), a = get(p, "a");
    require(a > 0.0, "a > 0");
    require(s > -1.0 && s < 2.0 * mu + 1.5, "-1 < s < 2 mu + 3/2");
    require(s >= -0.5, "s >= -1/2 (real order domain)");
    auto g = [=](double t) { return std::pow(t, s + 1.0) / std::pow(t * t + 1.0, mu + 1.0) * bessel_J_real(s, a * t); };
    // J_s(a t) ~ cos(a t - s pi/2 - pi/4): zeros at a t = (n + 3/4 + s/2) pi.
    double phase = 0.75 + 0.5 * s;
    QuadResult q = split_oscillatory(g, kPi / a, phase, std::max(4.0, 40.0 / a), tight());
    double rhs = std::pow(0.5 * a, mu) * bessel_K(mu - s, a) / std::tgamma(mu + 1.0);
    return {q.value, rhs, q.error, 1e-6};
}

Outcome eq_A2(const IdentityParams& p) {
    double s = get(p, "s"), a = get(p, "a"), b = get(p, "b");
    require(s >= -0.5, "s >= -1/2 (real order domain)");
    require(a > 0.0 && b > a, "b > |a| > 0");
    QuadResult q = quad([=](double t) { return bessel_I_scaled_real(s, a * t) * std::exp(-(b - a) * t); }, 0.0,
                        INFINITY, tight());
    double root = std::sqrt(b * b - a * a);
    double rhs = std::pow(a, s) / root * std::pow(b + root, -s);
    return {q.value, rhs, q.error, 1e-8};
}

Outcome lemma_A1(const IdentityParams& p) {
    double a = get(p, "a"), s = get(p, "s");
    require(a > 0.0 && s > 0.0, "a > 0, s > 0");
    auto g = [=](double xi) {
        double d = xi * xi + 1.0;
        return xi / d * bessel_I_real(s, a / d) * bessel_J_real(0.0, a * xi / d);
    };
    QuadResult q = quad(g, 0.0, INFINITY, tight());
    double rhs = std::pow(a, s) / (std::pow(2.0, s + 1.0) * s * std::tgamma(s + 1.0));
    return {q.value, rhs, q.error, 1e-8};
}

Outcome lemma_A2(const IdentityParams& p) {
    double s = get(p, "s"), z = get(p, "z");
    int j = static_cast<int>(get(p, "j"));
    require(z > 0.0 && j >= 0 && s >= 0.0, "z > 0, j >= 0, s >= 0");
    double sum = 0.0, mag = 0.0, binom = 1.0;
    for (int l = 0; l <= j; ++l) {
        double term = binom * std::pow(-0.5 * z, l) * bessel_K(s + j + l, z) / std::tgamma(s + l + 1.0);
        sum += term;
        mag += std::abs(term);
        binom = binom * (j - l) / (l + 1.0);
    }
    double rhs = std::pow(-0.5 * z, j) * bessel_K(s, z) / std::tgamma(s + j + 1.0);
    return {sum, rhs, 64.0 * kEps * mag, 1e-8};
}

// Right side of the product lemma: sum over n of (x|A|^2/2)^{s+2n}/(n! Gamma(s+n+1)) B_{s+2n}(x).
template <class Bessel>
double product_series(double s, double x, double a2, Bessel bessel, double& tail) {
    double sum = 0.0;
    double lw = std::log(0.5 * x * a2);
    tail = 0.0;
    for (int n = 0; n < 200; ++n) {
        double coef = std::exp((s + 2.0 * n) * lw - std::lgamma(n + 1.0) - std::lgamma(s + n + 1.0));
        double term = coef * bessel(s + 2.0 * n, x);
        sum += term;
        if (n > 4 && std::abs(term) < 1e-18 * std::abs(sum)) {
            tail = std::abs(term);
            break;
        }
    }
    return sum;
}

Outcome lemma_A3(const IdentityParams& p, bool modified) {
    double s = get(p, "s"), theta = get(p, "theta"), x = get(p, "x");
    require(std::abs(theta) < 0.5 * kPi, "Re(A^2) = 1/2 needs |arg A^2| < pi/2");
    require(x > 0.0 && s >= 0.0, "x > 0, s >= 0");
    double a2 = 1.0 / (2.0 * std::cos(theta));
    cplx A = std::polar(std::sqrt(a2), 0.5 * theta);
    cplx lhs;
    double tail = 0.0, rhs;
    if (modified) {
        lhs = bessel_I(s, A * x) * bessel_I(s, std::conj(A) * x);
        rhs = product_series(s, x, a2, [](double nu, double y) { return bessel_I_real(nu, y); }, tail);
    } else {
        lhs = bessel_J(s, A * x) * bessel_J(s, std::conj(A) * x);
        rhs = product_series(s, x, a2, [](double nu, double y) { return bessel_J_real(nu, y); }, tail);
    }
    return {lhs, rhs, tail + 1e-13 * std::abs(rhs), 1e-9};
}

Outcome jmult(const IdentityParams& p) {
    double s = get(p, "s"), lambda = get(p, "lambda"), z = get(p, "z");
    require(lambda > 0.0 && z > 0.0 && s >= 0.0, "lambda > 0, z > 0, s >= 0");
    double q = -0.5 * z * (lambda * lambda - 1.0);
    double sum = 0.0, mag = 0.0, coef = 1.0;
    for (int k = 0; k < 400; ++k) {
        double term = coef * bessel_J_real(s + k, z);
        sum += term;
        mag += std::abs(term);
        if (k > 4 && std::abs(term) < 1e-18 * std::abs(sum)) break;
        coef *= q / (k + 1.0);
    }
    sum *= std::pow(lambda, s);
    return {sum, bessel_J_real(s, lambda * z), 64.0 * kEps * mag * std::pow(lambda, s), 1e-9};
}

Outcome lemma_61_mu0(const IdentityParams& p) {
    double s = get(p, "s"), r = get(p, "r"), rt = get(p, "rt");
    require(r > rt && rt > 0.0 && s > 0.0, "r > rt > 0, s > 0");
    double d2 = (r - rt) * (r - rt), den = 2.0 * r * rt;
    auto g = [=](double t) { return kPi * phi_s_from_u((t + d2) / den, s); };
    // Algebraic tail: integrate it in log t.
    QuadResult head = quad(g, 0.0, 1.0, tight());
    QuadResult tail = quad([&g](double y) { double t = std::exp(y); return g(t) * t; }, 0.0, INFINITY, tight());
    QuadResult q{head.value + tail.value, head.error + tail.error, head.reliable && tail.reliable, 0};
    return {q.value, 2.0 * kPi / s * std::pow(r, 1.0 - s) * std::pow(rt, s + 1.0), q.error, 1e-6};
}

Outcome lemma_61_mu(const IdentityParams& p) {
    double s = get(p, "s"), r = get(p, "r"), rt = get(p, "rt");
    double mu = std::hypot(get(p, "mu_re"), get(p, "mu_im"));
    require(r > rt && rt > 0.0 && s > 0.0 && mu > 0.0, "r > rt > 0, s > 0, mu != 0");
    double d2 = (r - rt) * (r - rt), den = 2.0 * r * rt, k = 4.0 * kPi * mu;
    auto g = [=](double rho) {
        return 2.0 * kPi * phi_s_from_u((rho * rho + d2) / den, s) * bessel_J_real(0.0, k * rho) * rho;
    };
    QuadResult q = split_oscillatory(g, kPi / k, 0.75, 2.0 * r + 40.0 / k, tight());
    double rhs = 4.0 * kPi * r * rt * bessel_K(s, k * r) * bessel_I_real(s, k * rt);
    return {q.value, rhs, q.error, 1e-6};
}

Outcome lemma_62_mu0(const IdentityParams& p) {
    double s = get(p, "s"), r = get(p, "r");
    double nu = std::hypot(get(p, "nu_re"), get(p, "nu_im"));
    double c2 = std::norm(cplx(get(p, "c_re"), get(p, "c_im")));
    require(s > 0.0 && r > 0.0 && nu > 0.0 && c2 > 0.0, "s > 0, r > 0, nu != 0, c != 0");
    double a = 4.0 * kPi * nu / (c2 * r);
    auto g = [=](double xi) {
        double d = xi * xi + 1.0;
        return xi / d * bessel_I_real(s, a / d) * bessel_J_real(0.0, a * xi / d);
    };
    QuadResult q = quad(g, 0.0, INFINITY, tight());
    double pref = 2.0 * kPi * r / c2;
    double rhs = std::pow(kPi, 1.0 + s) * std::pow(2.0, s) * std::pow(nu, s) * std::pow(r, 1.0 - s) /
                 (std::pow(c2, 1.0 + s) * s * std::tgamma(1.0 + s));
    return {pref * q.value, rhs, pref * q.error, 1e-6};
}

Outcome lemma_62_mu(const IdentityParams& p) {
    double s = get(p, "s"), r = get(p, "r");
    cplx nu(get(p, "nu_re"), get(p, "nu_im"));
    cplx mu(get(p, "mu_re"), get(p, "mu_im"));
    cplx c(get(p, "c_re"), get(p, "c_im"));
    require(s > 0.0 && r > 0.0 && nu != 0.0 && mu != 0.0 && c != 0.0, "s > 0, r > 0, nu, mu, c != 0");
    cplx beta = nu * mu / (c * c);
    double bmag = std::abs(beta), mmag = std::abs(mu), c2 = std::norm(c);
    double rs = r * mmag;
    auto g = [=](double rho) {
        double d = rho * rho + rs * rs;
        double arg = 4.0 * kPi * rho * std::abs(beta + d) / d;
        return rho / d * bessel_I_real(s, 4.0 * kPi * bmag * rs / d) * bessel_J_real(0.0, arg);
    };
    // Break at the zeros of cos(phase - pi/4), phase(rho) = 4 pi rho |beta + d| / d, found by Newton.
    auto phase = [=](double rho) {
        double d = rho * rho + rs * rs;
        return 4.0 * kPi * rho * std::abs(beta + d) / d;
    };
    double start = 2.0 * rs + 4.0 * std::sqrt(bmag) + 10.0;
    int n0 = static_cast<int>(std::ceil(4.0 * start));
    auto breakpoint = [=](int k) {
        double target = (n0 + k + 0.75) * kPi;
        double x = target / (4.0 * kPi);
        for (int it = 0; it < 50; ++it) {
            double h = 1e-6 * x;
            double f0 = phase(x) - target;
            double df = (phase(x + h) - phase(x - h)) / (2.0 * h);
            double step = f0 / df;
            x -= step;
            if (std::abs(step) < 1e-15 * x) break;
        }
        return x;
    };
    QuadResult head = quad(g, 0.0, breakpoint(0), tight());
    QuadResult tail = quad_oscillatory_breaks(g, breakpoint, tight());
    QuadResult q{head.value + tail.value, head.error + tail.error, head.reliable && tail.reliable, 0};
    double pref = 2.0 * kPi * rs / (c2 * mmag);
    cplx rhs = 2.0 * kPi / c2 * r * bessel_K(s, 4.0 * kPi * mmag * r) * script_J(s, beta);
    return {pref * q.value, rhs, pref * q.error, 1e-6};
}


struct Entry {
    const char* id;
    std::function<Outcome(const IdentityParams&)> eval;
    std::vector<IdentityParams> grid;
};

const std::vector<Entry>& registry() {
    static const std::vector<Entry> entries = {
        {"A1", eq_A1, {{{"a", 0.5}}, {{"a", 1.0}}, {{"a", 3.7}}, {{"a", 10.0}}, {{"a", 20.0}}}},
        {"A2",
         eq_A2,
         {{{"s", 1.0}, {"a", 1.0}, {"b", 2.0}},
          {{"s", 0.0}, {"a", 1.0}, {"b", 1.5}},
          {{"s", 0.5}, {"a", 2.0}, {"b", 3.0}},
          {{"s", 2.0}, {"a", 0.5}, {"b", 1.0}},
          {{"s", 1.5}, {"a", 1.0}, {"b", 1.2}}}},
        {"A3",
         eq_A3,
         {{{"a", 1.0}, {"b", 2.0}},
          {{"a", 2.0}, {"b", 5.0}},
          {{"a", 0.5}, {"b", 1.0}},
          {{"a", 3.0}, {"b", 4.0}},
          {{"a", 1.0}, {"b", 0.3}}}},
        {"A4",
         eq_A4,
         {{{"s", 1.0}, {"a", 2.0}, {"b", 1.0}},
          {{"s", 0.5}, {"a", 3.0}, {"b", 1.0}},
          {{"s", 2.0}, {"a", 1.5}, {"b", 0.7}},
          {{"s", 0.0}, {"a", 4.0}, {"b", 3.0}},
          {{"s", 1.5}, {"a", 2.5}, {"b", 0.4}}}},
        {"A5",
         eq_A5,
         {{{"s", 0.0}, {"mu", 1.0}, {"a", 1.0}},
          {{"s", 1.0}, {"mu", 2.0}, {"a", 2.0}},
          {{"s", 0.5}, {"mu", 1.5}, {"a", 3.0}},
          {{"s", 0.0}, {"mu", 2.0}, {"a", 0.7}},
          {{"s", 1.5}, {"mu", 2.5}, {"a", 1.2}}}},
        {"LemmaA1",
         lemma_A1,
         {{{"a", 1.0}, {"s", 1.0}},
          {{"a", 2.0}, {"s", 0.5}},
          {{"a", 5.0}, {"s", 1.5}},
          {{"a", 0.3}, {"s", 2.0}},
          {{"a", 10.0}, {"s", 1.0}}}},
        {"LemmaA2",
         lemma_A2,
         {{{"s", 0.5}, {"z", 1.0}, {"j", 0}},
          {{"s", 1.0}, {"z", 2.0}, {"j", 3}},
          {{"s", 1.5}, {"z", 3.0}, {"j", 2}},
          {{"s", 0.3}, {"z", 2.5}, {"j", 2}},
          {{"s", 2.0}, {"z", 5.0}, {"j", 4}},
          {{"s", 0.7}, {"z", 4.0}, {"j", 3}}}},
        {"LemmaA3J",
         [](const IdentityParams& p) { return lemma_A3(p, false); },
         {{{"s", 1.0}, {"theta", kPi / 3}, {"x", 3.0}},
          {{"s", 0.5}, {"theta", kPi / 6}, {"x", 1.0}},
          {{"s", 1.5}, {"theta", -kPi / 4}, {"x", 5.0}},
          {{"s", 0.0}, {"theta", 0.0}, {"x", 2.0}},
          {{"s", 2.0}, {"theta", 1.2}, {"x", 7.0}}}},
        {"LemmaA3I",
         [](const IdentityParams& p) { return lemma_A3(p, true); },
         {{{"s", 1.0}, {"theta", kPi / 3}, {"x", 3.0}},
          {{"s", 0.5}, {"theta", kPi / 6}, {"x", 1.0}},
          {{"s", 1.5}, {"theta", -kPi / 4}, {"x", 5.0}},
          {{"s", 0.0}, {"theta", 0.0}, {"x", 2.0}},
          {{"s", 2.0}, {"theta", 1.2}, {"x", 7.0}}}},
        {"Jmult",
         jmult,
         {{{"s", 0.0}, {"lambda", 1.3}, {"z", 2.0}},
          {{"s", 1.0}, {"lambda", 0.7}, {"z", 3.0}},
          {{"s", 0.5}, {"lambda", 1.1}, {"z", 10.0}},
          {{"s", 2.0}, {"lambda", 1.5}, {"z", 4.0}},
          {{"s", 1.5}, {"lambda", 0.9}, {"z", 6.0}}}},
        {"Lemma61_mu0",
         lemma_61_mu0,
         {{{"s", 1.5}, {"r", 2.0}, {"rt", 1.0}},
          {{"s", 1.0}, {"r", 1.2}, {"rt", 0.8}},
          {{"s", 2.0}, {"r", 3.0}, {"rt", 0.5}},
          {{"s", 0.6}, {"r", 1.0}, {"rt", 0.9}}}},
        {"Lemma61_mu",
         lemma_61_mu,
         {{{"s", 1.5}, {"r", 1.0}, {"rt", 0.6}, {"mu_re", 0.5}, {"mu_im", 0.0}},
          {{"s", 1.0}, {"r", 0.8}, {"rt", 0.5}, {"mu_re", 0.0}, {"mu_im", 0.5}},
          {{"s", 2.0}, {"r", 1.2}, {"rt", 1.0}, {"mu_re", 0.5}, {"mu_im", 0.5}},
          {{"s", 1.2}, {"r", 0.5}, {"rt", 0.2}, {"mu_re", 1.0}, {"mu_im", 0.0}}}},
        {"Lemma62_mu0",
         lemma_62_mu0,
         {{{"s", 1.5}, {"r", 1.0}, {"nu_re", 0.5}, {"nu_im", 0.0}, {"c_re", 1.0}, {"c_im", 0.0}},
          {{"s", 1.0}, {"r", 0.7}, {"nu_re", 0.5}, {"nu_im", 0.5}, {"c_re", 1.0}, {"c_im", 1.0}},
          {{"s", 2.0}, {"r", 2.0}, {"nu_re", 0.0}, {"nu_im", 1.0}, {"c_re", 2.0}, {"c_im", 1.0}},
          {{"s", 0.7}, {"r", 1.3}, {"nu_re", 0.5}, {"nu_im", 0.0}, {"c_re", 1.0}, {"c_im", 0.0}}}},
        {"Lemma62_mu",
         lemma_62_mu,
         {// Re(beta) > 0
          {{"s", 1.5}, {"r", 0.6}, {"nu_re", 0.5}, {"nu_im", 0.0}, {"mu_re", 0.5}, {"mu_im", 0.0}, {"c_re", 1.0}, {"c_im", 0.0}},
          {{"s", 1.2}, {"r", 0.8}, {"nu_re", 0.5}, {"nu_im", 0.0}, {"mu_re", 0.3}, {"mu_im", 0.2}, {"c_re", 1.0}, {"c_im", 0.0}},
          {{"s", 2.0}, {"r", 0.4}, {"nu_re", 0.5}, {"nu_im", 0.5}, {"mu_re", 1.0}, {"mu_im", 0.0}, {"c_re", 1.0}, {"c_im", 1.0}},
          // Re(beta) < 0
          {{"s", 1.2}, {"r", 0.5}, {"nu_re", 0.0}, {"nu_im", 0.5}, {"mu_re", 0.0}, {"mu_im", 0.5}, {"c_re", 1.0}, {"c_im", 0.0}},
          {{"s", 1.5}, {"r", 0.6}, {"nu_re", 0.5}, {"nu_im", 0.0}, {"mu_re", -0.5}, {"mu_im", 0.5}, {"c_re", 1.0}, {"c_im", 0.0}},
          {{"s", 1.8}, {"r", 0.5}, {"nu_re", 1.0}, {"nu_im", 0.0}, {"mu_re", 0.5}, {"mu_im", 0.0}, {"c_re", 0.0}, {"c_im", 1.0}},
          // Re(beta) = 0
          {{"s", 1.5}, {"r", 0.7}, {"nu_re", 0.5}, {"nu_im", 0.0}, {"mu_re", 0.0}, {"mu_im", 0.5}, {"c_re", 1.0}, {"c_im", 0.0}},
          {{"s", 1.0}, {"r", 0.6}, {"nu_re", 0.5}, {"nu_im", 0.0}, {"mu_re", 0.5}, {"mu_im", 0.0}, {"c_re", 1.0}, {"c_im", 1.0}},
          {{"s", 2.0}, {"r", 0.8}, {"nu_re", 0.5}, {"nu_im", 0.0}, {"mu_re", 0.0}, {"mu_im", -0.5}, {"c_re", 1.0}, {"c_im", 0.0}}}},
    };
    return entries;
}

const Entry& find_entry(const std::string& id) {
    for (const auto& e : registry())
        if (id == e.id) return e;
    throw std::invalid_argument("unknown identity id '" + id + "'");
}

}  // namespace

const std::vector<std::string>& identity_ids() {
    static const std::vector<std::string> ids = [] {
        std::vector<std::string> out;
        for (const auto& e : registry()) out.emplace_back(e.id);
        return out;
    }();
    return ids;
}

IdentityReport verify_identity(const std::string& identity_id, const IdentityParams& params) {
    const Entry& e = find_entry(identity_id);
    Outcome o = e.eval(params);
    IdentityReport rep;
    rep.identity_id = identity_id;
    rep.params = params;
    rep.lhs = o.lhs;
    rep.rhs = o.rhs;
    rep.rel_error = std::abs(o.lhs - o.rhs) / std::max(std::abs(o.rhs), 1e-300);
    // Floor the estimate at the rounding level of both sides.
    rep.quadrature_error_estimate = o.err + 1e-14 * std::abs(o.lhs) + 1e-13 * std::abs(o.rhs);
    rep.tolerance = o.tol;
    rep.pass = std::isfinite(rep.rel_error) && rep.rel_error <= o.tol;
    return rep;
}

std::vector<IdentityParams> default_identity_grid(const std::string& identity_id) {
    return find_entry(identity_id).grid;
}

std::vector<IdentityReport> run_identity_suite(const std::string& filter) {
    std::vector<IdentityReport> out;
    for (const auto& e : registry()) {
        std::string id = e.id;
        if (!filter.empty() && id.rfind(filter, 0) != 0) continue;
        for (const auto& p : e.grid) out.push_back(verify_identity(id, p));
    }
    return out;
}

}  // namespace bianchi
