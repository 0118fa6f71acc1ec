#include "doctest.h"

#include "bianchi/arithsums.h"
#include "bianchi/h3geom.h"
#include "bianchi/specfun.h"

#include <cmath>
#include <numbers>
#include <random>
#include <set>

using namespace bianchi;

namespace {

const double kPi = std::numbers::pi;

// Coprimality by searching for a common non-unit divisor among small elements.
bool coprime_brute(const FieldContext& f, const AlgInt& c, const AlgInt& d) {
    std::int64_t bound = d.is_zero() ? f.norm(c) : std::min(f.norm(c), f.norm(d));
    for (const auto& delta : enumerate_bounded(f, std::sqrt(double(bound)) + 1e-9)) {
        if (f.norm(delta) <= 1) continue;
        if (f.divides(delta, c) && f.divides(delta, d)) return false;
    }
    return true;
}

// Kloosterman sum from a brute search for inverses and floating-point phases.
std::complex<double> kloosterman_brute(const FieldContext& f, const DualPoint& nu, const DualPoint& mu,
                                       const AlgInt& c) {
    auto res = residues_mod(f, c);
    std::complex<double> acc = 0.0;
    cplx cc = f.embed(c), vn = f.embed(nu), vm = f.embed(mu);
    for (const auto& u : res) {
        for (const auto& v : res) {
            AlgInt prod = f.mul(u, v) - AlgInt{1, 0};
            if (!f.divides(c, prod)) continue;
            double tr = trace_c((f.embed(u) * vn + f.embed(v) * vm) / cc);
            acc += std::polar(1.0, 2 * kPi * tr);
        }
    }
    return acc;
}

DualPoint random_dual(std::mt19937_64& rng, int bound) {
    std::uniform_int_distribution<int> dist(-bound, bound);
    for (;;) {
        DualPoint p{{dist(rng), dist(rng)}};
        if (!p.is_zero()) return p;
    }
}

}  // namespace

TEST_CASE("coset enumeration against a brute-force pair count") {
    FieldContext f = make_field(-4);
    auto reps = cosets_bounded(f, 1.0, 1.0);
    int unit_cosets = 0, brute = 0;
    for (const auto& r : reps) {
        CHECK(f.mul(r.a, r.d) - f.mul(r.b, r.c) == AlgInt{1, 0});
        if (r.is_c_zero) ++unit_cosets;
    }
    CHECK(unit_cosets == 2);
    for (int cx = -2; cx <= 2; ++cx)
        for (int cy = -2; cy <= 2; ++cy)
            for (int dx = -2; dx <= 2; ++dx)
                for (int dy = -2; dy <= 2; ++dy) {
                    AlgInt c{cx, cy}, d{dx, dy};
                    if (c.is_zero() || f.norm(c) > 1 || f.norm(d) > 1) continue;
                    if (!(sign_normalize(c) == c)) continue;
                    if (coprime_brute(f, c, d)) ++brute;
                }
    CHECK(static_cast<int>(reps.size()) - unit_cosets == brute);
    CHECK(brute == 10);

    for (int d : {-3, -7, -8, -11}) {
        FieldContext g = make_field(d);
        auto more = cosets_bounded(g, 3.0, 4.0);
        std::set<std::pair<std::pair<std::int64_t, std::int64_t>, std::pair<std::int64_t, std::int64_t>>> rows;
        for (const auto& r : more) {
            CHECK(g.mul(r.a, r.d) - g.mul(r.b, r.c) == AlgInt{1, 0});
            rows.insert({{r.c.x, r.c.y}, {r.d.x, r.d.y}});
        }
        CHECK(rows.size() == more.size());
    }
}

TEST_CASE("summands are periodic along a coset") {
    FieldContext f = make_field(-4);
    Point p{cplx(0.13, 0.21), 0.8};
    for (const auto& rep : cosets_bounded(f, 3.0, 3.0)) {
        Motion g = Motion::from_integers(f, rep.a, rep.b, rep.c, rep.d);
        AlgInt lam{2, -1};
        Motion h = Motion::from_integers(f, rep.a + f.mul(lam, rep.c), rep.b + f.mul(lam, rep.d), rep.c, rep.d);
        Point gp = apply(g, p), hp = apply(h, p);
        CHECK(std::pow(gp.r, 2.5) == doctest::Approx(std::pow(hp.r, 2.5)).epsilon(1e-12));
        DualPoint nu{{1, 2}};
        auto niebur = [&](const Point& q) {
            double ph = 2 * kPi * trace_c(f.embed(nu) * q.z);
            return q.r * bessel_I_real(1.6, 4 * kPi * std::abs(f.embed(nu)) * q.r) * std::polar(1.0, ph);
        };
        CHECK(std::abs(niebur(gp) - niebur(hp)) <= 1e-12 * (1 + std::abs(niebur(gp))));
    }
}

TEST_CASE("exact trace phases") {
    std::mt19937_64 rng(31);
    for (int d : {-3, -4, -7, -8, -11}) {
        FieldContext f = make_field(d);
        for (int k = 0; k < 200; ++k) {
            AlgInt w{std::uniform_int_distribution<int>(-50, 50)(rng), std::uniform_int_distribution<int>(-50, 50)(rng)};
            AlgInt c{std::uniform_int_distribution<int>(-9, 9)(rng), std::uniform_int_distribution<int>(-9, 9)(rng)};
            if (c.is_zero()) continue;
            double tr = trace_c(f.embed(w) / (f.embed(c) * f.sqrt_dk()));
            double frac = tr * f.norm(c) - double(trace_phase(f, w, c));
            CHECK(std::abs(frac - std::round(frac)) < 1e-8);
            double q = frac / double(f.norm(c));
            CHECK(std::abs(q - std::round(q)) < 1e-8);
        }
    }
    CHECK(unit_root(3, 12) == std::complex<double>(0.0, 1.0));
    CHECK(unit_root(-5, 7) == std::conj(unit_root(5, 7)));
}

TEST_CASE("Kloosterman sums: examples and brute-force oracle") {
    FieldContext f = make_field(-4);
    DualPoint half{{0, 1}};  // mu = i / (2i) = 1/2
    CHECK(f.embed(half) == cplx(0.5, 0.0));
    CHECK(kloosterman_S(f, half, half, {2, 0}).value == std::complex<double>(2.0, 0.0));
    CHECK(kloosterman_S(f, half, half, {1, 0}).value == std::complex<double>(1.0, 0.0));
    CHECK(kloosterman_S(f, half, half, {0, 1}).value == std::complex<double>(1.0, 0.0));
    CHECK_THROWS_AS(kloosterman_S(f, half, half, {0, 0}), std::invalid_argument);

    std::mt19937_64 rng(32);
    for (int d : {-3, -4, -7, -8, -11}) {
        FieldContext g = make_field(d);
        for (const auto& c : moduli_bounded(g, 4.0)) {
            DualPoint nu = random_dual(rng, 6), mu = random_dual(rng, 6);
            auto kv = kloosterman_S(g, nu, mu, c);
            CHECK(std::abs(kv.value - kloosterman_brute(g, nu, mu, c)) < 1e-9);
        }
    }
}

TEST_CASE("Kloosterman symmetries and trivial bound") {
    std::mt19937_64 rng(33);
    FieldContext f = make_field(-4);
    auto cs = moduli_bounded(f, std::sqrt(200.0));
    for (int k = 0; k < 20; ++k) {
        DualPoint nu = random_dual(rng, 10), mu = random_dual(rng, 10);
        DualPoint mnu{-nu.m}, mmu{-mu.m};
        for (const auto& c : cs) {
            auto s1 = kloosterman_S(f, nu, mu, c).value;
            CHECK(std::abs(s1) <= double(f.norm(c)) * (1 + 1e-12));
            CHECK(kloosterman_S(f, mu, nu, c).value == s1);
            CHECK(kloosterman_S(f, mnu, mmu, c).value == std::conj(s1));
        }
    }
}

TEST_CASE("Ramanujan sums are real and match the divisor formula") {
    FieldContext f = make_field(-4);
    for (const auto& c : moduli_bounded(f, 6.0)) {
        CHECK(ramanujan_sum(f, {{0, 0}}, c) == doctest::Approx(double(euler_phi(f, c))));
        // mu with c | m sums every invertible residue to phi(c).
        DualPoint mu{f.mul(c, {1, 1})};
        CHECK(ramanujan_sum(f, mu, c) == doctest::Approx(double(euler_phi(f, c))));
    }
}

TEST_CASE("Z partial sums") {
    FieldContext f = make_field(-4);
    DualPoint nu{{1, 0}}, mu{{2, 1}};
    double prev = 0.0;
    for (double C : {4.0, 8.0, 12.0}) {
        auto z = Z_partial(f, nu, mu, 2.0, C);
        CHECK(z.value >= prev);
        prev = z.value;
        double majorant = 0.0;
        for (const auto& c : moduli_bounded(f, C)) majorant += double(f.norm(c)) / std::pow(double(f.norm(c)), 3.0);
        CHECK(z.value <= majorant);
    }
    double s8 = Z_partial(f, nu, mu, 0.75, 8.0).last_shell;
    double s16 = Z_partial(f, nu, mu, 0.75, 16.0).last_shell;
    double s32 = Z_partial(f, nu, mu, 0.75, 32.0).last_shell;
    CHECK(s16 < s8);
    CHECK(s32 < s16);
}

TEST_CASE("scattering coefficient phi") {
    FieldContext f = make_field(-4);
    double closed = kPi * 4 * dedekind_zeta(f, 2.0) / (2 * 2 * dedekind_zeta(f, 3.0));
    CHECK(phi_scattering(f, std::nullopt, 2.0, 1.0).real() == doctest::Approx(closed).epsilon(1e-14));
    CHECK_THROWS_AS(phi_scattering(f, std::nullopt, 1.0 + 1e-7, 1.0), std::invalid_argument);

    // (s - 1) phi(0; s) extrapolated on eps = 0.1, 0.05, 0.025 (quadratic through three points).
    double e[3] = {0.1, 0.05, 0.025}, v[3];
    for (int i = 0; i < 3; ++i) v[i] = e[i] * phi_scattering(f, std::nullopt, 1 + e[i], 1.0).real();
    double l01 = (e[1] * v[0] - e[0] * v[1]) / (e[1] - e[0]);
    double l12 = (e[2] * v[1] - e[1] * v[2]) / (e[2] - e[1]);
    double res = (e[2] * l01 - e[0] * l12) / (e[2] - e[0]);
    CHECK(res == doctest::Approx(f.covol / volume(f)).epsilon(1e-4));
    // mpmath: 2 pi^2 / (4 zeta_K(2)) with zeta_K(2) = zeta(2) L(2, chi_-4).
    CHECK(f.covol / volume(f) == doctest::Approx(3.2752321911117183).epsilon(1e-12));

    DualPoint mu{{1, 0}};
    double p20 = phi_scattering(f, mu, 2.0, 20.0).real();
    double p40 = phi_scattering(f, mu, 2.0, 40.0).real();
    CHECK(std::abs(p20 - p40) < 1e-4 * std::abs(p40));
    CHECK(p40 == doctest::Approx(phi_scattering_exact(f, mu, 2.0)).epsilon(1e-5));
    CHECK_THROWS_AS(phi_scattering(f, mu, 1.0, 10.0), std::invalid_argument);

    // Divisor-sum closed form against partial sums where they converge fast.
    for (int d : {-3, -4, -7, -8, -11}) {
        FieldContext g = make_field(d);
        for (const auto& m : enumerate_bounded(g, 3.0)) {
            double part = phi_scattering(g, DualPoint{m}, 4.0, 30.0).real();
            CHECK(part == doctest::Approx(phi_scattering_exact(g, DualPoint{m}, 4.0)).epsilon(1e-8));
        }
        double z0 = 0.0;
        for (const auto& c : moduli_bounded(g, 30.0)) z0 += phi_term(g, DualPoint{}, c, 4.0);
        CHECK(z0 == doctest::Approx(phi_scattering_exact(g, DualPoint{}, 4.0)).epsilon(1e-8));
    }
}

TEST_CASE("B coefficients: both groupings agree exactly") {
    std::mt19937_64 rng(34);
    for (int d : {-3, -4, -7}) {
        FieldContext f = make_field(d);
        for (int k = 0; k < 5; ++k) {
            DualPoint nu = random_dual(rng, 4), mu = random_dual(rng, 4);
            auto a = B_terms(f, nu, mu, 1.5, 8.0, BForm::double_coset);
            auto b = B_terms(f, nu, mu, 1.5, 8.0, BForm::kloosterman);
            REQUIRE(a.size() == b.size());
            for (std::size_t i = 0; i < a.size(); ++i) {
                CHECK(a[i].c == b[i].c);
                CHECK(a[i].value == b[i].value);
            }
        }
    }
}

TEST_CASE("B coefficients: symmetry and shell decay") {
    FieldContext f = make_field(-4);
    DualPoint nu{{0, 1}}, mu{{1, 0}};  // |nu mu| = 1/4
    auto b10 = B_coeff(f, nu, mu, 1.5, 10.0);
    auto b20 = B_coeff(f, nu, mu, 1.5, 20.0);
    CHECK(std::isfinite(b20.value.real()));
    CHECK(b20.last_shell < b10.last_shell);
    CHECK(std::abs(b20.value - b10.value) < 0.05 * std::abs(b20.value));
    CHECK(B_coeff(f, mu, nu, 1.5, 10.0).value == b10.value);
    auto bc = B_coeff(f, DualPoint{-nu.m}, DualPoint{-mu.m}, 1.5, 10.0);
    CHECK(std::abs(bc.value - std::conj(b10.value)) < 1e-12 * std::abs(b10.value));
}
