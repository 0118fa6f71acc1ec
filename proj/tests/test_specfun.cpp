#include "doctest.h"

#include "bianchi/identities.h"
#include "bianchi/quadrature.h"
#include "bianchi/specfun.h"

#include <cmath>
#include <numbers>

using namespace bianchi;

namespace {

const double kPi = std::numbers::pi;

double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("Bessel I and J: trivial values and half order") {
    CHECK(bessel_I(0.0, 0.0) == cplx(1.0, 0.0));
    CHECK(bessel_J(1.3, 0.0) == cplx(0.0, 0.0));
    for (double x : {1.0, 5.0, 20.0}) {
        double closed = std::sqrt(2.0 / (kPi * x)) * std::sinh(x);
        CHECK(rel(bessel_I(0.5, x), closed) < 1e-10);
        CHECK(bessel_I_real(0.5, x) == doctest::Approx(closed).epsilon(1e-12));
        CHECK(rel(bessel_J(0.5, x), std::sqrt(2.0 / (kPi * x)) * std::sin(x)) < 1e-9);
    }
    for (double s : {0.0, 0.7, 2.0}) {
        cplx w(1e-4, 2e-4);
        CHECK(rel(bessel_I(s, w) * std::tgamma(s + 1) / std::pow(w / 2.0, s), 1.0) < 1e-7);
    }
    CHECK_THROWS_AS(bessel_I(0.5, -2.0), std::domain_error);
    CHECK_THROWS_AS(bessel_J(-0.7, 1.0), std::domain_error);
}

TEST_CASE("Bessel I and J against high-precision values") {
    // mpmath besseli / besselj at 30 digits.
    struct Row {
        double s;
        cplx w, i, j;
    } rows[] = {
        {1.5, {3, 2}, {-1.0905722640179876, 3.120398323756305}, {1.2764946733264982, -0.56142528882902083}},
        {0.5, {10, -7}, {2305.2089924028166, -1005.8969454749811}, {-96.558869752435649, 79.727705992555548}},
        {2.3, {28, 5}, {21158360373.544364, -96716647637.137208}, {2.3453488293640931, 10.69161421986028}},
        {0.0, {40, 10}, {-13195040648338401.0, -6406175812525086.2}, {-87.893093714860844, -1366.6311491439501}},
        {1.0, {0.01, 0.02}, {0.0049993125106770992, 0.0099998749901043177}, {0.0050006875106770677, 0.010000124990104016}},
    };
    for (const auto& r : rows) {
        double tol = std::abs(r.w) <= 30 ? 1e-10 : 1e-8;
        CHECK(rel(bessel_I(r.s, r.w), r.i) < tol);
        CHECK(rel(bessel_J(r.s, r.w), r.j) < tol);
    }
}

TEST_CASE("series and asymptotic regimes agree across the crossover") {
    for (double s : {0.0, 0.5, 1.0, 1.5, 3.0}) {
        for (double m : {25.0, 30.0, 35.0}) {
            for (double a : {-1.2, -0.6, 0.0, 0.4, 1.1}) {
                cplx w = std::polar(m, a);
                CHECK(rel(bessel_I_series(s, w), bessel_I_asymptotic(s, w)) < 1e-7);
                CHECK(rel(bessel_J_series(s, w), bessel_J_asymptotic(s, w)) < 1e-7);
            }
        }
    }
}

TEST_CASE("Bessel K") {
    CHECK(bessel_K(0.5, 1.0) == doctest::Approx(std::sqrt(kPi / 2) * std::exp(-1.0)).epsilon(1e-12));
    CHECK(bessel_K(0.5, 1.0) == doctest::Approx(0.4610685).epsilon(1e-7));
    // mpmath besselk.
    CHECK(bessel_K(0.0, 1.0) == doctest::Approx(0.42102443824070833).epsilon(1e-10));
    CHECK(bessel_K(1.0, 2.5) == doctest::Approx(0.073890816347747064).epsilon(1e-10));
    CHECK(bessel_K(1.7, 10.0) == doctest::Approx(2.0404704827133554e-5).epsilon(1e-10));
    CHECK(bessel_K(0.3, 0.05) == doctest::Approx(3.8119663367691107).epsilon(1e-10));
    CHECK(bessel_K(2.5, 40.0) == doctest::Approx(9.0660051518106025e-19).epsilon(1e-10));
    for (double s : {0.0, 1.0, 2.5}) {
        double prev = 0.0;
        for (double x : {10.0, 50.0, 100.0}) {
            double scaled = bessel_K(s, x) * std::sqrt(x) * std::exp(x);
            CHECK(scaled < 2.0);
            if (prev > 0) CHECK(std::abs(scaled - prev) < 0.5);
            prev = scaled;
        }
    }
    double triples[3][2] = {{0, 1}, {1, 2.5}, {1.7, 10}};
    for (auto& t : triples) {
        double s = t[0], x = t[1];
        double w = bessel_I_real(s, x) * bessel_K(s + 1, x) + bessel_I_real(s + 1, x) * bessel_K(s, x);
        CHECK(w == doctest::Approx(1.0 / x).epsilon(1e-9));
    }
    for (double s : {0.5, 1.0, 1.3, 2.0}) {
        for (double x : {0.3, 1.0, 4.0, 12.0}) {
            double lhs = bessel_K(s + 1, x) - bessel_K(s - 1 < 0 ? 1 - s : s - 1, x);
            CHECK(lhs == doctest::Approx(2 * s / x * bessel_K(s, x)).epsilon(1e-9));
            double orders[4];
            bessel_K_orders(s, x, 4, orders);
            for (int k = 0; k < 4; ++k) CHECK(orders[k] == doctest::Approx(bessel_K(s + k, x)).epsilon(1e-9));
        }
    }
    CHECK_THROWS_AS(bessel_K(1.0, 0.0), std::domain_error);
}

TEST_CASE("phi_s kernel") {
    double t = 1 + 1e-8;
    // Next order: 1 - s sqrt(2(t-1)).
    CHECK(phi_s(t, 1.3) * std::sqrt(2 * (t - 1)) == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(phi_s(t, 1.3) * std::sqrt(2 * (t - 1)) == doctest::Approx(1 - 1.3 * std::sqrt(2e-8)).epsilon(1e-7));
    CHECK(phi_s_from_u(1e-12, 1.3) * std::sqrt(2e-12) == doctest::Approx(1 - 1.3 * std::sqrt(2e-12)).epsilon(1e-9));
    for (double tt : {1.5, 3.0, 20.0}) CHECK(phi_s(tt, 0.0) == doctest::Approx(1.0 / std::sqrt(tt * tt - 1)));
    for (double s : {0.5, 1.0, 2.0}) {
        auto lg = [&](double d) { return std::log(phi_s(std::cosh(d), s)); };
        CHECK((lg(20.0) - lg(10.0)) / 10.0 == doctest::Approx(-(s + 1)).epsilon(1e-6));
    }
    CHECK_THROWS_AS(phi_s(1.0, 1.0), std::domain_error);
}

TEST_CASE("script J branches") {
    for (double s : {1.0, 1.5}) {
        for (double x : {0.1, 1.0, 3.0}) {
            cplx neg = script_J(s, -x), pos = script_J(s, x);
            double i = bessel_I_real(s, 4 * kPi * std::sqrt(x)), j = bessel_J_real(s, 4 * kPi * std::sqrt(x));
            CHECK(neg.imag() == doctest::Approx(0.0));
            CHECK(neg.real() == doctest::Approx(i * i).epsilon(1e-10));
            CHECK(pos.real() == doctest::Approx(j * j).epsilon(1e-9));
        }
        for (double t : {0.1, 1.0, 10.0}) {
            cplx z(0.0, t);
            CHECK(rel(script_J_jbranch(s, z), script_J_ibranch(s, z)) < 1e-9);
        }
    }
    CHECK_THROWS_AS(script_J(1.0, 0.0), std::domain_error);
}

TEST_CASE("quadrature calibration") {
    auto r = quad([](double t) { return std::exp(-t); }, 0.0, INFINITY);
    CHECK(std::abs(r.value - 1.0) <= 1e-12);
    CHECK(r.reliable);
    QuadConfig expc;
    expc.semiinf_transform = SemiInfMap::exp_map;
    CHECK(std::abs(quad([](double t) { return std::exp(-t); }, 0.0, INFINITY, expc).value - 1.0) <= 1e-12);
    auto s = quad([](double t) { return 1.0 / std::sqrt(t); }, 0.0, 1.0);
    CHECK(s.value == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(std::abs(s.value - 2.0) <= s.error + 1e-12);
    const auto& g = gauss_legendre(20);
    double acc = 0;
    for (std::size_t k = 0; k < g.nodes.size(); ++k) acc += g.weights[k] * std::pow(g.nodes[k], 10);
    CHECK(acc == doctest::Approx(2.0 / 11).epsilon(1e-14));
}

TEST_CASE("identity corpus") {
    int honest = 0, total = 0;
    for (const auto& rep : run_identity_suite()) {
        INFO(rep.identity_id << " rel_error " << rep.rel_error);
        CHECK(rep.pass);
        ++total;
        if (std::abs(rep.lhs - rep.rhs) <= rep.quadrature_error_estimate) ++honest;
    }
    CHECK(total >= 40);
    CHECK(honest >= 0.95 * total);

    auto a4 = verify_identity("A4", {{"s", 1.0}, {"a", 2.0}, {"b", 1.0}});
    CHECK(a4.rel_error <= 1e-8);
    CHECK(std::abs(a4.rhs - 2 * bessel_K(1, 2) * bessel_I_real(1, 1)) < 1e-12);
    auto l61 = verify_identity("Lemma61_mu0", {{"s", 1.5}, {"r", 2.0}, {"rt", 1.0}});
    CHECK(l61.rel_error <= 1e-6);
    CHECK(l61.rhs.real() == doctest::Approx(2 * kPi / 1.5 * std::pow(2.0, -0.5)).epsilon(1e-12));
    CHECK_THROWS_AS(verify_identity("A4", {{"s", 1.0}, {"a", 1.0}, {"b", 2.0}}), std::invalid_argument);
    CHECK_THROWS_AS(verify_identity("nope", {}), std::invalid_argument);
}
