#include "bianchi/h3geom.h"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace bianchi {

namespace {

constexpr double kPi = std::numbers::pi;

void require_gaussian(const FieldContext& ctx) {
    if (ctx.d_K != -4) throw std::invalid_argument("fundamental domain implemented for d_K = -4 only");
}

// First nonzero entry gets argument in (-pi/2, pi/2].
bool needs_flip(const cplx& v) {
    double ang = std::arg(v);
    return !(ang > -0.5 * kPi && ang <= 0.5 * kPi);
}

}  // namespace

double qnorm(const Point& p) { return std::sqrt(std::norm(p.z) + p.r * p.r); }

Motion Motion::make(cplx a, cplx b, cplx c, cplx d) {
    cplx det = a * d - b * c;
    double scale = std::max({std::abs(a * d), std::abs(b * c), 1.0});
    if (std::abs(det - 1.0) > 1e-12 * scale) throw std::invalid_argument("motion determinant differs from 1");
    Motion g;
    g.a = a;
    g.b = b;
    g.c = c;
    g.d = d;
    const cplx* entries[] = {&g.a, &g.b, &g.c, &g.d};
    for (const cplx* e : entries) {
        if (*e == cplx(0.0, 0.0)) continue;
        if (needs_flip(*e)) {
            g.a = -g.a;
            g.b = -g.b;
            g.c = -g.c;
            g.d = -g.d;
        }
        break;
    }
    return g;
}

Motion Motion::from_integers(const FieldContext& ctx, const AlgInt& a, const AlgInt& b, const AlgInt& c,
                             const AlgInt& d) {
    AlgInt det = ctx.mul(a, d) - ctx.mul(b, c);
    if (!(det == AlgInt{1, 0})) throw std::invalid_argument("integral motion must have determinant 1");
    return make(ctx.embed(a), ctx.embed(b), ctx.embed(c), ctx.embed(d));
}

Motion Motion::operator*(const Motion& o) const {
    Motion g;
    g.a = a * o.a + b * o.c;
    g.b = a * o.b + b * o.d;
    g.c = c * o.a + d * o.c;
    g.d = c * o.b + d * o.d;
    // Renormalize the sign only; the determinant is inherited.
    const cplx* entries[] = {&g.a, &g.b, &g.c, &g.d};
    for (const cplx* e : entries) {
        if (*e == cplx(0.0, 0.0)) continue;
        if (needs_flip(*e)) {
            g.a = -g.a;
            g.b = -g.b;
            g.c = -g.c;
            g.d = -g.d;
        }
        break;
    }
    return g;
}

Motion Motion::inverse() const { return make(d, -b, -c, a); }

Point apply(const Motion& g, const Point& p) {
    cplx czd = g.c * p.z + g.d;
    double den = std::norm(czd) + std::norm(g.c) * p.r * p.r;
    cplx num = (g.a * p.z + g.b) * std::conj(czd) + g.a * std::conj(g.c) * p.r * p.r;
    return {num / den, p.r / den};
}

double cosh_dist(const Point& p, const Point& q) {
    return (std::norm(p.z - q.z) + p.r * p.r + q.r * q.r) / (2.0 * p.r * q.r);
}

bool in_fundamental_domain(const Point& p, double slack) {
    double x = p.z.real(), y = p.z.imag();
    return std::abs(x) <= 0.5 + slack && y >= -slack && y <= 0.5 + slack &&
           std::norm(p.z) + p.r * p.r >= 1.0 - slack;
}

Reduction reduce(const FieldContext& ctx, const Point& p) {
    require_gaussian(ctx);
    if (!(p.r > 0.0)) throw std::invalid_argument("point must have r > 0");
    Reduction out{p, Motion::identity()};
    const Motion inversion = Motion::make(0.0, -1.0, 1.0, 0.0);
    const Motion negate = Motion::make(cplx(0.0, 1.0), 0.0, 0.0, cplx(0.0, -1.0));
    for (int step = 0; step < 10000; ++step) {
        Point& q = out.point;
        double nx = std::round(q.z.real()), ny = std::round(q.z.imag());
        if (nx != 0.0 || ny != 0.0) {
            Motion t = Motion::make(1.0, cplx(-nx, -ny), 0.0, 1.0);
            q = apply(t, q);
            out.motion = t * out.motion;
        }
        if (q.z.imag() < 0.0) {
            q = apply(negate, q);
            out.motion = negate * out.motion;
        }
        if (std::norm(q.z) + q.r * q.r < 1.0 - 1e-13) {
            q = apply(inversion, q);
            out.motion = inversion * out.motion;
            continue;
        }
        if (std::abs(q.z.real()) <= 0.5 && q.z.imag() >= 0.0 && q.z.imag() <= 0.5) return out;
    }
    throw std::runtime_error("reduction did not converge in 10^4 steps");
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32), 0x6a09e667u};
    eng_.seed(seq);
}

double RngStream::uniform() { return std::generate_canonical<double, 53>(eng_); }

Point sample_box(RngStream& rng, double r_min, double r_max) {
    if (!(r_min > 0.0 && r_max > r_min)) throw std::invalid_argument("invalid r range");
    double x = rng.uniform() - 0.5;
    double y = 0.5 * rng.uniform();
    double a = 1.0 / (r_min * r_min), b = 1.0 / (r_max * r_max);
    double u = rng.uniform();
    double r = 1.0 / std::sqrt(a - u * (a - b));
    return {cplx(x, y), r};
}

double box_measure(double r_min, double r_max) {
    return 0.5 * 0.5 * (1.0 / (r_min * r_min) - 1.0 / (r_max * r_max));
}

Point sample_fundamental(const FieldContext& ctx, RngStream& rng, double r_min, double r_max) {
    require_gaussian(ctx);
    for (;;) {
        Point p = sample_box(rng, r_min, r_max);
        if (std::norm(p.z) + p.r * p.r >= 1.0) return p;
    }
}

double volume(const FieldContext& ctx) {
    double ad = static_cast<double>(-ctx.d_K);
    return std::pow(ad, 1.5) * dedekind_zeta(ctx, 2.0) / (4.0 * kPi * kPi);
}

int stabilizer_order(const FieldContext& ctx, const Point& p, double search_radius) {
    if (!(search_radius >= 1.0)) throw std::invalid_argument("search radius must be >= 1");
    std::vector<AlgInt> pool = enumerate_bounded(ctx, search_radius);
    pool.insert(pool.begin(), AlgInt{0, 0});
    int count = 0;
    for (const auto& c : pool) {
        cplx cc = ctx.embed(c);
        if (std::norm(cc) * p.r * p.r > 1.0 + 1e-9) continue;
        for (const auto& d : pool) {
            if (c.is_zero() && d.is_zero()) continue;
            cplx cd = cc * p.z + ctx.embed(d);
            // r(gP) = r(P) forces |cz+d|^2 + |c|^2 r^2 = 1.
            if (std::abs(std::norm(cd) + std::norm(cc) * p.r * p.r - 1.0) > 1e-9) continue;
            BezoutResult br = bezout(ctx, d, c);
            if (!ctx.is_unit(br.g)) continue;
            // u d + v c = g (unit): a = u/g, b = -v/g gives ad - bc = 1.
            AlgInt ginv = ctx.unit_inverse(br.g);
            AlgInt a = ctx.mul(br.u, ginv), b = -ctx.mul(br.v, ginv);
            Motion g0 = Motion::from_integers(ctx, a, b, c, d);
            Point q = apply(g0, p);
            // Translate back by the nearest lattice element.
            cplx shift = p.z - q.z;
            double im = ctx.omega.imag();
            double ly = std::round(shift.imag() / im);
            double lx = std::round(shift.real() - ly * ctx.omega.real());
            cplx lam = lx + ly * ctx.omega;
            Point moved{q.z + lam, q.r};
            if (cosh_dist(moved, p) < 1.0 + 1e-9) ++count;
        }
    }
    // (c, d) and (-c, -d) give the same element of PSL_2.
    return count / 2;
}

double laplacian_fd(const std::function<double(const Point&)>& f, const Point& p, double h) {
    auto second = [&](const Point& dp) {
        auto at = [&](double k) { return f({p.z + k * dp.z, p.r + k * dp.r}); };
        double f2p = at(2 * h), f1p = at(h), f0 = at(0), f1m = at(-h), f2m = at(-2 * h);
        double d2 = (-f2p + 16 * f1p - 30 * f0 + 16 * f1m - f2m) / (12 * h * h);
        double d1 = (-f2p + 8 * f1p - 8 * f1m + f2m) / (12 * h);
        return std::pair{d2, d1};
    };
    double fxx = second({cplx(1.0, 0.0), 0.0}).first;
    double fyy = second({cplx(0.0, 1.0), 0.0}).first;
    auto [frr, fr] = second({cplx(0.0, 0.0), 1.0});
    return -p.r * p.r * (fxx + fyy + frr) + p.r * fr;
}

}  // namespace bianchi
