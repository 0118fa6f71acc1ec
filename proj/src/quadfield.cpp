#include "bianchi/quadfield.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace bianchi {

namespace {

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
    std::int64_t out;
    if (__builtin_mul_overflow(a, b, &out)) throw std::overflow_error("integer overflow in O_K arithmetic");
    return out;
}

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
    std::int64_t out;
    if (__builtin_add_overflow(a, b, &out)) throw std::overflow_error("integer overflow in O_K arithmetic");
    return out;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

std::int64_t pos_mod(std::int64_t a, std::int64_t m) {
    std::int64_t r = a % m;
    return r < 0 ? r + m : r;
}

// Extended gcd on rational integers: returns g >= 0 with u*a + v*b = g.
std::int64_t ext_gcd(std::int64_t a, std::int64_t b, std::int64_t& u, std::int64_t& v) {
    std::int64_t u0 = 1, v0 = 0, u1 = 0, v1 = 1;
    while (b != 0) {
        std::int64_t q = floor_div(a, b);
        std::int64_t t = a - q * b;
        a = b;
        b = t;
        t = u0 - q * u1;
        u0 = u1;
        u1 = t;
        t = v0 - q * v1;
        v0 = v1;
        v1 = t;
    }
    if (a < 0) {
        a = -a;
        u0 = -u0;
        v0 = -v0;
    }
    u = u0;
    v = v0;
    return a;
}

// Hermite box for the sublattice cO_K in coordinates (x, y): residues are
// {(x, y) : 0 <= x < h, 0 <= y < e}; (b, e) is the lattice vector with minimal y > 0.
struct Hermite {
    std::int64_t h = 1;
    std::int64_t b = 0;
    std::int64_t e = 1;
};

Hermite hermite_of(const FieldContext& ctx, const AlgInt& c) {
    AlgInt v1 = c;
    AlgInt v2 = ctx.mul(c, AlgInt{0, 1});
    std::int64_t u, w;
    std::int64_t g = ext_gcd(v1.y, v2.y, u, w);
    Hermite H;
    if (g == 0) throw std::invalid_argument("degenerate modulus");
    H.e = g;
    H.b = u * v1.x + w * v2.x;
    std::int64_t det = v1.x * v2.y - v1.y * v2.x;
    H.h = std::llabs(det) / g;
    H.b = pos_mod(H.b, H.h);
    return H;
}

}  // namespace

cplx FieldContext::sqrt_dk() const { return {0.0, std::sqrt(static_cast<double>(-d_K))}; }

cplx FieldContext::embed(const AlgInt& a) const {
    return static_cast<double>(a.x) + static_cast<double>(a.y) * omega;
}

cplx FieldContext::embed(const DualPoint& mu) const { return embed(mu.m) / sqrt_dk(); }

AlgInt FieldContext::mul(const AlgInt& a, const AlgInt& b) const {
    std::int64_t bd = checked_mul(a.y, b.y);
    std::int64_t x = checked_add(checked_mul(a.x, b.x), -checked_mul(n_omega, bd));
    std::int64_t y = checked_add(checked_add(checked_mul(a.x, b.y), checked_mul(a.y, b.x)), checked_mul(tr_omega, bd));
    return {x, y};
}

AlgInt FieldContext::conj(const AlgInt& a) const { return {a.x + tr_omega * a.y, -a.y}; }

std::int64_t FieldContext::norm(const AlgInt& a) const {
    return checked_add(checked_add(checked_mul(a.x, a.x), checked_mul(tr_omega, checked_mul(a.x, a.y))),
                       checked_mul(n_omega, checked_mul(a.y, a.y)));
}

AlgInt FieldContext::unit_inverse(const AlgInt& u) const {
    if (norm(u) != 1) throw std::invalid_argument("not a unit");
    return conj(u);
}

std::pair<AlgInt, AlgInt> FieldContext::divmod(const AlgInt& a, const AlgInt& b) const {
    std::int64_t nb = norm(b);
    if (nb == 0) throw std::invalid_argument("division by zero in O_K");
    AlgInt num = mul(a, conj(b));
    // a/b = num/nb; try the lattice points around the rounded quotient.
    double qx = static_cast<double>(num.x) / static_cast<double>(nb);
    double qy = static_cast<double>(num.y) / static_cast<double>(nb);
    std::int64_t bx = static_cast<std::int64_t>(std::floor(qx + 0.5));
    std::int64_t by = static_cast<std::int64_t>(std::floor(qy + 0.5));
    AlgInt best_q, best_r;
    std::int64_t best_n = -1;
    for (std::int64_t dy = -1; dy <= 1; ++dy) {
        for (std::int64_t dx = -1; dx <= 1; ++dx) {
            AlgInt q{bx + dx, by + dy};
            AlgInt r = a - mul(q, b);
            std::int64_t nr = norm(r);
            if (best_n < 0 || nr < best_n) {
                best_n = nr;
                best_q = q;
                best_r = r;
            }
        }
    }
    if (best_n >= nb) throw std::logic_error("Euclidean step failed");
    return {best_q, best_r};
}

bool FieldContext::divides(const AlgInt& b, const AlgInt& a) const {
    if (b.is_zero()) return a.is_zero();
    AlgInt num = mul(a, conj(b));
    std::int64_t nb = norm(b);
    return num.x % nb == 0 && num.y % nb == 0;
}

AlgInt FieldContext::exact_div(const AlgInt& a, const AlgInt& b) const {
    AlgInt num = mul(a, conj(b));
    std::int64_t nb = norm(b);
    if (nb == 0 || num.x % nb != 0 || num.y % nb != 0) throw std::invalid_argument("inexact division in O_K");
    return {num.x / nb, num.y / nb};
}

int FieldContext::compare_embedding(const AlgInt& a, const AlgInt& b) const {
    // 2*Re = 2x + tr*y, Im proportional to y.
    std::int64_t ra = 2 * a.x + tr_omega * a.y;
    std::int64_t rb = 2 * b.x + tr_omega * b.y;
    if (ra != rb) return ra < rb ? -1 : 1;
    if (a.y != b.y) return a.y < b.y ? -1 : 1;
    return 0;
}

AlgInt FieldContext::canonical_associate(const AlgInt& a) const {
    AlgInt best = a;
    for (const auto& u : units) {
        AlgInt cand = mul(u, a);
        if (compare_embedding(cand, best) > 0) best = cand;
    }
    return best;
}

FieldContext make_field(int d_K) {
    FieldContext f;
    f.d_K = d_K;
    switch (d_K) {
        case -3:
        case -7:
        case -11:
            f.tr_omega = 1;
            f.n_omega = (1 - d_K) / 4;
            f.omega = cplx(0.5, 0.5 * std::sqrt(static_cast<double>(-d_K)));
            break;
        case -4:
            f.tr_omega = 0;
            f.n_omega = 1;
            f.omega = cplx(0.0, 1.0);
            break;
        case -8:
            f.tr_omega = 0;
            f.n_omega = 2;
            f.omega = cplx(0.0, std::sqrt(2.0));
            break;
        default:
            throw std::invalid_argument("field not supported (requires Euclidean, h_K = 1): d_K = " +
                                        std::to_string(d_K));
    }
    f.covol = std::sqrt(static_cast<double>(-d_K)) / 2.0;
    f.h_K = 1;
    if (d_K == -4) {
        f.units = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
        f.units_mod_pm = {{1, 0}, {0, 1}};
    } else if (d_K == -3) {
        // omega = e^{i pi/3}, omega^2 = omega - 1
        f.units = {{1, 0}, {0, 1}, {-1, 1}, {-1, 0}, {0, -1}, {1, -1}};
        f.units_mod_pm = {{1, 0}, {0, 1}, {-1, 1}};
    } else {
        f.units = {{1, 0}, {-1, 0}};
        f.units_mod_pm = {{1, 0}};
    }
    return f;
}

double trace_c(cplx z) { return 2.0 * z.real(); }

std::int64_t norm(const FieldContext& ctx, const AlgInt& a) { return ctx.norm(a); }

cplx embed(const FieldContext& ctx, const AlgInt& a) { return ctx.embed(a); }

BezoutResult bezout(const FieldContext& ctx, const AlgInt& a, const AlgInt& b) {
    if (a.is_zero() && b.is_zero()) throw std::invalid_argument("gcd(0, 0) is undefined");
    // Invariant: r0 = u0*a + v0*b, r1 = u1*a + v1*b.
    AlgInt r0 = a, r1 = b;
    AlgInt u0{1, 0}, v0{0, 0}, u1{0, 0}, v1{1, 0};
    while (!r1.is_zero()) {
        auto [q, r] = ctx.divmod(r0, r1);
        AlgInt u2 = u0 - ctx.mul(q, u1);
        AlgInt v2 = v0 - ctx.mul(q, v1);
        r0 = r1;
        r1 = r;
        u0 = u1;
        v0 = v1;
        u1 = u2;
        v1 = v2;
    }
    AlgInt g = ctx.canonical_associate(r0);
    // g = w * r0 for a unit w
    AlgInt w = ctx.exact_div(g, r0);
    return {ctx.mul(w, u0), ctx.mul(w, v0), g};
}

AlgInt gcd(const FieldContext& ctx, const AlgInt& a, const AlgInt& b) { return bezout(ctx, a, b).g; }

std::vector<AlgInt> enumerate_bounded(const FieldContext& ctx, double R) {
    std::vector<AlgInt> out;
    if (R <= 0) return out;
    double im = ctx.omega.imag();
    double re = ctx.omega.real();
    std::int64_t ymax = static_cast<std::int64_t>(std::floor(R / im)) + 1;
    double R2 = R * R * (1.0 + 1e-12);
    for (std::int64_t y = -ymax; y <= ymax; ++y) {
        double cx = -static_cast<double>(y) * re;
        std::int64_t xlo = static_cast<std::int64_t>(std::floor(cx - R)) - 1;
        std::int64_t xhi = static_cast<std::int64_t>(std::ceil(cx + R)) + 1;
        for (std::int64_t x = xlo; x <= xhi; ++x) {
            AlgInt a{x, y};
            if (a.is_zero()) continue;
            if (static_cast<double>(ctx.norm(a)) <= R2) out.push_back(a);
        }
    }
    std::sort(out.begin(), out.end(), [&](const AlgInt& p, const AlgInt& q) {
        std::int64_t np = ctx.norm(p), nq = ctx.norm(q);
        if (np != nq) return np < nq;
        if (p.x != q.x) return p.x < q.x;
        return p.y < q.y;
    });
    return out;
}

AlgInt reduce_mod(const FieldContext& ctx, const AlgInt& a, const AlgInt& c) {
    if (c.is_zero()) throw std::invalid_argument("reduction modulo zero");
    Hermite H = hermite_of(ctx, c);
    std::int64_t k = floor_div(a.y, H.e);
    AlgInt r{a.x - k * H.b, a.y - k * H.e};
    r.x = pos_mod(r.x, H.h);
    return r;
}

std::vector<AlgInt> residues_mod(const FieldContext& ctx, const AlgInt& c) {
    if (c.is_zero()) throw std::invalid_argument("residue ring modulo zero");
    Hermite H = hermite_of(ctx, c);
    std::vector<AlgInt> out;
    out.reserve(static_cast<std::size_t>(H.h * H.e));
    for (std::int64_t y = 0; y < H.e; ++y)
        for (std::int64_t x = 0; x < H.h; ++x) out.push_back({x, y});
    return out;
}

AlgInt inverse_mod(const FieldContext& ctx, const AlgInt& a, const AlgInt& c) {
    BezoutResult br = bezout(ctx, a, c);
    if (!ctx.is_unit(br.g)) throw std::invalid_argument("residue not invertible");
    return reduce_mod(ctx, ctx.mul(br.u, ctx.unit_inverse(br.g)), c);
}

std::vector<std::pair<AlgInt, AlgInt>> units_mod(const FieldContext& ctx, const AlgInt& c) {
    if (c.is_zero()) throw std::invalid_argument("residue ring modulo zero");
    if (ctx.is_unit(c)) return {{AlgInt{0, 0}, AlgInt{0, 0}}};
    std::vector<std::pair<AlgInt, AlgInt>> out;
    for (const auto& u : residues_mod(ctx, c)) {
        if (u.is_zero()) continue;
        BezoutResult br = bezout(ctx, u, c);
        if (!ctx.is_unit(br.g)) continue;
        out.emplace_back(u, reduce_mod(ctx, ctx.mul(br.u, ctx.unit_inverse(br.g)), c));
    }
    return out;
}

std::vector<PrimeFactor> factorize(const FieldContext& ctx, const AlgInt& a) {
    if (a.is_zero()) throw std::invalid_argument("factorization of zero");
    std::vector<PrimeFactor> out;
    AlgInt rest = a;
    std::int64_t n = ctx.norm(a);
    std::vector<std::int64_t> rational_primes;
    for (std::int64_t p = 2; p * p <= n; ++p) {
        if (n % p == 0) {
            rational_primes.push_back(p);
            while (n % p == 0) n /= p;
        }
    }
    if (n > 1) rational_primes.push_back(n);
    for (std::int64_t p : rational_primes) {
        // Prime elements above p: elements of norm p (split/ramified) or p itself (inert).
        std::vector<AlgInt> cands;
        for (const auto& e : enumerate_bounded(ctx, std::sqrt(static_cast<double>(p)) + 1e-9)) {
            if (ctx.norm(e) != p) continue;
            AlgInt ce = ctx.canonical_associate(e);
            if (std::find(cands.begin(), cands.end(), ce) == cands.end()) cands.push_back(ce);
        }
        if (cands.empty()) cands.push_back(ctx.canonical_associate(AlgInt{p, 0}));
        std::sort(cands.begin(), cands.end(), [&](const AlgInt& x, const AlgInt& y) {
            return ctx.compare_embedding(x, y) > 0;
        });
        for (const auto& pi : cands) {
            int e = 0;
            while (ctx.divides(pi, rest)) {
                rest = ctx.exact_div(rest, pi);
                ++e;
            }
            if (e > 0) out.push_back({pi, e, ctx.norm(pi)});
        }
    }
    if (!ctx.is_unit(rest)) throw std::logic_error("incomplete factorization");
    return out;
}

std::int64_t euler_phi(const FieldContext& ctx, const AlgInt& c) {
    std::int64_t phi = 1;
    for (const auto& f : factorize(ctx, c)) {
        std::int64_t q = f.prime_norm;
        std::int64_t pe = 1;
        for (int i = 1; i < f.exponent; ++i) pe *= q;
        phi *= pe * (q - 1);
    }
    return phi;
}

double divisor_sigma(const FieldContext& ctx, const AlgInt& m, double s) {
    double sigma = 1.0;
    for (const auto& f : factorize(ctx, m)) {
        double q = std::pow(static_cast<double>(f.prime_norm), -s);
        double term = 1.0, acc = 1.0;
        for (int i = 0; i < f.exponent; ++i) {
            term *= q;
            acc += term;
        }
        sigma *= acc;
    }
    return sigma;
}

int kronecker_symbol(std::int64_t d, std::int64_t n) {
    if (n <= 0) throw std::invalid_argument("kronecker_symbol expects n > 0");
    int result = 1;
    std::int64_t m = n;
    while (m % 2 == 0) {
        m /= 2;
        std::int64_t r = pos_mod(d, 8);
        if (r % 2 == 0) return 0;
        if (r == 3 || r == 5) result = -result;
    }
    // Jacobi symbol (d/m) for odd m > 0
    std::int64_t a = pos_mod(d, m), b = m;
    int j = 1;
    while (a != 0) {
        while (a % 2 == 0) {
            a /= 2;
            std::int64_t r = b % 8;
            if (r == 3 || r == 5) j = -j;
        }
        std::swap(a, b);
        if (a % 4 == 3 && b % 4 == 3) j = -j;
        a %= b;
    }
    if (b != 1) return 0;
    return result * j;
}

double hurwitz_zeta(double s, double a) {
    if (s <= 1.0) throw std::invalid_argument("hurwitz_zeta requires s > 1");
    if (a <= 0.0) throw std::invalid_argument("hurwitz_zeta requires a > 0");
    // Euler-Maclaurin with N direct terms and Bernoulli corrections.
    static const double B2k[] = {1.0 / 6,        -1.0 / 30,    1.0 / 42,        -1.0 / 30,
                                 5.0 / 66,       -691.0 / 2730, 7.0 / 6,        -3617.0 / 510,
                                 43867.0 / 798,  -174611.0 / 330};
    const int N = 24;
    double sum = 0.0;
    for (int k = N - 1; k >= 0; --k) sum += std::pow(k + a, -s);
    double x = N + a;
    sum += std::pow(x, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(x, -s);
    double rising = s;  // s(s+1)...(s+2j-2)
    double xpow = std::pow(x, -s - 1.0);
    double fact = 2.0;  // (2j)!
    for (int j = 1; j <= 10; ++j) {
        sum += B2k[j - 1] / fact * rising * xpow;
        rising *= (s + 2 * j - 1) * (s + 2 * j);
        xpow /= x * x;
        fact *= (2.0 * j + 1) * (2.0 * j + 2);
    }
    return sum;
}

double riemann_zeta(double s) { return hurwitz_zeta(s, 1.0); }

double dirichlet_L(const FieldContext& ctx, double s) {
    std::int64_t q = -static_cast<std::int64_t>(ctx.d_K);
    double sum = 0.0;
    for (std::int64_t a = 1; a < q; ++a) {
        int chi = kronecker_symbol(ctx.d_K, a);
        if (chi != 0) sum += chi * hurwitz_zeta(s, static_cast<double>(a) / static_cast<double>(q));
    }
    return sum * std::pow(static_cast<double>(q), -s);
}

double dedekind_zeta(const FieldContext& ctx, double s) {
    if (!(s > 1.0)) throw std::invalid_argument("dedekind_zeta requires s > 1");
    return riemann_zeta(s) * dirichlet_L(ctx, s);
}

std::int64_t dual_trace(const FieldContext& ctx, const DualPoint& mu, const AlgInt& lambda) {
    // tr(w / sqrt(d_K)) equals the omega-coordinate of w.
    return ctx.mul(mu.m, lambda).y;
}

std::vector<DualPoint> dual_points_bounded(const FieldContext& ctx, double R) {
    std::vector<DualPoint> out;
    double scale = std::sqrt(static_cast<double>(-ctx.d_K));
    for (const auto& m : enumerate_bounded(ctx, R * scale)) out.push_back({m});
    return out;
}

}  // namespace bianchi
