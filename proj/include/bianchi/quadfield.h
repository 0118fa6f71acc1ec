#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

namespace bianchi {

using cplx = std::complex<double>;

/// Element x + y*omega of the ring of integers, stored by coordinates.
struct AlgInt {
    std::int64_t x = 0;
    std::int64_t y = 0;

    friend bool operator==(const AlgInt&, const AlgInt&) = default;
    AlgInt operator-() const { return {-x, -y}; }
    AlgInt operator+(const AlgInt& o) const { return {x + o.x, y + o.y}; }
    AlgInt operator-(const AlgInt& o) const { return {x - o.x, y - o.y}; }
    bool is_zero() const { return x == 0 && y == 0; }
};

/// Element of the inverse different, mu = embed(m) / sqrt(d_K).
struct DualPoint {
    AlgInt m;
    friend bool operator==(const DualPoint&, const DualPoint&) = default;
    bool is_zero() const { return m.is_zero(); }
};

struct PrimeFactor {
    AlgInt prime;
    int exponent = 0;
    std::int64_t prime_norm = 0;
};

/**
 * @brief One of the five Euclidean imaginary quadratic fields with class number one.
 *
 * Immutable after construction; all arithmetic helpers are const and reentrant.
 */
class FieldContext {
public:
    int d_K = 0;
    cplx omega;
    std::int64_t tr_omega = 0;  // omega^2 = tr_omega*omega - n_omega
    std::int64_t n_omega = 0;
    std::vector<AlgInt> units_mod_pm;
    std::vector<AlgInt> units;
    double covol = 0.0;
    int h_K = 1;

    int unit_count() const { return static_cast<int>(units.size()); }
    cplx sqrt_dk() const;

    cplx embed(const AlgInt& a) const;
    cplx embed(const DualPoint& mu) const;
    AlgInt mul(const AlgInt& a, const AlgInt& b) const;
    AlgInt conj(const AlgInt& a) const;
    std::int64_t norm(const AlgInt& a) const;
    bool is_unit(const AlgInt& a) const { return norm(a) == 1; }
    AlgInt unit_inverse(const AlgInt& u) const;

    /// Euclidean division a = q*b + r with norm(r) < norm(b).
    std::pair<AlgInt, AlgInt> divmod(const AlgInt& a, const AlgInt& b) const;
    bool divides(const AlgInt& b, const AlgInt& a) const;
    /// Exact quotient a/b; throws if b does not divide a.
    AlgInt exact_div(const AlgInt& a, const AlgInt& b) const;

    /// Associate u*a maximizing (Re, then Im) of the embedding.
    AlgInt canonical_associate(const AlgInt& a) const;

    /// Lexicographic comparison of embeddings, exact in integer arithmetic.
    int compare_embedding(const AlgInt& a, const AlgInt& b) const;
};

FieldContext make_field(int d_K);

double trace_c(cplx z);
std::int64_t norm(const FieldContext& ctx, const AlgInt& a);
cplx embed(const FieldContext& ctx, const AlgInt& a);

AlgInt gcd(const FieldContext& ctx, const AlgInt& a, const AlgInt& b);

struct BezoutResult {
    AlgInt u;
    AlgInt v;
    AlgInt g;
};
/// u*a + v*b = g with g the canonical generator of (a, b).
BezoutResult bezout(const FieldContext& ctx, const AlgInt& a, const AlgInt& b);

/// All a with 0 < |embed(a)| <= R, ordered by (norm, x, y).
std::vector<AlgInt> enumerate_bounded(const FieldContext& ctx, double R);

/// Canonical residue of a modulo c (Hermite box representative).
AlgInt reduce_mod(const FieldContext& ctx, const AlgInt& a, const AlgInt& c);
std::vector<AlgInt> residues_mod(const FieldContext& ctx, const AlgInt& c);
/// Invertible residues with inverses. For a unit c returns the single pair (0, 0).
std::vector<std::pair<AlgInt, AlgInt>> units_mod(const FieldContext& ctx, const AlgInt& c);
/// Inverse of a modulo c as a canonical residue; throws if not invertible.
AlgInt inverse_mod(const FieldContext& ctx, const AlgInt& a, const AlgInt& c);

/// Factorization into canonical primes, unit part dropped.
std::vector<PrimeFactor> factorize(const FieldContext& ctx, const AlgInt& a);
/// Number of invertible residues modulo c.
std::int64_t euler_phi(const FieldContext& ctx, const AlgInt& c);
/// Sum of N(delta)^(-s) over ideal divisors delta of m (m != 0).
double divisor_sigma(const FieldContext& ctx, const AlgInt& m, double s);

int kronecker_symbol(std::int64_t d, std::int64_t n);
double hurwitz_zeta(double s, double a);
double riemann_zeta(double s);
double dirichlet_L(const FieldContext& ctx, double s);
double dedekind_zeta(const FieldContext& ctx, double s);

std::vector<DualPoint> dual_points_bounded(const FieldContext& ctx, double R);
/// Integer tr(mu * lambda) for mu in the inverse different and lambda in O_K.
std::int64_t dual_trace(const FieldContext& ctx, const DualPoint& mu, const AlgInt& lambda);

}  // namespace bianchi
