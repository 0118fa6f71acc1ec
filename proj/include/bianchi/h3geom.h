#pragma once

#include "bianchi/quadfield.h"

#include <cstdint>
#include <functional>
#include <random>

namespace bianchi {

/// P = z + r j in the upper half-space model.
struct Point {
    cplx z;
    double r = 1.0;
};

double qnorm(const Point& p);

/// Element of PSL_2(C), stored with a canonical sign.
struct Motion {
    cplx a{1.0, 0.0}, b{0.0, 0.0}, c{0.0, 0.0}, d{1.0, 0.0};

    static Motion identity() { return {}; }
    /// Validates ad - bc = 1 to 1e-12 and fixes the sign.
    static Motion make(cplx a, cplx b, cplx c, cplx d);
    static Motion from_integers(const FieldContext& ctx, const AlgInt& a, const AlgInt& b, const AlgInt& c,
                                const AlgInt& d);
    Motion operator*(const Motion& o) const;
    Motion inverse() const;
};

Point apply(const Motion& g, const Point& p);
double cosh_dist(const Point& p, const Point& q);

/// Closed fundamental domain of PSL_2(Z[i]):
/// |Re z| <= 1/2, 0 <= Im z <= 1/2, |z|^2 + r^2 >= 1.
bool in_fundamental_domain(const Point& p, double slack = 1e-12);

struct Reduction {
    Point point;
    Motion motion;  // apply(motion, input) == point
};
/// Reduce into the fundamental domain (d_K = -4 only).
Reduction reduce(const FieldContext& ctx, const Point& p);

/// Independent, reproducible random stream keyed by (seed, stream index).
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream);
    double uniform();  // in [0, 1)
    std::mt19937_64& engine() { return eng_; }

private:
    std::mt19937_64 eng_;
};

/// Proposal in the box [-1/2,1/2] x [0,1/2] x [r_min, r_max] with r-density ~ r^{-3};
/// the result may lie outside the fundamental domain.
Point sample_box(RngStream& rng, double r_min, double r_max);
/// dmu-measure of that box.
double box_measure(double r_min, double r_max);
/// Rejection sampler: dmu-distributed on F cap {r_min <= r <= r_max} (d_K = -4).
Point sample_fundamental(const FieldContext& ctx, RngStream& rng, double r_min, double r_max);

/// |d_K|^{3/2} zeta_K(2) / (4 pi^2).
double volume(const FieldContext& ctx);

/// Number of elements of PSL_2(O_K) fixing P, over motions with entries bounded by search_radius.
int stabilizer_order(const FieldContext& ctx, const Point& p, double search_radius);

/// Positive hyperbolic Laplacian -r^2 (f_xx + f_yy + f_rr) + r f_r by
/// fourth-order central differences with step h in each coordinate.
double laplacian_fd(const std::function<double(const Point&)>& f, const Point& p, double h);

}  // namespace bianchi
