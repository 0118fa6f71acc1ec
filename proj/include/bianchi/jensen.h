#pragma once

#include "bianchi/autoseries.h"
#include "bianchi/h3geom.h"
#include "bianchi/quadfield.h"

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

namespace bianchi {

struct EtaParams {
    double M_max = 0.0;  // dual-lattice radius of the K_1 series; 0 picks it from tol and r
    double C_max = 24.0;  // truncation of the phi sums in the extrapolated cross-check
    std::vector<double> eps_grid{0.2, 0.1, 0.05};
    double tol = 1e-12;

    void validate() const;
};

/// phi(mu; 1) for mu != 0 (closed form).
double phi_at_1(const FieldContext& ctx, const DualPoint& mu);
/// phi(mu; 1) from the truncated sums at s = 1 + eps, extrapolated to eps = 0.
ResidueResult phi_at_1_extrapolated(const FieldContext& ctx, const DualPoint& mu, const EtaParams& params);
/// lim_{s->1} (phi(0; s) - kappa/(s-1)) with kappa = covol/vol.
double phi0_constant_at_1(const FieldContext& ctx);

/// log eta(P) of the Asai eta function, from
/// -kappa log eta(P) = (|O^x|/2) r^2 + 4 pi sum_{mu != 0} |mu| phi(mu; 1) r K_1(4 pi |mu| r) e(tr(mu z)).
double log_eta_inf(const FieldContext& ctx, const Point& P, const EtaParams& params = {});

/// L(P, Q) = lim_{s->1} (G_s(P,Q) - (E(Q,s) + E(P,s) - phi(0;s)) / covol), with the
/// poles removed analytically. Points are reduced first for d_K = -4.
double L_value(const FieldContext& ctx, const Point& P, const Point& Q, const GreenKernelOptions& opts = {});
/// Same limit through evaluations at s = 1 + eps and polynomial extrapolation.
double L_value_eps(const FieldContext& ctx, const Point& P, const Point& Q, const std::vector<double>& eps_grid,
                   const SeriesParams& params = {});

struct PointMass {
    Point Q;
    double c = 0.0;
};

/// The two-mass configuration used for the mean-value check.
std::vector<PointMass> default_masses();

/**
 * @brief F(P) = 2 pi sum_l c_l L(P, Q_l) for weights summing to zero.
 *
 * Masses are reduced into the fundamental domain and must have trivial stabilizer.
 * Evaluation reduces P first for d_K = -4 and is safe to call concurrently.
 */
class ClassAFunction {
public:
    ClassAFunction(const FieldContext& ctx, std::vector<PointMass> masses, const GreenKernelOptions& opts = {});

    double operator()(const Point& P) const;
    /// Value of F minus c_l phi_1(cosh d(P, Q_l)) at Q_l, as the mean over six points at distance h.
    double regular_part(std::size_t l, double h) const;
    const std::vector<PointMass>& masses() const { return masses_; }

private:
    const FieldContext* ctx_;
    std::vector<PointMass> masses_;
    std::vector<std::shared_ptr<const GreenKernel>> kernels_;  // null for zero weights
};

ClassAFunction build_F(const FieldContext& ctx, const std::vector<PointMass>& masses,
                       const GreenKernelOptions& opts = {});

/**
 * @brief lim_{s->1} (G_s(P,Q) - 2 / (vol (s^2 - 1))) for fixed Q.
 *
 * Assembled from L and the Kronecker limit formula; for r > max image height it
 * equals cusp_constant() - log(r)/vol up to exponentially small terms.
 */
class RegularizedGreen {
public:
    RegularizedGreen(const FieldContext& ctx, const Point& Q, const GreenKernelOptions& opts = {},
                     const EtaParams& eta = {});
    double operator()(const Point& P) const;
    double cusp_constant() const { return offset_ - 1.0 / vol_; }

private:
    const FieldContext* ctx_;
    GreenKernel kernel_;
    EtaParams eta_;
    double offset_ = 0.0;
    double vol_ = 0.0;
};

struct Exclusion {
    Point center;
    double radius = 0.0;  // hyperbolic
};

struct McParams {
    std::int64_t N = 1000000;  // proposals in the box
    double r_min = 0.0;        // 0 selects the lowest point of the fundamental domain
    double r_max = 6.0;
    std::uint64_t seed = 1;
    std::vector<Exclusion> exclusions;
    int threads = 0;  // 0: BIANCHI_THREADS or hardware
    int streams = 64;

    void validate() const;
};

struct McResult {
    double integral = 0.0;  // over F cap {r <= r_max} minus the exclusion balls
    double std_error = 0.0;
    std::int64_t samples = 0;
    std::int64_t in_domain = 0;
    std::int64_t excluded = 0;
};

/// Hit-or-miss Monte Carlo with the r^-3 box proposal (d_K = -4). Per-stream sums are
/// reduced in stream order, so results do not depend on the thread count.
McResult integrate_X(const FieldContext& ctx, const std::function<double(const Point&)>& f, const McParams& params);

/// Hyperbolic distance from P to the boundary of the fundamental domain (d_K = -4).
double distance_to_boundary(const Point& P);
/// dmu-volume of a hyperbolic ball.
double ball_volume(double radius);
/// Integral of phi_1(cosh d) over a ball of radius delta around its pole.
double singular_ball_integral(double delta);
/// Integral of dmu over the cusp section {r > R} of the fundamental domain.
double cusp_volume(const FieldContext& ctx, double R);

struct TheoremParams {
    McParams mc;
    double delta = 0.05;  // exclusion radius around each mass
    GreenKernelOptions kernel;
    EtaParams eta;
    double rel_tol = 0.02;

    void validate() const;
};

struct TheoremReport {
    double lhs_mc = 0.0;  // (1/vol) int_X F dmu, exclusion correction included
    double lhs_stderr = 0.0;
    double rhs = 0.0;     // (2 pi / vol) sum c log(eta(Q) r(Q))
    double cusp_tail_bound = 0.0;
    double exclusion_correction = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::int64_t samples = 0;
};

TheoremReport verify_main_theorem(const FieldContext& ctx, const std::vector<PointMass>& masses,
                                  const TheoremParams& params);

}  // namespace bianchi
