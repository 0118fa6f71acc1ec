#pragma once

#include "bianchi/h3geom.h"
#include "bianchi/quadfield.h"

#include <complex>
#include <functional>
#include <vector>

namespace bianchi {

/// Truncation parameters shared by the series evaluators.
struct SeriesParams {
    double s = 2.0;
    double coset_C_max = 6.0;     // explicit coset moduli |c| <= C; larger c in closed form
    double lattice_L_max = 10.0;  // outer radius of the smooth lattice cutoff, in lattice units
    double fourier_M_max = 0.0;   // dual-lattice radius; 0 picks it from tol and r
    double tol = 1e-10;

    /// Throws std::invalid_argument unless s > 1/2, radii >= 1 and tol > 0.
    void validate() const;
};

struct EvalResult {
    std::complex<double> value;
    double tail_estimate = 0.0;  // estimated truncation error, >= 0
    long terms_used = 0;
    double partial = 0.0;        // explicitly enumerated terms only (no continuum or tails)
    bool heuristic = false;      // Fourier route used at s <= 1
};

/// Smooth cutoff weight at distance x (lattice units): 1 on [0, 0.3 L], 0 beyond L.
double lattice_weight(double x, double L);

/// Sum of r(gP)^(s+1) over the cosets, s > 1.
EvalResult eisenstein_direct(const FieldContext& ctx, const Point& P, const SeriesParams& params);
/// Constant terms plus the K-Bessel series with exact scattering coefficients, s > 1.
EvalResult eisenstein_fourier(const FieldContext& ctx, const Point& P, const SeriesParams& params);

/// Sum of r(gP) I_s(4 pi |nu| r(gP)) e(tr(nu z(gP))) over the cosets, s > 1.
EvalResult niebur_direct(const FieldContext& ctx, const DualPoint& nu, const Point& P, const SeriesParams& params);
/// Same series for several frequencies sharing one coset enumeration. Any s > 1/2
/// is accepted here; for s <= 1 the results are flagged heuristic.
std::vector<EvalResult> niebur_direct_many(const FieldContext& ctx, const std::vector<DualPoint>& nus, const Point& P,
                                           const SeriesParams& params);
/// Unit-orbit term, constant term and the B-coefficient series.
EvalResult niebur_fourier(const FieldContext& ctx, const DualPoint& nu, const Point& P, const SeriesParams& params);

/// (1/2 pi) sum over the group of phi_s(cosh d(P, gQ)).
/// Cosets of Q with r(gQ) >= min(0.4, r(P)/2) and the box |c| <= 2, |cw+d| <= 3|c|
/// are summed over translations explicitly; the remaining ones through their
/// per-coset Fourier expansion. Throws std::domain_error when P lies on the orbit of Q.
EvalResult green_direct(const FieldContext& ctx, const Point& P, const Point& Q, const SeriesParams& params);
/// Expansion at the cusp, valid for r(P) > max(r(Q), 1/r(Q)); E and the Niebur
/// coefficients of Q come from the direct evaluators.
EvalResult green_fourier(const FieldContext& ctx, const Point& P, const Point& Q, const SeriesParams& params);

struct ResidueResult {
    double value = 0.0;
    double fit_residual = 0.0;  // max deviation of the samples from the least-squares line
    bool reliable = true;
};

/// Extrapolates eps * f(1 + eps) to eps = 0 through the grid (Neville), with a
/// linear least-squares fit residual as the reliability flag.
ResidueResult residue_at_1(const std::function<double(double)>& f_of_s, const std::vector<double>& eps_grid,
                           double tol = 1e-2);

/// Value at eps = 0 of the interpolating polynomial through (eps_k, v_k).
double extrapolate_to_zero(const std::vector<double>& eps, const std::vector<double>& values);

struct GreenKernelOptions {
    double s = 1.0;            // s = 1 selects the pole-free kernel L(P, Q)
    double C_max = 6.0;        // explicit moduli for the coefficient tables
    double rho0 = 0.3;         // images with r >= rho0 are kept individually
    double box_c = 0.0;        // also keep |c| <= box_c, |cw+d| <= 3|c| individually
    double delta = 0.4;        // band |r_j - r| <= delta summed over translations
    double M_max = 3.0;        // dual-lattice radius of the coefficient tables
    double lattice_L = 10.0;       // cutoff of the coset cloud
    double translation_L = 10.0;   // cutoff of the per-image translation sums
};

/**
 * @brief Green's function G_s(., Q) for a fixed source point, evaluated at many P.
 *
 * Images of Q are split by height. Those with r_j >= rho0 are tabulated; at
 * evaluation time the ones within delta of r(P) are summed over translations,
 * the others enter through their per-coset Fourier expansions, with the cumulative
 * Niebur coefficients of all lower images precomputed per dual frequency.
 * For s = 1 the Eisenstein poles are removed analytically and eval returns
 * L(P, Q) = lim (G_s(P,Q) - (E(Q,s) + E(P,s) - phi(0;s)) / covol).
 * eval requires r(P) > rho0 + delta unless r(P) already exceeds every tabulated image.
 */
class GreenKernel {
public:
    GreenKernel(const FieldContext& ctx, const Point& Q, const GreenKernelOptions& opts);

    struct Image {
        double r;
        cplx w;
        AlgInt c, d;
    };

    /// Kernel value at P (no reduction applied).
    double eval(const Point& P) const;
    /// Same with every tabulated image summed over translations.
    double eval_all_translations(const Point& P) const;

    const std::vector<Image>& images() const { return top_; }
    const GreenKernelOptions& options() const { return opts_; }
    /// E(Q, s) for s > 1.
    double eisenstein_Q() const { return eis_Q_; }
    /// Niebur coefficient F_{-mu}(Q, s) restricted to images below rho0, per table frequency.
    const std::vector<cplx>& low_coefficients() const { return flow_; }
    const std::vector<DualPoint>& frequencies() const { return mus_; }
    /// Estimated error of each tabulated coefficient (neglected Kloosterman tail).
    const std::vector<double>& coefficient_tails() const { return coef_tail_; }

private:
    double eval_impl(const Point& P, double delta) const;
    double translation_sum(const Point& P, const Image& img) const;

    const FieldContext* ctx_;
    Point Q_;
    GreenKernelOptions opts_;
    std::vector<Image> top_;          // sorted by r
    std::vector<DualPoint> mus_;      // half-plane representatives
    std::vector<double> mu_abs_;
    std::vector<cplx> mu_c_;
    std::vector<int> norm_index_;     // index into distinct |mu|
    std::vector<double> norm_abs_;
    std::vector<cplx> flow_;
    std::vector<std::vector<cplx>> prefix_I_;  // [mu][k] sum over top_[0..k)
    std::vector<std::vector<cplx>> suffix_K_;  // [mu][k] sum over top_[k..)
    double eis_Q_ = 0.0;
    std::vector<double> coef_tail_;
    std::vector<double> eta_coef_;  // 4 pi |mu| phi(mu; 1), s = 1 only
    std::vector<double> band_rho2_, band_wt_;  // cutoff-band quadrature of the translation sums
};

}  // namespace bianchi
