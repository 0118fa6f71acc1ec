#include "bianchi/autoseries.h"

#include "bianchi/accumulate.h"
#include "bianchi/arithsums.h"
#include "bianchi/quadrature.h"
#include "bianchi/specfun.h"

#include <boost/math/special_functions/bessel.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <unordered_map>

namespace bianchi {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInnerFrac = 0.3;
constexpr double kInf = std::numeric_limits<double>::infinity();
// Calibrated relative error of the smooth-cutoff lattice sums at L = 10.
constexpr double kCutoffRel = 1e-6;

std::complex<double> phase(double t) { return std::polar(1.0, 2.0 * kPi * t); }

// Regularized incomplete beta I_v(8, 8).
double ibeta88(double v) {
    static constexpr double binom[8] = {6435, 5005, 3003, 1365, 455, 105, 15, 1};
    double w = 1.0 - v, pv[16], pw[8];
    pv[0] = pw[0] = 1.0;
    for (int i = 1; i < 16; ++i) pv[i] = pv[i - 1] * v;
    for (int i = 1; i < 8; ++i) pw[i] = pw[i - 1] * w;
    double acc = 0.0;
    for (int j = 8; j <= 15; ++j) acc += binom[j - 8] * pv[j] * pw[15 - j];
    return acc;
}

// lattice_weight as a function of the squared distance.
double lattice_weight_sq(double x2, double L) {
    double inner2 = kInnerFrac * kInnerFrac * L * L;
    if (x2 <= inner2) return 1.0;
    if (x2 >= L * L) return 0.0;
    return 1.0 - ibeta88((x2 - inner2) / (L * L - inner2));
}

// Calls fn(lambda, embed(lambda)) for every lambda in O_K with |embed(lambda) - center| <= R.
template <class Fn>
void for_lattice_disc(const FieldContext& ctx, cplx center, double R, Fn&& fn) {
    double im = ctx.omega.imag(), re = ctx.omega.real();
    auto y0 = static_cast<std::int64_t>(std::ceil((center.imag() - R) / im));
    auto y1 = static_cast<std::int64_t>(std::floor((center.imag() + R) / im));
    for (std::int64_t y = y0; y <= y1; ++y) {
        double dy = y * im - center.imag();
        double rem = R * R - dy * dy;
        if (rem < 0.0) continue;
        double hx = std::sqrt(rem), cx = center.real() - y * re;
        auto x0 = static_cast<std::int64_t>(std::ceil(cx - hx));
        auto x1 = static_cast<std::int64_t>(std::floor(cx + hx));
        for (std::int64_t x = x0; x <= x1; ++x) fn(AlgInt{x, y}, cplx(x + y * re, y * im));
    }
}

// Gauss-Legendre on [a, b] split into equal panels.
template <class G>
double gl_integrate(G&& g, double a, double b, int panels = 4) {
    const GaussRule& rule = gauss_legendre(20);
    double h = (b - a) / panels, acc = 0.0;
    for (int p = 0; p < panels; ++p) {
        double mid = a + (p + 0.5) * h, half = 0.5 * h;
        for (std::size_t k = 0; k < rule.nodes.size(); ++k) acc += rule.weights[k] * g(mid + half * rule.nodes[k]);
    }
    return acc * 0.5 * h;
}

struct Modulus {
    AlgInt c;
    cplx cc;
    double absc = 0.0;
    std::int64_t norm = 0;
    std::int64_t phi = 0;
};

struct CloudImage {
    double r;
    cplx w;
    double weight;
    int mod;  // -1 for the unit cosets
    double absu;
    AlgInt d;
};

// Images of X under coset representatives with |c| <= C, d restricted by the
// smooth cutoff |cz + d| <= L |c|.
struct Cloud {
    Point X;
    double L = 10.0;
    std::vector<Modulus> mods;
    std::vector<CloudImage> imgs;
};

Cloud build_cloud(const FieldContext& ctx, const Point& X, double C, double L) {
    Cloud cl;
    cl.X = X;
    cl.L = L;
    for (const auto& u : ctx.units_mod_pm) {
        cplx uu = ctx.embed(u);
        cl.imgs.push_back({X.r, uu * uu * X.z, 1.0, -1, 0.0, AlgInt{}});
    }
    for (const auto& c : moduli_bounded(ctx, C)) {
        Modulus m;
        m.c = c;
        m.cc = ctx.embed(c);
        m.absc = std::abs(m.cc);
        m.norm = ctx.norm(c);
        m.phi = euler_phi(ctx, c);
        int mi = static_cast<int>(cl.mods.size());
        cl.mods.push_back(m);

        std::unordered_map<std::int64_t, AlgInt> inverse;
        auto key = [](const AlgInt& a) { return a.x * 1000003 + a.y; };
        for (const auto& [a, ainv] : units_mod(ctx, c)) inverse.emplace(key(a), ainv);

        cplx center = -m.cc * X.z;
        double r2c = m.absc * m.absc * X.r * X.r;
        for_lattice_disc(ctx, center, L * m.absc, [&](const AlgInt& d, cplx dv) {
            cplx u = m.cc * X.z + dv;
            double absu = std::abs(u);
            double wt = lattice_weight(absu / m.absc, L);
            if (wt == 0.0) return;
            AlgInt res = m.norm == 1 ? AlgInt{0, 0} : reduce_mod(ctx, d, c);
            auto it = inverse.find(key(res));
            if (it == inverse.end()) return;
            // The inverse residue stands for d^{-1}; the top-left entry is its inverse
            // image under a d = 1 mod c, i.e. the residue a with a d = 1.
            double rho2 = absu * absu + r2c;
            cplx a = ctx.embed(it->second);
            cplx w = a / m.cc - std::conj(u) / (m.cc * rho2);
            cl.imgs.push_back({X.r / rho2, w, wt, mi, absu, d});
        });
    }
    return cl;
}

double auto_M(const SeriesParams& p, double gap) {
    if (p.fourier_M_max > 0.0) return p.fourier_M_max;
    return std::max(1.0, (std::log(1.0 / p.tol) + 3.0) / (4.0 * kPi * gap));
}

// 2 pi int (1 - w) (r / (rho^2 + |c|^2 r^2))^(s+1) rho drho over rho > 0.3 L |c|.
double eis_continuum(double s, double r, double absc, double L) {
    double a2 = absc * absc * r * r;
    auto f = [&](double rho) {
        return (1.0 - lattice_weight(rho / absc, L)) * std::pow(r / (rho * rho + a2), s + 1.0) * 2.0 * kPi * rho;
    };
    double band = gl_integrate(f, kInnerFrac * L * absc, L * absc);
    double RL = L * absc;
    double tail = 2.0 * kPi * std::pow(r, s + 1.0) / (2.0 * s * std::pow(RL * RL + a2, s));
    return band + tail;
}

// Same with the Niebur summand; the angular average of the phase gives J_0.
double niebur_continuum(double s, double r, double absc, double nu_abs, double L) {
    double a2 = absc * absc * r * r;
    auto f = [&](double rho) {
        double rho2 = rho * rho + a2, rs = r / rho2;
        return rs * bessel_I_real(s, 4.0 * kPi * nu_abs * rs) * std::cyl_bessel_j(0.0, 4.0 * kPi * nu_abs * rho / (absc * rho2)) *
               2.0 * kPi * rho;
    };
    double band = gl_integrate([&](double rho) { return (1.0 - lattice_weight(rho / absc, L)) * f(rho); },
                               kInnerFrac * L * absc, L * absc);
    double RL = L * absc;
    double tail = gl_integrate([&](double t) { return t > 0.0 ? f(1.0 / t) / (t * t) : 0.0; }, 0.0, 1.0 / RL, 2);
    return band + tail;
}

// Per-c sum of phi terms over the explicit moduli.
double phi_partial(const FieldContext& ctx, const Cloud& cl, const DualPoint& mu, double s) {
    CompensatedSum acc;
    for (const auto& m : cl.mods) acc.add(phi_term(ctx, mu, m.c, s));
    return acc.value();
}

std::vector<DualPoint> dual_ball(const FieldContext& ctx, double M) { return dual_points_bounded(ctx, M); }

// Fourier tail of the cosets with |c| > C, exact up to the mu truncation.
cplx eis_c_tail(const FieldContext& ctx, const Cloud& cl, double s, double M) {
    const Point& P = cl.X;
    cplx acc = std::pow(P.r, 1.0 - s) * (phi_scattering_exact(ctx, DualPoint{}, s) - phi_partial(ctx, cl, DualPoint{}, s));
    double pref = std::pow(2.0, 1.0 + s) * std::pow(kPi, s) / std::tgamma(s);
    for (const auto& mu : dual_ball(ctx, M)) {
        cplx mc = ctx.embed(mu);
        double am = std::abs(mc);
        double coef = phi_scattering_exact(ctx, mu, s) - phi_partial(ctx, cl, mu, s);
        acc += pref * std::pow(am, s) * coef * P.r * bessel_K(s, 4.0 * kPi * am * P.r) * phase(trace_c(mc * P.z));
    }
    return acc;
}

// Size of the neglected |c| > C part of a Niebur coefficient at frequency |nu|, from
// |S(nu, mu, c)| <= 2 |c| and the small-argument size of script J; the first dual
// shell of the B-series dominates.
double kloosterman_tail(const FieldContext& ctx, double nu_abs, double s, double C, double r) {
    double csum = 2.0 * kPi * std::pow(C, 1.0 - 2.0 * s) / ((2.0 * s - 1.0) * ctx.covol);
    double mu1 = 1.0 / std::sqrt(static_cast<double>(-ctx.d_K));
    double jfac = std::pow(2.0 * kPi, 2.0 * s) * std::pow(nu_abs * mu1, s) / std::pow(std::tgamma(s + 1.0), 2.0);
    return 2.0 * kPi / ctx.covol * csum * jfac * ctx.unit_count() * r * bessel_K(s, 4.0 * kPi * mu1 * r);
}

void require_s(const SeriesParams& p, double lo, const char* who) {
    p.validate();
    if (!(p.s > lo)) throw std::invalid_argument(std::string(who) + ": s must exceed " + std::to_string(lo));
}

}  // namespace

void SeriesParams::validate() const {
    if (!(s > 0.5)) throw std::invalid_argument("s must be > 1/2");
    if (!(coset_C_max >= 1.0) || !(lattice_L_max >= 1.0)) throw std::invalid_argument("truncation radii must be >= 1");
    if (!(fourier_M_max == 0.0 || fourier_M_max >= 0.5)) throw std::invalid_argument("fourier_M_max must be 0 or >= 1/2");
    if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
}

double lattice_weight(double x, double L) { return lattice_weight_sq(x * x, L); }

EvalResult eisenstein_direct(const FieldContext& ctx, const Point& P, const SeriesParams& params) {
    require_s(params, 1.0, "eisenstein_direct");
    if (!(P.r > 0.0)) throw std::invalid_argument("point must have r > 0");
    double s = params.s;
    Cloud cl = build_cloud(ctx, P, params.coset_C_max, params.lattice_L_max);
    CompensatedSum part, cont;
    for (const auto& im : cl.imgs) part.add(im.weight * std::pow(im.r, s + 1.0));
    for (const auto& m : cl.mods)
        cont.add(static_cast<double>(m.phi) / (static_cast<double>(m.norm) * ctx.covol) *
                 eis_continuum(s, P.r, m.absc, cl.L));
    double M = auto_M(params, P.r);
    cplx tail = eis_c_tail(ctx, cl, s, M);
    EvalResult out;
    out.partial = part.value();
    out.value = part.value() + cont.value() + tail.real();
    out.terms_used = static_cast<long>(cl.imgs.size());
    out.tail_estimate = kCutoffRel * std::abs(out.value) + std::abs(tail.imag());
    return out;
}

EvalResult eisenstein_fourier(const FieldContext& ctx, const Point& P, const SeriesParams& params) {
    require_s(params, 1.0, "eisenstein_fourier");
    double s = params.s, r = P.r;
    double M = auto_M(params, r);
    CompensatedSum acc;
    acc.add(0.5 * ctx.unit_count() * std::pow(r, 1.0 + s));
    acc.add(phi_scattering_exact(ctx, DualPoint{}, s) * std::pow(r, 1.0 - s));
    double pref = std::pow(2.0, 1.0 + s) * std::pow(kPi, s) / std::tgamma(s);
    auto mus = dual_ball(ctx, M);
    double last = 0.0;
    for (const auto& mu : mus) {
        cplx mc = ctx.embed(mu);
        double am = std::abs(mc);
        double t = pref * std::pow(am, s) * phi_scattering_exact(ctx, mu, s) * r * bessel_K(s, 4.0 * kPi * am * r);
        acc.add((t * phase(trace_c(mc * P.z))).real());
        if (am > M - 0.5) last += std::abs(t);
    }
    EvalResult out;
    out.value = acc.value();
    out.terms_used = static_cast<long>(mus.size()) + 2;
    out.tail_estimate = last;
    return out;
}

std::vector<EvalResult> niebur_direct_many(const FieldContext& ctx, const std::vector<DualPoint>& nus, const Point& P,
                                           const SeriesParams& params) {
    require_s(params, 0.5, "niebur_direct");
    if (!(P.r > 0.0)) throw std::invalid_argument("point must have r > 0");
    double s = params.s;
    Cloud cl = build_cloud(ctx, P, params.coset_C_max, params.lattice_L_max);
    std::vector<EvalResult> out;
    for (const auto& nu : nus) {
        if (nu.is_zero()) throw std::invalid_argument("nu must be nonzero");
        cplx nc = ctx.embed(nu);
        double an = std::abs(nc);
        CompensatedSumC part;
        for (const auto& im : cl.imgs)
            part.add(im.weight * im.r * bessel_I_real(s, 4.0 * kPi * an * im.r) * phase(trace_c(nc * im.w)));
        CompensatedSum cont;
        for (const auto& m : cl.mods)
            cont.add(ramanujan_sum(ctx, nu, m.c) / (static_cast<double>(m.norm) * ctx.covol) *
                     niebur_continuum(s, P.r, m.absc, an, cl.L));
        double tail_coef = phi_scattering_exact(ctx, nu, s) - phi_partial(ctx, cl, nu, s);
        double tail = std::pow(2.0 * kPi * an, s) / (s * std::tgamma(s)) * std::pow(P.r, 1.0 - s) * tail_coef;
        EvalResult res;
        res.partial = std::abs(part.value());
        res.value = part.value() + cont.value() + tail;
        res.terms_used = static_cast<long>(cl.imgs.size());
        double bound = kloosterman_tail(ctx, an, s, params.coset_C_max, P.r);
        res.tail_estimate = kCutoffRel * std::abs(res.value) + bound;
        res.heuristic = s <= 1.0;
        out.push_back(res);
    }
    return out;
}

EvalResult niebur_direct(const FieldContext& ctx, const DualPoint& nu, const Point& P, const SeriesParams& params) {
    require_s(params, 1.0, "niebur_direct");
    return niebur_direct_many(ctx, {nu}, P, params).front();
}

EvalResult niebur_fourier(const FieldContext& ctx, const DualPoint& nu, const Point& P, const SeriesParams& params) {
    require_s(params, 0.5, "niebur_fourier");
    if (nu.is_zero()) throw std::invalid_argument("nu must be nonzero");
    double s = params.s, r = P.r;
    cplx nc = ctx.embed(nu);
    double an = std::abs(nc);
    CompensatedSumC acc;
    cplx orbit = 0.0;
    for (const auto& u : ctx.units_mod_pm) {
        cplx uu = ctx.embed(u);
        orbit += phase(trace_c(nc * uu * uu * P.z));
    }
    acc.add(r * bessel_I_real(s, 4.0 * kPi * an * r) * orbit);
    acc.add(std::pow(2.0 * kPi * an, s) / (s * std::tgamma(s)) * phi_scattering_exact(ctx, DualPoint{-nu.m}, s) *
            std::pow(r, 1.0 - s));
    // B(nu, mu) may grow like exp(8 pi sqrt(|nu mu|)) before K_s takes over, so the
    // shells are extended past the K-decay radius until two in a row are negligible.
    double T = std::log(1.0 / params.tol) + 3.0;
    double x = (8.0 * kPi * std::sqrt(an) + std::sqrt(64.0 * kPi * kPi * an + 16.0 * kPi * r * T)) / (8.0 * kPi * r);
    bool fixed = params.fourier_M_max > 0.0;
    double M0 = auto_M(params, r), Mcap = fixed ? M0 : std::max(M0, x * x);
    double CB = std::max(20.0, params.coset_C_max);
    double tail = 0.0, shell_abs = 0.0, prev_shell = kInf;
    auto mus = dual_ball(ctx, Mcap);
    long used = 0;
    for (std::size_t i = 0; i < mus.size(); ++i) {
        cplx mc = ctx.embed(mus[i]);
        double am = std::abs(mc);
        BResult b = B_coeff(ctx, nu, mus[i], s, CB);
        double k = r * bessel_K(s, 4.0 * kPi * am * r);
        cplx term = b.value * k * phase(trace_c(mc * P.z));
        acc.add(term);
        shell_abs += std::abs(term);
        ++used;
        // Remaining c decay like |c|^(1-2s) at best; scale the last c-shell accordingly.
        tail += b.last_shell * CB / std::max(2.0 * s - 1.0, 0.1) * k;
        bool shell_end = i + 1 == mus.size() || ctx.norm(mus[i + 1].m) != ctx.norm(mus[i].m);
        if (!shell_end) continue;
        double small = 1e2 * params.tol * std::abs(acc.value());
        if (!fixed && am >= M0 && shell_abs <= small && prev_shell <= small) break;
        prev_shell = shell_abs;
        shell_abs = 0.0;
    }
    EvalResult out;
    out.value = acc.value();
    out.terms_used = used + 2;
    out.tail_estimate = tail + prev_shell;
    out.heuristic = s <= 1.0;
    return out;
}

EvalResult green_fourier(const FieldContext& ctx, const Point& P, const Point& Q, const SeriesParams& params) {
    require_s(params, 1.0, "green_fourier");
    double rq_max = std::max(Q.r, 1.0 / Q.r);
    if (!(P.r > rq_max)) throw std::invalid_argument("green_fourier needs r(P) > max(r(Q), 1/r(Q))");
    double s = params.s, r = P.r;
    EvalResult E = eisenstein_direct(ctx, Q, params);
    double M = auto_M(params, r - rq_max);
    std::vector<DualPoint> mus, negs;
    for (const auto& mu : dual_ball(ctx, M)) {
        mus.push_back(mu);
        negs.push_back(DualPoint{-mu.m});
    }
    auto F = niebur_direct_many(ctx, negs, Q, params);
    CompensatedSumC acc;
    acc.add(std::pow(r, 1.0 - s) / s * E.value);
    double tail = std::pow(r, 1.0 - s) / s * E.tail_estimate;
    for (std::size_t i = 0; i < mus.size(); ++i) {
        cplx mc = ctx.embed(mus[i]);
        double k = 2.0 * r * bessel_K(s, 4.0 * kPi * std::abs(mc) * r);
        acc.add(F[i].value * k * phase(trace_c(mc * P.z)));
        tail += F[i].tail_estimate * k;
    }
    EvalResult out;
    out.value = acc.value() / ctx.covol;
    out.tail_estimate = tail / ctx.covol;
    out.terms_used = E.terms_used + static_cast<long>(mus.size());
    return out;
}

EvalResult green_direct(const FieldContext& ctx, const Point& P, const Point& Q, const SeriesParams& params) {
    require_s(params, 1.0, "green_direct");
    if (!(P.r > 0.0) || !(Q.r > 0.0)) throw std::invalid_argument("points must have r > 0");
    GreenKernelOptions o;
    o.s = params.s;
    o.C_max = params.coset_C_max;
    o.lattice_L = params.lattice_L_max;
    o.translation_L = params.lattice_L_max;
    o.rho0 = std::min(0.4, 0.5 * P.r);
    o.box_c = 2.0;
    o.M_max = params.fourier_M_max > 0.0 ? params.fourier_M_max
                                         : (std::log(1.0 / params.tol) + 3.0) / (4.0 * kPi * (P.r - o.rho0));
    GreenKernel kern(ctx, Q, o);
    EvalResult out;
    out.value = kern.eval_all_translations(P);
    out.terms_used = static_cast<long>(kern.images().size());
    double tail = 0.0;
    const auto& mus = kern.frequencies();
    for (std::size_t j = 0; j < mus.size(); ++j) {
        double am = std::abs(ctx.embed(mus[j]));
        tail += 4.0 * P.r / ctx.covol * kern.coefficient_tails()[j] * bessel_K(params.s, 4.0 * kPi * am * P.r);
    }
    out.tail_estimate = kCutoffRel * std::abs(out.value) + tail;
    return out;
}

double extrapolate_to_zero(const std::vector<double>& eps, const std::vector<double>& values) {
    if (eps.size() != values.size() || eps.empty()) throw std::invalid_argument("grid and values differ in size");
    std::vector<double> p = values;
    std::size_t n = eps.size();
    for (std::size_t k = 1; k < n; ++k)
        for (std::size_t i = 0; i + k < n; ++i)
            p[i] = (eps[i + k] * p[i] - eps[i] * p[i + 1]) / (eps[i + k] - eps[i]);
    return p[0];
}

ResidueResult residue_at_1(const std::function<double(double)>& f_of_s, const std::vector<double>& eps_grid,
                           double tol) {
    if (eps_grid.size() < 2) throw std::invalid_argument("need at least two grid points");
    for (std::size_t i = 0; i < eps_grid.size(); ++i) {
        if (!(eps_grid[i] > 0.0)) throw std::invalid_argument("grid points must be positive");
        if (i > 0 && !(eps_grid[i] < eps_grid[i - 1])) throw std::invalid_argument("grid must be decreasing");
    }
    std::vector<double> v;
    for (double e : eps_grid) v.push_back(e * f_of_s(1.0 + e));
    ResidueResult out;
    out.value = extrapolate_to_zero(eps_grid, v);
    double n = static_cast<double>(v.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        sx += eps_grid[i];
        sy += v[i];
        sxx += eps_grid[i] * eps_grid[i];
        sxy += eps_grid[i] * v[i];
    }
    double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx), icpt = (sy - slope * sx) / n;
    for (std::size_t i = 0; i < v.size(); ++i)
        out.fit_residual = std::max(out.fit_residual, std::abs(v[i] - (icpt + slope * eps_grid[i])));
    out.reliable = out.fit_residual <= tol * std::max(1.0, std::abs(out.value));
    return out;
}

// ---------------------------------------------------------------------------

GreenKernel::GreenKernel(const FieldContext& ctx, const Point& Q, const GreenKernelOptions& opts)
    : ctx_(&ctx), Q_(Q), opts_(opts) {
    double s = opts.s;
    if (!(s >= 1.0)) throw std::invalid_argument("GreenKernel needs s >= 1");
    if (!(Q.r > 0.0)) throw std::invalid_argument("point must have r > 0");
    if (!(opts.rho0 > 0.0) || !(opts.delta > 0.0) || !(opts.M_max >= 0.5) || !(opts.translation_L >= 2.0)) throw std::invalid_argument("bad kernel options");

    Cloud cl = build_cloud(ctx, Q, opts.C_max, opts.lattice_L);
    double L = cl.L;
    std::vector<char> is_top(cl.imgs.size(), 0);
    for (std::size_t i = 0; i < cl.imgs.size(); ++i) {
        const auto& im = cl.imgs[i];
        bool boxed = im.mod >= 0 && cl.mods[im.mod].absc <= opts.box_c && im.absu <= kInnerFrac * L * cl.mods[im.mod].absc;
        if (im.weight == 1.0 && (im.r >= opts.rho0 || boxed || im.mod < 0)) {
            is_top[i] = 1;
            AlgInt c = im.mod >= 0 ? cl.mods[im.mod].c : AlgInt{0, 0};
            top_.push_back({im.r, im.w, c, im.d});
        }
    }
    // Every image above rho0 must have weight one to be tabulated exactly.
    for (std::size_t i = 0; i < cl.imgs.size(); ++i)
        if (!is_top[i] && cl.imgs[i].r >= opts.rho0) throw std::logic_error("image above rho0 inside the cutoff band");
    std::sort(top_.begin(), top_.end(), [](const Image& a, const Image& b) { return a.r < b.r; });

    if (s > 1.0) {
        SeriesParams sp;
        sp.s = s;
        sp.coset_C_max = opts.C_max;
        sp.lattice_L_max = opts.lattice_L;
        eis_Q_ = eisenstein_direct(ctx, Q, sp).value.real();
    }

    for (const auto& mu : dual_points_bounded(ctx, opts.M_max)) {
        if (!(sign_normalize(mu.m) == mu.m)) continue;
        mus_.push_back(mu);
    }
    for (const auto& mu : mus_) {
        cplx mc = ctx.embed(mu);
        mu_c_.push_back(mc);
        mu_abs_.push_back(std::abs(mc));
    }
    for (double a : mu_abs_) {
        auto it = std::find_if(norm_abs_.begin(), norm_abs_.end(), [&](double b) { return std::abs(a - b) < 1e-12; });
        if (it == norm_abs_.end()) {
            norm_index_.push_back(static_cast<int>(norm_abs_.size()));
            norm_abs_.push_back(a);
        } else {
            norm_index_.push_back(static_cast<int>(it - norm_abs_.begin()));
        }
    }

    // Low coefficients: full Niebur coefficient of Q at -mu minus the tabulated images.
    std::size_t nmu = mus_.size();
    flow_.assign(nmu, 0.0);
    std::vector<std::vector<double>> ivals(norm_abs_.size());
    for (std::size_t k = 0; k < norm_abs_.size(); ++k) {
        ivals[k].resize(cl.imgs.size());
        for (std::size_t i = 0; i < cl.imgs.size(); ++i)
            ivals[k][i] = is_top[i] ? 0.0 : cl.imgs[i].r * bessel_I_real(s, 4.0 * kPi * norm_abs_[k] * cl.imgs[i].r);
    }
    for (std::size_t j = 0; j < nmu; ++j) {
        const auto& iv = ivals[norm_index_[j]];
        CompensatedSumC acc;
        for (std::size_t i = 0; i < cl.imgs.size(); ++i) {
            if (is_top[i]) continue;
            acc.add(cl.imgs[i].weight * iv[i] * phase(-trace_c(mu_c_[j] * cl.imgs[i].w)));
        }
        double am = mu_abs_[j];
        for (const auto& m : cl.mods)
            acc.add(ramanujan_sum(ctx, mus_[j], m.c) / (static_cast<double>(m.norm) * ctx.covol) *
                    niebur_continuum(s, Q.r, m.absc, am, L));
        double tail_coef = phi_scattering_exact(ctx, mus_[j], s) - phi_partial(ctx, cl, mus_[j], s);
        acc.add(std::pow(2.0 * kPi * am, s) / (s * std::tgamma(s)) * std::pow(Q.r, 1.0 - s) * tail_coef);
        flow_[j] = acc.value();
        if (s == 1.0) eta_coef_.push_back(4.0 * kPi * am * phi_scattering_exact(ctx, mus_[j], 1.0));
        coef_tail_.push_back(kloosterman_tail(ctx, am, s, opts.C_max, Q.r));
    }

    // Quadrature nodes of the cutoff band for the translation sums.
    {
        const GaussRule& rule = gauss_legendre(20);
        double L = opts.translation_L, a = kInnerFrac * L, panels = 4, h = (L - a) / panels;
        for (int p = 0; p < panels; ++p)
            for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
                double rho = a + (p + 0.5) * h + 0.5 * h * rule.nodes[k];
                band_rho2_.push_back(rho * rho);
                band_wt_.push_back(0.5 * h * rule.weights[k] * (1.0 - lattice_weight(rho, L)) * 2.0 * kPi * rho);
            }
    }

    std::size_t nt = top_.size();
    prefix_I_.assign(nmu, std::vector<cplx>(nt + 1, 0.0));
    suffix_K_.assign(nmu, std::vector<cplx>(nt + 1, 0.0));
    for (std::size_t j = 0; j < nmu; ++j) {
        for (std::size_t k = 0; k < nt; ++k) {
            double x = 4.0 * kPi * mu_abs_[j] * top_[k].r;
            cplx ph = phase(-trace_c(mu_c_[j] * top_[k].w));
            prefix_I_[j][k + 1] = prefix_I_[j][k] + top_[k].r * bessel_I_real(s, x) * ph;
        }
        for (std::size_t k = nt; k-- > 0;) {
            double x = 4.0 * kPi * mu_abs_[j] * top_[k].r;
            cplx ph = phase(-trace_c(mu_c_[j] * top_[k].w));
            suffix_K_[j][k] = suffix_K_[j][k + 1] + top_[k].r * bessel_K(s, x) * ph;
        }
    }
}

double GreenKernel::translation_sum(const Point& P, const Image& img) const {
    const FieldContext& ctx = *ctx_;
    double s = opts_.s, L = opts_.translation_L;
    double r = P.r, rj = img.r;
    double inv_two_rr = 0.5 / (r * rj), dr2 = (r - rj) * (r - rj);
    cplx center = P.z - img.w;
    CompensatedSum acc;
    for_lattice_disc(ctx, center, L, [&](const AlgInt&, cplx lv) {
        double a2 = std::norm(center - lv);
        double wt = lattice_weight_sq(a2, L);
        if (wt == 0.0) return;
        double u = (a2 + dr2) * inv_two_rr;
        if (u < 1e-9) throw std::domain_error("P lies on the orbit of Q");
        acc.add(wt * phi_s_from_u(u, s));
    });
    double band = 0.0;
    for (std::size_t k = 0; k < band_rho2_.size(); ++k)
        band += band_wt_[k] * phi_s_from_u((band_rho2_[k] + dr2) * inv_two_rr, s);
    double tL = 1.0 + (L * L + dr2) * inv_two_rr;
    double tail = 2.0 * kPi * r * rj * std::exp(-s * std::acosh(tL)) / s;
    return (acc.value() + (band + tail) / ctx.covol) / (2.0 * kPi);
}

double GreenKernel::eval(const Point& P) const { return eval_impl(P, opts_.delta); }

double GreenKernel::eval_all_translations(const Point& P) const { return eval_impl(P, kInf); }

double GreenKernel::eval_impl(const Point& P, double delta) const {
    const FieldContext& ctx = *ctx_;
    double s = opts_.s, r = P.r;
    bool pole_free = s == 1.0;
    double covol = ctx.covol;
    if (!(r > opts_.rho0)) throw std::domain_error("evaluation point below the tabulated images");

    std::size_t nt = top_.size();
    std::size_t kB = 0, kA = nt;
    if (std::isfinite(delta)) {
        kB = static_cast<std::size_t>(std::lower_bound(top_.begin(), top_.end(), r - delta,
                                                       [](const Image& a, double v) { return a.r < v; }) -
                                      top_.begin());
        kA = static_cast<std::size_t>(std::upper_bound(top_.begin(), top_.end(), r + delta,
                                                       [](double v, const Image& a) { return v < a.r; }) -
                                      top_.begin());
    }

    CompensatedSum acc;
    // Pole part r^(1-s) E(Q,s) / (s covol); absent in the pole-free kernel.
    if (!pole_free) acc.add(std::pow(r, 1.0 - s) / s * eis_Q_ / covol);
    for (std::size_t k = kB; k < kA; ++k) {
        double rj = top_[k].r;
        acc.add(translation_sum(P, top_[k]) - std::pow(r, 1.0 - s) * std::pow(rj, 1.0 + s) / (s * covol));
    }
    for (std::size_t k = kA; k < nt; ++k) {
        double rj = top_[k].r;
        acc.add((std::pow(r, 1.0 + s) * std::pow(rj, 1.0 - s) - std::pow(r, 1.0 - s) * std::pow(rj, 1.0 + s)) /
                (s * covol));
    }

    std::vector<double> Iv(norm_abs_.size()), Kv(norm_abs_.size());
    for (std::size_t k = 0; k < norm_abs_.size(); ++k) {
        double x = 4.0 * kPi * norm_abs_[k] * r;
        Kv[k] = s == 1.0 ? boost::math::cyl_bessel_k(1, x) : bessel_K(s, x);
        Iv[k] = kA < nt ? bessel_I_real(s, x) : 0.0;
    }
    CompensatedSum four;
    for (std::size_t j = 0; j < mus_.size(); ++j) {
        int n = norm_index_[j];
        cplx cum = flow_[j] + prefix_I_[j][kB];
        cplx term = cum * Kv[n];
        if (kA < nt) term += suffix_K_[j][kA] * Iv[n];
        four.add(2.0 * (term * phase(trace_c(mu_c_[j] * P.z))).real());
    }
    acc.add(2.0 * r / covol * four.value());
    if (pole_free) {
        // -(E(P,s) - phi(0;s))/covol and the pole of E(Q,s) at s = 1, combined.
        CompensatedSum eta;
        eta.add(0.5 * ctx.unit_count() * r * r);
        for (std::size_t j = 0; j < mus_.size(); ++j) {
            eta.add(2.0 * eta_coef_[j] * r * Kv[norm_index_[j]] * std::cos(2.0 * kPi * trace_c(mu_c_[j] * P.z)));
        }
        acc.add(-eta.value() / covol - 1.0 / volume(ctx));
    }
    return acc.value();
}

}  // namespace bianchi
