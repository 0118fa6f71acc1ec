#include "bianchi/jensen.h"

#include "bianchi/accumulate.h"
#include "bianchi/arithsums.h"
#include "bianchi/parallel.h"
#include "bianchi/specfun.h"

#include <boost/math/special_functions/bessel.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace bianchi {

namespace {

constexpr double kPi = std::numbers::pi;

double kappa(const FieldContext& ctx) { return ctx.covol / volume(ctx); }

bool is_gaussian(const FieldContext& ctx) { return ctx.d_K == -4; }

Point reduced(const FieldContext& ctx, const Point& P) {
    if (!is_gaussian(ctx) || in_fundamental_domain(P)) return P;
    return reduce(ctx, P).point;
}

void require_gaussian(const FieldContext& ctx, const char* who) {
    if (!is_gaussian(ctx)) throw std::invalid_argument(std::string(who) + " is implemented for d_K = -4 only");
}

// Points at hyperbolic distance h from Q along the three coordinate geodesics.
std::vector<Point> octahedron(const Point& Q, double h) {
    double t = Q.r * std::tanh(h), rr = Q.r / std::cosh(h);
    return {{Q.z + cplx(t, 0), rr}, {Q.z - cplx(t, 0), rr}, {Q.z + cplx(0, t), rr},
            {Q.z - cplx(0, t), rr}, {Q.z, Q.r * std::exp(h)},  {Q.z, Q.r * std::exp(-h)}};
}

}  // namespace

void EtaParams::validate() const {
    if (!(M_max == 0.0 || M_max >= 0.5)) throw std::invalid_argument("M_max must be 0 or >= 1/2");
    if (!(C_max >= 1.0)) throw std::invalid_argument("C_max must be >= 1");
    if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
    if (eps_grid.size() < 2) throw std::invalid_argument("eps grid needs at least two points");
}

double phi_at_1(const FieldContext& ctx, const DualPoint& mu) {
    if (mu.is_zero()) throw std::invalid_argument("phi(0; s) has a pole at s = 1");
    return phi_scattering_exact(ctx, mu, 1.0);
}

ResidueResult phi_at_1_extrapolated(const FieldContext& ctx, const DualPoint& mu, const EtaParams& params) {
    params.validate();
    if (mu.is_zero()) throw std::invalid_argument("phi(0; s) has a pole at s = 1");
    // eps * phi(1 + eps) / eps: residue_at_1 of phi/(s-1) is phi(1).
    return residue_at_1(
        [&](double s) { return phi_scattering(ctx, mu, s, params.C_max).real() / (s - 1.0); }, params.eps_grid);
}

double phi0_constant_at_1(const FieldContext& ctx) {
    double k = kappa(ctx);
    std::vector<double> eps{0.04, 0.02, 0.01, 0.005}, vals;
    for (double e : eps) vals.push_back(phi_scattering_exact(ctx, DualPoint{}, 1.0 + e) - k / e);
    return extrapolate_to_zero(eps, vals);
}

double log_eta_inf(const FieldContext& ctx, const Point& P, const EtaParams& params) {
    params.validate();
    if (!(P.r > 0.0)) throw std::invalid_argument("point must have r > 0");
    double r = P.r;
    double M = params.M_max > 0.0 ? params.M_max : std::max(0.5, (std::log(1.0 / params.tol) + 3.0) / (4.0 * kPi * r));
    CompensatedSumC acc;
    acc.add(0.5 * ctx.unit_count() * r * r);
    for (const auto& mu : dual_points_bounded(ctx, M)) {
        cplx mc = ctx.embed(mu);
        double am = std::abs(mc);
        double k1 = boost::math::cyl_bessel_k(1, 4.0 * kPi * am * r);
        acc.add(4.0 * kPi * am * phi_at_1(ctx, mu) * r * k1 * std::polar(1.0, 2.0 * kPi * trace_c(mc * P.z)));
    }
    cplx v = acc.value();
    if (std::abs(v.imag()) > 1e-9 * std::max(1.0, std::abs(v.real())))
        throw std::logic_error("log eta series is not real");
    return -v.real() / kappa(ctx);
}

double L_value(const FieldContext& ctx, const Point& P, const Point& Q, const GreenKernelOptions& opts) {
    GreenKernel kern(ctx, reduced(ctx, Q), opts);
    return kern.eval(reduced(ctx, P));
}

double L_value_eps(const FieldContext& ctx, const Point& P, const Point& Q, const std::vector<double>& eps_grid,
                   const SeriesParams& params) {
    std::vector<double> vals;
    Point Pr = reduced(ctx, P), Qr = reduced(ctx, Q);
    for (double e : eps_grid) {
        if (!(e > 0.0)) throw std::invalid_argument("grid points must be positive");
        SeriesParams p = params;
        p.s = 1.0 + e;
        double G = green_direct(ctx, Pr, Qr, p).value.real();
        double EQ = eisenstein_direct(ctx, Qr, p).value.real();
        double EP = eisenstein_direct(ctx, Pr, p).value.real();
        vals.push_back(G - (EQ + EP - phi_scattering_exact(ctx, DualPoint{}, p.s)) / ctx.covol);
    }
    return extrapolate_to_zero(eps_grid, vals);
}

std::vector<PointMass> default_masses() {
    return {{{{0.11, 0.23}, 1.05}, 1.0}, {{{-0.31, 0.17}, 1.4}, -1.0}};
}

ClassAFunction::ClassAFunction(const FieldContext& ctx, std::vector<PointMass> masses, const GreenKernelOptions& opts)
    : ctx_(&ctx), masses_(std::move(masses)) {
    if (masses_.empty()) throw std::invalid_argument("no point masses");
    double sum = 0.0, scale = 0.0;
    for (const auto& m : masses_) {
        if (!std::isfinite(m.c)) throw std::invalid_argument("weights must be finite");
        sum += m.c;
        scale += std::abs(m.c);
    }
    if (std::abs(sum) > 1e-12 * std::max(1.0, scale)) throw std::invalid_argument("weights must sum to zero");
    for (auto& m : masses_) {
        if (!(m.Q.r > 0.0)) throw std::invalid_argument("mass points must have r > 0");
        m.Q = reduced(ctx, m.Q);
        if (is_gaussian(ctx) && stabilizer_order(ctx, m.Q, 4.0) != 1)
            throw std::invalid_argument("mass points must have trivial stabilizer");
    }
    for (std::size_t i = 0; i < masses_.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (cosh_dist(masses_[i].Q, masses_[j].Q) < 1.0 + 1e-9) throw std::invalid_argument("coincident mass points");
    for (const auto& m : masses_)
        kernels_.push_back(m.c == 0.0 ? nullptr : std::make_shared<const GreenKernel>(ctx, m.Q, opts));
}

double ClassAFunction::operator()(const Point& P) const {
    Point X = reduced(*ctx_, P);
    double acc = 0.0;
    for (std::size_t l = 0; l < masses_.size(); ++l)
        if (kernels_[l]) acc += masses_[l].c * kernels_[l]->eval(X);
    return 2.0 * kPi * acc;
}

double ClassAFunction::regular_part(std::size_t l, double h) const {
    if (l >= masses_.size()) throw std::out_of_range("mass index");
    if (!(h > 0.0)) throw std::invalid_argument("h must be positive");
    double sing = masses_[l].c * phi_s(std::cosh(h), 1.0);
    double acc = 0.0;
    auto pts = octahedron(masses_[l].Q, h);
    for (const auto& X : pts) acc += (*this)(X) - sing;
    return acc / static_cast<double>(pts.size());
}

ClassAFunction build_F(const FieldContext& ctx, const std::vector<PointMass>& masses, const GreenKernelOptions& opts) {
    return ClassAFunction(ctx, masses, opts);
}

RegularizedGreen::RegularizedGreen(const FieldContext& ctx, const Point& Q, const GreenKernelOptions& opts,
                                   const EtaParams& eta)
    : ctx_(&ctx), kernel_(ctx, reduced(ctx, Q), opts), eta_(eta), vol_(volume(ctx)) {
    Point Qr = reduced(ctx, Q);
    offset_ = (phi0_constant_at_1(ctx) - kappa(ctx) * (log_eta_inf(ctx, Qr, eta) + std::log(Qr.r))) / ctx.covol +
              0.5 / vol_;
}

double RegularizedGreen::operator()(const Point& P) const {
    Point X = reduced(*ctx_, P);
    double eis = -kappa(*ctx_) * (log_eta_inf(*ctx_, X, eta_) + std::log(X.r));
    return kernel_.eval(X) + eis / ctx_->covol + offset_;
}

void McParams::validate() const {
    if (N < 1) throw std::invalid_argument("N must be positive");
    if (!(r_min >= 0.0) || !(r_max > std::max(r_min, 1.0))) throw std::invalid_argument("invalid r range");
    if (streams < 1) throw std::invalid_argument("streams must be positive");
    for (const auto& e : exclusions)
        if (!(e.radius > 0.0)) throw std::invalid_argument("exclusion radius must be positive");
    for (std::size_t i = 0; i < exclusions.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (cosh_dist(exclusions[i].center, exclusions[j].center) <=
                std::cosh(exclusions[i].radius + exclusions[j].radius))
                throw std::invalid_argument("exclusion balls overlap");
}

McResult integrate_X(const FieldContext& ctx, const std::function<double(const Point&)>& f, const McParams& params) {
    require_gaussian(ctx, "integrate_X");
    params.validate();
    double r_min = params.r_min > 0.0 ? params.r_min : std::sqrt(0.5);
    std::vector<double> cosh_rad;
    for (const auto& e : params.exclusions) cosh_rad.push_back(std::cosh(e.radius));

    struct Partial {
        double mean = 0.0, m2 = 0.0;
        std::int64_t n = 0, in_domain = 0, excluded = 0;
    };
    auto nstreams = static_cast<std::size_t>(params.streams);
    std::vector<Partial> parts(nstreams);
    parallel_for(nstreams, resolve_threads(params.threads), [&](std::size_t k) {
        std::int64_t count = params.N / params.streams + (static_cast<std::int64_t>(k) < params.N % params.streams ? 1 : 0);
        RngStream rng(params.seed, k);
        Partial& p = parts[k];
        for (std::int64_t i = 0; i < count; ++i) {
            Point X = sample_box(rng, r_min, params.r_max);
            double v = 0.0;
            if (in_fundamental_domain(X, 0.0)) {
                bool skip = false;
                for (std::size_t e = 0; e < cosh_rad.size() && !skip; ++e)
                    skip = cosh_dist(X, params.exclusions[e].center) < cosh_rad[e];
                if (skip)
                    ++p.excluded;
                else {
                    ++p.in_domain;
                    v = f(X);
                }
            }
            ++p.n;
            double d = v - p.mean;
            p.mean += d / static_cast<double>(p.n);
            p.m2 += d * (v - p.mean);
        }
    });
    Partial tot;
    for (const auto& p : parts) {
        if (p.n == 0) continue;
        auto n = tot.n + p.n;
        double d = p.mean - tot.mean;
        tot.mean += d * static_cast<double>(p.n) / static_cast<double>(n);
        tot.m2 += p.m2 + d * d * static_cast<double>(tot.n) * static_cast<double>(p.n) / static_cast<double>(n);
        tot.n = n;
        tot.in_domain += p.in_domain;
        tot.excluded += p.excluded;
    }
    double B = box_measure(r_min, params.r_max);
    McResult out;
    out.samples = tot.n;
    out.in_domain = tot.in_domain;
    out.excluded = tot.excluded;
    out.integral = B * tot.mean;
    double var = tot.n > 1 ? tot.m2 / static_cast<double>(tot.n - 1) : 0.0;
    out.std_error = B * std::sqrt(var / static_cast<double>(tot.n));
    return out;
}

double distance_to_boundary(const Point& P) {
    double x = P.z.real(), y = P.z.imag(), r = P.r;
    double d = std::min({0.5 - x, x + 0.5, y, 0.5 - y});
    double plane = std::asinh(std::max(d, 0.0) / r);
    double sphere = std::asinh(std::max(std::norm(P.z) + r * r - 1.0, 0.0) / (2.0 * r));
    return std::min(plane, sphere);
}

double ball_volume(double radius) { return kPi * (std::sinh(2.0 * radius) - 2.0 * radius); }

double singular_ball_integral(double delta) {
    return 4.0 * kPi * (0.5 * delta - 0.25 * (1.0 - std::exp(-2.0 * delta)));
}

double cusp_volume(const FieldContext& ctx, double R) {
    double section = ctx.covol / (0.5 * ctx.unit_count());
    return section / (2.0 * R * R);
}

void TheoremParams::validate() const {
    mc.validate();
    eta.validate();
    if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
    if (!(rel_tol > 0.0)) throw std::invalid_argument("rel_tol must be positive");
}

TheoremReport verify_main_theorem(const FieldContext& ctx, const std::vector<PointMass>& masses,
                                  const TheoremParams& params) {
    require_gaussian(ctx, "verify_main_theorem");
    params.validate();
    ClassAFunction F(ctx, masses, params.kernel);
    double vol = volume(ctx);

    McParams mc = params.mc;
    double correction = 0.0;
    for (std::size_t l = 0; l < F.masses().size(); ++l) {
        const auto& m = F.masses()[l];
        if (m.c == 0.0) continue;
        if (distance_to_boundary(m.Q) <= params.delta)
            throw std::invalid_argument("exclusion ball around a mass crosses the boundary of the fundamental domain");
        mc.exclusions.push_back({m.Q, params.delta});
        // F - c phi_1 is harmonic near Q, so its ball integral is its center value times the volume.
        correction += m.c * singular_ball_integral(params.delta) +
                      F.regular_part(l, 0.5 * params.delta) * ball_volume(params.delta);
    }
    mc.validate();
    McResult res = integrate_X(ctx, [&](const Point& X) { return F(X); }, mc);

    double tail = 0.0;
    for (double x : {-0.4, 0.0, 0.4})
        for (double y : {0.05, 0.25, 0.45}) tail = std::max(tail, std::abs(F(Point{{x, y}, mc.r_max})));
    tail *= cusp_volume(ctx, mc.r_max);

    TheoremReport rep;
    rep.samples = res.samples;
    rep.exclusion_correction = correction / vol;
    rep.lhs_mc = (res.integral + correction) / vol;
    rep.lhs_stderr = res.std_error / vol;
    rep.cusp_tail_bound = tail / vol;
    double rhs = 0.0;
    for (const auto& m : F.masses())
        if (m.c != 0.0) rhs += m.c * (log_eta_inf(ctx, m.Q, params.eta) + std::log(m.Q.r));
    rep.rhs = 2.0 * kPi / vol * rhs;
    rep.tolerance = std::max(params.rel_tol * std::abs(rep.rhs), 3.0 * rep.lhs_stderr + rep.cusp_tail_bound);
    rep.pass = std::abs(rep.lhs_mc - rep.rhs) <= rep.tolerance;
    return rep;
}

}  // namespace bianchi
