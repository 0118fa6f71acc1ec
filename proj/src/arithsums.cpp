#include "bianchi/arithsums.h"

#include "bianchi/accumulate.h"
#include "bianchi/specfun.h"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace bianchi {

namespace {

constexpr double kPi = std::numbers::pi;

std::int64_t mod_floor(std::int64_t a, std::int64_t n) {
    std::int64_t r = a % n;
    return r < 0 ? r + n : r;
}

// Histogram of integer phases k mod N(c), summed in increasing k.
std::complex<double> sum_phases(const std::vector<std::int64_t>& counts) {
    std::int64_t n = static_cast<std::int64_t>(counts.size());
    CompensatedSumC acc;
    for (std::int64_t k = 0; k < n; ++k)
        if (counts[k] != 0) acc.add(static_cast<double>(counts[k]) * unit_root(k, n));
    return acc.value();
}

void require_nonzero(const DualPoint& p, const char* what) {
    if (p.is_zero()) throw std::invalid_argument(std::string(what) + " must be nonzero");
}

bool outer_shell(const FieldContext& ctx, const AlgInt& c, double C_max) {
    return std::abs(ctx.embed(c)) > C_max - 1.0;
}

}  // namespace

AlgInt sign_normalize(const AlgInt& c) {
    if (c.x < 0 || (c.x == 0 && c.y < 0)) return -c;
    return c;
}

std::vector<AlgInt> moduli_bounded(const FieldContext& ctx, double C_max) {
    std::vector<AlgInt> out;
    for (const auto& c : enumerate_bounded(ctx, C_max))
        if (sign_normalize(c) == c) out.push_back(c);
    return out;
}

CosetRep complete_bottom_row(const FieldContext& ctx, const AlgInt& c, const AlgInt& d) {
    BezoutResult br = bezout(ctx, d, c);
    if (!ctx.is_unit(br.g)) throw std::invalid_argument("bottom row is not coprime");
    AlgInt ginv = ctx.unit_inverse(br.g);
    CosetRep rep;
    rep.a = ctx.mul(br.u, ginv);
    rep.b = -ctx.mul(br.v, ginv);
    rep.c = c;
    rep.d = d;
    rep.is_c_zero = c.is_zero();
    return rep;
}

std::vector<CosetRep> cosets_bounded(const FieldContext& ctx, double C_max, double D_max) {
    if (!(C_max >= 1.0)) throw std::invalid_argument("C_max must be >= 1");
    std::vector<CosetRep> out;
    for (const auto& u : ctx.units_mod_pm) {
        CosetRep rep;
        rep.a = u;
        rep.d = ctx.unit_inverse(u);
        rep.is_c_zero = true;
        out.push_back(rep);
    }
    std::vector<AlgInt> ds = enumerate_bounded(ctx, D_max);
    ds.insert(ds.begin(), AlgInt{0, 0});
    for (const auto& c : moduli_bounded(ctx, C_max)) {
        for (const auto& d : ds) {
            if (!ctx.is_unit(gcd(ctx, c, d))) continue;
            out.push_back(complete_bottom_row(ctx, c, d));
        }
    }
    return out;
}

std::complex<double> unit_root(std::int64_t k, std::int64_t n) {
    if (n <= 0) throw std::invalid_argument("unit_root needs n > 0");
    k = mod_floor(k, n);
    bool flip = 2 * k > n;
    if (flip) k = n - k;
    double ang = 2.0 * kPi * static_cast<double>(k) / static_cast<double>(n);
    std::complex<double> z(std::cos(ang), std::sin(ang));
    if (4 * k == n) z = {0.0, 1.0};
    if (2 * k == n) z = {-1.0, 0.0};
    if (k == 0) z = {1.0, 0.0};
    return flip ? std::conj(z) : z;
}

std::int64_t trace_phase(const FieldContext& ctx, const AlgInt& w, const AlgInt& c) {
    std::int64_t n = ctx.norm(c);
    return mod_floor(ctx.mul(w, ctx.conj(c)).y, n);
}

KloostermanValue kloosterman_S(const FieldContext& ctx, const DualPoint& nu, const DualPoint& mu, const AlgInt& c) {
    if (c.is_zero()) throw std::invalid_argument("Kloosterman sum needs c != 0");
    require_nonzero(nu, "nu");
    require_nonzero(mu, "mu");
    std::int64_t n = ctx.norm(c);
    std::vector<std::int64_t> counts(static_cast<std::size_t>(n), 0);
    for (const auto& [u, ustar] : units_mod(ctx, c)) {
        std::int64_t k = trace_phase(ctx, ctx.mul(u, nu.m), c) + trace_phase(ctx, ctx.mul(ustar, mu.m), c);
        ++counts[static_cast<std::size_t>(mod_floor(k, n))];
    }
    KloostermanValue kv{sum_phases(counts), c, nu, mu};
    if (std::abs(kv.value) > static_cast<double>(n) * (1.0 + 1e-12))
        throw std::logic_error("Kloosterman sum exceeds the trivial bound");
    return kv;
}

double ramanujan_sum(const FieldContext& ctx, const DualPoint& mu, const AlgInt& c) {
    if (c.is_zero()) throw std::invalid_argument("Ramanujan sum needs c != 0");
    std::int64_t n = ctx.norm(c);
    std::vector<std::int64_t> counts(static_cast<std::size_t>(n), 0);
    for (const auto& pr : units_mod(ctx, c)) ++counts[static_cast<std::size_t>(trace_phase(ctx, ctx.mul(pr.first, mu.m), c))];
    return sum_phases(counts).real();
}

PartialSum Z_partial(const FieldContext& ctx, const DualPoint& nu, const DualPoint& mu, double s, double C_max) {
    if (!(s > 0.5)) throw std::invalid_argument("Z_partial needs s > 1/2");
    if (!(C_max >= 1.0)) throw std::invalid_argument("C_max must be >= 1");
    CompensatedSum total, shell;
    for (const auto& c : moduli_bounded(ctx, C_max)) {
        double term = std::abs(kloosterman_S(ctx, nu, mu, c).value) /
                      std::pow(static_cast<double>(ctx.norm(c)), 1.0 + s);
        total.add(term);
        if (outer_shell(ctx, c, C_max)) shell.add(term);
    }
    return {total.value(), shell.value()};
}

double phi_term(const FieldContext& ctx, const DualPoint& mu, const AlgInt& c, double s) {
    double rs = mu.is_zero() ? static_cast<double>(euler_phi(ctx, c)) : ramanujan_sum(ctx, mu, c);
    return kPi / (ctx.covol * s) * rs / std::pow(static_cast<double>(ctx.norm(c)), s + 1.0);
}

double phi_scattering_exact(const FieldContext& ctx, const DualPoint& mu, double s) {
    if (!(s > 0.0)) throw std::invalid_argument("phi closed form needs s > 0");
    double units = static_cast<double>(ctx.unit_count());
    if (mu.is_zero()) {
        if (std::abs(s - 1.0) < 1e-6) throw std::invalid_argument("phi(0; s) has a pole at s = 1");
        return kPi * units * dedekind_zeta(ctx, s) /
               (std::sqrt(static_cast<double>(-ctx.d_K)) * s * dedekind_zeta(ctx, s + 1.0));
    }
    return kPi * units * divisor_sigma(ctx, mu.m, s) / (2.0 * ctx.covol * s * dedekind_zeta(ctx, s + 1.0));
}

std::complex<double> phi_scattering(const FieldContext& ctx, const std::optional<DualPoint>& mu, double s,
                                    double C_max, double* last_shell) {
    if (!mu || mu->is_zero()) {
        if (last_shell) *last_shell = 0.0;
        return phi_scattering_exact(ctx, DualPoint{}, s);
    }
    if (!(s > 1.0)) throw std::invalid_argument("phi partial sums need s > 1");
    if (!(C_max >= 1.0)) throw std::invalid_argument("C_max must be >= 1");
    CompensatedSum total, shell;
    for (const auto& c : moduli_bounded(ctx, C_max)) {
        double t = phi_term(ctx, *mu, c, s);
        total.add(t);
        if (outer_shell(ctx, c, C_max)) shell.add(std::abs(t));
    }
    if (last_shell) *last_shell = shell.value();
    return total.value();
}

std::vector<BTerm> B_terms(const FieldContext& ctx, const DualPoint& nu, const DualPoint& mu, double s, double C_max,
                           BForm form) {
    require_nonzero(nu, "nu");
    require_nonzero(mu, "mu");
    if (!(s > 0.5)) throw std::invalid_argument("B coefficients need s > 1/2");
    if (!(C_max >= 1.0)) throw std::invalid_argument("C_max must be >= 1");
    cplx numu = ctx.embed(nu) * ctx.embed(mu);
    std::vector<BTerm> out;
    for (const auto& c : moduli_bounded(ctx, C_max)) {
        std::int64_t n = ctx.norm(c);
        std::complex<double> S;
        if (form == BForm::kloosterman) {
            S = kloosterman_S(ctx, nu, mu, c).value;
        } else {
            // d over invertible residues, a the canonical lift of d^{-1}.
            std::vector<std::int64_t> counts(static_cast<std::size_t>(n), 0);
            for (const auto& d : residues_mod(ctx, c)) {
                if (!ctx.is_unit(gcd(ctx, d, c))) continue;
                AlgInt a = ctx.is_unit(c) ? AlgInt{0, 0} : inverse_mod(ctx, d, c);
                std::int64_t k = trace_phase(ctx, ctx.mul(nu.m, a), c) + trace_phase(ctx, ctx.mul(mu.m, d), c);
                ++counts[static_cast<std::size_t>(mod_floor(k, n))];
            }
            S = sum_phases(counts);
        }
        cplx cc = ctx.embed(c);
        out.push_back({c, 2.0 * kPi / ctx.covol * S / static_cast<double>(n) * script_J(s, numu / (cc * cc))});
    }
    return out;
}

BResult B_coeff(const FieldContext& ctx, const DualPoint& nu, const DualPoint& mu, double s, double C_max,
                BForm form) {
    CompensatedSumC total;
    CompensatedSum shell;
    for (const auto& t : B_terms(ctx, nu, mu, s, C_max, form)) {
        total.add(t.value);
        if (outer_shell(ctx, t.c, C_max)) shell.add(std::abs(t.value));
    }
    return {total.value(), shell.value()};
}

}  // namespace bianchi
