#pragma once

#include "bianchi/quadfield.h"

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

namespace bianchi {

/// Representative of a left coset of the unipotent stabilizer of the cusp.
struct CosetRep {
    AlgInt a, b, c, d;
    bool is_c_zero = false;
};

/// Bottom-row normalization modulo +-1: first nonzero coordinate of c positive.
AlgInt sign_normalize(const AlgInt& c);

/// Nonzero c modulo +-1 with |c| <= C_max, in (norm, x, y) order.
std::vector<AlgInt> moduli_bounded(const FieldContext& ctx, double C_max);

/// Unit cosets (c = 0) first, then every coprime (c, d) with 0 < |c| <= C_max
/// (c modulo +-1) and |d| <= D_max. Top rows completed by bezout.
std::vector<CosetRep> cosets_bounded(const FieldContext& ctx, double C_max, double D_max);

/// Completes a coprime bottom row to a determinant one matrix.
CosetRep complete_bottom_row(const FieldContext& ctx, const AlgInt& c, const AlgInt& d);

/// e(k/n) = exp(2 pi i k/n), evaluated so that e(-k/n) is the exact conjugate.
std::complex<double> unit_root(std::int64_t k, std::int64_t n);

/// Integer k with tr(w / (c sqrt(d_K))) = k / N(c) for w in O_K, reduced mod N(c).
std::int64_t trace_phase(const FieldContext& ctx, const AlgInt& w, const AlgInt& c);

struct KloostermanValue {
    std::complex<double> value;
    AlgInt c;
    DualPoint nu, mu;
};

/// Sum over u u* = 1 mod c of e(tr((u nu + u* mu)/c)).
KloostermanValue kloosterman_S(const FieldContext& ctx, const DualPoint& nu, const DualPoint& mu, const AlgInt& c);

/// Sum over invertible a mod c of e(tr(mu a / c)); real for every mu.
double ramanujan_sum(const FieldContext& ctx, const DualPoint& mu, const AlgInt& c);

struct PartialSum {
    double value = 0.0;
    double last_shell = 0.0;  // contribution of C_max - 1 < |c| <= C_max
};

/// Sum over c mod +-1, 0 < |c| <= C_max, of |S(nu, mu, c)| / |c|^(2+2s).
PartialSum Z_partial(const FieldContext& ctx, const DualPoint& nu, const DualPoint& mu, double s, double C_max);

/// Scattering coefficient phi(mu; s). mu empty or zero: closed form in zeta_K.
/// mu nonzero: truncated double-coset sum with exact Ramanujan sums (s > 1).
std::complex<double> phi_scattering(const FieldContext& ctx, const std::optional<DualPoint>& mu, double s,
                                    double C_max, double* last_shell = nullptr);

/// Closed form of phi(mu; s) for every mu, valid for s > 0 (s != 1 when mu = 0):
/// pi |O^x| sigma_{-s}(m) / (2 covol s zeta_K(s+1)) with mu = m / sqrt(d_K).
double phi_scattering_exact(const FieldContext& ctx, const DualPoint& mu, double s);

/// Single-c term of the phi series: pi / (covol s) * R_mu(c) / |c|^(2s+2).
double phi_term(const FieldContext& ctx, const DualPoint& mu, const AlgInt& c, double s);

enum class BForm { double_coset, kloosterman };

struct BTerm {
    AlgInt c;
    std::complex<double> value;
};

/// Per-c terms (2 pi / covol) S_c / |c|^2 J_s(nu mu / c^2), c in (norm, x, y) order.
std::vector<BTerm> B_terms(const FieldContext& ctx, const DualPoint& nu, const DualPoint& mu, double s, double C_max,
                           BForm form);

struct BResult {
    std::complex<double> value;
    double last_shell = 0.0;
};
BResult B_coeff(const FieldContext& ctx, const DualPoint& nu, const DualPoint& mu, double s, double C_max,
                BForm form = BForm::kloosterman);

}  // namespace bianchi
