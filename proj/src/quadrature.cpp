#include "bianchi/quadrature.h"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <queue>
#include <stdexcept>

namespace bianchi {

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 31>;

struct Panel {
    double a, b, value, error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

// Kronrod 31 / Gauss 15 pair from Boost's node tables. Boost's own error
// estimate is not scaled with the panel width, so the difference is formed here.
Panel eval_panel(const std::function<double(double)>& g, double a, double b) {
    using G15 = boost::math::quadrature::gauss<double, 15>;
    const auto& xk = GK::abscissa();
    const auto& wk = GK::weights();
    const auto& wg = G15::weights();
    double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    double fc = g(mid);
    double kron = wk[0] * fc, gauss = wg[0] * fc;
    for (std::size_t i = 1; i < xk.size(); ++i) {
        double f1 = g(mid - half * xk[i]), f2 = g(mid + half * xk[i]);
        kron += wk[i] * (f1 + f2);
        // Gauss nodes are the even-indexed Kronrod nodes.
        if (i % 2 == 0) gauss += wg[i / 2] * (f1 + f2);
    }
    kron *= half;
    gauss *= half;
    double err = std::abs(kron - gauss);
    if (!std::isfinite(kron)) err = std::numeric_limits<double>::infinity();
    return {a, b, kron, err};
}

template <int N>
GaussRule make_rule() {
    using G = boost::math::quadrature::gauss<double, N>;
    GaussRule rule;
    const auto& x = G::abscissa();
    const auto& w = G::weights();
    // Boost stores the non-negative half; x[0] = 0 for odd N only.
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] == 0.0) {
            rule.nodes.push_back(0.0);
            rule.weights.push_back(w[i]);
            continue;
        }
        rule.nodes.push_back(-x[i]);
        rule.weights.push_back(w[i]);
        rule.nodes.push_back(x[i]);
        rule.weights.push_back(w[i]);
    }
    return rule;
}

}  // namespace

QuadResult quad(const std::function<double(double)>& f, double a, double b, const QuadConfig& cfg) {
    if (!(cfg.abs_tol > 0.0) || !(cfg.rel_tol > 0.0)) throw std::invalid_argument("quadrature tolerances must be positive");
    if (cfg.max_subdivisions < 10) throw std::invalid_argument("max_subdivisions must be at least 10");
    if (a == b) return {};

    std::function<double(double)> g;
    double lo = a, hi = b;
    if (std::isinf(b)) {
        if (std::isinf(a)) throw std::invalid_argument("doubly infinite range not supported");
        lo = 0.0;
        hi = 1.0;
        if (cfg.semiinf_transform == SemiInfMap::rational_map) {
            g = [&f, a](double u) {
                double v = 1.0 - u;
                if (!(v > 0.0)) return 0.0;
                double y = f(a + u / v);
                return std::isfinite(y) ? y / (v * v) : 0.0;
            };
        } else {
            g = [&f, a](double u) {
                double v = 1.0 - u;
                if (!(v > 0.0)) return 0.0;
                double y = f(a - std::log(v));
                return std::isfinite(y) ? y / v : 0.0;
            };
        }
    } else {
        g = f;
    }

    std::priority_queue<Panel> heap;
    Panel first = eval_panel(g, lo, hi);
    double total = first.value, err = first.error;
    heap.push(first);
    int panels = 1;
    while (err > std::max(cfg.abs_tol, cfg.rel_tol * std::abs(total)) && panels < cfg.max_subdivisions) {
        Panel p = heap.top();
        heap.pop();
        double mid = 0.5 * (p.a + p.b);
        if (!(mid > p.a && mid < p.b)) {
            heap.push(p);
            break;
        }
        Panel left = eval_panel(g, p.a, mid);
        Panel right = eval_panel(g, mid, p.b);
        total += left.value + right.value - p.value;
        err += left.error + right.error - p.error;
        heap.push(left);
        heap.push(right);
        ++panels;
    }
    // Re-accumulate to shed drift from the running updates.
    total = 0.0;
    err = 0.0;
    while (!heap.empty()) {
        total += heap.top().value;
        err += heap.top().error;
        heap.pop();
    }
    QuadResult out;
    out.value = total;
    out.error = err;
    out.panels = panels;
    out.reliable = std::isfinite(total) && err <= std::max(cfg.abs_tol, cfg.rel_tol * std::abs(total));
    return out;
}

QuadResult quad_oscillatory(const std::function<double(double)>& f, double a, double half_period,
                            const QuadConfig& cfg) {
    if (!(half_period > 0.0)) throw std::invalid_argument("half period must be positive");
    return quad_oscillatory_breaks(f, [a, half_period](int k) { return a + k * half_period; }, cfg);
}

QuadResult quad_oscillatory_breaks(const std::function<double(double)>& f, const std::function<double(int)>& breakpoint,
                                   const QuadConfig& cfg) {
    constexpr int kLevels = 16;
    constexpr int kMinPieces = 24;
    constexpr int kMaxPieces = 100000;
    QuadConfig piece_cfg = cfg;
    piece_cfg.abs_tol = cfg.abs_tol * 1e-2;
    std::vector<double> partial;
    partial.reserve(1024);
    double sum = 0.0, quad_err = 0.0;
    double prev_acc = std::numeric_limits<double>::quiet_NaN();
    int stable = 0;
    QuadResult out;
    double lo = breakpoint(0);
    for (int k = 0; k < kMaxPieces; ++k) {
        double hi = breakpoint(k + 1);
        QuadResult piece = quad(f, lo, hi, piece_cfg);
        lo = hi;
        sum += piece.value;
        quad_err += piece.error;
        partial.push_back(sum);
        if (static_cast<int>(partial.size()) < kMinPieces) continue;
        // Repeated averaging of the last kLevels+1 partial sums.
        double work[kLevels + 1];
        for (int i = 0; i <= kLevels; ++i) work[i] = partial[partial.size() - 1 - kLevels + i];
        for (int lvl = 0; lvl < kLevels; ++lvl)
            for (int i = 0; i < kLevels - lvl; ++i) work[i] = 0.5 * (work[i] + work[i + 1]);
        double acc = work[0];
        double diff = std::abs(acc - prev_acc);
        prev_acc = acc;
        double tol = std::max(cfg.abs_tol, cfg.rel_tol * std::abs(acc));
        if (diff < 0.1 * tol) {
            if (++stable >= 3) {
                out.value = acc;
                out.error = quad_err + diff * 10.0;
                out.reliable = true;
                out.panels = k + 1;
                return out;
            }
        } else {
            stable = 0;
        }
    }
    out.value = prev_acc;
    out.error = quad_err + std::abs(partial.back() - prev_acc);
    out.reliable = false;
    out.panels = kMaxPieces;
    return out;
}

QuadResultC quad_complex(const std::function<std::complex<double>(double)>& f, double a, double b,
                         const QuadConfig& cfg) {
    QuadResult re = quad([&f](double x) { return f(x).real(); }, a, b, cfg);
    QuadResult im = quad([&f](double x) { return f(x).imag(); }, a, b, cfg);
    return {{re.value, im.value}, std::hypot(re.error, im.error), re.reliable && im.reliable};
}

const GaussRule& gauss_legendre(int n) {
    static std::mutex mtx;
    static std::map<int, GaussRule> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    GaussRule rule;
    switch (n) {
        case 10: rule = make_rule<10>(); break;
        case 15: rule = make_rule<15>(); break;
        case 20: rule = make_rule<20>(); break;
        case 25: rule = make_rule<25>(); break;
        case 30: rule = make_rule<30>(); break;
        default: throw std::invalid_argument("unsupported Gauss-Legendre size");
    }
    return cache.emplace(n, std::move(rule)).first->second;
}

}  // namespace bianchi
