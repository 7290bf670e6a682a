#pragma once

// Brute-force reference implementations used by the tests. Everything here is
// written straight from the definitions over ordered draw paths (recursive
// enumeration, products of HPRs, explicit minima over suffixes) and shares no
// code with the library.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <utility>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;
using Path = std::vector<int>;

struct Game {
    Mat t;
    Vec p;
};

inline Game example_t() {
    return {{{1.0, 1.0}, {-0.5, 1.0}, {1.0, -2.0}, {-0.5, -2.0}}, {0.375, 0.375, 0.125, 0.125}};
}

inline Game remark_counterexample() {
    return {{{1.0, 2.0}, {2.0, 1.0}, {-1.0, -1.0}}, {1.0 / 3, 1.0 / 3, 1.0 / 3}};
}

inline double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
}

inline void visit_paths(const Game& g, int k, const std::function<void(const Path&, double)>& f) {
    Path w;
    std::function<void(double)> rec = [&](double prob) {
        if (static_cast<int>(w.size()) == k) {
            f(w, prob);
            return;
        }
        for (int i = 0; i < static_cast<int>(g.p.size()); ++i) {
            w.push_back(i);
            rec(prob * g.p[i]);
            w.pop_back();
        }
    };
    rec(1.0);
}

inline double hpr(const Game& g, int i, const Vec& phi) { return 1.0 + dot(g.t[i], phi); }

/// Product of HPRs over one-based inclusive draws m..n.
inline double twr(const Game& g, const Vec& phi, const Path& w, int m, int n) {
    double prod = 1.0;
    for (int j = m; j <= n; ++j) prod *= hpr(g, w[j - 1], phi);
    return prod;
}

inline double down_log(const Game& g, const Vec& phi, const Path& w) {
    return std::log(std::min(1.0, twr(g, phi, w, 1, static_cast<int>(w.size()))));
}

inline double up_log(const Game& g, const Vec& phi, const Path& w) {
    return std::log(std::max(1.0, twr(g, phi, w, 1, static_cast<int>(w.size()))));
}

/// log min_{1<=l<=K} min{1, TWR_l^K}.
inline double drawdown_log(const Game& g, const Vec& phi, const Path& w) {
    const int k = static_cast<int>(w.size());
    double lo = 1.0;
    for (int l = 1; l <= k; ++l) lo = std::min(lo, twr(g, phi, w, l, k));
    return std::log(lo);
}

/// log max_{1<=l<=K} max{1, TWR_1^l}.
inline double runup_log(const Game& g, const Vec& phi, const Path& w) {
    const int k = static_cast<int>(w.size());
    double hi = 1.0;
    for (int l = 1; l <= k; ++l) hi = std::max(hi, twr(g, phi, w, 1, l));
    return std::log(hi);
}

template <typename F>
double expect(const Game& g, int k, F f) {
    double acc = 0.0;
    visit_paths(g, k, [&](const Path& w, double prob) { acc += prob * f(w); });
    return acc;
}

inline double expected_down(const Game& g, const Vec& phi, int k) {
    return expect(g, k, [&](const Path& w) { return down_log(g, phi, w); });
}
inline double expected_up(const Game& g, const Vec& phi, int k) {
    return expect(g, k, [&](const Path& w) { return up_log(g, phi, w); });
}
inline double expected_drawdown(const Game& g, const Vec& phi, int k) {
    return expect(g, k, [&](const Path& w) { return drawdown_log(g, phi, w); });
}
inline double expected_runup(const Game& g, const Vec& phi, int k) {
    return expect(g, k, [&](const Path& w) { return runup_log(g, phi, w); });
}

/// Sum of the drawn rows as a vector (exact for dyadic entries).
inline Vec row_sum(const Game& g, const Path& w, int first, int last) {
    Vec v(g.t[0].size(), 0.0);
    for (int j = first; j <= last; ++j)
        for (std::size_t c = 0; c < v.size(); ++c) v[c] += g.t[w[j - 1]][c];
    return v;
}

/// First index maximising the linear equity strictly above 0; 0 if none.
inline int linear_top(const Game& g, const Vec& theta, const Path& w) {
    int top = 0;
    double best = 0.0;
    for (int l = 1; l <= static_cast<int>(w.size()); ++l) {
        const double v = dot(row_sum(g, w, 1, l), theta);
        if (v > best) {
            best = v;
            top = l;
        }
    }
    return top;
}

/// First index maximising TWR_1^l strictly above 1 (products, no logs).
inline int twr_top(const Game& g, const Vec& phi, const Path& w) {
    int top = 0;
    double best = 1.0;
    for (int l = 1; l <= static_cast<int>(w.size()); ++l) {
        const double v = twr(g, phi, w, 1, l);
        if (v > best) {
            best = v;
            top = l;
        }
    }
    return top;
}

inline double rho_downX(const Game& g, const Vec& phi, int k) {
    return -expect(g, k, [&](const Path& w) {
        return std::min(0.0, dot(row_sum(g, w, 1, static_cast<int>(w.size())), phi));
    });
}

inline double rho_curX(const Game& g, const Vec& phi, int k) {
    const double s = std::sqrt(dot(phi, phi));
    if (s == 0.0) return 0.0;
    Vec theta(phi);
    for (auto& x : theta) x /= s;
    return -expect(g, k, [&](const Path& w) {
        const int top = linear_top(g, theta, w);
        return dot(row_sum(g, w, top + 1, static_cast<int>(w.size())), phi);
    });
}

/// Path form of the first approximation: paths whose linear terminal equity
/// is <= 0 contribute their full log TWR.
inline double d_first(const Game& g, double s, const Vec& theta, int k) {
    Vec phi(theta);
    for (auto& x : phi) x *= s;
    return expect(g, k, [&](const Path& w) {
        const int n = static_cast<int>(w.size());
        if (dot(row_sum(g, w, 1, n), theta) > 0.0) return 0.0;
        return std::log(twr(g, phi, w, 1, n));
    });
}

inline double d_cur_first(const Game& g, double s, const Vec& theta, int k) {
    Vec phi(theta);
    for (auto& x : phi) x *= s;
    return expect(g, k, [&](const Path& w) {
        const int top = linear_top(g, theta, w);
        return std::log(twr(g, phi, w, top + 1, static_cast<int>(w.size())));
    });
}

/// Count vector -> total probability, by grouping ordered paths.
inline std::map<std::vector<int>, double> grouped_counts(const Game& g, int k) {
    std::map<std::vector<int>, double> out;
    visit_paths(g, k, [&](const Path& w, double prob) {
        std::vector<int> x(g.p.size(), 0);
        for (int i : w) ++x[i];
        out[x] += prob;
    });
    return out;
}

} // namespace oracle
