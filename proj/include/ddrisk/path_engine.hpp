#pragma once

// Exhaustive enumeration of the K-draw trading game: ordered draw paths omega
// in lexicographic order, unordered count vectors x in colexicographic order,
// and the per-path log series (terminal, up/down-trade, current drawdown,
// run-up) with the TWR and linear-equity topping points.
//
// Row indices are zero-based throughout; twr_segment keeps the one-based
// inclusive [m, n] convention of TWR_m^n.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ddrisk/errors.hpp"
#include "ddrisk/trade_core.hpp"

namespace ddrisk {

inline constexpr std::uint64_t kDefaultBudget = std::uint64_t{1} << 24;

/// Prefix log-sums closer than this are ties for the TWR topping point.
inline constexpr double kTopTieTolerance = 1e-14;

struct PathOutcome {
    std::vector<std::size_t> omega;
    double prob = 0.0;
};

struct CountVector {
    std::vector<int> x;
    double weight = 0.0;
};

/// N^K, saturated at UINT64_MAX.
inline std::uint64_t path_count(std::size_t n, int k) {
    std::uint64_t total = 1;
    for (int j = 0; j < k; ++j) {
        if (total > std::numeric_limits<std::uint64_t>::max() / n) return std::numeric_limits<std::uint64_t>::max();
        total *= n;
    }
    return total;
}

/// C(K+N-1, N-1), saturated at UINT64_MAX.
inline std::uint64_t composition_count(std::size_t n, int k) {
    std::uint64_t c = 1;
    const std::uint64_t top = static_cast<std::uint64_t>(k) + n - 1;
    for (std::uint64_t j = 1; j < n; ++j) {
        const std::uint64_t num = top - (n - 1) + j; // k + j
        if (c > std::numeric_limits<std::uint64_t>::max() / num) return std::numeric_limits<std::uint64_t>::max();
        c = c * num / j;
    }
    return c;
}

inline void require_draws(int k) {
    if (k < 1) throw ValidationError("number of draws K must be at least 1");
}

inline void require_path_budget(std::size_t n, int k, std::uint64_t budget) {
    require_draws(k);
    const auto count = path_count(n, k);
    if (count > budget)
        throw BudgetError("enumeration limit: " + std::to_string(n) + "^" + std::to_string(k) +
                          " paths exceed the budget of " + std::to_string(budget));
}

/// Calls f(omega, prob) for each of the N^K ordered paths, lexicographically.
/// prob is the left-to-right product of the draw probabilities.
template <typename F>
void for_each_path(std::span<const double> probs, int k, std::uint64_t budget, F&& f) {
    const std::size_t n = probs.size();
    require_path_budget(n, k, budget);
    const auto len = static_cast<std::size_t>(k);
    std::vector<std::size_t> omega(len, 0);
    // prefix[j] = product of the first j draw probabilities.
    std::vector<double> prefix(len + 1, 1.0);
    std::size_t dirty = 0;
    while (true) {
        for (std::size_t j = dirty; j < len; ++j) prefix[j + 1] = prefix[j] * probs[omega[j]];
        f(std::span<const std::size_t>(omega), prefix[len]);
        std::size_t pos = len;
        while (pos > 0 && omega[pos - 1] + 1 == n) {
            omega[pos - 1] = 0;
            --pos;
        }
        if (pos == 0) return;
        ++omega[pos - 1];
        dirty = pos - 1;
    }
}

inline std::vector<PathOutcome> enumerate_paths(std::span<const double> probs, int k,
                                                std::uint64_t budget = kDefaultBudget) {
    std::vector<PathOutcome> out;
    out.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(path_count(probs.size(), k), budget)));
    for_each_path(probs, k, budget, [&](std::span<const std::size_t> omega, double p) {
        out.push_back({{omega.begin(), omega.end()}, p});
    });
    return out;
}

namespace detail {

template <typename F>
void compose_from_last(std::vector<int>& x, std::size_t pos, int remaining, F& f) {
    if (pos == 0) {
        x[0] = remaining;
        f(static_cast<const std::vector<int>&>(x));
        return;
    }
    for (int v = 0; v <= remaining; ++v) {
        x[pos] = v;
        compose_from_last(x, pos - 1, remaining - v, f);
    }
    x[pos] = 0;
}

} // namespace detail

/// Multinomial coefficient K! / (x_1! ... x_N!) built from exact binomials.
inline double multinomial_coefficient(std::span<const int> x) {
    std::uint64_t coef = 1;
    int total = 0;
    for (int xi : x) {
        // coef *= C(total + xi, xi), one factor at a time to stay exact.
        for (int j = 1; j <= xi; ++j) {
            coef = coef * static_cast<std::uint64_t>(total + j) / static_cast<std::uint64_t>(j);
        }
        total += xi;
    }
    return static_cast<double>(coef);
}

/// H^(K,N)(x) = p_1^{x_1} ... p_N^{x_N} * multinomial(K; x).
inline double composition_weight(std::span<const double> probs, std::span<const int> x) {
    double w = multinomial_coefficient(x);
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] > 0) w *= std::pow(probs[i], x[i]);
    return w;
}

/// Calls f(x, weight) for each composition of K into N nonnegative parts, in
/// colexicographic order ((2,0), (1,1), (0,2) for N = K = 2).
template <typename F>
void for_each_count(std::span<const double> probs, int k, std::uint64_t budget, F&& f) {
    require_draws(k);
    const std::size_t n = probs.size();
    if (composition_count(n, k) > budget)
        throw BudgetError("enumeration limit: " + std::to_string(composition_count(n, k)) +
                          " compositions exceed the budget of " + std::to_string(budget));
    // Exact coefficients need K! / prod x_i! < 2^53 at every step; fine at desk scale.
    if (k > 60) throw BudgetError("composition weights are exact only for K <= 60");
    std::vector<int> x(n, 0);
    auto visit = [&](const std::vector<int>& xs) { f(std::span<const int>(xs), composition_weight(probs, xs)); };
    detail::compose_from_last(x, n - 1, k, visit);
}

inline std::vector<CountVector> enumerate_counts(std::span<const double> probs, int k,
                                                 std::uint64_t budget = kDefaultBudget) {
    std::vector<CountVector> out;
    for_each_count(probs, k, budget, [&](std::span<const int> x, double w) {
        out.push_back({{x.begin(), x.end()}, w});
    });
    return out;
}

// ---------------------------------------------------------------------------
// Per-path quantities
// ---------------------------------------------------------------------------

inline void require_path(const TradeMatrix& t, std::span<const std::size_t> omega) {
    if (omega.empty()) throw ValidationError("draw path must have at least one draw");
    for (auto w : omega)
        if (w >= t.rows()) throw std::out_of_range("draw index " + std::to_string(w) + " outside the trade matrix");
}

/// TWR_m^n(phi, omega) = prod_{j=m..n} (1 + <t_{omega_j}, phi>), with one-based
/// inclusive m, n; the empty product (m > n) is 1.
inline double twr_segment(const TradeMatrix& t, const PortionVector& phi, std::span<const std::size_t> omega,
                          std::size_t m, std::size_t n) {
    require_path(t, omega);
    if (m == 0 || n > omega.size()) throw std::out_of_range("segment bounds outside 1..K");
    double acc = 1.0;
    for (std::size_t j = m; j <= n; ++j) acc *= 1.0 + linalg::dot(t.row(omega[j - 1]), phi.values());
    return acc;
}

/// log(1 + <t_i, phi>) per row; -inf for a zero HPR. Throws for a negative HPR.
inline std::vector<double> row_log_hpr(const TradeMatrix& t, std::span<const double> phi) {
    auto a = row_products(t, phi);
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double h = 1.0 + a[i];
        if (h < 0.0)
            throw DomainError("portion vector lies outside G (HPR_" + std::to_string(i + 1) + " = " +
                              std::to_string(h) + ")");
        a[i] = h == 0.0 ? -std::numeric_limits<double>::infinity() : std::log1p(a[i]);
    }
    return a;
}

/// All log series of one path. Values are -inf on paths through a zero HPR.
struct PathLogSeries {
    double terminal = 0.0; ///< Z = log TWR_1^K
    double up = 0.0;       ///< U = log max{1, TWR_1^K}
    double down = 0.0;     ///< D = log min{1, TWR_1^K}
    double drawdown = 0.0; ///< D_cur
    double runup = 0.0;    ///< U_run
    std::size_t top = 0;   ///< first TWR topping point l*
};

/// Evaluates a path from precomputed row log-HPRs. The topping point is the
/// first index whose prefix log-sum exceeds every earlier one (and 0) by more
/// than kTopTieTolerance; drawdown and run-up use the exact running maximum.
inline PathLogSeries evaluate_path(std::span<const double> log_hpr, std::span<const std::size_t> omega) {
    PathLogSeries out;
    double sum = 0.0;
    double peak = 0.0;
    double top_value = 0.0;
    for (std::size_t j = 0; j < omega.size(); ++j) {
        sum += log_hpr[omega[j]];
        if (sum > peak) peak = sum;
        if (sum > top_value + kTopTieTolerance) {
            top_value = sum;
            out.top = j + 1;
        }
    }
    out.terminal = sum;
    out.up = std::max(0.0, sum);
    out.down = std::min(0.0, sum);
    out.runup = peak;
    out.drawdown = std::isinf(sum) ? sum : std::min(0.0, sum - peak);
    return out;
}

inline PathLogSeries path_log_series(const TradeMatrix& t, const PortionVector& phi,
                                     std::span<const std::size_t> omega) {
    require_path(t, omega);
    return evaluate_path(row_log_hpr(t, phi.values()), omega);
}

inline double downtrade_log(const TradeMatrix& t, const PortionVector& phi, std::span<const std::size_t> omega) {
    return path_log_series(t, phi, omega).down;
}
inline double uptrade_log(const TradeMatrix& t, const PortionVector& phi, std::span<const std::size_t> omega) {
    return path_log_series(t, phi, omega).up;
}
inline double current_drawdown_log(const TradeMatrix& t, const PortionVector& phi,
                                   std::span<const std::size_t> omega) {
    return path_log_series(t, phi, omega).drawdown;
}
inline double runup_log(const TradeMatrix& t, const PortionVector& phi, std::span<const std::size_t> omega) {
    return path_log_series(t, phi, omega).runup;
}
inline std::size_t twr_topping_point(const TradeMatrix& t, const PortionVector& phi,
                                     std::span<const std::size_t> omega) {
    return path_log_series(t, phi, omega).top;
}

/// Prefix sums of the linear equity linEQ_1^l(theta, omega) for l = 0..K.
/// The row vectors are accumulated first and projected afterwards, so that
/// segments whose rows cancel exactly (e.g. 2 t_2 + t_3 = 0) project to an
/// exact zero rather than to rounding noise.
class LinearEquity {
public:
    LinearEquity(const TradeMatrix& t, std::span<const double> theta) : t_(&t), theta_(theta.begin(), theta.end()) {
        require_dimension(t, theta);
    }

    void prefix_sums(std::span<const std::size_t> omega, std::vector<double>& out) const {
        const std::size_t m = t_->systems();
        acc_.assign(m, 0.0);
        out.assign(omega.size() + 1, 0.0);
        for (std::size_t j = 0; j < omega.size(); ++j) {
            const auto r = t_->row(omega[j]);
            for (std::size_t k = 0; k < m; ++k) acc_[k] += r[k];
            out[j + 1] = linalg::dot(acc_, theta_);
        }
    }

    /// First index l with linEQ_1^l strictly above 0 and above every earlier
    /// prefix; 0 when the linear equity never exceeds 0.
    [[nodiscard]] std::size_t topping_point(std::span<const std::size_t> omega) const {
        prefix_sums(omega, sums_);
        std::size_t top = 0;
        double best = 0.0;
        for (std::size_t l = 1; l < sums_.size(); ++l) {
            if (sums_[l] > best) {
                best = sums_[l];
                top = l;
            }
        }
        return top;
    }

    [[nodiscard]] std::span<const double> last_sums() const noexcept { return sums_; }

private:
    const TradeMatrix* t_;
    std::vector<double> theta_;
    mutable std::vector<double> acc_;
    mutable std::vector<double> sums_;
};

inline std::size_t linear_topping_point(const TradeMatrix& t, std::span<const double> theta,
                                        std::span<const std::size_t> omega) {
    require_path(t, omega);
    return LinearEquity(t, theta).topping_point(omega);
}

/// Sign conditions that characterise l-hat* = l: every segment sum
/// linEQ_k^l (k = 1..l) is positive and every segment sum linEQ_{l+1}^k
/// (k = l+1..K) is nonpositive. Segment sums are formed directly.
inline bool linear_topping_conditions_hold(const TradeMatrix& t, std::span<const double> theta,
                                           std::span<const std::size_t> omega, std::size_t l) {
    const std::size_t m = t.systems();
    std::vector<double> seg(m);
    auto segment = [&](std::size_t first, std::size_t last) { // one-based inclusive
        std::fill(seg.begin(), seg.end(), 0.0);
        for (std::size_t j = first; j <= last; ++j) {
            const auto r = t.row(omega[j - 1]);
            for (std::size_t k = 0; k < m; ++k) seg[k] += r[k];
        }
        return linalg::dot(seg, theta);
    };
    for (std::size_t k = 1; k <= l; ++k)
        if (!(segment(k, l) > 0.0)) return false;
    for (std::size_t k = l + 1; k <= omega.size(); ++k)
        if (!(segment(l + 1, k) <= 0.0)) return false;
    return true;
}

} // namespace ddrisk
