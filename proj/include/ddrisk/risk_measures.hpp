#pragma once

// Drawdown risk measures of the K-draw trading game.
//
//   rho_down  = -E[D]       (terminal loss, from count vectors)
//   rho_downX = -s L(theta) (second approximation, positively homogeneous)
//   rho_cur   = -E[D_cur]   (current drawdown, from ordered paths)
//   rho_curX  = -s L_cur(theta)
//
// plus the first approximations d, d_cur and the gain-side counterparts u,
// u_run, all built from the coefficient families U, D (per count vector) and
// Lambda, Upsilon (per path, grouped on the linear topping point).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ddrisk/errors.hpp"
#include "ddrisk/linalg.hpp"
#include "ddrisk/path_engine.hpp"
#include "ddrisk/trade_core.hpp"

namespace ddrisk {

enum class MeasureKind { down, downX, downFirstApprox, cur, curX, curFirstApprox, upExpect, runupExpect };

inline constexpr MeasureKind kAllMeasures[] = {MeasureKind::down,           MeasureKind::downX,
                                               MeasureKind::downFirstApprox, MeasureKind::cur,
                                               MeasureKind::curX,           MeasureKind::curFirstApprox,
                                               MeasureKind::upExpect,       MeasureKind::runupExpect};

inline const char* to_string(MeasureKind k) noexcept {
    switch (k) {
    case MeasureKind::down: return "down";
    case MeasureKind::downX: return "downX";
    case MeasureKind::downFirstApprox: return "downFirstApprox";
    case MeasureKind::cur: return "cur";
    case MeasureKind::curX: return "curX";
    case MeasureKind::curFirstApprox: return "curFirstApprox";
    case MeasureKind::upExpect: return "upExpect";
    case MeasureKind::runupExpect: return "runupExpect";
    }
    return "?";
}

inline MeasureKind parse_measure(std::string_view name) {
    for (auto k : kAllMeasures)
        if (name == to_string(k)) return k;
    throw ValidationError("unknown measure '" + std::string(name) + "'");
}

/// Risk measures proper (nonnegative); the rest are log-series expectations.
inline bool is_risk_measure(MeasureKind k) noexcept {
    return k == MeasureKind::down || k == MeasureKind::downX || k == MeasureKind::cur || k == MeasureKind::curX;
}

namespace detail {

inline void require_theta(const TradeMatrix& t, std::span<const double> theta) {
    require_dimension(t, theta);
    const double len = linalg::norm2(theta);
    if (std::abs(len - 1.0) > 1e-9) throw ValidationError("direction theta must have unit length");
}

inline void require_interior(const TradeMatrix& t, std::span<const double> phi) {
    require_dimension(t, phi);
    const AdmissibleSet g(t);
    if (!g.is_interior(phi)) throw DomainError("portion vector is not in the interior of G");
}

/// <sum_n x_n t_n, v>: the row combination is formed first so that exact
/// cancellations among rows give an exact zero.
inline double combined_product(const TradeMatrix& t, std::span<const int> x, std::span<const double> v,
                               std::vector<double>& acc) {
    acc.assign(t.systems(), 0.0);
    for (std::size_t n = 0; n < x.size(); ++n) {
        if (x[n] == 0) continue;
        const auto r = t.row(n);
        for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += x[n] * r[k];
    }
    return linalg::dot(acc, v);
}

/// sum_n c_n log(1 + s a_n), skipping zero coefficients; -inf when a term with
/// positive coefficient has a nonpositive HPR.
inline double weighted_log_sum(std::span<const double> coef, std::span<const double> a, double s) {
    double acc = 0.0;
    for (std::size_t n = 0; n < coef.size(); ++n) {
        if (coef[n] == 0.0) continue;
        const double y = s * a[n];
        if (!(1.0 + y > 0.0)) return -std::numeric_limits<double>::infinity();
        acc += coef[n] * std::log1p(y);
    }
    return acc;
}

inline double weighted_sum(std::span<const double> coef, std::span<const double> a) {
    double acc = 0.0;
    for (std::size_t n = 0; n < coef.size(); ++n) acc += coef[n] * a[n];
    return acc;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Coefficients
// ---------------------------------------------------------------------------

enum class CoefficientKind { up, down, drawdown, runup };

/// Coefficients indexed by row n (`values`) and, for the path families, by
/// topping level l = 0..K as well (`by_level[l][n]`); `values` is then the
/// sum over l.
struct CoefficientTable {
    CoefficientKind kind = CoefficientKind::up;
    std::vector<double> theta;
    std::vector<double> values;
    std::vector<std::vector<double>> by_level;
};

struct CountCoefficients {
    CoefficientTable up;
    CoefficientTable down;
};

/// U_n sums H(x) x_n over count vectors with sum_i x_i <t_i,theta> > 0, D_n over
/// the rest. A count vector on the hyperplane (sum exactly 0) goes to D.
inline CountCoefficients count_coefficients(const TradeMatrix& t, std::span<const double> theta, int k,
                                            std::uint64_t budget = kDefaultBudget) {
    require_dimension(t, theta);
    const std::size_t n = t.rows();
    CountCoefficients out;
    out.up = {CoefficientKind::up, {theta.begin(), theta.end()}, std::vector<double>(n, 0.0), {}};
    out.down = {CoefficientKind::down, {theta.begin(), theta.end()}, std::vector<double>(n, 0.0), {}};
    std::vector<double> acc;
    for_each_count(t.probs(), k, budget, [&](std::span<const int> x, double w) {
        auto& target = detail::combined_product(t, x, theta, acc) > 0.0 ? out.up.values : out.down.values;
        for (std::size_t i = 0; i < n; ++i) target[i] += w * x[i];
    });
    return out;
}

struct PathCoefficients {
    CoefficientTable drawdown; ///< Lambda: occurrences strictly after the linear topping point
    CoefficientTable runup;    ///< Upsilon: occurrences at or before it
};

inline PathCoefficients path_coefficients(const TradeMatrix& t, std::span<const double> theta, int k,
                                          std::uint64_t budget = kDefaultBudget) {
    require_dimension(t, theta);
    const std::size_t n = t.rows();
    const auto levels = static_cast<std::size_t>(k) + 1;
    PathCoefficients out;
    out.drawdown = {CoefficientKind::drawdown, {theta.begin(), theta.end()}, std::vector<double>(n, 0.0),
                    std::vector<std::vector<double>>(levels, std::vector<double>(n, 0.0))};
    out.runup = {CoefficientKind::runup, {theta.begin(), theta.end()}, std::vector<double>(n, 0.0),
                 std::vector<std::vector<double>>(levels, std::vector<double>(n, 0.0))};
    const LinearEquity lin(t, theta);
    for_each_path(t.probs(), k, budget, [&](std::span<const std::size_t> omega, double p) {
        const std::size_t top = lin.topping_point(omega);
        for (std::size_t j = 0; j < omega.size(); ++j) {
            auto& level = (j < top ? out.runup : out.drawdown).by_level[top];
            level[omega[j]] += p;
        }
    });
    for (auto* table : {&out.drawdown, &out.runup})
        for (const auto& level : table->by_level)
            for (std::size_t i = 0; i < n; ++i) table->values[i] += level[i];
    return out;
}

// ---------------------------------------------------------------------------
// Path expectations (the brute-force definitions)
// ---------------------------------------------------------------------------

struct PathExpectations {
    double terminal = 0.0; ///< E[Z]
    double up = 0.0;       ///< E[U]
    double down = 0.0;     ///< E[D]
    double drawdown = 0.0; ///< E[D_cur]
    double runup = 0.0;    ///< E[U_run]
};

/// Expectations of all log series over the N^K ordered paths. Requires phi in
/// G; a zero HPR yields -inf for the affected expectations.
inline PathExpectations path_expectations(const TradeMatrix& t, const PortionVector& phi, int k,
                                          std::uint64_t budget = kDefaultBudget) {
    const auto log_hpr = row_log_hpr(t, phi.values());
    PathExpectations e;
    for_each_path(t.probs(), k, budget, [&](std::span<const std::size_t> omega, double p) {
        const auto s = evaluate_path(log_hpr, omega);
        e.terminal += p * s.terminal;
        e.up += p * s.up;
        e.down += p * s.down;
        e.drawdown += p * s.drawdown;
        e.runup += p * s.runup;
    });
    return e;
}

// ---------------------------------------------------------------------------
// Terminal (down-trade) family
// ---------------------------------------------------------------------------

/// -E[D] from count vectors: sum_x H(x) log min{1, prod_n HPR_n^{x_n}}.
inline double rho_down(const TradeMatrix& t, const PortionVector& phi, int k, std::uint64_t budget = kDefaultBudget) {
    require_dimension(t, phi.values());
    require_draws(k);
    if (phi.is_zero()) return 0.0;
    detail::require_interior(t, phi.values());
    const auto log_hpr = row_log_hpr(t, phi.values());
    double acc = 0.0;
    for_each_count(t.probs(), k, budget, [&](std::span<const int> x, double w) {
        double z = 0.0;
        for (std::size_t n = 0; n < x.size(); ++n) z += x[n] * log_hpr[n];
        acc += w * std::min(0.0, z);
    });
    return -acc;
}

/// L(theta) = sum_x H(x) min{sum_n x_n <t_n, theta>, 0}.
inline double loss_linear(const TradeMatrix& t, std::span<const double> v, int k,
                          std::uint64_t budget = kDefaultBudget) {
    require_dimension(t, v);
    std::vector<double> acc;
    double total = 0.0;
    for_each_count(t.probs(), k, budget, [&](std::span<const int> x, double w) {
        total += w * std::min(detail::combined_product(t, x, v, acc), 0.0);
    });
    return total;
}

/// -s L(theta) = -L(phi); defined on all of R^M.
inline double rho_downX(const TradeMatrix& t, const PortionVector& phi, int k,
                        std::uint64_t budget = kDefaultBudget) {
    require_dimension(t, phi.values());
    require_draws(k);
    if (phi.is_zero()) return 0.0;
    return -loss_linear(t, phi.values(), k, budget);
}

/// d = sum_n D_n(theta) log(1 + s <t_n, theta>); -inf when s theta leaves the
/// interior through a row that carries weight.
inline double d_first_approx(const TradeMatrix& t, double s, std::span<const double> theta, int k,
                             std::uint64_t budget = kDefaultBudget) {
    detail::require_theta(t, theta);
    require_draws(k);
    if (s < 0.0) throw ValidationError("scale s must be nonnegative");
    if (s == 0.0) return 0.0;
    const auto coef = count_coefficients(t, theta, k, budget);
    return detail::weighted_log_sum(coef.down.values, row_products(t, theta), s);
}

/// d-tilde = s sum_n D_n(theta) <t_n, theta>, the linearisation of d in s.
inline double d_second_approx(const TradeMatrix& t, double s, std::span<const double> theta, int k,
                              std::uint64_t budget = kDefaultBudget) {
    detail::require_theta(t, theta);
    require_draws(k);
    if (s == 0.0) return 0.0;
    const auto coef = count_coefficients(t, theta, k, budget);
    return s * detail::weighted_sum(coef.down.values, row_products(t, theta));
}

/// u = sum_n U_n(theta) log(1 + s <t_n, theta>); requires s theta in int G.
inline double u_expect(const TradeMatrix& t, double s, std::span<const double> theta, int k,
                       std::uint64_t budget = kDefaultBudget) {
    detail::require_theta(t, theta);
    require_draws(k);
    if (s == 0.0) return 0.0;
    detail::require_interior(t, PortionVector::from_polar(s, theta).values());
    const auto coef = count_coefficients(t, theta, k, budget);
    return detail::weighted_log_sum(coef.up.values, row_products(t, theta), s);
}

/// True when every count vector splits the same way under the exact log
/// criterion (prod HPR^x < 1) as under the linear one (sum x a <= 0), which is
/// what makes d and u equal E[D] and E[U] at this (s, theta).
inline bool terminal_small_s_holds(const TradeMatrix& t, double s, std::span<const double> theta, int k,
                                   std::uint64_t budget = kDefaultBudget) {
    detail::require_theta(t, theta);
    if (s == 0.0) return true;
    const auto a = row_products(t, theta);
    for (double x : a)
        if (!(1.0 + s * x > 0.0)) return false;
    std::vector<double> acc;
    bool ok = true;
    for_each_count(t.probs(), k, budget, [&](std::span<const int> x, double) {
        if (!ok) return;
        double h = 0.0;
        for (std::size_t n = 0; n < x.size(); ++n)
            if (x[n] != 0) h += x[n] * std::log1p(s * a[n]);
        const bool gain_linear = detail::combined_product(t, x, theta, acc) > 0.0;
        // sum x a <= 0 forces h <= 0 by concavity; only the gain side can flip.
        if (gain_linear && h < 0.0) ok = false;
    });
    return ok;
}

// ---------------------------------------------------------------------------
// Current-drawdown family
// ---------------------------------------------------------------------------

/// -E[D_cur] over all ordered paths.
inline double rho_cur(const TradeMatrix& t, const PortionVector& phi, int k, std::uint64_t budget = kDefaultBudget) {
    require_dimension(t, phi.values());
    require_draws(k);
    if (phi.is_zero()) return 0.0;
    detail::require_interior(t, phi.values());
    const auto log_hpr = row_log_hpr(t, phi.values());
    double acc = 0.0;
    for_each_path(t.probs(), k, budget, [&](std::span<const std::size_t> omega, double p) {
        acc += p * evaluate_path(log_hpr, omega).drawdown;
    });
    return -acc;
}

/// L_cur(theta) scaled by s: sum_omega P(omega) sum_{i > l-hat*} <t_{omega_i}, phi>,
/// with l-hat* taken along theta = phi / |phi|.
inline double loss_linear_cur(const TradeMatrix& t, const PortionVector& phi, int k,
                              std::uint64_t budget = kDefaultBudget) {
    require_dimension(t, phi.values());
    if (phi.is_zero()) return 0.0;
    const auto theta = phi.direction();
    const LinearEquity lin(t, theta);
    const std::size_t m = t.systems();
    std::vector<double> tail(m);
    double total = 0.0;
    for_each_path(t.probs(), k, budget, [&](std::span<const std::size_t> omega, double p) {
        const std::size_t top = lin.topping_point(omega);
        if (top == omega.size()) return;
        std::fill(tail.begin(), tail.end(), 0.0);
        for (std::size_t j = top; j < omega.size(); ++j) {
            const auto r = t.row(omega[j]);
            for (std::size_t c = 0; c < m; ++c) tail[c] += r[c];
        }
        total += p * linalg::dot(tail, phi.values());
    });
    return total;
}

inline double rho_curX(const TradeMatrix& t, const PortionVector& phi, int k, std::uint64_t budget = kDefaultBudget) {
    require_draws(k);
    return -loss_linear_cur(t, phi, k, budget);
}

/// d_cur = sum_n (sum_l Lambda_n^l(theta)) log(1 + s <t_n, theta>).
inline double d_cur_first_approx(const TradeMatrix& t, double s, std::span<const double> theta, int k,
                                 std::uint64_t budget = kDefaultBudget) {
    detail::require_theta(t, theta);
    require_draws(k);
    if (s < 0.0) throw ValidationError("scale s must be nonnegative");
    if (s == 0.0) return 0.0;
    const auto coef = path_coefficients(t, theta, k, budget);
    return detail::weighted_log_sum(coef.drawdown.values, row_products(t, theta), s);
}

inline double d_cur_second_approx(const TradeMatrix& t, double s, std::span<const double> theta, int k,
                                  std::uint64_t budget = kDefaultBudget) {
    detail::require_theta(t, theta);
    require_draws(k);
    if (s == 0.0) return 0.0;
    const auto coef = path_coefficients(t, theta, k, budget);
    return s * detail::weighted_sum(coef.drawdown.values, row_products(t, theta));
}

/// u_run = sum_n (sum_l Upsilon_n^l(theta)) log(1 + s <t_n, theta>).
inline double u_run_expect(const TradeMatrix& t, double s, std::span<const double> theta, int k,
                           std::uint64_t budget = kDefaultBudget) {
    detail::require_theta(t, theta);
    require_draws(k);
    if (s == 0.0) return 0.0;
    detail::require_interior(t, PortionVector::from_polar(s, theta).values());
    const auto coef = path_coefficients(t, theta, k, budget);
    return detail::weighted_log_sum(coef.runup.values, row_products(t, theta), s);
}

/// True when the TWR topping point of s theta equals the linear topping point
/// of theta on every path, which makes d_cur and u_run exact.
inline bool drawdown_small_s_holds(const TradeMatrix& t, double s, std::span<const double> theta, int k,
                                   std::uint64_t budget = kDefaultBudget) {
    detail::require_theta(t, theta);
    if (s == 0.0) return true;
    const auto phi = PortionVector::from_polar(s, theta);
    if (!AdmissibleSet(t).is_interior(phi.values())) return false;
    const auto log_hpr = row_log_hpr(t, phi.values());
    const LinearEquity lin(t, theta);
    bool ok = true;
    for_each_path(t.probs(), k, budget, [&](std::span<const std::size_t> omega, double) {
        if (ok && evaluate_path(log_hpr, omega).top != lin.topping_point(omega)) ok = false;
    });
    return ok;
}

// ---------------------------------------------------------------------------
// Strict-convexity diagnostic
// ---------------------------------------------------------------------------

/// Whether the rows not orthogonal to theta span R^M.
inline bool span_condition_holds(const TradeMatrix& t, std::span<const double> theta, double tol = 1e-12) {
    require_dimension(t, theta);
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < t.rows(); ++i) {
        const auto r = t.row(i);
        if (std::abs(linalg::dot(r, theta)) > tol * std::max(1.0, linalg::norm2(r))) keep.push_back(i);
    }
    if (keep.size() < t.systems()) return false;
    linalg::Matrix sub(keep.size(), t.systems());
    for (std::size_t i = 0; i < keep.size(); ++i)
        for (std::size_t c = 0; c < t.systems(); ++c) sub(i, c) = t(keep[i], c);
    return linalg::rank(sub) == t.systems();
}

struct SpanDiagnostic {
    std::size_t directions = 0;
    std::size_t failures = 0;
    std::vector<std::vector<double>> failing;
};

/// Evaluates the span condition on `count` equally spaced directions of the
/// unit circle (M = 2) or on the coordinate-plane circles (M > 2).
inline SpanDiagnostic span_diagnostic(const TradeMatrix& t, std::size_t count = 360) {
    SpanDiagnostic out;
    const std::size_t m = t.systems();
    const double two_pi = 2.0 * std::acos(-1.0);
    auto probe = [&](std::vector<double> theta) {
        ++out.directions;
        if (!span_condition_holds(t, theta)) {
            ++out.failures;
            out.failing.push_back(std::move(theta));
        }
    };
    if (m == 1) {
        probe({1.0});
        probe({-1.0});
        return out;
    }
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = a + 1; b < m; ++b)
            for (std::size_t j = 0; j < count; ++j) {
                const double ang = two_pi * static_cast<double>(j) / static_cast<double>(count);
                std::vector<double> theta(m, 0.0);
                theta[a] = std::cos(ang);
                theta[b] = std::sin(ang);
                probe(std::move(theta));
            }
    return out;
}

// ---------------------------------------------------------------------------
// Game facade
// ---------------------------------------------------------------------------

/// A trade matrix with a fixed number of draws and an enumeration budget. The
/// no-risk-free-investment check runs once at construction.
class TradingGame {
public:
    TradingGame(TradeMatrix t, int draws, std::uint64_t budget = kDefaultBudget)
        : t_(std::move(t)), k_(draws), budget_(budget), check_(check_no_risk_free(t_)) {
        require_draws(draws);
    }

    [[nodiscard]] const TradeMatrix& matrix() const noexcept { return t_; }
    [[nodiscard]] int draws() const noexcept { return k_; }
    [[nodiscard]] std::uint64_t budget() const noexcept { return budget_; }
    [[nodiscard]] const NoRiskFreeCheck& assumption() const noexcept { return check_; }

private:
    TradeMatrix t_;
    int k_;
    std::uint64_t budget_;
    NoRiskFreeCheck check_;
};

struct Evaluation {
    double value = 0.0;
    bool assumption_verified = false;
    /// Set for the first-approximation and gain-side kinds; nullopt otherwise.
    std::optional<bool> small_s_verified;
};

inline double measure_value(const TradeMatrix& t, MeasureKind kind, const PortionVector& phi, int k,
                            std::uint64_t budget = kDefaultBudget) {
    require_dimension(t, phi.values());
    switch (kind) {
    case MeasureKind::down: return rho_down(t, phi, k, budget);
    case MeasureKind::downX: return rho_downX(t, phi, k, budget);
    case MeasureKind::cur: return rho_cur(t, phi, k, budget);
    case MeasureKind::curX: return rho_curX(t, phi, k, budget);
    default: break;
    }
    if (phi.is_zero()) return 0.0;
    const double s = phi.scale();
    const auto theta = phi.direction();
    switch (kind) {
    case MeasureKind::downFirstApprox: return d_first_approx(t, s, theta, k, budget);
    case MeasureKind::curFirstApprox: return d_cur_first_approx(t, s, theta, k, budget);
    case MeasureKind::upExpect: return u_expect(t, s, theta, k, budget);
    case MeasureKind::runupExpect: return u_run_expect(t, s, theta, k, budget);
    default: break;
    }
    throw ValidationError("unhandled measure");
}

inline Evaluation evaluate(const TradingGame& game, MeasureKind kind, const PortionVector& phi) {
    const auto& t = game.matrix();
    Evaluation out;
    out.value = measure_value(t, kind, phi, game.draws(), game.budget());
    out.assumption_verified = game.assumption().holds;
    if (!is_risk_measure(kind)) {
        if (phi.is_zero()) {
            out.small_s_verified = true;
        } else {
            const auto theta = phi.direction();
            const bool terminal = kind == MeasureKind::downFirstApprox || kind == MeasureKind::upExpect;
            out.small_s_verified = terminal
                                       ? terminal_small_s_holds(t, phi.scale(), theta, game.draws(), game.budget())
                                       : drawdown_small_s_holds(t, phi.scale(), theta, game.draws(), game.budget());
        }
    }
    return out;
}

} // namespace ddrisk
