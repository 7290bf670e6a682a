#pragma once

// Grid evaluation of risk surfaces, the K-convergence series, the structural
// check report and the seeded verification suites behind the command line.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "ddrisk/errors.hpp"
#include "ddrisk/io.hpp"
#include "ddrisk/market_bridge.hpp"
#include "ddrisk/path_engine.hpp"
#include "ddrisk/risk_measures.hpp"
#include "ddrisk/trade_core.hpp"

namespace ddrisk {

// ---------------------------------------------------------------------------
// Grids
// ---------------------------------------------------------------------------

struct Axis {
    double min = 0.0;
    double max = 0.0;
    int steps = 2;

    [[nodiscard]] double at(int j) const {
        if (j == 0) return min;
        if (j == steps - 1) return max;
        const double n = steps - 1;
        return (min * (n - j) + max * j) / n;
    }
};

struct GridSpec {
    std::vector<Axis> axes;
    MeasureKind measure = MeasureKind::down;
    int draws = 5;
};

inline constexpr Axis kDefaultAxis{-0.4, 0.8, 121};

/// "min:max:steps[,min:max:steps...]".
inline std::vector<Axis> parse_grid(std::string_view text) {
    std::vector<Axis> axes;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto comma = text.find(',', start);
        if (comma == std::string_view::npos) comma = text.size();
        const auto part = text.substr(start, comma - start);
        const auto c1 = part.find(':');
        const auto c2 = c1 == std::string_view::npos ? c1 : part.find(':', c1 + 1);
        if (c2 == std::string_view::npos)
            throw ValidationError("grid axis '" + std::string(part) + "' is not min:max:steps");
        Axis a;
        a.min = io::parse_double(part.substr(0, c1));
        a.max = io::parse_double(part.substr(c1 + 1, c2 - c1 - 1));
        const double steps = io::parse_double(part.substr(c2 + 1));
        if (steps != std::floor(steps) || steps < 2 || steps > 1e6)
            throw ValidationError("grid steps must be an integer >= 2");
        a.steps = static_cast<int>(steps);
        if (!(a.min < a.max) || !std::isfinite(a.min) || !std::isfinite(a.max))
            throw ValidationError("grid axis needs finite min < max");
        axes.push_back(a);
        start = comma + 1;
    }
    return axes;
}

inline std::size_t point_count(const std::vector<Axis>& axes) {
    std::size_t total = 1;
    for (const auto& a : axes) total *= static_cast<std::size_t>(a.steps);
    return total;
}

/// The idx-th grid point, first axis slowest.
inline std::vector<double> grid_point(const std::vector<Axis>& axes, std::size_t idx) {
    std::vector<double> phi(axes.size());
    for (std::size_t k = axes.size(); k-- > 0;) {
        const auto steps = static_cast<std::size_t>(axes[k].steps);
        phi[k] = axes[k].at(static_cast<int>(idx % steps));
        idx /= steps;
    }
    return phi;
}

struct SurfaceResult {
    std::vector<std::vector<double>> points;
    std::vector<double> values;
    bool partial = false;
    std::string message;
};

/// Sentinel for points where the value is undefined: -inf for the log-series
/// kinds that are nonpositive, +inf for everything else.
inline double undefined_value(MeasureKind kind) {
    const bool negative = kind == MeasureKind::downFirstApprox || kind == MeasureKind::curFirstApprox;
    return negative ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
}

/// Value at one point, with the sentinel outside G and wherever the
/// measure's domain excludes the point.
inline double surface_value(const TradeMatrix& t, MeasureKind kind, const PortionVector& phi, int k,
                            std::uint64_t budget) {
    if (AdmissibleSet(t).classify(phi) == Membership::outside) return undefined_value(kind);
    try {
        return measure_value(t, kind, phi, k, budget);
    } catch (const DomainError&) {
        return undefined_value(kind);
    }
}

/// Evaluates every grid point. Points are split across `threads` workers;
/// each point is computed by a single worker, so output does not depend on
/// the thread count.
inline SurfaceResult evaluate_surface(const TradeMatrix& t, const GridSpec& spec,
                                      std::uint64_t budget = kDefaultBudget, unsigned threads = 1) {
    if (spec.axes.size() != t.systems())
        throw ValidationError("grid has " + std::to_string(spec.axes.size()) + " axes, trade matrix has " +
                              std::to_string(t.systems()) + " systems");
    require_draws(spec.draws);
    const std::size_t total = point_count(spec.axes);
    SurfaceResult out;
    out.points.resize(total);
    out.values.assign(total, 0.0);
    for (std::size_t i = 0; i < total; ++i) out.points[i] = grid_point(spec.axes, i);

    // The enumeration size is the same at every point; fail before any work.
    try {
        if (spec.measure == MeasureKind::cur || spec.measure == MeasureKind::curX ||
            spec.measure == MeasureKind::curFirstApprox || spec.measure == MeasureKind::runupExpect)
            require_path_budget(t.rows(), spec.draws, budget);
        else if (composition_count(t.rows(), spec.draws) > budget)
            throw BudgetError("enumeration limit: compositions exceed the budget of " + std::to_string(budget));
    } catch (const BudgetError& e) {
        out.points.clear();
        out.values.clear();
        out.partial = true;
        out.message = e.what();
        return out;
    }

    auto work = [&](std::size_t first) {
        for (std::size_t i = first; i < total; i += std::max(1u, threads))
            out.values[i] = surface_value(t, spec.measure, PortionVector(out.points[i]), spec.draws, budget);
    };
    if (threads <= 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w);
        for (auto& th : pool) th.join();
    }
    return out;
}

inline void write_surface_csv(std::ostream& os, const SurfaceResult& r, std::size_t dims) {
    for (std::size_t k = 0; k < dims; ++k) os << "phi" << (k + 1) << ',';
    os << "value\n";
    for (std::size_t i = 0; i < r.values.size(); ++i) {
        for (double x : r.points[i]) os << io::format_double(x) << ',';
        os << io::format_double(r.values[i]) << '\n';
    }
}

// ---------------------------------------------------------------------------
// Convergence series
// ---------------------------------------------------------------------------

/// rho_cur^(K)(phi) for K = 1..k_max.
inline std::vector<double> converge_series(const TradeMatrix& t, const PortionVector& phi, int k_max,
                                           std::uint64_t budget = kDefaultBudget) {
    require_draws(k_max);
    require_path_budget(t.rows(), k_max, budget);
    std::vector<double> out;
    for (int k = 1; k <= k_max; ++k) out.push_back(rho_cur(t, phi, k, budget));
    return out;
}

inline void write_series_csv(std::ostream& os, const std::vector<double>& series) {
    os << "K,value\n";
    for (std::size_t k = 0; k < series.size(); ++k) os << (k + 1) << ',' << io::format_double(series[k]) << '\n';
}

// ---------------------------------------------------------------------------
// Structural check
// ---------------------------------------------------------------------------

inline std::string format_vector(std::span<const double> v) {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) os << ',';
        // Certificates come out of a simplex; print them rounded.
        double x = std::round(v[i] * 1e9) / 1e9;
        if (x == 0.0) x = 0.0;
        os << io::format_double(x);
    }
    os << ')';
    return os.str();
}

struct CheckReport {
    std::size_t rank = 0;
    std::size_t systems = 0;
    NoRiskFreeCheck assumption;
    std::optional<ArbitrageReport> arbitrage;

    [[nodiscard]] bool passed() const {
        return rank == systems && assumption.holds && (!arbitrage || arbitrage->no_arbitrage);
    }
};

inline CheckReport run_check(const TradeMatrix& t, const std::optional<OnePeriodMarket>& market) {
    CheckReport r;
    r.assumption = check_no_risk_free(t);
    r.rank = r.assumption.rank;
    r.systems = t.systems();
    if (market) r.arbitrage = check_arbitrage(*market);
    return r;
}

inline void print_check(std::ostream& os, const CheckReport& r) {
    if (r.rank == r.systems)
        os << "rank: " << r.rank << " = M=" << r.systems << ", PASS\n";
    else
        os << "rank: " << r.rank << " < M=" << r.systems << ", FAIL\n";
    if (r.assumption.holds)
        os << "assumption: PASS, certificate y=" << format_vector(r.assumption.weights) << '\n';
    else if (!r.assumption.direction.empty())
        os << "assumption: FAIL, direction theta=" << format_vector(r.assumption.direction) << '\n';
    else
        os << "assumption: FAIL\n";
    if (r.arbitrage) {
        if (r.arbitrage->no_arbitrage)
            os << "arbitrage: none, PASS\n";
        else
            os << "arbitrage: FAIL, portfolio x=" << format_vector(r.arbitrage->certificate) << '\n';
    }
}

// ---------------------------------------------------------------------------
// Verification suites
// ---------------------------------------------------------------------------

struct SuiteResult {
    std::string name;
    std::size_t passed = 0;
    std::size_t failed = 0;
    std::size_t skipped = 0;
    std::string note{};
};

struct VerifyReport {
    bool assumption = false;
    std::vector<SuiteResult> suites;

    [[nodiscard]] bool passed() const {
        if (!assumption) return false;
        return std::all_of(suites.begin(), suites.end(), [](const SuiteResult& s) { return s.failed == 0; });
    }
};

/// Uniformly distributed unit vector.
inline std::vector<double> random_direction(std::mt19937_64& rng, std::size_t m) {
    std::normal_distribution<double> gauss;
    std::vector<double> v(m);
    double len = 0.0;
    do {
        for (auto& x : v) x = gauss(rng);
        len = linalg::norm2(v);
    } while (len < 1e-12);
    for (auto& x : v) x /= len;
    return v;
}

/// A random point of int G: uniform direction, radius uniform in
/// (0, fraction * distance to the boundary along it).
inline PortionVector random_interior_point(const TradeMatrix& t, std::mt19937_64& rng, double fraction = 0.95) {
    const AdmissibleSet g(t);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto theta = random_direction(rng, t.systems());
    double exit = g.ray_exit(theta);
    if (!std::isfinite(exit)) exit = 1.0;
    return PortionVector::from_polar(fraction * exit * unit(rng), theta);
}

namespace detail {

inline void tally(SuiteResult& s, bool ok) { ok ? ++s.passed : ++s.failed; }

} // namespace detail

/// Runs identity, ordering, convexity, homogeneity, monotonicity, small-s and
/// topping-point suites with `samples` random points each.
inline VerifyReport run_verify(const TradeMatrix& t, int k, std::size_t samples, std::uint64_t seed,
                               std::uint64_t budget = kDefaultBudget) {
    require_draws(k);
    require_path_budget(t.rows(), k, budget);
    VerifyReport rep;
    rep.assumption = check_no_risk_free(t).holds;
    if (!rep.assumption) return rep;

    std::mt19937_64 rng(seed);
    constexpr MeasureKind kMeasures[] = {MeasureKind::down, MeasureKind::downX, MeasureKind::cur,
                                         MeasureKind::curX};
    auto rho = [&](MeasureKind kind, const PortionVector& phi) { return measure_value(t, kind, phi, k, budget); };

    SuiteResult identity{.name = "identity"};
    for (std::size_t j = 0; j < samples; ++j) {
        const auto phi = random_interior_point(t, rng);
        const auto e = path_expectations(t, phi, k, budget);
        const double z = expected_log_z(t, phi, k);
        const double tol = 1e-10 * std::max(1.0, std::abs(z));
        detail::tally(identity, std::abs(e.up + e.down - z) <= tol && std::abs(e.drawdown + e.runup - z) <= tol &&
                                    std::abs(rho_down(t, phi, k, budget) + e.down) <= 1e-10);
    }
    rep.suites.push_back(identity);

    SuiteResult ordering{.name = "ordering"};
    for (std::size_t j = 0; j < samples; ++j) {
        const auto phi = random_interior_point(t, rng);
        const auto e = path_expectations(t, phi, k, budget);
        const double s = phi.scale();
        if (s == 0.0) {
            ++ordering.skipped;
            continue;
        }
        const auto theta = phi.direction();
        const double d = d_first_approx(t, s, theta, k, budget);
        const double dt = d_second_approx(t, s, theta, k, budget);
        const double dc = d_cur_first_approx(t, s, theta, k, budget);
        const double dct = d_cur_second_approx(t, s, theta, k, budget);
        const double down = rho_down(t, phi, k, budget), downx = rho_downX(t, phi, k, budget);
        const double cur = rho_cur(t, phi, k, budget), curx = rho_curX(t, phi, k, budget);
        constexpr double slack = 1e-12;
        const bool ok = e.down <= d + slack && d <= dt + slack && dt <= slack && e.drawdown <= dc + slack &&
                        dc <= dct + slack && dct <= slack && cur >= down - slack && down >= -d - slack &&
                        -d >= downx - slack && downx >= -slack && cur >= -dc - slack && -dc >= curx - slack &&
                        curx >= downx - slack;
        detail::tally(ordering, ok);
    }
    rep.suites.push_back(ordering);

    SuiteResult convexity{.name = "convexity"};
    for (std::size_t j = 0; j < samples; ++j) {
        const auto a = random_interior_point(t, rng);
        const auto b = random_interior_point(t, rng);
        std::vector<double> mid(t.systems());
        for (std::size_t c = 0; c < mid.size(); ++c) mid[c] = 0.5 * (a[c] + b[c]);
        const PortionVector m(mid);
        bool ok = true;
        for (auto kind : kMeasures) ok = ok && rho(kind, m) <= 0.5 * (rho(kind, a) + rho(kind, b)) + 1e-9;
        detail::tally(convexity, ok);
    }
    rep.suites.push_back(convexity);

    SuiteResult homogeneity{.name = "homogeneity"};
    for (std::size_t j = 0; j < samples; ++j) {
        const auto phi = random_interior_point(t, rng);
        bool ok = true;
        for (auto kind : {MeasureKind::downX, MeasureKind::curX}) {
            const double base = rho(kind, phi);
            for (double f : {0.5, 2.0, 10.0}) {
                const double scaled = rho(kind, phi.scaled(f));
                ok = ok && std::abs(scaled - f * base) <= 1e-12 * std::max(std::abs(f * base), 1e-300);
            }
        }
        detail::tally(homogeneity, ok);
    }
    rep.suites.push_back(homogeneity);

    SuiteResult monotonicity{.name = "monotonicity"};
    {
        const AdmissibleSet g(t);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (std::size_t j = 0; j < samples; ++j) {
            const auto theta = random_direction(rng, t.systems());
            const double exit = std::min(g.ray_exit(theta), 1e6);
            double s1 = 0.9 * exit * unit(rng);
            double s2 = 0.9 * exit * unit(rng);
            if (s1 > s2) std::swap(s1, s2);
            if (s2 - s1 < 1e-3) {
                ++monotonicity.skipped;
                continue;
            }
            bool ok = true;
            for (auto kind : kMeasures)
                ok = ok && rho(kind, PortionVector::from_polar(s2, theta)) >
                               rho(kind, PortionVector::from_polar(s1, theta)) + 1e-12;
            detail::tally(monotonicity, ok);
        }
    }
    rep.suites.push_back(monotonicity);

    SuiteResult small_s{.name = "small-s"};
    {
        constexpr double s = 1e-4;
        for (std::size_t j = 0; j < samples; ++j) {
            const auto theta = random_direction(rng, t.systems());
            const auto phi = PortionVector::from_polar(s, theta);
            if (!AdmissibleSet(t).is_interior(phi.values()) || !terminal_small_s_holds(t, s, theta, k, budget) ||
                !drawdown_small_s_holds(t, s, theta, k, budget)) {
                ++small_s.skipped;
                continue;
            }
            const auto e = path_expectations(t, phi, k, budget);
            detail::tally(small_s, std::abs(e.down - d_first_approx(t, s, theta, k, budget)) <= 1e-12 &&
                                       std::abs(e.up - u_expect(t, s, theta, k, budget)) <= 1e-12 &&
                                       std::abs(e.drawdown - d_cur_first_approx(t, s, theta, k, budget)) <= 1e-12 &&
                                       std::abs(e.runup - u_run_expect(t, s, theta, k, budget)) <= 1e-12);
        }
        if (small_s.skipped) small_s.note = "directions outside the small-s regime are skipped";
    }
    rep.suites.push_back(small_s);

    SuiteResult topping{.name = "topping-point"};
    for (std::size_t j = 0; j < samples; ++j) {
        const auto phi = random_interior_point(t, rng);
        if (phi.is_zero()) {
            ++topping.skipped;
            continue;
        }
        const auto theta = phi.direction();
        const auto log_hpr = row_log_hpr(t, phi.values());
        const LinearEquity lin(t, theta);
        bool ok = true;
        for_each_path(t.probs(), k, budget, [&](std::span<const std::size_t> omega, double) {
            const std::size_t top = evaluate_path(log_hpr, omega).top;
            const std::size_t lin_top = lin.topping_point(omega);
            ok = ok && top <= lin_top && linear_topping_conditions_hold(t, theta, omega, lin_top);
        });
        detail::tally(topping, ok);
    }
    rep.suites.push_back(topping);

    SuiteResult span{.name = "span-diagnostic"};
    {
        const auto diag = span_diagnostic(t);
        span.passed = diag.directions - diag.failures;
        span.skipped = diag.failures;
        span.note = diag.failures == 0 ? "rows off every direction span R^M: rho_down strictly convex"
                                       : "span condition fails on " + std::to_string(diag.failures) +
                                             " directions: rho_down may be flat there";
    }
    rep.suites.push_back(span);
    return rep;
}

inline void print_verify(std::ostream& os, const VerifyReport& r) {
    if (!r.assumption) {
        os << "assumption: FAIL, suites skipped\n";
        return;
    }
    os << "assumption: PASS\n";
    for (const auto& s : r.suites) {
        os << "suite " << s.name << ": " << s.passed << " passed, " << s.failed << " failed";
        if (s.skipped) os << ", " << s.skipped << " skipped";
        os << (s.failed == 0 ? "  PASS" : "  FAIL");
        if (!s.note.empty()) os << "  (" << s.note << ')';
        os << '\n';
    }
    os << (r.passed() ? "verify: PASS\n" : "verify: FAIL\n");
}

} // namespace ddrisk
