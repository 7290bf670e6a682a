#pragma once

// One-period financial market: a bond with gross return R and M risky assets
// with prices S0 today and S1(alpha_i) in scenario i. The discounted relative
// returns of the risky assets form a trade matrix, and unit-cost portfolios map
// to portion vectors by phi_m = S0_m x_m.

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ddrisk/errors.hpp"
#include "ddrisk/linalg.hpp"
#include "ddrisk/path_engine.hpp"
#include "ddrisk/risk_measures.hpp"
#include "ddrisk/trade_core.hpp"

namespace ddrisk {

inline constexpr double kUnitCostTolerance = 1e-12;

/// Bond plus M risky assets. `s0` holds the risky initial prices only; the
/// bond's initial price is 1.
struct OnePeriodMarket {
    double rate = 1.0;
    std::vector<double> s0;
    std::vector<std::vector<double>> scenarios;
    std::vector<double> probs;

    [[nodiscard]] std::size_t assets() const noexcept { return s0.size(); }
    [[nodiscard]] std::size_t states() const noexcept { return scenarios.size(); }

    /// (1, S0_1, ..., S0_M).
    [[nodiscard]] std::vector<double> initial_prices() const {
        std::vector<double> out{1.0};
        out.insert(out.end(), s0.begin(), s0.end());
        return out;
    }
};

inline void validate(const OnePeriodMarket& m) {
    if (!(m.rate >= 1.0) || !std::isfinite(m.rate)) throw ValidationError("bond gross return R must be >= 1");
    if (m.s0.empty()) throw ValidationError("market needs at least one risky asset");
    for (std::size_t k = 0; k < m.s0.size(); ++k)
        if (!(m.s0[k] > 0.0) || !std::isfinite(m.s0[k]))
            throw ValidationError("initial price of asset " + std::to_string(k + 1) + " must be positive");
    if (m.scenarios.empty()) throw ValidationError("market needs at least one scenario");
    for (std::size_t i = 0; i < m.scenarios.size(); ++i) {
        if (m.scenarios[i].size() != m.s0.size())
            throw ValidationError("scenario " + std::to_string(i + 1) + " has " +
                                  std::to_string(m.scenarios[i].size()) + " prices, expected " +
                                  std::to_string(m.s0.size()));
        for (double v : m.scenarios[i])
            if (!(v >= 0.0) || !std::isfinite(v))
                throw ValidationError("scenario prices must be finite and nonnegative");
    }
}

/// A portfolio x = (x_0, x_1, ..., x_M) of bond and risky units.
struct Portfolio {
    std::vector<double> x;

    [[nodiscard]] std::span<const double> risky() const { return std::span<const double>(x).subspan(1); }
};

inline double initial_cost(const OnePeriodMarket& m, const Portfolio& p) {
    if (p.x.size() != m.assets() + 1)
        throw ValidationError("portfolio needs " + std::to_string(m.assets() + 1) + " entries");
    return linalg::dot(m.initial_prices(), p.x);
}

/// S1 - R S0 on the risky assets, one row per scenario.
inline linalg::Matrix excess_return_matrix(const OnePeriodMarket& m) {
    validate(m);
    linalg::Matrix out(m.states(), m.assets());
    for (std::size_t i = 0; i < m.states(); ++i)
        for (std::size_t k = 0; k < m.assets(); ++k) out(i, k) = m.scenarios[i][k] - m.rate * m.s0[k];
    return out;
}

/// t_{i,m} = (S1_m(alpha_i) - R S0_m) / (R S0_m).
inline TradeMatrix build_trade_matrix(const OnePeriodMarket& m) {
    validate(m);
    linalg::Matrix out(m.states(), m.assets());
    for (std::size_t i = 0; i < m.states(); ++i)
        for (std::size_t k = 0; k < m.assets(); ++k) {
            const double base = m.rate * m.s0[k];
            out(i, k) = (m.scenarios[i][k] - base) / base;
        }
    return TradeMatrix(std::move(out), m.probs);
}

/// phi_m = S0_m x_m. Only the risky part enters.
inline PortionVector portfolio_to_portions(const OnePeriodMarket& m, const Portfolio& p) {
    if (p.x.size() != m.assets() + 1)
        throw ValidationError("portfolio needs " + std::to_string(m.assets() + 1) + " entries");
    std::vector<double> phi(m.assets());
    for (std::size_t k = 0; k < m.assets(); ++k) phi[k] = m.s0[k] * p.x[k + 1];
    return PortionVector(std::move(phi));
}

/// Inverse of portfolio_to_portions on unit-cost portfolios: x_m = phi_m / S0_m
/// and the bond takes the rest, x_0 = 1 - sum phi.
inline Portfolio portions_to_portfolio(const OnePeriodMarket& m, const PortionVector& phi) {
    if (phi.size() != m.assets())
        throw ValidationError("portion vector needs " + std::to_string(m.assets()) + " entries");
    Portfolio p;
    p.x.assign(m.assets() + 1, 0.0);
    double invested = 0.0;
    for (std::size_t k = 0; k < m.assets(); ++k) {
        p.x[k + 1] = phi[k] / m.s0[k];
        invested += phi[k];
    }
    p.x[0] = 1.0 - invested;
    return p;
}

inline void require_unit_cost(const OnePeriodMarket& m, const Portfolio& p) {
    const double cost = initial_cost(m, p);
    if (std::abs(cost - 1.0) > kUnitCostTolerance)
        throw ValidationError("portfolio costs " + std::to_string(cost) + ", expected 1");
}

/// E[log(S1 . x)] - log R, evaluated on the market prices directly.
inline double log_utility(const OnePeriodMarket& m, const Portfolio& p) {
    validate(m);
    require_unit_cost(m, p);
    const std::size_t n = m.states();
    std::vector<double> probs = m.probs.empty() ? std::vector<double>(n, 1.0 / static_cast<double>(n)) : m.probs;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double wealth = m.rate * p.x[0];
        for (std::size_t k = 0; k < m.assets(); ++k) wealth += m.scenarios[i][k] * p.x[k + 1];
        if (!(wealth > 0.0))
            throw DomainError("portfolio wealth in scenario " + std::to_string(i + 1) + " is not positive");
        acc += probs[i] * std::log(wealth);
    }
    return acc - std::log(m.rate);
}

/// sum_i p_i log(1 + <t_i, phi>) on the derived trade matrix.
inline double log_utility_via_portions(const OnePeriodMarket& m, const Portfolio& p) {
    require_unit_cost(m, p);
    return log_gamma_mean(build_trade_matrix(m), portfolio_to_portions(m, p));
}

struct ArbitrageReport {
    bool no_arbitrage = true;
    std::size_t rank = 0;
    bool full_rank = false;
    /// Risky part x-hat of an arbitrage, when one was found.
    std::vector<double> certificate;
};

/// Direct search for x-hat with (S1 - R S0) x-hat >= 0 and not identically 0.
inline std::optional<std::vector<double>> find_arbitrage(const OnePeriodMarket& m) {
    return linalg::find_semipositive_direction(excess_return_matrix(m));
}

/// With full rank, decided on the trade matrix by the no-risk-free check;
/// otherwise by direct search on the excess returns.
inline ArbitrageReport check_arbitrage(const OnePeriodMarket& m) {
    const auto excess = excess_return_matrix(m);
    ArbitrageReport out;
    out.rank = linalg::rank(excess);
    out.full_rank = out.rank == m.assets();
    if (out.full_rank) {
        const auto nrf = check_no_risk_free(build_trade_matrix(m));
        out.no_arbitrage = nrf.holds;
        if (!nrf.holds && !nrf.direction.empty()) {
            out.certificate.resize(m.assets());
            for (std::size_t k = 0; k < m.assets(); ++k) out.certificate[k] = nrf.direction[k] / m.s0[k];
            const double len = linalg::norm2(out.certificate);
            for (auto& v : out.certificate) v /= len;
        }
        return out;
    }
    if (auto x = linalg::find_semipositive_direction(excess)) {
        out.no_arbitrage = false;
        out.certificate = std::move(*x);
    }
    return out;
}

/// A nontrivial riskless portfolio: x-hat != 0 with (S1 - R S0) x-hat >= 0.
/// Tries a kernel vector first, then a strictly gaining direction.
inline std::optional<std::vector<double>> find_riskless(const OnePeriodMarket& m) {
    const auto excess = excess_return_matrix(m);
    if (linalg::rank(excess) < m.assets()) return linalg::smallest_right_singular_vector(excess);
    return linalg::find_semipositive_direction(excess);
}

/// A risk measure lifted to risky portfolios, rho-hat(x-hat) = rho(diag(S0) x-hat).
/// The bond holding x_0 does not enter.
inline double lifted_measure(const OnePeriodMarket& m, MeasureKind kind, const Portfolio& p, int k,
                             std::uint64_t budget = kDefaultBudget) {
    return measure_value(build_trade_matrix(m), kind, portfolio_to_portions(m, p), k, budget);
}

} // namespace ddrisk
