#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "ddrisk/risk_measures.hpp"
#include "ddrisk/surface.hpp"
#include "oracles.hpp"

using namespace ddrisk;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

TradeMatrix example_t() {
    const auto g = oracle::example_t();
    return TradeMatrix(g.t, g.p);
}

const std::vector<double> kDiagonal{1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)};

std::vector<double> values(const PortionVector& phi) { return {phi.values().begin(), phi.values().end()}; }

} // namespace

TEST_CASE("measure names round-trip") {
    for (auto k : kAllMeasures) CHECK(parse_measure(to_string(k)) == k);
    CHECK_THROWS_AS(parse_measure("maxDrawdown"), ValidationError);
}

TEST_CASE("frozen values of the reference game") {
    const auto t = example_t();
    const PortionVector a{0.1, 0.1}, b{0.2, 0.2};
    CHECK_THAT(rho_down(t, a, 1), WithinRel(0.049130323513700903583, 1e-13));
    CHECK_THAT(rho_down(t, b, 5), WithinRel(0.20308936992650914872, 1e-13));
    CHECK_THAT(rho_cur(t, b, 5), WithinRel(0.34109358804408027207, 1e-13));
    CHECK_THAT(rho_downX(t, a, 1), WithinRel(0.04375, 1e-14));
    CHECK_THAT(rho_downX(t, b, 5), WithinRel(0.0991668701171875, 1e-14));
    CHECK_THAT(rho_curX(t, b, 5), WithinRel(0.2144134521484375, 1e-14));
    CHECK_THAT(rho_curX(t, a, 1), WithinRel(0.04375, 1e-14));
}

TEST_CASE("every measure vanishes at the origin") {
    const auto t = example_t();
    const PortionVector zero{0.0, 0.0};
    for (auto k : kAllMeasures) CHECK(measure_value(t, k, zero, 4) == 0.0);
    CHECK(d_first_approx(t, 0.0, kDiagonal, 3) == 0.0);
    CHECK(d_cur_first_approx(t, 0.0, kDiagonal, 3) == 0.0);
    CHECK(u_expect(t, 0.0, kDiagonal, 3) == 0.0);
    CHECK(u_run_expect(t, 0.0, kDiagonal, 3) == 0.0);
}

TEST_CASE("count form of rho_down equals the path definition") {
    const auto t = example_t();
    const auto g = oracle::example_t();
    std::mt19937_64 rng(101);
    for (int n = 0; n < 25; ++n) {
        const auto phi = random_interior_point(t, rng);
        for (int k = 1; k <= 5; ++k)
            REQUIRE_THAT(rho_down(t, phi, k), WithinAbs(-oracle::expected_down(g, values(phi), k), 1e-10));
    }
}

TEST_CASE("domain of the measures") {
    const auto t = example_t();
    CHECK_THROWS_AS(rho_down(t, PortionVector{0.0, 0.5}, 2), DomainError);
    CHECK_THROWS_AS(rho_cur(t, PortionVector{1.0, 1.0}, 2), DomainError);
    CHECK_THROWS_AS(u_expect(t, 2.0, kDiagonal, 2), DomainError);
    CHECK(std::isinf(d_first_approx(t, 2.0, kDiagonal, 2)));
    // The second approximations are defined everywhere.
    CHECK(std::isfinite(rho_downX(t, PortionVector{3.0, -4.0}, 3)));
    CHECK(std::isfinite(rho_curX(t, PortionVector{3.0, -4.0}, 3)));
    CHECK_THROWS_AS(d_first_approx(t, 0.1, std::vector<double>{1.0, 1.0}, 2), ValidationError);
}

TEST_CASE("coefficient tables") {
    const auto t = example_t();
    std::mt19937_64 rng(3);
    for (int n = 0; n < 16; ++n) {
        const auto theta = random_direction(rng, 2);
        for (int k = 1; k <= 5; ++k) {
            const auto cc = count_coefficients(t, theta, k);
            const auto pc = path_coefficients(t, theta, k);
            for (std::size_t i = 0; i < 4; ++i) {
                REQUIRE(cc.up.values[i] >= 0.0);
                REQUIRE(cc.down.values[i] >= 0.0);
                REQUIRE_THAT(cc.up.values[i] + cc.down.values[i], WithinAbs(t.prob(i) * k, 1e-9));
                REQUIRE_THAT(pc.drawdown.values[i] + pc.runup.values[i], WithinAbs(t.prob(i) * k, 1e-9));
                REQUIRE(pc.drawdown.by_level[k][i] == 0.0);
                REQUIRE(pc.runup.by_level[0][i] == 0.0);
            }
        }
    }
}

TEST_CASE("small-s regime along the diagonal") {
    const auto t = example_t();
    constexpr double s = 1e-4;
    REQUIRE(terminal_small_s_holds(t, s, kDiagonal, 3));
    REQUIRE(drawdown_small_s_holds(t, s, kDiagonal, 3));
    CHECK_THAT(d_first_approx(t, s, kDiagonal, 3), WithinRel(-3.377468828946862747e-5, 1e-10));
    CHECK_THAT(d_cur_first_approx(t, s, kDiagonal, 3), WithinRel(-5.9876762481434301507e-5, 1e-10));
    CHECK_THAT(u_expect(t, s, kDiagonal, 2), WithinRel(1.0605886935637200307e-4, 1e-10));
    const auto phi = PortionVector::from_polar(s, kDiagonal);
    const auto e = path_expectations(t, phi, 3);
    CHECK_THAT(u_run_expect(t, s, kDiagonal, 3), WithinAbs(e.runup, 1e-15));
    CHECK_THAT(u_run_expect(t, s, kDiagonal, 3) + d_cur_first_approx(t, s, kDiagonal, 3),
               WithinAbs(3 * log_gamma_mean(t, phi), 1e-10));
}

TEST_CASE("first approximations at large s are strict upper bounds") {
    const auto t = example_t();
    const double s = 0.35 * std::sqrt(2.0);
    CHECK_FALSE(terminal_small_s_holds(t, s, kDiagonal, 3));
    const double d = d_first_approx(t, s, kDiagonal, 3);
    const double dc = d_cur_first_approx(t, s, kDiagonal, 3);
    CHECK_THAT(d, WithinRel(-0.60788500438243711493, 1e-12));
    CHECK_THAT(dc, WithinRel(-0.76999941193970875662, 1e-12));
    const auto e = path_expectations(t, PortionVector{0.35, 0.35}, 3);
    CHECK_THAT(e.down, WithinRel(-0.66157835607774642873, 1e-12));
    CHECK_THAT(e.drawdown, WithinRel(-0.78789719583814519456, 1e-12));
    CHECK(d > e.down);
    CHECK(dc >= e.drawdown);
}

TEST_CASE("approximations agree with their path forms") {
    const auto t = example_t();
    const auto g = oracle::example_t();
    std::mt19937_64 rng(8);
    for (int n = 0; n < 20; ++n) {
        const auto phi = random_interior_point(t, rng);
        const auto theta = phi.direction();
        const double s = phi.scale();
        for (int k = 1; k <= 4; ++k) {
            REQUIRE_THAT(d_first_approx(t, s, theta, k), WithinAbs(oracle::d_first(g, s, theta, k), 1e-12));
            REQUIRE_THAT(d_cur_first_approx(t, s, theta, k), WithinAbs(oracle::d_cur_first(g, s, theta, k), 1e-12));
            REQUIRE_THAT(rho_downX(t, phi, k), WithinAbs(oracle::rho_downX(g, values(phi), k), 1e-12));
            REQUIRE_THAT(rho_curX(t, phi, k), WithinAbs(oracle::rho_curX(g, values(phi), k), 1e-12));
            REQUIRE_THAT(d_second_approx(t, s, theta, k), WithinAbs(-rho_downX(t, phi, k), 1e-12));
            REQUIRE_THAT(d_cur_second_approx(t, s, theta, k), WithinAbs(-rho_curX(t, phi, k), 1e-12));
        }
    }
}

TEST_CASE("K = 1 collapses current drawdown onto down-trade") {
    const auto t = example_t();
    std::mt19937_64 rng(12);
    for (int n = 0; n < 100; ++n) {
        const auto phi = random_interior_point(t, rng);
        REQUIRE_THAT(rho_cur(t, phi, 1), WithinAbs(rho_down(t, phi, 1), 1e-12));
        REQUIRE_THAT(rho_curX(t, phi, 1), WithinAbs(rho_downX(t, phi, 1), 1e-12));
    }
}

TEST_CASE("d jumps across a hyperplane direction while rho_downX does not") {
    const auto t = example_t();
    // (2,1)/sqrt5 is orthogonal to t_2, t_3 and t_1 + t_4, so every count vector
    // with x_1 = x_4 sits on the hyperplane.
    const double base = std::atan2(1.0, 2.0);
    const double s = 0.6;
    auto at = [&](double ang) { return std::vector<double>{std::cos(ang), std::sin(ang)}; };
    const double d_minus = d_first_approx(t, s, at(base - 1e-9), 5);
    const double d_plus = d_first_approx(t, s, at(base + 1e-9), 5);
    CHECK(std::abs(d_plus - d_minus) > 1e-6);
    auto rho_x = [&](double ang) { return rho_downX(t, PortionVector::from_polar(s, at(ang)), 5); };
    auto rho_d = [&](double ang) { return rho_down(t, PortionVector::from_polar(s, at(ang)), 5); };
    CHECK(std::abs(rho_x(base + 1e-9) - rho_x(base - 1e-9)) < 1e-6);
    CHECK(std::abs(rho_d(base + 1e-9) - rho_d(base - 1e-9)) < 1e-6);
}

TEST_CASE("rho_down is flat along the counterexample segment") {
    const auto g = oracle::remark_counterexample();
    const TradeMatrix t(g.t, g.p);
    const std::vector<double> dir{1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0)};
    const double alpha = 0.2, h = 0.01;
    auto at = [&](double u) { return PortionVector{alpha + u * dir[0], alpha + u * dir[1]}; };
    const double second = rho_down(t, at(h), 1) + rho_down(t, at(-h), 1) - 2.0 * rho_down(t, at(0.0), 1);
    CHECK(std::abs(second) < 1e-12);
    const auto check = check_no_risk_free(t);
    REQUIRE(check.holds);
    CHECK_THAT(check.weights[2], WithinAbs(3.0, 1e-9));
    // The rows are pairwise independent, so the span condition holds on every
    // direction here too; it does not rule out this flat segment at K = 1.
    CHECK(span_diagnostic(t, 360).failures == 0);
}

TEST_CASE("span diagnostic on the reference game") {
    const auto t = example_t();
    const auto diag = span_diagnostic(t, 360);
    CHECK(diag.directions == 360);
    CHECK(diag.failures == 0);
    // Orthogonal to the parallel rows t_2 and t_3: still two independent rows left.
    const double len = std::sqrt(1.25);
    CHECK(span_condition_holds(t, std::vector<double>{1.0 / len, 0.5 / len}));
}

TEST_CASE("evaluate reports flags") {
    const TradingGame game(example_t(), 3);
    const auto small = evaluate(game, MeasureKind::downFirstApprox, PortionVector::from_polar(1e-4, kDiagonal));
    CHECK(small.assumption_verified);
    REQUIRE(small.small_s_verified.has_value());
    CHECK(*small.small_s_verified);
    const auto large = evaluate(game, MeasureKind::downFirstApprox, PortionVector{0.35, 0.35});
    CHECK_FALSE(*large.small_s_verified);
    const auto rho = evaluate(game, MeasureKind::cur, PortionVector{0.2, 0.2});
    CHECK_FALSE(rho.small_s_verified.has_value());
    const TradingGame risky(TradeMatrix({{1.0}, {2.0}}), 2);
    CHECK_FALSE(evaluate(risky, MeasureKind::down, PortionVector{0.1}).assumption_verified);
}
