#pragma once

// Trade-return matrix, portion vectors, the admissible polyhedron
//   G = { phi : 1 + <t_i, phi> >= 0 for every row i },
// holding period returns and their weighted geometric mean.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ddrisk/errors.hpp"
#include "ddrisk/linalg.hpp"

namespace ddrisk {

inline constexpr double kProbabilitySumTolerance = 1e-12;
inline constexpr double kBoundaryTolerance = 1e-12;

/// The N x M matrix of net trade returns t_{i,k} together with the
/// probability p_i of drawing row i. Immutable after construction.
class TradeMatrix {
public:
    /// `probs` empty means uniform 1/N.
    TradeMatrix(const std::vector<std::vector<double>>& returns, std::vector<double> probs = {}) {
        if (returns.empty()) throw ValidationError("trade matrix needs at least one row");
        const std::size_t m = returns.front().size();
        if (m == 0) throw ValidationError("trade matrix needs at least one column");
        returns_ = linalg::Matrix(returns.size(), m);
        for (std::size_t i = 0; i < returns.size(); ++i) {
            if (returns[i].size() != m)
                throw ValidationError("trade matrix row " + std::to_string(i + 1) + " has " +
                                      std::to_string(returns[i].size()) + " entries, expected " +
                                      std::to_string(m));
            for (std::size_t k = 0; k < m; ++k) {
                if (!std::isfinite(returns[i][k]))
                    throw ValidationError("trade matrix entry (" + std::to_string(i + 1) + "," +
                                          std::to_string(k + 1) + ") is not finite");
                returns_(i, k) = returns[i][k];
            }
        }
        set_probs(std::move(probs));
    }

    TradeMatrix(std::initializer_list<std::vector<double>> returns, std::vector<double> probs = {})
        : TradeMatrix(std::vector<std::vector<double>>(returns), std::move(probs)) {}

    explicit TradeMatrix(linalg::Matrix returns, std::vector<double> probs = {}) : returns_(std::move(returns)) {
        if (returns_.rows() == 0 || returns_.cols() == 0)
            throw ValidationError("trade matrix must be at least 1 x 1");
        for (std::size_t i = 0; i < returns_.rows(); ++i)
            for (double v : returns_.row(i))
                if (!std::isfinite(v)) throw ValidationError("trade matrix entry is not finite");
        set_probs(std::move(probs));
    }

    [[nodiscard]] std::size_t rows() const noexcept { return returns_.rows(); }
    [[nodiscard]] std::size_t systems() const noexcept { return returns_.cols(); }
    [[nodiscard]] std::span<const double> row(std::size_t i) const noexcept { return returns_.row(i); }
    [[nodiscard]] double operator()(std::size_t i, std::size_t k) const noexcept { return returns_(i, k); }
    [[nodiscard]] const linalg::Matrix& returns() const noexcept { return returns_; }
    [[nodiscard]] std::span<const double> probs() const noexcept { return probs_; }
    [[nodiscard]] double prob(std::size_t i) const noexcept { return probs_[i]; }

private:
    void set_probs(std::vector<double> probs) {
        const std::size_t n = returns_.rows();
        if (probs.empty()) probs.assign(n, 1.0 / static_cast<double>(n));
        if (probs.size() != n)
            throw ValidationError("expected " + std::to_string(n) + " probabilities, got " +
                                  std::to_string(probs.size()));
        for (std::size_t i = 0; i < n; ++i)
            if (!(probs[i] > 0.0) || !std::isfinite(probs[i]))
                throw ValidationError("probability p_" + std::to_string(i + 1) + " must be positive");
        const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
        if (std::abs(total - 1.0) > kProbabilitySumTolerance)
            throw ValidationError("probabilities sum to " + std::to_string(total) + ", not 1");
        probs_ = std::move(probs);
    }

    linalg::Matrix returns_;
    std::vector<double> probs_;
};

/// Capital fractions phi, one per trading system; negative entries are short
/// positions. phi = s * theta with s = |phi| and |theta| = 1 when phi != 0.
class PortionVector {
public:
    PortionVector() = default;
    explicit PortionVector(std::vector<double> phi) : phi_(std::move(phi)) {}
    PortionVector(std::initializer_list<double> phi) : phi_(phi) {}

    static PortionVector from_polar(double s, std::span<const double> theta) {
        std::vector<double> phi(theta.begin(), theta.end());
        for (auto& x : phi) x *= s;
        return PortionVector(std::move(phi));
    }

    [[nodiscard]] std::size_t size() const noexcept { return phi_.size(); }
    [[nodiscard]] std::span<const double> values() const noexcept { return phi_; }
    [[nodiscard]] double operator[](std::size_t k) const noexcept { return phi_[k]; }
    [[nodiscard]] bool is_zero() const noexcept {
        return std::all_of(phi_.begin(), phi_.end(), [](double x) { return x == 0.0; });
    }

    [[nodiscard]] double scale() const noexcept { return linalg::norm2(phi_); }

    /// Unit direction theta; throws for the zero vector.
    [[nodiscard]] std::vector<double> direction() const {
        const double s = scale();
        if (s == 0.0) throw DomainError("the zero portion vector has no direction");
        std::vector<double> theta(phi_);
        for (auto& x : theta) x /= s;
        return theta;
    }

    [[nodiscard]] PortionVector scaled(double t) const {
        std::vector<double> out(phi_);
        for (auto& x : out) x *= t;
        return PortionVector(std::move(out));
    }

private:
    std::vector<double> phi_;
};

inline void require_dimension(const TradeMatrix& t, std::span<const double> phi) {
    if (phi.size() != t.systems())
        throw ValidationError("portion vector has " + std::to_string(phi.size()) +
                              " entries, trade matrix has " + std::to_string(t.systems()) + " systems");
}

/// 1 + <t_i, phi> for a zero-based row index.
inline double hpr(const TradeMatrix& t, const PortionVector& phi, std::size_t i) {
    require_dimension(t, phi.values());
    if (i >= t.rows())
        throw std::out_of_range("period index " + std::to_string(i) + " outside 0.." +
                                std::to_string(t.rows() - 1));
    return 1.0 + linalg::dot(t.row(i), phi.values());
}

/// <t_i, v> for every row.
inline std::vector<double> row_products(const TradeMatrix& t, std::span<const double> v) {
    require_dimension(t, v);
    return linalg::multiply(t.returns(), v);
}

enum class Membership { interior, boundary, outside };

inline const char* to_string(Membership m) noexcept {
    switch (m) {
    case Membership::interior: return "interior";
    case Membership::boundary: return "boundary";
    case Membership::outside: return "outside";
    }
    return "?";
}

/// The admissible polyhedron of a trade matrix, given implicitly by its N
/// half-spaces. Holds a reference; the matrix must outlive it.
class AdmissibleSet {
public:
    explicit AdmissibleSet(const TradeMatrix& t) noexcept : t_(&t) {}

    [[nodiscard]] double min_hpr(std::span<const double> phi) const {
        const auto a = row_products(*t_, phi);
        double lo = std::numeric_limits<double>::infinity();
        for (double x : a) lo = std::min(lo, 1.0 + x);
        return lo;
    }

    /// Interior iff every HPR > 0; boundary iff min HPR is zero within 1e-12.
    [[nodiscard]] Membership classify(std::span<const double> phi) const {
        const double lo = min_hpr(phi);
        if (std::abs(lo) <= kBoundaryTolerance) return Membership::boundary;
        return lo > 0.0 ? Membership::interior : Membership::outside;
    }
    [[nodiscard]] Membership classify(const PortionVector& phi) const { return classify(phi.values()); }

    [[nodiscard]] bool is_interior(std::span<const double> phi) const {
        return classify(phi) == Membership::interior;
    }

    /// Largest s with s * theta in G, +inf when the ray never leaves G.
    [[nodiscard]] double ray_exit(std::span<const double> theta) const {
        const auto a = row_products(*t_, theta);
        double s_max = std::numeric_limits<double>::infinity();
        for (double x : a)
            if (x < 0.0) s_max = std::min(s_max, -1.0 / x);
        return s_max;
    }

    [[nodiscard]] const TradeMatrix& matrix() const noexcept { return *t_; }

private:
    const TradeMatrix* t_;
};

inline Membership membership(const AdmissibleSet& g, const PortionVector& phi) { return g.classify(phi); }

/// Outcome of the no-risk-free-investment check. On success `weights` holds a
/// Stiemke certificate y >= 1 with T^T y = 0; on failure `direction` holds a
/// unit theta with T theta >= 0.
struct NoRiskFreeCheck {
    bool holds = false;
    std::size_t rank = 0;
    std::vector<double> weights;
    std::vector<double> direction;
};

/// Every nonzero allocation loses in some period iff rank T = M and some
/// strictly positive y solves T^T y = 0 (Stiemke's alternative). The second
/// condition is decided as the linear feasibility problem y >= 1, T^T y = 0.
inline NoRiskFreeCheck check_no_risk_free(const TradeMatrix& t) {
    NoRiskFreeCheck out;
    const auto& a = t.returns();
    out.rank = linalg::rank(a);
    if (out.rank < t.systems()) {
        out.direction = linalg::smallest_right_singular_vector(a);
        return out;
    }

    // y = 1 + z with z >= 0:  T^T z = -T^T 1.
    const auto at = a.transposed();
    const std::vector<double> ones(t.rows(), 1.0);
    auto rhs = linalg::multiply(at, ones);
    for (auto& x : rhs) x = -x;
    if (auto z = linalg::find_nonnegative_solution(at, rhs)) {
        out.holds = true;
        out.weights.resize(t.rows());
        for (std::size_t i = 0; i < t.rows(); ++i) out.weights[i] = 1.0 + (*z)[i];
        return out;
    }
    if (auto d = linalg::find_semipositive_direction(a)) out.direction = std::move(*d);
    return out;
}

/// Gamma(phi) = prod_i (1 + <t_i, phi>)^{p_i}; requires phi in the interior of G.
inline double log_gamma_mean(const TradeMatrix& t, const PortionVector& phi) {
    const auto a = row_products(t, phi.values());
    double acc = 0.0;
    for (std::size_t i = 0; i < t.rows(); ++i) {
        if (!(1.0 + a[i] > 0.0))
            throw DomainError("portion vector is not in the interior of G (HPR_" + std::to_string(i + 1) +
                              " = " + std::to_string(1.0 + a[i]) + ")");
        acc += t.prob(i) * std::log1p(a[i]);
    }
    return acc;
}

inline double gamma_mean(const TradeMatrix& t, const PortionVector& phi) {
    return std::exp(log_gamma_mean(t, phi));
}

/// E[log TWR_1^K] = K * log Gamma(phi).
inline double expected_log_z(const TradeMatrix& t, const PortionVector& phi, int draws) {
    if (draws < 1) throw ValidationError("number of draws K must be at least 1");
    return static_cast<double>(draws) * log_gamma_mean(t, phi);
}

} // namespace ddrisk
