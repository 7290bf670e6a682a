#pragma once

// Small dense linear algebra: a row-major matrix, singular values by one-sided
// Jacobi rotations, and a Bland-rule simplex for feasibility problems.
// Sized for trade matrices with a few dozen rows and columns.

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

namespace ddrisk::linalg {

class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t i, std::size_t j) noexcept {
        assert(i < rows_ && j < cols_);
        return data_[i * cols_ + j];
    }
    double operator()(std::size_t i, std::size_t j) const noexcept {
        assert(i < rows_ && j < cols_);
        return data_[i * cols_ + j];
    }

    [[nodiscard]] std::span<const double> row(std::size_t i) const noexcept {
        return {data_.data() + i * cols_, cols_};
    }

    [[nodiscard]] Matrix transposed() const {
        Matrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline double dot(std::span<const double> a, std::span<const double> b) noexcept {
    assert(a.size() == b.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) acc += a[k] * b[k];
    return acc;
}

inline double norm2(std::span<const double> a) noexcept { return std::sqrt(dot(a, a)); }

inline std::vector<double> multiply(const Matrix& a, std::span<const double> x) {
    assert(a.cols() == x.size());
    std::vector<double> y(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) y[i] = dot(a.row(i), x);
    return y;
}

/// Result of a thin SVD: singular values (descending) and the matching right
/// singular vectors as columns of `v`.
struct SvdResult {
    std::vector<double> values;
    Matrix v;
};

/// One-sided Jacobi SVD of an arbitrary N x M matrix. Only the singular values
/// and right singular vectors are kept.
inline SvdResult svd(const Matrix& a) {
    const std::size_t n = a.rows();
    const std::size_t m = a.cols();
    Matrix u = a;
    Matrix v(m, m);
    for (std::size_t j = 0; j < m; ++j) v(j, j) = 1.0;

    constexpr int kMaxSweeps = 60;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p + 1 < m; ++p) {
            for (std::size_t q = p + 1; q < m; ++q) {
                double alpha = 0.0, beta = 0.0, gamma = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    alpha += u(i, p) * u(i, p);
                    beta += u(i, q) * u(i, q);
                    gamma += u(i, p) * u(i, q);
                }
                if (gamma == 0.0) continue;
                const double scale = std::sqrt(alpha * beta);
                if (scale == 0.0) continue;
                off = std::max(off, std::abs(gamma) / scale);
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (std::size_t i = 0; i < n; ++i) {
                    const double up = u(i, p), uq = u(i, q);
                    u(i, p) = c * up - s * uq;
                    u(i, q) = s * up + c * uq;
                }
                for (std::size_t i = 0; i < m; ++i) {
                    const double vp = v(i, p), vq = v(i, q);
                    v(i, p) = c * vp - s * vq;
                    v(i, q) = s * vp + c * vq;
                }
            }
        }
        if (off < 1e-15) break;
    }

    std::vector<double> sigma(m, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += u(i, j) * u(i, j);
        sigma[j] = std::sqrt(acc);
    }
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t l, std::size_t r) { return sigma[l] > sigma[r]; });

    SvdResult out{std::vector<double>(m), Matrix(m, m)};
    for (std::size_t k = 0; k < m; ++k) {
        out.values[k] = sigma[order[k]];
        for (std::size_t i = 0; i < m; ++i) out.v(i, k) = v(i, order[k]);
    }
    return out;
}

/// Numerical rank with threshold rel_tol * (largest singular value).
inline std::size_t rank(const Matrix& a, double rel_tol = 1e-10) {
    const auto s = svd(a).values;
    if (s.empty() || s.front() == 0.0) return 0;
    return static_cast<std::size_t>(
        std::count_if(s.begin(), s.end(), [&](double x) { return x > rel_tol * s.front(); }));
}

/// Unit vector spanning the direction of the smallest singular value.
inline std::vector<double> smallest_right_singular_vector(const Matrix& a) {
    const auto r = svd(a);
    std::vector<double> x(a.cols());
    for (std::size_t i = 0; i < a.cols(); ++i) x[i] = r.v(i, a.cols() - 1);
    return x;
}

/// Finds x >= 0 with A x = b by phase-one simplex on a dense tableau (Bland's
/// rule, so it terminates on degenerate problems). Returns nullopt when the
/// system is infeasible.
inline std::optional<std::vector<double>> find_nonnegative_solution(const Matrix& a,
                                                                    std::span<const double> b,
                                                                    double tol = 1e-9) {
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();
    assert(b.size() == m);
    // Columns: n structural, m artificial, then the right-hand side.
    const std::size_t width = n + m + 1;
    Matrix tab(m + 1, width);
    std::vector<std::size_t> basis(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double sign = b[i] < 0.0 ? -1.0 : 1.0;
        for (std::size_t j = 0; j < n; ++j) tab(i, j) = sign * a(i, j);
        tab(i, n + i) = 1.0;
        tab(i, width - 1) = sign * b[i];
        basis[i] = n + i;
    }
    // Objective row holds reduced costs of "minimize sum of artificials".
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < width; ++j)
            if (j < n || j == width - 1) tab(m, j) -= tab(i, j);

    const std::size_t max_iter = 50 * (n + m + 10);
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        std::size_t enter = width;
        for (std::size_t j = 0; j + 1 < width; ++j) {
            if (tab(m, j) < -tol) {
                enter = j;
                break;
            }
        }
        if (enter == width) break;

        std::size_t leave = m;
        double best_ratio = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            if (tab(i, enter) > tol) {
                const double ratio = tab(i, width - 1) / tab(i, enter);
                if (leave == m || ratio < best_ratio - tol ||
                    (std::abs(ratio - best_ratio) <= tol && basis[i] < basis[leave])) {
                    leave = i;
                    best_ratio = ratio;
                }
            }
        }
        if (leave == m) break; // unbounded phase one cannot happen; objective bounded below by 0

        const double pivot = tab(leave, enter);
        for (std::size_t j = 0; j < width; ++j) tab(leave, j) /= pivot;
        for (std::size_t i = 0; i <= m; ++i) {
            if (i == leave) continue;
            const double factor = tab(i, enter);
            if (factor == 0.0) continue;
            for (std::size_t j = 0; j < width; ++j) tab(i, j) -= factor * tab(leave, j);
        }
        basis[leave] = enter;
    }

    if (-tab(m, width - 1) > tol * std::max(1.0, norm2(b))) return std::nullopt;

    std::vector<double> x(n, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        if (basis[i] < n) x[basis[i]] = std::max(0.0, tab(i, width - 1));
    return x;
}

/// Searches for a direction d != 0 with A d >= 0 componentwise and A d != 0,
/// normalised so that the entries of A d sum to one. Returns the unit vector
/// d / |d|, or nullopt when no such direction exists.
inline std::optional<std::vector<double>> find_semipositive_direction(const Matrix& a) {
    const std::size_t n = a.rows();
    const std::size_t m = a.cols();
    // Variables: d+ (m), d- (m), slack (n); rows: A d+ - A d- - slack = 0, sum slack = 1.
    Matrix eq(n + 1, 2 * m + n);
    std::vector<double> rhs(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            eq(i, j) = a(i, j);
            eq(i, m + j) = -a(i, j);
        }
        eq(i, 2 * m + i) = -1.0;
        eq(n, 2 * m + i) = 1.0;
    }
    rhs[n] = 1.0;
    const auto sol = find_nonnegative_solution(eq, rhs);
    if (!sol) return std::nullopt;
    std::vector<double> d(m);
    for (std::size_t j = 0; j < m; ++j) d[j] = (*sol)[j] - (*sol)[m + j];
    const double len = norm2(d);
    if (len == 0.0) return std::nullopt;
    for (auto& x : d) x /= len;
    return d;
}

} // namespace ddrisk::linalg
