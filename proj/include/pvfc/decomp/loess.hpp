#pragma once

#include "pvfc/core/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <vector>

namespace pvfc::decomp {

namespace detail {

/// Solves the (degree+1)² system by Gaussian elimination with partial
/// pivoting. Returns false when a pivot collapses relative to the diagonal.
template <std::size_t N>
bool solve_small(std::array<std::array<double, N>, N>& a, std::array<double, N>& b, std::size_t dim) {
    double scale = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
        scale = std::max(scale, std::abs(a[i][i]));
    }
    if (!(scale > 0.0)) {
        return false;
    }
    for (std::size_t col = 0; col < dim; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < dim; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) {
                pivot = r;
            }
        }
        if (std::abs(a[pivot][col]) <= 1e-12 * scale) {
            return false;
        }
        std::swap(a[pivot], a[col]);
        std::swap(b[pivot], b[col]);
        for (std::size_t r = col + 1; r < dim; ++r) {
            const double f = a[r][col] / a[col][col];
            for (std::size_t c = col; c < dim; ++c) {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    for (std::size_t i = dim; i-- > 0;) {
        double s = b[i];
        for (std::size_t c = i + 1; c < dim; ++c) {
            s -= a[i][c] * b[c];
        }
        b[i] = s / a[i][i];
    }
    return true;
}

} // namespace detail

/// Outcome of one local fit.
struct LocalFit {
    double value = 0.0;
    bool singular = false; // fell back to the weighted mean
};

/// Local polynomial fit at `x0` over the `q` nearest neighbours of sorted `x`.
///
/// Weights are tricube in distance scaled by the q-th nearest distance,
/// times the optional robustness weights. When q exceeds the sample count
/// the scale distance grows by (q - n)/2 average spacings, so oversized
/// windows smooth progressively harder.
inline LocalFit loess_at(std::span<const double> x, std::span<const double> y, double x0, std::size_t q,
                         int degree, std::span<const double> robustness = {}) {
    const std::size_t n = x.size();
    require(n == y.size() && n > 0, ErrorCode::ShapeMismatch, "loess needs equal-length non-empty x and y");
    require(degree >= 0 && degree <= 2, ErrorCode::InvalidArgument, "loess degree must be 0, 1 or 2");
    require(robustness.empty() || robustness.size() == n, ErrorCode::ShapeMismatch,
            "robustness weights must match x");
    require(q >= 1, ErrorCode::InvalidArgument, "loess needs at least one neighbour");

    std::size_t lo = 0;
    std::size_t hi = n; // window [lo, hi)
    double maxdist = 0.0;
    if (q < n) {
        const auto pos = static_cast<std::size_t>(std::lower_bound(x.begin(), x.end(), x0) - x.begin());
        lo = pos;
        hi = pos;
        while (hi - lo < q) {
            if (lo == 0) {
                ++hi;
            } else if (hi == n) {
                --lo;
            } else if (x0 - x[lo - 1] <= x[hi] - x0) {
                --lo;
            } else {
                ++hi;
            }
        }
        maxdist = std::max(x0 - x[lo], x[hi - 1] - x0);
    } else {
        maxdist = std::max(x0 - x[0], x[n - 1] - x0);
        if (q > n && n > 1) {
            maxdist += 0.5 * static_cast<double>(q - n) * (x[n - 1] - x[0]) / static_cast<double>(n - 1);
        }
    }

    constexpr std::size_t kMax = 3;
    const std::size_t dim = static_cast<std::size_t>(degree) + 1;
    std::array<std::array<double, kMax>, kMax> a{};
    std::array<double, kMax> b{};
    double wsum = 0.0;
    double wysum = 0.0;
    double ysum = 0.0;
    const double scale = maxdist > 0.0 ? maxdist : 1.0;
    for (std::size_t i = lo; i < hi; ++i) {
        const double d = std::abs(x[i] - x0);
        double w = 1.0;
        if (maxdist > 0.0) {
            const double r = d / maxdist;
            if (r >= 1.0) {
                w = 0.0;
            } else {
                const double t = 1.0 - r * r * r;
                w = t * t * t;
            }
        }
        if (!robustness.empty()) {
            w *= robustness[i];
        }
        ysum += y[i];
        if (w <= 0.0) {
            continue;
        }
        wsum += w;
        wysum += w * y[i];
        const double u = (x[i] - x0) / scale;
        std::array<double, 2 * kMax - 1> powers{1.0, u, u * u, u * u * u, u * u * u * u};
        for (std::size_t j = 0; j < dim; ++j) {
            for (std::size_t k = 0; k < dim; ++k) {
                a[j][k] += w * powers[j + k];
            }
            b[j] += w * powers[j] * y[i];
        }
    }
    if (!(wsum > 0.0)) {
        return {ysum / static_cast<double>(hi - lo), true};
    }
    if (degree == 0) {
        return {wysum / wsum, false};
    }
    if (!detail::solve_small(a, b, dim)) {
        return {wysum / wsum, true};
    }
    return {b[0], false};
}

/// LOESS smoother: fitted values at `eval_points` using the ⌈span·n⌉
/// nearest neighbours of each point.
inline std::vector<double> loess(std::span<const double> x, std::span<const double> y,
                                 std::span<const double> eval_points, double span, int degree,
                                 std::span<const double> robustness = {}) {
    require(span > 0.0 && span <= 1.0, ErrorCode::InvalidArgument, "loess span must lie in (0, 1]");
    require(x.size() == y.size(), ErrorCode::ShapeMismatch, "x and y lengths differ");
    require(x.size() >= static_cast<std::size_t>(degree) + 1, ErrorCode::TooShort,
            "loess needs at least degree + 1 points");
    for (std::size_t i = 1; i < x.size(); ++i) {
        require(x[i] > x[i - 1], ErrorCode::InvalidArgument, "loess x must be strictly increasing");
    }
    const auto q = static_cast<std::size_t>(std::ceil(span * static_cast<double>(x.size()) - 1e-12));
    std::vector<double> out;
    out.reserve(eval_points.size());
    for (double x0 : eval_points) {
        out.push_back(loess_at(x, y, x0, std::max<std::size_t>(q, 1), degree, robustness).value);
    }
    return out;
}

/// Smooths `y` sampled at 0, 1, ..., n-1 with a window of `q` points,
/// evaluated at every sample.
inline std::vector<double> loess_smooth(std::span<const double> y, std::size_t q, int degree,
                                        std::span<const double> robustness = {}) {
    std::vector<double> x(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = static_cast<double>(i);
    }
    std::vector<double> out(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        out[i] = loess_at(x, y, x[i], q, degree, robustness).value;
    }
    return out;
}

} // namespace pvfc::decomp
