#pragma once

#include "pvfc/core/error.hpp"
#include "pvfc/core/time_series.hpp"
#include "pvfc/decomp/loess.hpp"
#include "pvfc/decomp/result.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

namespace pvfc::decomp {

inline std::size_t next_odd(double x) {
    auto v = static_cast<std::size_t>(std::ceil(x - 1e-12));
    if (v % 2 == 0) {
        ++v;
    }
    return v;
}

/// Seasonal-trend decomposition settings. Windows count points, not spans.
struct StlParams {
    std::size_t period = 24;
    std::size_t seasonal_window = 25;
    std::size_t trend_window = 0;    // 0 → smallest odd ≥ 1.5·period / (1 − 1.5/seasonal_window)
    std::size_t low_pass_window = 0; // 0 → smallest odd ≥ period
    std::size_t inner_iterations = 2;
    std::size_t robust_iterations = 1;
    int seasonal_degree = 1;
    int trend_degree = 1;
    int low_pass_degree = 1;

    static StlParams defaults(std::size_t period, bool robust = false) {
        StlParams p;
        p.period = period;
        p.robust_iterations = robust ? 15 : 1;
        return p.resolved();
    }

    /// Copy with derived windows filled in.
    StlParams resolved() const {
        StlParams p = *this;
        if (p.trend_window == 0) {
            p.trend_window = next_odd(1.5 * static_cast<double>(p.period) /
                                      (1.0 - 1.5 / static_cast<double>(p.seasonal_window)));
        }
        if (p.low_pass_window == 0) {
            p.low_pass_window = next_odd(static_cast<double>(p.period));
        }
        return p;
    }

    void validate() const {
        require(period >= 2, ErrorCode::InvalidArgument, "STL period must be at least 2");
        require(seasonal_window >= 7 && seasonal_window % 2 == 1, ErrorCode::InvalidArgument,
                "seasonal window must be odd and at least 7");
        for (std::size_t w : {trend_window, low_pass_window}) {
            require(w >= 3 && w % 2 == 1, ErrorCode::InvalidArgument, "STL windows must be odd and at least 3");
        }
        require(inner_iterations >= 1 && robust_iterations >= 1, ErrorCode::InvalidArgument,
                "STL needs at least one inner and one outer iteration");
        for (int d : {seasonal_degree, trend_degree, low_pass_degree}) {
            require(d >= 0 && d <= 2, ErrorCode::InvalidArgument, "STL loess degrees must be 0, 1 or 2");
        }
    }

    nlohmann::json to_json() const {
        return {{"period", period},
                {"seasonal_window", seasonal_window},
                {"trend_window", trend_window},
                {"low_pass_window", low_pass_window},
                {"inner_iterations", inner_iterations},
                {"robust_iterations", robust_iterations}};
    }
};

namespace detail {

inline std::vector<double> moving_average(std::span<const double> x, std::size_t window) {
    if (x.size() < window) {
        return {};
    }
    std::vector<double> out(x.size() - window + 1);
    double sum = 0.0;
    for (std::size_t i = 0; i < window; ++i) {
        sum += x[i];
    }
    const double w = static_cast<double>(window);
    out[0] = sum / w;
    for (std::size_t i = 1; i < out.size(); ++i) {
        sum += x[i + window - 1] - x[i - 1];
        out[i] = sum / w;
    }
    return out;
}

/// Bisquare robustness weights from remainders, scale 6·median|r|.
inline std::vector<double> bisquare_weights(std::span<const double> remainder) {
    std::vector<double> abs_r(remainder.size());
    std::transform(remainder.begin(), remainder.end(), abs_r.begin(), [](double r) { return std::abs(r); });
    std::vector<double> sorted = abs_r;
    const std::size_t mid = sorted.size() / 2;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(mid), sorted.end());
    double median = sorted[mid];
    if (sorted.size() % 2 == 0) {
        const double lower = *std::max_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(mid));
        median = 0.5 * (median + lower);
    }
    const double h = 6.0 * median;
    std::vector<double> w(remainder.size(), 1.0);
    if (!(h > 0.0)) {
        return w;
    }
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double u = abs_r[i] / h;
        if (u >= 1.0) {
            w[i] = 0.0;
        } else {
            const double t = 1.0 - u * u;
            w[i] = t * t;
        }
    }
    return w;
}

} // namespace detail

struct StlComponents {
    std::vector<double> trend;
    std::vector<double> seasonal;
    std::vector<double> remainder;
    std::vector<double> weights;
};

/// Classic STL: inner loop of cycle-subseries smoothing, low-pass removal
/// and trend smoothing; outer loop of bisquare reweighting. The remainder is
/// y − trend − seasonal.
inline StlComponents stl_components(std::span<const double> y, StlParams params) {
    params = params.resolved();
    params.validate();
    const std::size_t n = y.size();
    const std::size_t np = params.period;
    require(n >= 2 * np, ErrorCode::SeriesTooShort, "STL needs at least two full periods");
    require(!any_missing(y), ErrorCode::InvalidArgument, "STL input must not contain missing values");

    std::vector<double> trend(n, 0.0);
    std::vector<double> seasonal(n, 0.0);
    std::vector<double> rw(n, 1.0);
    std::vector<double> detrended(n);
    std::vector<double> cycle(n + 2 * np, 0.0);

    std::vector<double> sub_x;
    std::vector<double> sub_y;
    std::vector<double> sub_w;
    std::vector<double> x_full(n);
    std::iota(x_full.begin(), x_full.end(), 0.0);

    for (std::size_t outer = 0; outer < params.robust_iterations; ++outer) {
        const bool weighted = outer > 0;
        for (std::size_t inner = 0; inner < params.inner_iterations; ++inner) {
            for (std::size_t i = 0; i < n; ++i) {
                detrended[i] = y[i] - trend[i];
            }
            // cycle-subseries smoothing, extended one position at each end
            for (std::size_t j = 0; j < np; ++j) {
                sub_x.clear();
                sub_y.clear();
                sub_w.clear();
                for (std::size_t i = j, k = 0; i < n; i += np, ++k) {
                    sub_x.push_back(static_cast<double>(k));
                    sub_y.push_back(detrended[i]);
                    sub_w.push_back(rw[i]);
                }
                const std::size_t m = sub_x.size();
                const std::span<const double> w = weighted ? std::span<const double>(sub_w) : std::span<const double>{};
                for (std::size_t p = 0; p < m + 2; ++p) {
                    const double pos = static_cast<double>(p) - 1.0;
                    cycle[j + p * np] =
                        loess_at(sub_x, sub_y, pos, params.seasonal_window, params.seasonal_degree, w).value;
                }
            }
            // low-pass filter of the cycle-subseries
            auto ma1 = detail::moving_average(cycle, np);
            auto ma2 = detail::moving_average(ma1, np);
            auto ma3 = detail::moving_average(ma2, 3);
            std::vector<double> low(n);
            for (std::size_t i = 0; i < n; ++i) {
                low[i] = loess_at(x_full, ma3, x_full[i], params.low_pass_window, params.low_pass_degree).value;
            }
            for (std::size_t i = 0; i < n; ++i) {
                seasonal[i] = cycle[np + i] - low[i];
            }
            std::vector<double> deseasonalized(n);
            for (std::size_t i = 0; i < n; ++i) {
                deseasonalized[i] = y[i] - seasonal[i];
            }
            const std::span<const double> w = weighted ? std::span<const double>(rw) : std::span<const double>{};
            for (std::size_t i = 0; i < n; ++i) {
                trend[i] = loess_at(x_full, deseasonalized, x_full[i], params.trend_window, params.trend_degree, w).value;
            }
        }
        if (outer + 1 < params.robust_iterations) {
            std::vector<double> r(n);
            for (std::size_t i = 0; i < n; ++i) {
                r[i] = y[i] - trend[i] - seasonal[i];
            }
            rw = detail::bisquare_weights(r);
        }
    }

    std::vector<double> remainder(n);
    for (std::size_t i = 0; i < n; ++i) {
        remainder[i] = y[i] - trend[i] - seasonal[i];
    }
    return {std::move(trend), std::move(seasonal), std::move(remainder), std::move(rw)};
}

inline DecompositionResult stl(std::span<const double> y, const StlParams& params) {
    const StlParams p = params.resolved();
    StlComponents c = stl_components(y, p);
    DecompositionResult r;
    r.method = Method::STL;
    r.source_length = y.size();
    r.params = p.to_json();
    r.components.push_back({"trend", std::move(c.trend), std::nullopt, std::nullopt});
    r.components.push_back({"seasonal_" + std::to_string(p.period), std::move(c.seasonal), p.period, std::nullopt});
    r.components.push_back({"remainder", std::move(c.remainder), std::nullopt, std::nullopt});
    return r;
}

inline DecompositionResult stl(const TimeSeries& series, const StlParams& params) {
    return stl(series.values(), params);
}

} // namespace pvfc::decomp
