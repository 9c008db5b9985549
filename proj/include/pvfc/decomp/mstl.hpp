#pragma once

#include "pvfc/core/error.hpp"
#include "pvfc/core/time_series.hpp"
#include "pvfc/decomp/result.hpp"
#include "pvfc/decomp/stl.hpp"

#include <span>
#include <vector>

namespace pvfc::decomp {

struct MstlOptions {
    std::vector<std::size_t> periods{24};
    std::vector<StlParams> params; // one per period; empty → StlParams::defaults
    std::size_t iterations = 2;
    bool robust = false;
};

/// Multiple seasonal-trend decomposition by iterated STL.
///
/// Each round visits the periods in ascending order: the current estimate of
/// that seasonal is added back, STL at that period re-estimates it, and the
/// new estimate is removed again. The trend comes from the last STL pass and
/// the remainder is y − Σ seasonal − trend.
inline DecompositionResult mstl(std::span<const double> y, const MstlOptions& options) {
    const auto& periods = options.periods;
    require(!periods.empty(), ErrorCode::InvalidArgument, "MSTL needs at least one period");
    for (std::size_t i = 1; i < periods.size(); ++i) {
        require(periods[i] > periods[i - 1], ErrorCode::PeriodsNotAscending,
                "MSTL periods must be strictly ascending");
    }
    require(y.size() >= 2 * periods.back(), ErrorCode::SeriesTooShort,
            "MSTL needs at least two cycles of the longest period");
    require(options.params.empty() || options.params.size() == periods.size(), ErrorCode::InvalidArgument,
            "MSTL params must be given per period");
    require(options.iterations >= 1, ErrorCode::InvalidArgument, "MSTL needs at least one round");

    std::vector<StlParams> params;
    for (std::size_t i = 0; i < periods.size(); ++i) {
        StlParams p = options.params.empty() ? StlParams::defaults(periods[i], options.robust) : options.params[i];
        p.period = periods[i];
        params.push_back(p.resolved());
    }

    const std::size_t n = y.size();
    std::vector<std::vector<double>> seasonals(periods.size(), std::vector<double>(n, 0.0));
    std::vector<double> deseasonalized(y.begin(), y.end());
    std::vector<double> trend(n, 0.0);
    for (std::size_t round = 0; round < options.iterations; ++round) {
        for (std::size_t i = 0; i < periods.size(); ++i) {
            for (std::size_t t = 0; t < n; ++t) {
                deseasonalized[t] += seasonals[i][t];
            }
            StlComponents fit = stl_components(deseasonalized, params[i]);
            seasonals[i] = std::move(fit.seasonal);
            for (std::size_t t = 0; t < n; ++t) {
                deseasonalized[t] -= seasonals[i][t];
            }
            trend = std::move(fit.trend);
        }
    }

    std::vector<double> remainder(n);
    for (std::size_t t = 0; t < n; ++t) {
        double r = y[t];
        for (const auto& s : seasonals) {
            r -= s[t];
        }
        remainder[t] = r - trend[t];
    }

    DecompositionResult r;
    r.method = Method::MSTL;
    r.source_length = n;
    nlohmann::json jp = nlohmann::json::array();
    for (const auto& p : params) {
        jp.push_back(p.to_json());
    }
    r.params = {{"periods", periods}, {"iterations", options.iterations}, {"robust", options.robust}, {"stl", jp}};
    r.components.push_back({"trend", std::move(trend), std::nullopt, std::nullopt});
    for (std::size_t i = 0; i < periods.size(); ++i) {
        r.components.push_back(
            {"seasonal_" + std::to_string(periods[i]), std::move(seasonals[i]), periods[i], std::nullopt});
    }
    r.components.push_back({"remainder", std::move(remainder), std::nullopt, std::nullopt});
    return r;
}

inline DecompositionResult mstl(const TimeSeries& series, const MstlOptions& options) {
    return mstl(series.values(), options);
}

} // namespace pvfc::decomp
