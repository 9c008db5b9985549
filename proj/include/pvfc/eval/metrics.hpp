#pragma once

#include "pvfc/core/error.hpp"
#include "pvfc/core/time.hpp"
#include "pvfc/features/weather.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace pvfc::eval {

using features::WeatherType;

/// Truth, point forecasts and the normalizing maximum for one scored series.
/// Timestamps are needed only for weather breakdowns.
struct EvaluationInput {
    std::string plant_id;
    std::vector<Timestamp> timestamps;
    std::vector<double> y;
    std::vector<double> yhat;
    double y_max = 0.0;
    int utc_offset_minutes = 0;

    static EvaluationInput make(std::vector<double> y, std::vector<double> yhat, std::vector<Timestamp> ts = {},
                                std::string plant = {}, int offset = 0) {
        EvaluationInput in;
        in.y_max = y.empty() ? 0.0 : *std::max_element(y.begin(), y.end());
        in.y = std::move(y);
        in.yhat = std::move(yhat);
        in.timestamps = std::move(ts);
        in.plant_id = std::move(plant);
        in.utc_offset_minutes = offset;
        return in;
    }

    void validate() const {
        require(y.size() == yhat.size(), ErrorCode::ShapeMismatch, "truth and forecast lengths differ");
        require(timestamps.empty() || timestamps.size() == y.size(), ErrorCode::ShapeMismatch,
                "timestamps must match the series length");
        require(!y.empty(), ErrorCode::ShapeMismatch, "nothing to evaluate");
        require(y_max > 0.0, ErrorCode::ZeroYMax, "maximum true power must be positive");
    }
};

/// Percent: 100 · Σ|y − ŷ| / (T · y_max).
inline double nmae(std::span<const double> y, std::span<const double> yhat, double y_max) {
    require(y.size() == yhat.size() && !y.empty(), ErrorCode::ShapeMismatch, "truth and forecast lengths differ");
    require(y_max > 0.0, ErrorCode::ZeroYMax, "maximum true power must be positive");
    double sum = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        sum += std::abs(y[i] - yhat[i]);
    }
    return 100.0 * sum / (static_cast<double>(y.size()) * y_max);
}

/// Percent: 100 · sqrt(Σ(y − ŷ)² / (T · y_max²)).
inline double nrmse(std::span<const double> y, std::span<const double> yhat, double y_max) {
    require(y.size() == yhat.size() && !y.empty(), ErrorCode::ShapeMismatch, "truth and forecast lengths differ");
    require(y_max > 0.0, ErrorCode::ZeroYMax, "maximum true power must be positive");
    double sum = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double r = y[i] - yhat[i];
        sum += r * r;
    }
    return 100.0 * std::sqrt(sum / (static_cast<double>(y.size()) * y_max * y_max));
}

inline double nmae(const EvaluationInput& in) {
    in.validate();
    return nmae(in.y, in.yhat, in.y_max);
}

inline double nrmse(const EvaluationInput& in) {
    in.validate();
    return nrmse(in.y, in.yhat, in.y_max);
}

struct Scores {
    double nmae = 0.0;
    double nrmse = 0.0;
};

inline Scores score(const EvaluationInput& in) { return {nmae(in), nrmse(in)}; }

/// Overall and per-class scores with each class's share of days (percent).
/// Classes without days have no scores.
struct WeatherBreakdown {
    Scores overall;
    std::map<WeatherType, std::optional<Scores>> by_class;
    std::map<WeatherType, double> share_percent;
    std::map<WeatherType, std::size_t> days;
};

/// Scores the hours of each weather class against the global y_max.
inline WeatherBreakdown evaluate_by_weather(const EvaluationInput& in,
                                            const std::map<LocalDate, WeatherType>& labels) {
    in.validate();
    require(in.timestamps.size() == in.y.size(), ErrorCode::ShapeMismatch,
            "weather breakdown needs timestamps");
    WeatherBreakdown out;
    out.overall = score(in);
    std::map<WeatherType, std::vector<double>> ys;
    std::map<WeatherType, std::vector<double>> yhats;
    std::map<WeatherType, std::set<LocalDate>> class_days;
    for (std::size_t i = 0; i < in.y.size(); ++i) {
        const LocalDate d = local_date(in.timestamps[i], in.utc_offset_minutes);
        const auto it = labels.find(d);
        require(it != labels.end(), ErrorCode::UnlabeledDay, "no weather label for " + format_date(d));
        ys[it->second].push_back(in.y[i]);
        yhats[it->second].push_back(in.yhat[i]);
        class_days[it->second].insert(d);
    }
    std::size_t total_days = 0;
    for (const auto& [w, ds] : class_days) {
        total_days += ds.size();
    }
    for (WeatherType w : features::kAllWeather) {
        const auto it = ys.find(w);
        if (it == ys.end()) {
            out.by_class[w] = std::nullopt;
            out.share_percent[w] = 0.0;
            out.days[w] = 0;
            continue;
        }
        out.by_class[w] = Scores{nmae(it->second, yhats[w], in.y_max), nrmse(it->second, yhats[w], in.y_max)};
        out.days[w] = class_days[w].size();
        out.share_percent[w] = 100.0 * static_cast<double>(class_days[w].size()) / static_cast<double>(total_days);
    }
    return out;
}

enum class Aggregate { Indiv, Sum };

inline std::string_view aggregate_name(Aggregate a) { return a == Aggregate::Indiv ? "indiv" : "sum"; }

inline Aggregate parse_aggregate(std::string_view s) {
    if (s == "indiv") {
        return Aggregate::Indiv;
    }
    if (s == "sum") {
        return Aggregate::Sum;
    }
    fail(ErrorCode::ConfigError, "aggregate must be 'indiv' or 'sum', got '" + std::string(s) + "'");
}

/// Site-level scoring input. Indiv sums the per-plant forecasts; Sum scores
/// `site_forecast`, produced by a model of the pre-summed site series. Both
/// compare against the summed plant truths and use its maximum.
inline EvaluationInput site_aggregate(std::span<const EvaluationInput> plants, Aggregate mode,
                                      std::span<const double> site_forecast = {}) {
    require(!plants.empty(), ErrorCode::InvalidArgument, "site aggregation needs at least one plant");
    const EvaluationInput& first = plants.front();
    const std::size_t n = first.y.size();
    std::vector<double> y(n, 0.0);
    std::vector<double> yhat(n, 0.0);
    for (const EvaluationInput& p : plants) {
        require(p.y.size() == n && p.yhat.size() == n, ErrorCode::Misaligned, "plant series lengths differ");
        require(p.timestamps == first.timestamps, ErrorCode::Misaligned, "plant timestamps differ");
        for (std::size_t i = 0; i < n; ++i) {
            y[i] += p.y[i];
            yhat[i] += p.yhat[i];
        }
    }
    if (mode == Aggregate::Sum) {
        require(site_forecast.size() == n, ErrorCode::Misaligned,
                "Site-Sum needs a site forecast aligned with the plants");
        yhat.assign(site_forecast.begin(), site_forecast.end());
    }
    return EvaluationInput::make(std::move(y), std::move(yhat), first.timestamps,
                                 mode == Aggregate::Indiv ? "Site-Indiv" : "Site-Sum", first.utc_offset_minutes);
}

} // namespace pvfc::eval
