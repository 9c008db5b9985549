#pragma once

#include "pvfc/core/error.hpp"
#include "pvfc/core/feature_frame.hpp"
#include "pvfc/core/time_series.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

namespace pvfc::features {

/// `out[t] = series[t - lag]`; the first `lag` entries are missing. Past
/// values are observable at prediction time, hence tagged known.
inline Column make_lags(const TimeSeries& series, std::size_t lag_hours = 24, std::string name = {}) {
    require(lag_hours >= 1, ErrorCode::InvalidArgument, "lag must be at least one step");
    const auto step = series.resolution().count();
    require(3600 % step == 0 || step % 3600 == 0, ErrorCode::InvalidArgument,
            "lag in hours needs an hour-compatible resolution");
    const std::size_t lag = step <= 3600 ? lag_hours * static_cast<std::size_t>(3600 / step)
                                         : lag_hours / static_cast<std::size_t>(step / 3600);
    require(lag >= 1, ErrorCode::InvalidArgument, "lag shorter than one sample");
    std::vector<double> out(series.size(), kMissing);
    for (std::size_t t = lag; t < series.size(); ++t) {
        out[t] = series[t - lag];
    }
    if (name.empty()) {
        name = "lag_" + std::to_string(lag_hours);
    }
    return Column{std::move(name), FeatureTag::known_real(), std::move(out), {}, series.unit()};
}

struct ColumnScale {
    double min = 0.0;
    double max = 1.0;
    bool degenerate = false;

    double apply(double x) const {
        if (is_missing(x)) {
            return x;
        }
        return degenerate ? x - min : (x - min) / (max - min);
    }
    double invert(double z) const {
        if (is_missing(z)) {
            return z;
        }
        return degenerate ? z + min : z * (max - min) + min;
    }
};

enum class DegeneratePolicy { Throw, Flag };

/// Min-max scales per real column, fitted on training rows only.
struct NormalizationParams {
    std::map<std::string, ColumnScale> scales;

    const ColumnScale& scale(const std::string& name) const {
        const auto it = scales.find(name);
        if (it == scales.end()) {
            fail(ErrorCode::MissingColumn, "no normalization fitted for '" + name + "'");
        }
        return it->second;
    }

    double apply(const std::string& name, double x) const { return scale(name).apply(x); }
    double invert(const std::string& name, double z) const { return scale(name).invert(z); }

    FeatureFrame apply(const FeatureFrame& frame) const { return transform(frame, true); }
    FeatureFrame invert(const FeatureFrame& frame) const { return transform(frame, false); }

    nlohmann::json to_json() const {
        nlohmann::json j = nlohmann::json::object();
        for (const auto& [name, s] : scales) {
            j[name] = {{"min", s.min}, {"max", s.max}, {"degenerate", s.degenerate}};
        }
        return j;
    }

    static NormalizationParams from_json(const nlohmann::json& j) {
        NormalizationParams p;
        for (const auto& [name, s] : j.items()) {
            p.scales[name] = {s.at("min").get<double>(), s.at("max").get<double>(),
                              s.value("degenerate", false)};
        }
        return p;
    }

private:
    FeatureFrame transform(const FeatureFrame& frame, bool forward) const {
        FeatureFrame out = frame;
        for (const Column& c : frame.columns()) {
            const auto it = scales.find(c.name);
            if (it == scales.end() || !c.tag.is_real()) {
                continue;
            }
            std::vector<double> data = c.data;
            for (double& x : data) {
                x = forward ? it->second.apply(x) : it->second.invert(x);
            }
            out.replace_data(c.name, std::move(data));
        }
        return out;
    }
};

/// Fits min-max scales on every time-varying real column of `train`.
/// Columns with fewer than two distinct finite values are degenerate.
inline NormalizationParams fit_normalizer(const FeatureFrame& train,
                                          DegeneratePolicy policy = DegeneratePolicy::Throw) {
    NormalizationParams params;
    for (const Column& c : train.columns()) {
        if (!c.tag.is_real()) {
            continue;
        }
        double lo = INFINITY;
        double hi = -INFINITY;
        for (double x : c.data) {
            if (std::isfinite(x)) {
                lo = std::min(lo, x);
                hi = std::max(hi, x);
            }
        }
        if (!(lo < hi)) {
            if (policy == DegeneratePolicy::Throw) {
                fail(ErrorCode::DegenerateColumn, "column '" + c.name + "' is constant on training rows");
            }
            params.scales[c.name] = {std::isfinite(lo) ? lo : 0.0, std::isfinite(lo) ? lo : 0.0, true};
            continue;
        }
        params.scales[c.name] = {lo, hi, false};
    }
    return params;
}

/// Indicator columns `<name>=<label>` for a categorical column; missing rows
/// stay missing in every indicator.
inline std::vector<Column> one_hot(const Column& column) {
    require(!column.tag.is_real(), ErrorCode::InvalidArgument,
            "one_hot needs a categorical column, got '" + column.name + "'");
    require(!column.vocabulary.empty(), ErrorCode::UnknownCategory,
            "column '" + column.name + "' has no vocabulary");
    const FeatureTag tag = FeatureTag::make(column.tag.temporal(), column.tag.knowledge(), Kind::Real);
    std::vector<Column> out;
    for (const auto& label : column.vocabulary) {
        out.push_back(Column{column.name + "=" + label, tag, std::vector<double>(column.data.size(), 0.0), {}, {}});
    }
    for (std::size_t r = 0; r < column.data.size(); ++r) {
        const double id = column.data[r];
        if (is_missing(id)) {
            for (auto& c : out) {
                c.data[r] = kMissing;
            }
            continue;
        }
        require(id >= 0 && std::floor(id) == id && static_cast<std::size_t>(id) < out.size(),
                ErrorCode::UnknownCategory, "row " + std::to_string(r) + " of '" + column.name +
                                                "' is outside the vocabulary");
        out[static_cast<std::size_t>(id)].data[r] = 1.0;
    }
    return out;
}

/// One-hot for labels given as text against a registered vocabulary.
inline std::vector<Column> one_hot(const std::string& name, FeatureTag tag,
                                   const std::vector<std::string>& labels,
                                   const std::vector<std::string>& vocabulary) {
    std::vector<double> ids;
    ids.reserve(labels.size());
    for (const auto& l : labels) {
        ids.push_back(static_cast<double>(category_id(vocabulary, l)));
    }
    return one_hot(Column{name, tag, std::move(ids), vocabulary, {}});
}

} // namespace pvfc::features
