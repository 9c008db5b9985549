#pragma once

#include "pvfc/core/error.hpp"
#include "pvfc/core/feature_frame.hpp"
#include "pvfc/features/transform.hpp"
#include "pvfc/forecast/mlp.hpp"
#include "pvfc/forecast/task.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace pvfc::forecast {

/// One input column as the network sees it.
struct InputColumn {
    std::string name;
    bool known = false;
    bool categorical = false;
    std::size_t categories = 0;

    std::size_t width_per_row() const { return categorical ? categories : 1; }
};

/// Network input geometry derived from frame tags: unknown time-varying
/// columns over the input horizon, known ones over input and forecast
/// horizons, then static fields.
struct InputLayout {
    std::size_t input_horizon = 0;
    std::size_t forecast_horizon = 0;
    std::vector<InputColumn> columns;
    std::vector<InputColumn> statics;

    static InputLayout from_frame(const FeatureFrame& frame, const ForecastTask& task) {
        InputLayout layout;
        layout.input_horizon = task.input_horizon;
        layout.forecast_horizon = task.forecast_horizon;
        for (const Column& c : frame.columns()) {
            const bool cat = !c.tag.is_real();
            layout.columns.push_back({c.name, c.tag.is_known(), cat, cat ? c.vocabulary.size() : 0});
        }
        for (const StaticField& s : frame.statics()) {
            const bool cat = !s.tag.is_real();
            layout.statics.push_back({s.name, true, cat, cat ? s.vocabulary.size() : 0});
        }
        return layout;
    }

    std::size_t width() const {
        std::size_t w = 0;
        for (const auto& c : columns) {
            w += c.width_per_row() * (c.known ? input_horizon + forecast_horizon : input_horizon);
        }
        for (const auto& s : statics) {
            w += s.width_per_row();
        }
        return w;
    }

    nlohmann::json to_json() const {
        auto encode = [](const std::vector<InputColumn>& cols) {
            nlohmann::json a = nlohmann::json::array();
            for (const auto& c : cols) {
                a.push_back({{"name", c.name}, {"known", c.known}, {"categorical", c.categorical},
                             {"categories", c.categories}});
            }
            return a;
        };
        return {{"input_horizon", input_horizon},
                {"forecast_horizon", forecast_horizon},
                {"columns", encode(columns)},
                {"statics", encode(statics)}};
    }

    static InputLayout from_json(const nlohmann::json& j) {
        auto decode = [](const nlohmann::json& a) {
            std::vector<InputColumn> cols;
            for (const auto& c : a) {
                cols.push_back({c.at("name").get<std::string>(), c.at("known").get<bool>(),
                                c.at("categorical").get<bool>(), c.at("categories").get<std::size_t>()});
            }
            return cols;
        };
        InputLayout l;
        l.input_horizon = j.at("input_horizon").get<std::size_t>();
        l.forecast_horizon = j.at("forecast_horizon").get<std::size_t>();
        l.columns = decode(j.at("columns"));
        l.statics = decode(j.at("statics"));
        return l;
    }
};

/// Scaled, row-major view of a frame ready for window assembly. Missing
/// values encode as zeros.
class WindowEncoder {
public:
    WindowEncoder(const FeatureFrame& frame, const InputLayout& layout, const features::NormalizationParams& norm,
                  const std::map<std::string, features::ColumnScale>& static_scales)
        : frame_(&frame), layout_(&layout) {
        for (const InputColumn& ic : layout.columns) {
            require(frame.has_column(ic.name), ErrorCode::MissingColumn,
                    "context frame lacks input column '" + ic.name + "'");
            const Column& c = frame.column(ic.name);
            std::vector<double> data = c.data;
            if (!ic.categorical) {
                const auto& s = norm.scale(ic.name);
                for (double& x : data) {
                    x = s.apply(x);
                }
            }
            data_.push_back(std::move(data));
        }
        for (const InputColumn& is : layout.statics) {
            require(frame.has_static(is.name), ErrorCode::MissingColumn,
                    "context frame lacks static field '" + is.name + "'");
            const double v = frame.static_field(is.name).value;
            if (is.categorical) {
                static_values_.push_back(v);
            } else {
                const auto it = static_scales.find(is.name);
                require(it != static_scales.end(), ErrorCode::MissingColumn, "no scale for static '" + is.name + "'");
                static_values_.push_back(it->second.apply(v));
            }
        }
    }

    /// Rows origin−L … origin+T−1 exist and lie on consecutive grid points.
    bool window_fits(std::size_t origin) const {
        const std::size_t L = layout_->input_horizon;
        const std::size_t T = layout_->forecast_horizon;
        if (origin < L || origin + T > frame_->size()) {
            return false;
        }
        const auto idx = frame_->index();
        return idx[origin + T - 1] - idx[origin - L] == frame_->resolution() * static_cast<std::int64_t>(L + T - 1);
    }

    /// Known inputs over the forecast horizon are all present.
    bool known_complete(std::size_t origin) const {
        const std::size_t T = layout_->forecast_horizon;
        for (std::size_t c = 0; c < layout_->columns.size(); ++c) {
            if (!layout_->columns[c].known) {
                continue;
            }
            for (std::size_t r = origin; r < origin + T; ++r) {
                if (is_missing(data_[c][r])) {
                    return false;
                }
            }
        }
        return true;
    }

    void encode(std::size_t origin, double* out) const {
        const std::size_t L = layout_->input_horizon;
        const std::size_t T = layout_->forecast_horizon;
        std::size_t at = 0;
        for (std::size_t c = 0; c < layout_->columns.size(); ++c) {
            const InputColumn& ic = layout_->columns[c];
            const std::size_t end = ic.known ? origin + T : origin;
            for (std::size_t r = origin - L; r < end; ++r) {
                const double v = data_[c][r];
                if (ic.categorical) {
                    for (std::size_t k = 0; k < ic.categories; ++k) {
                        out[at + k] = 0.0;
                    }
                    if (!is_missing(v) && v >= 0.0 && v < static_cast<double>(ic.categories)) {
                        out[at + static_cast<std::size_t>(v)] = 1.0;
                    }
                    at += ic.categories;
                } else {
                    out[at++] = is_missing(v) ? 0.0 : v;
                }
            }
        }
        for (std::size_t s = 0; s < layout_->statics.size(); ++s) {
            const InputColumn& is = layout_->statics[s];
            if (is.categorical) {
                for (std::size_t k = 0; k < is.categories; ++k) {
                    out[at + k] = static_cast<double>(k) == static_values_[s] ? 1.0 : 0.0;
                }
                at += is.categories;
            } else {
                out[at++] = static_values_[s];
            }
        }
    }

    Matrix encode_all(std::span<const std::size_t> origins) const {
        Matrix x(static_cast<Eigen::Index>(layout_->width()), static_cast<Eigen::Index>(origins.size()));
        for (std::size_t i = 0; i < origins.size(); ++i) {
            encode(origins[i], x.col(static_cast<Eigen::Index>(i)).data());
        }
        return x;
    }

private:
    const FeatureFrame* frame_;
    const InputLayout* layout_;
    std::vector<std::vector<double>> data_;
    std::vector<double> static_values_;
};

/// Window origins whose forecast rows are all `allowed`, carry a finite
/// target and lie on a contiguous stretch of the frame. Origins fall on
/// multiples of `stride` steps after local midnight.
inline std::vector<std::size_t> window_origins(const FeatureFrame& frame, std::span<const double> target,
                                               const std::vector<bool>& allowed, const ForecastTask& task) {
    require(target.size() == frame.size() && allowed.size() == frame.size(), ErrorCode::ShapeMismatch,
            "target and row mask must match the frame");
    const std::size_t L = task.input_horizon;
    const std::size_t T = task.forecast_horizon;
    const auto idx = frame.index();
    std::vector<std::size_t> origins;
    const std::int64_t step = frame.resolution().count() * static_cast<std::int64_t>(task.stride);
    const std::int64_t shift = static_cast<std::int64_t>(frame.utc_offset_minutes()) * 60;
    for (std::size_t o = L; o + T <= frame.size(); ++o) {
        if (((idx[o].time_since_epoch().count() + shift) % step + step) % step != 0) {
            continue;
        }
        if (idx[o + T - 1] - idx[o - L] != frame.resolution() * static_cast<std::int64_t>(L + T - 1)) {
            continue;
        }
        bool ok = true;
        for (std::size_t r = o; r < o + T && ok; ++r) {
            ok = allowed[r] && std::isfinite(target[r]);
        }
        if (!ok) {
            continue;
        }
        origins.push_back(o);
    }
    return origins;
}

/// Scaled targets, one column per origin, each target repeated for every
/// quantile (point-major).
inline Matrix encode_targets(std::span<const double> target, std::span<const std::size_t> origins,
                             std::size_t horizon, std::size_t quantiles, const features::ColumnScale& scale) {
    Matrix y(static_cast<Eigen::Index>(horizon * quantiles), static_cast<Eigen::Index>(origins.size()));
    for (std::size_t c = 0; c < origins.size(); ++c) {
        for (std::size_t i = 0; i < horizon; ++i) {
            const double z = scale.apply(target[origins[c] + i]);
            for (std::size_t k = 0; k < quantiles; ++k) {
                y(static_cast<Eigen::Index>(i * quantiles + k), static_cast<Eigen::Index>(c)) = z;
            }
        }
    }
    return y;
}

} // namespace pvfc::forecast
