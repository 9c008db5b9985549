#pragma once

#include "pvfc/core/error.hpp"
#include "pvfc/core/time.hpp"
#include "pvfc/core/time_series.hpp"
#include "pvfc/features/build_frame.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace pvfc::forecast {

using features::MeteorologyMode;

struct ForecastTask {
    std::size_t input_horizon = 72;
    std::size_t forecast_horizon = 24;
    std::vector<double> quantiles{0.1, 0.25, 0.5, 0.75, 0.9};
    MeteorologyMode mode = MeteorologyMode::Available;
    std::string target = "power";
    std::size_t stride = 24; // steps between window origins, counted from local midnight

    void validate() const {
        require(forecast_horizon >= 1, ErrorCode::ConfigError, "forecast horizon must be positive");
        require(input_horizon >= forecast_horizon, ErrorCode::ConfigError,
                "input horizon must be at least the forecast horizon");
        require(!quantiles.empty(), ErrorCode::ConfigError, "quantile set is empty");
        for (std::size_t i = 0; i < quantiles.size(); ++i) {
            require(quantiles[i] > 0.0 && quantiles[i] < 1.0, ErrorCode::ConfigError, "quantiles must lie in (0, 1)");
            require(i == 0 || quantiles[i] > quantiles[i - 1], ErrorCode::ConfigError,
                    "quantiles must be strictly ascending");
        }
        require(median_index() < quantiles.size(), ErrorCode::ConfigError, "quantile set must contain 0.5");
        require(stride >= 1, ErrorCode::ConfigError, "window stride must be positive");
    }

    std::size_t median_index() const {
        for (std::size_t i = 0; i < quantiles.size(); ++i) {
            if (quantiles[i] == 0.5) {
                return i;
            }
        }
        return quantiles.size();
    }

    nlohmann::json to_json() const {
        return {{"input_horizon", input_horizon},
                {"forecast_horizon", forecast_horizon},
                {"quantiles", quantiles},
                {"mode", features::mode_name(mode)},
                {"target", target},
                {"stride", stride}};
    }

    static ForecastTask from_json(const nlohmann::json& j) {
        ForecastTask t;
        t.input_horizon = j.value("input_horizon", t.input_horizon);
        t.forecast_horizon = j.value("forecast_horizon", t.forecast_horizon);
        t.quantiles = j.value("quantiles", t.quantiles);
        if (j.contains("mode")) {
            t.mode = features::parse_mode(j.at("mode").get<std::string>());
        }
        t.target = j.value("target", t.target);
        t.stride = j.value("stride", t.stride);
        t.validate();
        return t;
    }
};

struct TrainConfig {
    std::vector<std::size_t> hidden{64, 64};
    double learning_rate = 1e-3;
    double weight_decay = 0.0;
    std::size_t batch_size = 64;
    std::size_t max_epochs = 200;
    std::size_t patience = 10;
    std::uint64_t seed = 0;

    void validate() const {
        require(!hidden.empty(), ErrorCode::ConfigError, "at least one hidden layer is required");
        for (std::size_t w : hidden) {
            require(w >= 1, ErrorCode::ConfigError, "hidden layers must have positive width");
        }
        require(learning_rate > 0.0, ErrorCode::ConfigError, "learning rate must be positive");
        require(weight_decay >= 0.0 && learning_rate * weight_decay < 1.0, ErrorCode::ConfigError,
                "weight decay must be non-negative and below 1 / learning rate");
        require(batch_size >= 1, ErrorCode::ConfigError, "batch size must be positive");
        require(max_epochs >= 1, ErrorCode::ConfigError, "max epochs must be positive");
        require(patience < max_epochs, ErrorCode::ConfigError, "patience must be below max epochs");
    }

    nlohmann::json to_json() const {
        return {{"hidden", hidden},   {"learning_rate", learning_rate}, {"weight_decay", weight_decay},
                {"batch_size", batch_size},
                {"max_epochs", max_epochs}, {"patience", patience},     {"seed", seed}};
    }

    static TrainConfig from_json(const nlohmann::json& j) { return from_json(j, TrainConfig{}); }

    /// Keys absent from `j` keep the values of `c`.
    static TrainConfig from_json(const nlohmann::json& j, TrainConfig c) {
        c.hidden = j.value("hidden", c.hidden);
        c.learning_rate = j.value("learning_rate", c.learning_rate);
        c.weight_decay = j.value("weight_decay", c.weight_decay);
        c.batch_size = j.value("batch_size", c.batch_size);
        c.max_epochs = j.value("max_epochs", c.max_epochs);
        c.patience = j.value("patience", c.patience);
        c.seed = j.value("seed", c.seed);
        c.validate();
        return c;
    }
};

/// Quantile tracks over one forecast horizon: `values[q][i]` is the
/// prediction for quantile `quantiles[q]` at `timestamps[i]`.
struct ForecastResult {
    std::vector<Timestamp> timestamps;
    std::vector<double> quantiles;
    std::vector<std::vector<double>> values;

    std::size_t horizon() const noexcept { return timestamps.size(); }

    const std::vector<double>& track(double q) const {
        for (std::size_t k = 0; k < quantiles.size(); ++k) {
            if (quantiles[k] == q) {
                return values[k];
            }
        }
        fail(ErrorCode::InvalidArgument, "quantile " + std::to_string(q) + " not forecast");
    }

    const std::vector<double>& point() const { return track(0.5); }

    /// Sorts the quantile values of each point ascending.
    void enforce_monotone() {
        std::vector<double> column(quantiles.size());
        for (std::size_t i = 0; i < horizon(); ++i) {
            for (std::size_t k = 0; k < quantiles.size(); ++k) {
                column[k] = values[k][i];
            }
            std::sort(column.begin(), column.end());
            for (std::size_t k = 0; k < quantiles.size(); ++k) {
                values[k][i] = column[k];
            }
        }
    }

    void clip(double lo, double hi) {
        for (auto& track : values) {
            for (double& v : track) {
                v = std::clamp(v, lo, hi);
            }
        }
    }
};

/// Pinball loss: mean over points of the sum over quantiles.
/// `predictions[q][i]` pairs with `quantiles[q]` and `y[i]`.
inline double quantile_loss(std::span<const double> y, const std::vector<std::vector<double>>& predictions,
                            std::span<const double> quantiles) {
    require(predictions.size() == quantiles.size(), ErrorCode::ShapeMismatch,
            "one prediction track per quantile is required");
    require(!y.empty(), ErrorCode::ShapeMismatch, "quantile loss needs at least one point");
    double total = 0.0;
    for (std::size_t k = 0; k < quantiles.size(); ++k) {
        require(predictions[k].size() == y.size(), ErrorCode::ShapeMismatch, "prediction track length mismatch");
        const double q = quantiles[k];
        for (std::size_t i = 0; i < y.size(); ++i) {
            const double r = y[i] - predictions[k][i];
            total += std::max(q * r, (q - 1.0) * r);
        }
    }
    return total / static_cast<double>(y.size());
}

/// Repeats the last `period` values of `history` for the next `horizon`
/// points, identically for every quantile.
inline ForecastResult seasonal_naive(const TimeSeries& history, std::size_t period = 24, std::size_t horizon = 24,
                                     std::span<const double> quantiles = {}) {
    require(period >= 1 && horizon >= 1, ErrorCode::InvalidArgument, "period and horizon must be positive");
    require(history.size() >= period, ErrorCode::TooShort, "history shorter than the seasonal period");
    const std::vector<double> qs = quantiles.empty() ? std::vector<double>{0.1, 0.25, 0.5, 0.75, 0.9}
                                                     : std::vector<double>(quantiles.begin(), quantiles.end());
    ForecastResult r;
    r.quantiles = qs;
    const std::size_t n = history.size();
    std::vector<double> track(horizon);
    for (std::size_t i = 0; i < horizon; ++i) {
        track[i] = history[n - period + (i % period)];
        r.timestamps.push_back(history.end() + history.resolution() * static_cast<std::int64_t>(i));
    }
    r.values.assign(qs.size(), track);
    return r;
}

} // namespace pvfc::forecast
