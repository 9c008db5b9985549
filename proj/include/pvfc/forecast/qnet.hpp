#pragma once

#include "pvfc/core/csv.hpp"
#include "pvfc/core/error.hpp"
#include "pvfc/core/feature_frame.hpp"
#include "pvfc/core/random.hpp"
#include "pvfc/features/build_frame.hpp"
#include "pvfc/features/transform.hpp"
#include "pvfc/forecast/mlp.hpp"
#include "pvfc/forecast/task.hpp"
#include "pvfc/forecast/windows.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pvfc::forecast {

/// Anything that turns a context frame and an origin row into a forecast of
/// rows origin … origin+T−1.
class Forecaster {
public:
    virtual ~Forecaster() = default;
    virtual std::string name() const = 0;
    virtual ForecastResult forecast(const FeatureFrame& context, std::size_t origin) const = 0;

    virtual std::vector<ForecastResult> forecast_many(const FeatureFrame& context,
                                                      std::span<const std::size_t> origins) const {
        std::vector<ForecastResult> out;
        out.reserve(origins.size());
        for (std::size_t o : origins) {
            out.push_back(forecast(context, o));
        }
        return out;
    }
};

/// Seasonal-naive baseline reading the target column of the context frame.
class SeasonalNaiveForecaster final : public Forecaster {
public:
    explicit SeasonalNaiveForecaster(ForecastTask task, std::size_t period = 24)
        : task_(std::move(task)), period_(period) {}

    std::string name() const override { return "seasonal-naive"; }

    ForecastResult forecast(const FeatureFrame& context, std::size_t origin) const override {
        require(origin >= period_ && origin <= context.size(), ErrorCode::TooShort,
                "seasonal-naive needs one period of history before the origin");
        const auto& data = context.column(task_.target).data;
        const auto idx = context.index();
        std::vector<double> history(data.begin() + static_cast<std::ptrdiff_t>(origin - period_),
                                    data.begin() + static_cast<std::ptrdiff_t>(origin));
        const TimeSeries h(idx[origin - period_], context.resolution(), std::move(history));
        return seasonal_naive(h, period_, task_.forecast_horizon, task_.quantiles);
    }

private:
    ForecastTask task_;
    std::size_t period_;
};

/// Forecasts replayed from a prepared table, keyed by origin timestamp.
class ExternalForecaster final : public Forecaster {
public:
    ExternalForecaster(std::string name, std::map<Timestamp, ForecastResult> table)
        : name_(std::move(name)), table_(std::move(table)) {}

    std::string name() const override { return name_; }

    ForecastResult forecast(const FeatureFrame& context, std::size_t origin) const override {
        const auto it = table_.find(context.index()[origin]);
        require(it != table_.end(), ErrorCode::MissingKnownFeatures,
                "no prepared forecast for origin " + format_iso(context.index()[origin]));
        return it->second;
    }

private:
    std::string name_;
    std::map<Timestamp, ForecastResult> table_;
};

struct EpochLog {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
};

struct TrainingLog {
    std::vector<EpochLog> epochs;
    std::size_t best_epoch = 0;
    double best_val_loss = std::numeric_limits<double>::infinity();
    bool stopped_early = false;
    std::size_t train_windows = 0;
    std::size_t val_windows = 0;

    nlohmann::json to_json() const {
        nlohmann::json e = nlohmann::json::array();
        for (const auto& x : epochs) {
            e.push_back({{"epoch", x.epoch}, {"train_loss", x.train_loss}, {"val_loss", x.val_loss}});
        }
        return {{"epochs", e},
                {"best_epoch", best_epoch},
                {"best_val_loss", best_val_loss},
                {"stopped_early", stopped_early},
                {"train_windows", train_windows},
                {"val_windows", val_windows}};
    }
};

/// Frame, aligned target values and the window origins drawn from them.
struct WindowSource {
    const FeatureFrame* frame = nullptr;
    std::span<const double> target;
    std::vector<std::size_t> origins;
};

/// Trained quantile network with everything needed to encode new contexts.
class QuantileModel final : public Forecaster {
public:
    ForecastTask task;
    TrainConfig config;
    InputLayout layout;
    features::NormalizationParams normalization;
    std::map<std::string, features::ColumnScale> static_scales;
    features::ColumnScale target_scale;
    Mlp net;
    std::string recipe_hash;
    std::optional<double> clip_max; // array rating when known
    bool clip = true;
    TrainingLog log;

    std::string name() const override { return "qnet"; }

    ForecastResult forecast(const FeatureFrame& context, std::size_t origin) const override {
        const std::size_t o[1] = {origin};
        return forecast_many(context, o).front();
    }

    std::vector<ForecastResult> forecast_many(const FeatureFrame& context,
                                              std::span<const std::size_t> origins) const override {
        const WindowEncoder enc(context, layout, normalization, static_scales);
        for (std::size_t o : origins) {
            require(enc.window_fits(o), ErrorCode::MissingKnownFeatures,
                    "context does not cover input and forecast horizons around the origin");
            require(enc.known_complete(o), ErrorCode::MissingKnownFeatures,
                    "known features are missing over the forecast horizon");
        }
        const Matrix out = net.forward(enc.encode_all(origins));
        const std::size_t T = task.forecast_horizon;
        const std::size_t Q = task.quantiles.size();
        std::vector<ForecastResult> results;
        results.reserve(origins.size());
        for (std::size_t c = 0; c < origins.size(); ++c) {
            ForecastResult r;
            r.quantiles = task.quantiles;
            r.values.assign(Q, std::vector<double>(T));
            for (std::size_t i = 0; i < T; ++i) {
                r.timestamps.push_back(context.index()[origins[c] + i]);
                for (std::size_t k = 0; k < Q; ++k) {
                    r.values[k][i] = target_scale.invert(
                        out(static_cast<Eigen::Index>(i * Q + k), static_cast<Eigen::Index>(c)));
                }
            }
            r.enforce_monotone();
            if (clip) {
                r.clip(0.0, clip_max.value_or(std::numeric_limits<double>::infinity()));
            }
            results.push_back(std::move(r));
        }
        return results;
    }

    nlohmann::json to_json() const {
        nlohmann::json statics = nlohmann::json::object();
        for (const auto& [name, s] : static_scales) {
            statics[name] = {{"min", s.min}, {"max", s.max}, {"degenerate", s.degenerate}};
        }
        nlohmann::json j{{"format", "pvfc-qnet"},
                         {"version", 1},
                         {"task", task.to_json()},
                         {"train_config", config.to_json()},
                         {"layout", layout.to_json()},
                         {"normalization", normalization.to_json()},
                         {"static_scales", statics},
                         {"target_scale",
                          {{"min", target_scale.min}, {"max", target_scale.max}, {"degenerate", target_scale.degenerate}}},
                         {"network", net.to_json()},
                         {"recipe_hash", recipe_hash},
                         {"clip", clip},
                         {"training_log", log.to_json()}};
        j["clip_max"] = clip_max ? nlohmann::json(*clip_max) : nlohmann::json(nullptr);
        return j;
    }

    static QuantileModel from_json(const nlohmann::json& j) {
        require(j.value("format", "") == "pvfc-qnet", ErrorCode::ConfigError, "not a quantile model file");
        QuantileModel m;
        m.task = ForecastTask::from_json(j.at("task"));
        m.config = TrainConfig::from_json(j.at("train_config"));
        m.layout = InputLayout::from_json(j.at("layout"));
        m.normalization = features::NormalizationParams::from_json(j.at("normalization"));
        m.static_scales = features::NormalizationParams::from_json(j.at("static_scales")).scales;
        const auto& ts = j.at("target_scale");
        m.target_scale = {ts.at("min").get<double>(), ts.at("max").get<double>(), ts.at("degenerate").get<bool>()};
        m.net = Mlp::from_json(j.at("network"));
        m.recipe_hash = j.value("recipe_hash", "");
        m.clip = j.value("clip", true);
        if (j.contains("clip_max") && !j.at("clip_max").is_null()) {
            m.clip_max = j.at("clip_max").get<double>();
        }
        const auto& lj = j.at("training_log");
        for (const auto& e : lj.at("epochs")) {
            m.log.epochs.push_back(
                {e.at("epoch").get<std::size_t>(), e.at("train_loss").get<double>(), e.at("val_loss").get<double>()});
        }
        m.log.best_epoch = lj.value("best_epoch", std::size_t{0});
        m.log.best_val_loss = lj.value("best_val_loss", 0.0);
        m.log.stopped_early = lj.value("stopped_early", false);
        require(m.net.inputs() == m.layout.width() &&
                    m.net.outputs() == m.task.forecast_horizon * m.task.quantiles.size(),
                ErrorCode::ShapeMismatch, "model network does not match its layout");
        return m;
    }
};

namespace detail {

inline features::ColumnScale fit_scale(std::span<const double> values) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (double v : values) {
        if (std::isfinite(v)) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    if (!std::isfinite(lo)) {
        return {0.0, 0.0, true};
    }
    return lo < hi ? features::ColumnScale{lo, hi, false} : features::ColumnScale{lo, lo, true};
}

inline std::map<std::string, features::ColumnScale> static_scales(const FeatureFrame& frame) {
    std::map<std::string, features::ColumnScale> out;
    for (const StaticField& s : frame.statics()) {
        if (s.tag.is_real()) {
            out[s.name] = {s.value, s.value, true};
        }
    }
    return out;
}

inline std::optional<double> rating_of(const FeatureFrame& frame) {
    if (frame.has_static("array_rating")) {
        return frame.static_field("array_rating").value;
    }
    return std::nullopt;
}

} // namespace detail

/// Trains a quantile network on windows from `train`, early-stopping on the
/// pinball loss of windows from `val`. Features are scaled with `fit_rows` of
/// the training frame (all rows when empty) and the target with the
/// training windows' target rows. The parameters of the best validation
/// epoch are kept.
inline QuantileModel train_qnet(const WindowSource& train, const WindowSource& val, const ForecastTask& task,
                                const TrainConfig& cfg, std::span<const std::size_t> fit_rows = {}) {
    task.validate();
    cfg.validate();
    require(train.frame && val.frame, ErrorCode::InvalidArgument, "window sources need frames");
    require(!train.origins.empty(), ErrorCode::NoWindows, "no complete training windows");
    require(!val.origins.empty(), ErrorCode::NoWindows, "no complete validation windows");

    const FeatureFrame train_frame = features::retag_meteorology(*train.frame, task.mode);
    const FeatureFrame val_frame = features::retag_meteorology(*val.frame, task.mode);

    QuantileModel model;
    model.task = task;
    model.config = cfg;
    model.layout = InputLayout::from_frame(train_frame, task);
    if (fit_rows.empty()) {
        model.normalization = features::fit_normalizer(train_frame, features::DegeneratePolicy::Flag);
    } else {
        model.normalization = features::fit_normalizer(train_frame.select_rows(fit_rows), features::DegeneratePolicy::Flag);
    }
    model.static_scales = detail::static_scales(train_frame);
    model.clip_max = detail::rating_of(train_frame);

    std::vector<double> target_rows;
    for (std::size_t o : train.origins) {
        for (std::size_t i = 0; i < task.forecast_horizon; ++i) {
            target_rows.push_back(train.target[o + i]);
        }
    }
    model.target_scale = detail::fit_scale(target_rows);

    const std::size_t T = task.forecast_horizon;
    const std::size_t Q = task.quantiles.size();
    const WindowEncoder train_enc(train_frame, model.layout, model.normalization, model.static_scales);
    const WindowEncoder val_enc(val_frame, model.layout, model.normalization, model.static_scales);
    const Matrix xt = train_enc.encode_all(train.origins);
    const Matrix yt = encode_targets(train.target, train.origins, T, Q, model.target_scale);
    const Matrix xv = val_enc.encode_all(val.origins);
    const Matrix yv = encode_targets(val.target, val.origins, T, Q, model.target_scale);

    Rng init_rng(derive_seed(cfg.seed, 0));
    Rng batch_rng(derive_seed(cfg.seed, 1));
    model.net = Mlp(model.layout.width(), cfg.hidden, T * Q, init_rng);
    Adam adam(model.net, cfg.learning_rate, cfg.weight_decay);

    model.log.train_windows = train.origins.size();
    model.log.val_windows = val.origins.size();
    std::vector<double> best = model.net.parameters();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(xt.cols()));
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = static_cast<Eigen::Index>(i);
    }
    std::size_t since_best = 0;
    Mlp::Gradient grad;
    for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        batch_rng.shuffle(std::span<Eigen::Index>(order));
        double sum = 0.0;
        for (std::size_t b = 0; b < order.size(); b += cfg.batch_size) {
            const std::size_t e = std::min(order.size(), b + cfg.batch_size);
            const std::vector<Eigen::Index> cols(order.begin() + static_cast<std::ptrdiff_t>(b),
                                                 order.begin() + static_cast<std::ptrdiff_t>(e));
            const Matrix xb = xt(Eigen::all, cols);
            const Matrix yb = yt(Eigen::all, cols);
            const double loss = model.net.loss_and_gradient(xb, yb, task.quantiles, grad);
            require(std::isfinite(loss), ErrorCode::DivergedLoss,
                    "training loss became non-finite in epoch " + std::to_string(epoch));
            adam.step(model.net, grad);
            sum += loss * static_cast<double>(e - b);
        }
        const double train_loss = sum / static_cast<double>(order.size());
        const double val_loss = pinball_batch(model.net.forward(xv), yv, task.quantiles);
        require(std::isfinite(val_loss), ErrorCode::DivergedLoss,
                "validation loss became non-finite in epoch " + std::to_string(epoch));
        model.log.epochs.push_back({epoch, train_loss, val_loss});
        if (val_loss < model.log.best_val_loss) {
            model.log.best_val_loss = val_loss;
            model.log.best_epoch = epoch;
            best = model.net.parameters();
            since_best = 0;
        } else if (++since_best >= cfg.patience) {
            model.log.stopped_early = epoch < cfg.max_epochs;
            break;
        }
    }
    model.net.set_parameters(best);
    return model;
}

/// Windows are cut from contiguous stretches of each frame; the target is
/// the frame column named by the task.
inline QuantileModel train_qnet(const FeatureFrame& train, const FeatureFrame& val, const ForecastTask& task,
                                const TrainConfig& cfg) {
    task.validate();
    const auto& ty = train.column(task.target).data;
    const auto& vy = val.column(task.target).data;
    const std::vector<bool> all_t(train.size(), true);
    const std::vector<bool> all_v(val.size(), true);
    const WindowSource ts{&train, ty, window_origins(train, ty, all_t, task)};
    const WindowSource vs{&val, vy, window_origins(val, vy, all_v, task)};
    return train_qnet(ts, vs, task, cfg);
}

/// All T points of one origin in a single pass; the context must contain
/// the input-horizon history and the known features over the forecast rows.
inline ForecastResult predict(const QuantileModel& model, const FeatureFrame& context, std::size_t origin) {
    return model.forecast(context, origin);
}

/// Forecast for the last T rows of the context frame.
inline ForecastResult predict(const QuantileModel& model, const FeatureFrame& context) {
    require(context.size() >= model.task.forecast_horizon, ErrorCode::MissingKnownFeatures,
            "context shorter than the forecast horizon");
    return model.forecast(context, context.size() - model.task.forecast_horizon);
}

inline void save_model(const QuantileModel& model, const std::string& path) {
    csv::write_file(path, model.to_json().dump(1) + "\n");
}

/// Loads a model; a non-empty `expected_recipe_hash` must match the stored one.
inline QuantileModel load_model(const std::string& path, const std::string& expected_recipe_hash = {}) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(csv::read_file(path));
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::ConfigError, "cannot parse model file '" + path + "': " + e.what());
    }
    QuantileModel m = QuantileModel::from_json(j);
    require(expected_recipe_hash.empty() || m.recipe_hash == expected_recipe_hash, ErrorCode::RecipeMismatch,
            "model was trained with feature recipe " + m.recipe_hash + ", frame uses " + expected_recipe_hash);
    return m;
}

} // namespace pvfc::forecast
