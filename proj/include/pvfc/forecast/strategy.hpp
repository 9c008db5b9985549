#pragma once

#include "pvfc/core/error.hpp"
#include "pvfc/core/feature_frame.hpp"
#include "pvfc/core/parallel.hpp"
#include "pvfc/core/random.hpp"
#include "pvfc/core/split.hpp"
#include "pvfc/core/time.hpp"
#include "pvfc/decomp/emd.hpp"
#include "pvfc/decomp/mstl.hpp"
#include "pvfc/decomp/stl.hpp"
#include "pvfc/decomp/vmd.hpp"
#include "pvfc/forecast/qnet.hpp"
#include "pvfc/forecast/task.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <limits>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace pvfc::forecast {

enum class Strategy { Raw, STL, MSTL, EMD, EEMD, VMD, VmdEemd };

inline std::string_view strategy_name(Strategy s) {
    switch (s) {
    case Strategy::Raw: return "raw";
    case Strategy::STL: return "stl";
    case Strategy::MSTL: return "mstl";
    case Strategy::EMD: return "emd";
    case Strategy::EEMD: return "eemd";
    case Strategy::VMD: return "vmd";
    case Strategy::VmdEemd: return "vmd-eemd";
    }
    return "unknown";
}

inline Strategy parse_strategy(std::string_view s) {
    for (Strategy x : {Strategy::Raw, Strategy::STL, Strategy::MSTL, Strategy::EMD, Strategy::EEMD, Strategy::VMD,
                       Strategy::VmdEemd}) {
        if (strategy_name(x) == s) {
            return x;
        }
    }
    fail(ErrorCode::ConfigError, "unknown method '" + std::string(s) + "'");
}

/// Settings for every decomposition a strategy may use.
struct DecompositionConfig {
    std::vector<std::size_t> periods{24};
    std::size_t seasonal_window = 25;
    bool robust = false;
    std::size_t mstl_iterations = 2;
    decomp::EmdParams emd;
    decomp::EemdParams eemd;
    decomp::VmdParams vmd;

    nlohmann::json to_json() const {
        return {{"periods", periods},
                {"seasonal_window", seasonal_window},
                {"robust", robust},
                {"mstl_iterations", mstl_iterations},
                {"emd", {{"max_imfs", emd.max_imfs}, {"s_number", emd.s_number}, {"max_sifts", emd.max_sifts}}},
                {"eemd",
                 {{"ensemble_size", eemd.ensemble_size},
                  {"noise_std", eemd.noise_std},
                  {"max_imfs", eemd.max_imfs},
                  {"s_number", eemd.s_number},
                  {"max_sifts", eemd.max_sifts},
                  {"seed", eemd.seed}}},
                {"vmd", vmd.to_json()}};
    }

    static DecompositionConfig from_json(const nlohmann::json& j) {
        DecompositionConfig c;
        c.periods = j.value("periods", c.periods);
        c.seasonal_window = j.value("seasonal_window", c.seasonal_window);
        c.robust = j.value("robust", c.robust);
        c.mstl_iterations = j.value("mstl_iterations", c.mstl_iterations);
        if (j.contains("emd")) {
            const auto& e = j.at("emd");
            c.emd.max_imfs = e.value("max_imfs", c.emd.max_imfs);
            c.emd.s_number = e.value("s_number", c.emd.s_number);
            c.emd.max_sifts = e.value("max_sifts", c.emd.max_sifts);
        }
        if (j.contains("eemd")) {
            const auto& e = j.at("eemd");
            c.eemd.ensemble_size = e.value("ensemble_size", c.eemd.ensemble_size);
            c.eemd.noise_std = e.value("noise_std", c.eemd.noise_std);
            c.eemd.max_imfs = e.value("max_imfs", c.eemd.max_imfs);
            c.eemd.s_number = e.value("s_number", c.eemd.s_number);
            c.eemd.max_sifts = e.value("max_sifts", c.eemd.max_sifts);
            c.eemd.seed = e.value("seed", c.eemd.seed);
        }
        if (j.contains("vmd")) {
            const auto& v = j.at("vmd");
            c.vmd.modes = v.value("K", c.vmd.modes);
            c.vmd.alpha = v.value("alpha", c.vmd.alpha);
            c.vmd.tau = v.value("tau", c.vmd.tau);
            c.vmd.tol = v.value("tol", c.vmd.tol);
            c.vmd.max_iterations = v.value("max_iterations", c.vmd.max_iterations);
        }
        return c;
    }
};

/// Decomposes `y` with the method behind `s` (not Raw).
inline decomp::DecompositionResult decompose(Strategy s, std::span<const double> y, const DecompositionConfig& cfg) {
    switch (s) {
    case Strategy::STL: {
        require(cfg.periods.size() == 1, ErrorCode::ConfigError, "STL takes exactly one period");
        decomp::StlParams p = decomp::StlParams::defaults(cfg.periods.front(), cfg.robust);
        p.seasonal_window = cfg.seasonal_window;
        p.trend_window = 0;
        return decomp::stl(y, p);
    }
    case Strategy::MSTL: {
        decomp::MstlOptions o;
        o.periods = cfg.periods;
        o.iterations = cfg.mstl_iterations;
        o.robust = cfg.robust;
        for (std::size_t p : cfg.periods) {
            decomp::StlParams sp = decomp::StlParams::defaults(p, cfg.robust);
            sp.seasonal_window = cfg.seasonal_window;
            sp.trend_window = 0;
            o.params.push_back(sp.resolved());
        }
        return decomp::mstl(y, o);
    }
    case Strategy::EMD: return decomp::emd(y, cfg.emd);
    case Strategy::EEMD: return decomp::eemd(y, cfg.eemd);
    case Strategy::VMD: return decomp::vmd(y, cfg.vmd);
    case Strategy::VmdEemd: return decomp::vmd_then_eemd(y, cfg.vmd, cfg.eemd);
    case Strategy::Raw: break;
    }
    fail(ErrorCode::InvalidArgument, "raw strategy has no decomposition");
}

/// Linear interpolation over missing values; leading and trailing gaps hold
/// the nearest present value, an all-missing series becomes zeros.
inline std::vector<double> fill_missing(std::span<const double> y) {
    std::vector<double> out(y.begin(), y.end());
    std::size_t prev = out.size();
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (is_missing(out[i])) {
            continue;
        }
        if (prev == out.size()) {
            for (std::size_t k = 0; k < i; ++k) {
                out[k] = out[i];
            }
        } else {
            for (std::size_t k = prev + 1; k < i; ++k) {
                const double f = static_cast<double>(k - prev) / static_cast<double>(i - prev);
                out[k] = out[prev] + f * (out[i] - out[prev]);
            }
        }
        prev = i;
    }
    if (prev == out.size()) {
        std::fill(out.begin(), out.end(), 0.0);
    } else {
        for (std::size_t k = prev + 1; k < out.size(); ++k) {
            out[k] = out[prev];
        }
    }
    return out;
}

/// Row roles of one contiguous frame under a day split.
struct DatasetRoles {
    std::vector<bool> train_rows;
    std::vector<bool> val_rows;
    std::vector<std::size_t> fit_rows;     // training-day rows, for feature scaling
    std::vector<std::size_t> test_origins; // local midnights of test days
    std::size_t decomposition_end = 0;     // rows [0, end) precede the first test day
};

inline DatasetRoles assign_roles(const FeatureFrame& frame, const SplitResult& split, const ForecastTask& task) {
    require(frame.is_contiguous(), ErrorCode::Misaligned, "experiment frames must be contiguous");
    const std::set<LocalDate> train(split.train_days.begin(), split.train_days.end());
    const std::set<LocalDate> val(split.val_days.begin(), split.val_days.end());
    const std::set<LocalDate> test(split.test_days.begin(), split.test_days.end());
    const int offset = frame.utc_offset_minutes();
    DatasetRoles roles;
    const std::size_t n = frame.size();
    roles.train_rows.assign(n, false);
    roles.val_rows.assign(n, false);
    roles.decomposition_end = n;
    for (std::size_t r = 0; r < n; ++r) {
        const Timestamp t = frame.index()[r];
        const LocalDate d = local_date(t, offset);
        if (train.contains(d)) {
            roles.train_rows[r] = true;
            roles.fit_rows.push_back(r);
        } else if (val.contains(d)) {
            roles.val_rows[r] = true;
        } else if (test.contains(d)) {
            roles.decomposition_end = std::min(roles.decomposition_end, r);
            const CivilTime c = to_civil(t, offset);
            if (c.hour == 0 && c.minute == 0 && c.second == 0 && r >= task.input_horizon &&
                r + task.forecast_horizon <= n) {
                roles.test_origins.push_back(r);
            }
        }
    }
    return roles;
}

/// Per-origin output of a decomposition strategy: component forecasts, their
/// plain sum, and the emitted forecast (sum clipped to [0, rating], zero
/// while the sun is below the horizon).
struct StrategyForecast {
    std::vector<ForecastResult> components;
    ForecastResult sum;
    ForecastResult result;
};

/// One quantile network per component target, all sharing the frame's
/// features; Raw is a single network on the target column.
class StrategyModel final : public Forecaster {
public:
    Strategy strategy = Strategy::Raw;
    std::vector<std::string> component_names;
    std::vector<QuantileModel> models;
    std::optional<double> clip_max;
    nlohmann::json decomposition = nlohmann::json::object();

    std::string name() const override { return std::string(strategy_name(strategy)); }

    ForecastResult forecast(const FeatureFrame& context, std::size_t origin) const override {
        const std::size_t o[1] = {origin};
        return forecast_detailed(context, o).front().result;
    }

    std::vector<ForecastResult> forecast_many(const FeatureFrame& context,
                                              std::span<const std::size_t> origins) const override {
        std::vector<ForecastResult> out;
        for (auto& f : forecast_detailed(context, origins)) {
            out.push_back(std::move(f.result));
        }
        return out;
    }

    std::vector<StrategyForecast> forecast_detailed(const FeatureFrame& context,
                                                    std::span<const std::size_t> origins) const {
        require(!models.empty(), ErrorCode::InvalidArgument, "strategy model has no component models");
        std::vector<std::vector<ForecastResult>> per_model;
        for (const QuantileModel& m : models) {
            per_model.push_back(m.forecast_many(context, origins));
        }
        const Column* zenith =
            context.has_column(features::names::kZenith) ? &context.column(features::names::kZenith) : nullptr;
        std::vector<StrategyForecast> out(origins.size());
        for (std::size_t c = 0; c < origins.size(); ++c) {
            StrategyForecast& f = out[c];
            for (auto& pm : per_model) {
                f.components.push_back(std::move(pm[c]));
            }
            f.sum = f.components.front();
            for (std::size_t k = 1; k < f.components.size(); ++k) {
                for (std::size_t q = 0; q < f.sum.values.size(); ++q) {
                    for (std::size_t i = 0; i < f.sum.horizon(); ++i) {
                        f.sum.values[q][i] += f.components[k].values[q][i];
                    }
                }
            }
            f.result = f.sum;
            f.result.enforce_monotone();
            f.result.clip(0.0, clip_max.value_or(std::numeric_limits<double>::infinity()));
            if (zenith) {
                for (std::size_t i = 0; i < f.result.horizon(); ++i) {
                    if (zenith->data[origins[c] + i] > 90.0) {
                        for (auto& track : f.result.values) {
                            track[i] = 0.0;
                        }
                    }
                }
            }
        }
        return out;
    }

    nlohmann::json to_json() const {
        nlohmann::json ms = nlohmann::json::array();
        for (const auto& m : models) {
            ms.push_back(m.to_json());
        }
        nlohmann::json j{{"format", "pvfc-strategy"},
                         {"version", 1},
                         {"strategy", strategy_name(strategy)},
                         {"components", component_names},
                         {"decomposition", decomposition},
                         {"models", ms}};
        j["clip_max"] = clip_max ? nlohmann::json(*clip_max) : nlohmann::json(nullptr);
        return j;
    }

    static StrategyModel from_json(const nlohmann::json& j) {
        require(j.value("format", "") == "pvfc-strategy", ErrorCode::ConfigError, "not a strategy model file");
        StrategyModel m;
        m.strategy = parse_strategy(j.at("strategy").get<std::string>());
        m.component_names = j.at("components").get<std::vector<std::string>>();
        m.decomposition = j.value("decomposition", nlohmann::json::object());
        for (const auto& mj : j.at("models")) {
            m.models.push_back(QuantileModel::from_json(mj));
        }
        if (j.contains("clip_max") && !j.at("clip_max").is_null()) {
            m.clip_max = j.at("clip_max").get<double>();
        }
        require(m.models.size() == m.component_names.size(), ErrorCode::ShapeMismatch,
                "component names and models disagree");
        return m;
    }
};

/// Decomposes the target over the rows before the first test day, trains one
/// network per component on training-day windows (early stopping on
/// validation-day windows) and recomposes by summation. Component models are
/// unclipped; the sum is clipped to [0, rating].
inline StrategyModel fit_strategy(const FeatureFrame& frame, const DatasetRoles& roles, Strategy strategy,
                                  const DecompositionConfig& dcfg, const ForecastTask& task, const TrainConfig& cfg,
                                  std::size_t jobs = 1) {
    task.validate();
    const std::vector<double>& y = frame.column(task.target).data;
    StrategyModel model;
    model.strategy = strategy;
    model.clip_max = detail::rating_of(frame);

    std::vector<std::vector<double>> targets;
    if (strategy == Strategy::Raw) {
        model.component_names.push_back(task.target);
        targets.push_back(y);
    } else {
        require(roles.decomposition_end > 0, ErrorCode::SpanTooShort, "no rows before the test period");
        const std::vector<double> prefix =
            fill_missing(std::span<const double>(y.data(), roles.decomposition_end));
        const decomp::DecompositionResult d = decompose(strategy, prefix, dcfg);
        model.decomposition = d.metadata(prefix);
        for (const auto& c : d.components) {
            std::vector<double> t(frame.size(), kMissing);
            std::copy(c.values.begin(), c.values.end(), t.begin());
            model.component_names.push_back(c.name);
            targets.push_back(std::move(t));
        }
    }

    model.models.resize(targets.size());
    parallel_for(targets.size(), jobs, [&](std::size_t k) {
        TrainConfig c = cfg;
        if (strategy != Strategy::Raw) {
            c.seed = derive_seed(cfg.seed, k + 1);
        }
        const WindowSource train{&frame, targets[k], window_origins(frame, targets[k], roles.train_rows, task)};
        const WindowSource val{&frame, targets[k], window_origins(frame, targets[k], roles.val_rows, task)};
        QuantileModel m = train_qnet(train, val, task, c, roles.fit_rows);
        m.clip = strategy == Strategy::Raw;
        model.models[k] = std::move(m);
    });
    return model;
}

} // namespace pvfc::forecast
