#pragma once

#include "pvfc/cli/experiment.hpp"
#include "pvfc/cli/manifest.hpp"
#include "pvfc/core/frame_io.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pvfc::cli {

/// Command-line flags shared by every subcommand. Unset optionals leave the
/// config file (or the defaults) in charge.
struct Options {
    std::string config;
    std::string data;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> jobs;
    std::optional<std::string> method;
    std::optional<std::string> mode;
    std::optional<std::string> aggregate;
    std::optional<std::vector<std::size_t>> periods;
    std::optional<std::vector<std::string>> plants;

    nlohmann::json to_json() const {
        nlohmann::json j{{"config", config}, {"data", data}, {"out", out}};
        auto put = [&](const char* key, const auto& v) {
            if (v) {
                j[key] = *v;
            }
        };
        put("seed", seed);
        put("jobs", jobs);
        put("method", method);
        put("mode", mode);
        put("aggregate", aggregate);
        put("periods", periods);
        put("plants", plants);
        return j;
    }
};

inline void log(const std::string& message) { std::cerr << "[pvfc] " << message << '\n'; }

inline std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::size_t at = 0;
    while (at <= text.size()) {
        const std::size_t comma = std::min(text.find(',', at), text.size());
        std::string item(csv::trim(std::string_view(text).substr(at, comma - at)));
        if (!item.empty()) {
            out.push_back(std::move(item));
        }
        at = comma + 1;
    }
    return out;
}

inline nlohmann::json raw_config(const Options& o) {
    return o.config.empty() ? nlohmann::json::object() : read_json(o.config);
}

/// Config file overlaid with flags: flags > config > defaults.
inline ExperimentConfig effective_config(const Options& o) {
    ExperimentConfig c = ExperimentConfig::from_json(raw_config(o));
    if (!o.data.empty()) {
        c.data_dir = o.data;
        c.synth.reset();
    }
    if (o.seed) {
        c.seed = *o.seed;
    }
    if (o.jobs) {
        c.jobs = *o.jobs;
    }
    if (o.method) {
        c.methods = split_list(*o.method);
    }
    if (o.mode) {
        c.modes = split_list(*o.mode);
    }
    if (o.aggregate) {
        c.aggregates = split_list(*o.aggregate);
    }
    if (o.periods) {
        c.decomposition.periods = *o.periods;
    }
    if (o.plants) {
        c.plants = *o.plants;
    }
    return c;
}

inline void require_out(const Options& o) {
    require(!o.out.empty(), ErrorCode::ConfigError, "--out is required");
}

inline void require_data(const Options& o) {
    require(!o.data.empty(), ErrorCode::ConfigError, "--data is required");
    require(fs::exists(o.data), ErrorCode::IoError, "data path '" + o.data + "' does not exist");
}

inline bool wanted(const ExperimentConfig& c, const std::string& plant) {
    return c.plants.empty() || std::find(c.plants.begin(), c.plants.end(), plant) != c.plants.end();
}

/// Plant subdirectories (those holding `plant.json`), sorted by name.
inline std::vector<fs::path> plant_dirs(const fs::path& root, const ExperimentConfig& c) {
    std::vector<fs::path> dirs;
    for (const auto& e : fs::directory_iterator(root)) {
        if (e.is_directory() && fs::exists(e.path() / "plant.json") && wanted(c, e.path().filename().string())) {
            dirs.push_back(e.path());
        }
    }
    std::sort(dirs.begin(), dirs.end());
    for (const auto& id : c.plants) {
        require(std::any_of(dirs.begin(), dirs.end(), [&](const fs::path& d) { return d.filename() == id; }),
                ErrorCode::MissingColumn, "plant '" + id + "' not found under " + root.string());
    }
    require(!dirs.empty(), ErrorCode::MissingColumn, "no plant directories under " + root.string());
    return dirs;
}

inline ingest::PlantSpec load_plant_spec(const fs::path& dir) {
    return ingest::PlantSpec::from_json(read_json(dir / "plant.json"));
}

// ---------------------------------------------------------------- synth

/// Writes a synthetic raw dataset (ingest layout). Config keys:
/// `data.synth`, `data.synth_plants`, `data.minutes_per_sample`.
inline int cmd_synth(const Options& o) {
    require_out(o);
    const nlohmann::json raw = raw_config(o);
    ExperimentConfig c = ExperimentConfig::from_json(raw);
    if (o.seed) {
        c.seed = *o.seed;
    }
    synth::SynthConfig sc = c.synth.value_or(synth::SynthConfig{});
    sc.seed = derive_seed(c.seed, 2);
    std::size_t minutes = 60;
    if (raw.contains("data")) {
        minutes = raw.at("data").value("minutes_per_sample", minutes);
    }
    auto plants = synth::default_plants(c.synth_plants, sc.array_rating);
    if (o.plants) {
        std::vector<synth::SynthPlant> chosen;
        for (auto& p : plants) {
            if (wanted(effective_config(o), p.spec.plant_id)) {
                chosen.push_back(p);
            }
        }
        plants = std::move(chosen);
    }
    require(!plants.empty(), ErrorCode::ConfigError, "no synthetic plants selected");
    log("generating " + std::to_string(sc.n_days) + " days for " + std::to_string(plants.size()) + " plant(s)");
    const synth::SynthData site = synth::generate(sc);
    synth::write_ingest_files(site, plants, o.out, minutes);

    nlohmann::json weather = nlohmann::json::object();
    for (const auto& [d, w] : site.weather) {
        weather[format_date(d)] = features::weather_name(w);
    }
    csv::write_file(fs::path(o.out) / "weather.json", weather.dump(2) + "\n");

    Manifest m{"synth", {{"options", o.to_json()}, {"synth", sc.to_json()}, {"minutes_per_sample", minutes}}, {}, {}};
    if (!o.config.empty()) {
        m.add_input("config", o.config);
    }
    m.outputs = {"records.csv", "schema.json", "plants.json", "weather.json"};
    m.write(o.out);
    return 0;
}

// ---------------------------------------------------------------- ingest

/// Raw records → one hourly measurement frame per plant.
inline int cmd_ingest(const Options& o) {
    require_data(o);
    require_out(o);
    const ExperimentConfig c = effective_config(o);
    const RawDataset raw = load_raw_dataset(o.data);
    const auto ids = raw.records.plants();
    Manifest m{"ingest", {{"options", o.to_json()}}, {}, {}};
    m.add_input("data", o.data);
    std::size_t written = 0;
    for (const auto& spec : raw.plants) {
        if (!wanted(c, spec.plant_id)) {
            continue;
        }
        require(std::find(ids.begin(), ids.end(), spec.plant_id) != ids.end(), ErrorCode::MissingColumn,
                "plants.json lists '" + spec.plant_id + "' but records.csv has no rows for it");
        log("ingesting " + spec.plant_id);
        const ingest::IngestResult r = ingest::ingest_plant(raw.records.for_plant(spec.plant_id), spec);
        const fs::path dir = fs::path(o.out) / spec.plant_id;
        save_frame(r.frame, dir);
        csv::write_file(dir / "plant.json", spec.to_json().dump(2) + "\n");
        csv::write_file(dir / "ingest_log.json", r.log_json().dump(2) + "\n");
        m.outputs.push_back(spec.plant_id + "/");
        ++written;
    }
    for (const auto& id : c.plants) {
        require(std::any_of(raw.plants.begin(), raw.plants.end(), [&](const auto& p) { return p.plant_id == id; }),
                ErrorCode::MissingColumn, "plant '" + id + "' is not listed in plants.json");
    }
    require(written > 0, ErrorCode::MissingColumn, "no plants ingested");
    m.write(o.out);
    return 0;
}

// ---------------------------------------------------------------- features

/// Measurement frames → feature frames. Config key `recipe` holds a
/// feature recipe.
inline int cmd_features(const Options& o) {
    require_data(o);
    require_out(o);
    const nlohmann::json raw = raw_config(o);
    const ExperimentConfig c = effective_config(o);
    const features::FeatureRecipe recipe =
        raw.contains("recipe") ? features::FeatureRecipe::from_json(raw.at("recipe")) : features::FeatureRecipe{};
    Manifest m{"features", {{"options", o.to_json()}, {"recipe", recipe.to_json()}}, {}, {}};
    m.add_input("data", o.data);
    for (const auto& dir : plant_dirs(o.data, c)) {
        const ingest::PlantSpec spec = load_plant_spec(dir);
        log("building features for " + spec.plant_id);
        const FeatureFrame frame = features::build_from_measurements(load_frame(dir), spec, recipe);
        const fs::path target = fs::path(o.out) / spec.plant_id;
        save_frame(frame, target);
        csv::write_file(target / "plant.json", spec.to_json().dump(2) + "\n");
        csv::write_file(target / "recipe.json", recipe.to_json().dump(2) + "\n");
        m.outputs.push_back(spec.plant_id + "/");
    }
    m.write(o.out);
    return 0;
}

// ---------------------------------------------------------------- decompose

inline void decompose_frame(const fs::path& frame_dir, const fs::path& out, forecast::Strategy strategy,
                            const forecast::DecompositionConfig& dcfg) {
    const FeatureFrame frame = load_frame(frame_dir);
    const auto& power = frame.column(features::names::kPower).data;
    const std::vector<double> y = forecast::fill_missing(power);
    const std::size_t filled = static_cast<std::size_t>(std::count_if(power.begin(), power.end(), is_missing));
    const decomp::DecompositionResult r = forecast::decompose(strategy, y, dcfg);

    std::string table = "timestamp";
    for (const auto& comp : r.components) {
        table += "," + comp.name;
    }
    table += '\n';
    for (std::size_t i = 0; i < frame.size(); ++i) {
        table += format_iso(frame.index()[i]);
        for (const auto& comp : r.components) {
            table += "," + csv::format_number(comp.values[i]);
        }
        table += '\n';
    }
    csv::write_file(out / "components.csv", table);
    nlohmann::json meta = r.metadata(y);
    meta["filled_missing"] = filled;
    meta["column"] = features::names::kPower;
    csv::write_file(out / "decomposition.json", meta.dump(2) + "\n");
}

/// Power column of a frame (or of every plant frame below a root) →
/// components CSV plus metadata.
inline int cmd_decompose(const Options& o) {
    require_data(o);
    require_out(o);
    const ExperimentConfig c = effective_config(o);
    const std::string method = o.method ? *o.method : "mstl";
    const forecast::Strategy strategy = forecast::parse_strategy(method);
    require(strategy != forecast::Strategy::Raw, ErrorCode::ConfigError, "'raw' is not a decomposition");
    const forecast::DecompositionConfig dcfg = decomposition_config(c);
    Manifest m{"decompose", {{"options", o.to_json()}, {"method", method}, {"decomposition", dcfg.to_json()}}, {}, {}};
    m.add_input("data", o.data);
    if (fs::exists(fs::path(o.data) / "meta.json")) {
        log("decomposing " + o.data + " with " + method);
        decompose_frame(o.data, o.out, strategy, dcfg);
        m.outputs = {"components.csv", "decomposition.json"};
    } else {
        for (const auto& dir : plant_dirs(o.data, c)) {
            const std::string id = dir.filename().string();
            log("decomposing " + id + " with " + method);
            decompose_frame(dir, fs::path(o.out) / id, strategy, dcfg);
            m.outputs.push_back(id + "/");
        }
    }
    m.write(o.out);
    return 0;
}

// ---------------------------------------------------------------- train

struct PlantRoles {
    FeatureFrame frame;
    forecast::DatasetRoles roles;
    SplitResult split;
};

inline PlantRoles plant_roles(const fs::path& dir, const ExperimentConfig& c) {
    FeatureFrame frame = load_frame(dir);
    SplitResult parts = split(frame, detail::split_spec(c, frame));
    forecast::DatasetRoles roles = forecast::assign_roles(frame, parts, c.task);
    return {std::move(frame), std::move(roles), std::move(parts)};
}

inline std::string recipe_hash_of(const fs::path& dir) {
    return fs::exists(dir / "recipe.json") ? features::FeatureRecipe::from_json(read_json(dir / "recipe.json")).hash()
                                           : std::string();
}

/// Feature frames → one strategy model per plant for a single method and
/// meteorology mode.
inline int cmd_train(const Options& o) {
    require_data(o);
    require_out(o);
    ExperimentConfig c = effective_config(o);
    c.data_dir.clear();
    require(c.methods.size() == 1 && c.modes.size() == 1, ErrorCode::ConfigError,
            "train needs exactly one method and one mode (use --method and --mode)");
    forecast::parse_strategy(c.methods.front());
    features::parse_mode(c.modes.front());
    c.task.validate();
    c.train.validate();

    nlohmann::json config = c.to_json();
    config["features"] = fs::absolute(o.data).lexically_normal().string();
    Manifest m{"train", {{"options", o.to_json()}, {"experiment", config}}, {}, {}};
    m.add_input("data", o.data);
    for (const auto& dir : plant_dirs(o.data, c)) {
        const std::string id = dir.filename().string();
        log("training " + c.methods.front() + "/" + c.modes.front() + " for " + id);
        const PlantRoles p = plant_roles(dir, c);
        forecast::StrategyModel model =
            fit_cell(c, p.frame, p.roles, id, c.methods.front(), c.modes.front(), c.jobs);
        const std::string hash = recipe_hash_of(dir);
        for (auto& qm : model.models) {
            qm.recipe_hash = hash;
        }
        const fs::path target = fs::path(o.out) / id;
        csv::write_file(target / "model.json", model.to_json().dump() + "\n");
        csv::write_file(target / "plant.json", load_plant_spec(dir).to_json().dump(2) + "\n");
        nlohmann::json days{{"train", nlohmann::json::array()}, {"val", nlohmann::json::array()},
                            {"test", nlohmann::json::array()}};
        for (const auto& d : p.split.train_days) {
            days["train"].push_back(format_date(d));
        }
        for (const auto& d : p.split.val_days) {
            days["val"].push_back(format_date(d));
        }
        for (const auto& d : p.split.test_days) {
            days["test"].push_back(format_date(d));
        }
        nlohmann::json logs = nlohmann::json::array();
        for (std::size_t k = 0; k < model.models.size(); ++k) {
            const auto& lg = model.models[k].log;
            nlohmann::json epochs = nlohmann::json::array();
            for (const auto& e : lg.epochs) {
                epochs.push_back({{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"val_loss", e.val_loss}});
            }
            logs.push_back({{"component", model.component_names[k]},
                            {"best_epoch", lg.best_epoch},
                            {"best_val_loss", lg.best_val_loss},
                            {"stopped_early", lg.stopped_early},
                            {"train_windows", lg.train_windows},
                            {"val_windows", lg.val_windows},
                            {"epochs", epochs}});
        }
        csv::write_file(target / "split.json", days.dump(2) + "\n");
        csv::write_file(target / "training_log.json", logs.dump(2) + "\n");
        m.outputs.push_back(id + "/");
    }
    m.write(o.out);
    return 0;
}

// ---------------------------------------------------------------- predict

inline std::string forecast_header(const std::vector<double>& quantiles) {
    std::string h = "plant,method,mode,origin,timestamp,utc_offset_minutes,y,weather";
    for (double q : quantiles) {
        h += ",q" + csv::format_number(q);
    }
    return h + "\n";
}

/// Trained models → quantile forecasts for every test day. The features
/// come from the training manifest unless the config names `features`.
inline int cmd_predict(const Options& o) {
    require_data(o);
    require_out(o);
    const nlohmann::json train_manifest = read_json(fs::path(o.data) / "manifest.json");
    require(train_manifest.value("command", "") == "train", ErrorCode::ConfigError,
            "--data must point at the output of 'train'");
    nlohmann::json exp = train_manifest.at("config").at("experiment");
    ExperimentConfig c = ExperimentConfig::from_json(exp);
    const nlohmann::json raw = raw_config(o);
    const fs::path features_root = raw.value("features", exp.at("features").get<std::string>());
    if (o.plants) {
        c.plants = *o.plants;
    }
    const std::string method = c.methods.front();
    const std::string mode = c.modes.front();

    Manifest m{"predict", {{"options", o.to_json()}, {"features", features_root.string()}}, {}, {}};
    m.add_input("models", o.data);
    m.add_input("features", features_root);
    std::string out = forecast_header(c.task.quantiles);
    for (const auto& dir : plant_dirs(o.data, c)) {
        const std::string id = dir.filename().string();
        const fs::path fdir = features_root / id;
        const forecast::StrategyModel model = forecast::StrategyModel::from_json(read_json(dir / "model.json"));
        const std::string hash = recipe_hash_of(fdir);
        for (const auto& qm : model.models) {
            require(qm.recipe_hash.empty() || hash.empty() || qm.recipe_hash == hash, ErrorCode::RecipeMismatch,
                    "model for " + id + " was trained with feature recipe " + qm.recipe_hash + ", frame uses " + hash);
        }
        log("forecasting " + id);
        const PlantRoles p = plant_roles(fdir, c);
        const auto fc = model.forecast_many(p.frame, p.roles.test_origins);
        const auto& truth = p.frame.column(features::names::kPower).data;
        const Column& weather = p.frame.column(features::names::kWeather);
        for (std::size_t k = 0; k < fc.size(); ++k) {
            const std::size_t origin = p.roles.test_origins[k];
            const std::string origin_text = format_iso(p.frame.index()[origin]);
            for (std::size_t i = 0; i < fc[k].horizon(); ++i) {
                const double w = weather.data[origin + i];
                out += id + "," + method + "," + mode + "," + origin_text + "," + format_iso(fc[k].timestamps[i]) + "," +
                       std::to_string(p.frame.utc_offset_minutes()) + "," + csv::format_number(truth[origin + i]) + "," +
                       (is_missing(w) ? std::string() : weather.vocabulary.at(static_cast<std::size_t>(w)));
                for (const auto& track : fc[k].values) {
                    out += "," + csv::format_number(track[i]);
                }
                out += '\n';
            }
        }
    }
    csv::write_file(fs::path(o.out) / "forecasts.csv", out);
    m.outputs = {"forecasts.csv"};
    m.write(o.out);
    return 0;
}

// ---------------------------------------------------------------- evaluate

struct ForecastRows {
    std::vector<Timestamp> timestamps;
    std::vector<double> y;
    std::vector<double> yhat;
    int offset = 0;
    std::map<LocalDate, features::WeatherType> labels;
};

/// Reads every `forecasts.csv` below `root`, grouped by (plant, method, mode)
/// in order of first appearance.
inline std::vector<std::pair<std::array<std::string, 3>, ForecastRows>> read_forecasts(const fs::path& root) {
    std::vector<fs::path> files;
    if (fs::is_regular_file(root)) {
        files.push_back(root);
    } else {
        for (const auto& e : fs::recursive_directory_iterator(root)) {
            if (e.is_regular_file() && e.path().filename() == "forecasts.csv") {
                files.push_back(e.path());
            }
        }
    }
    std::sort(files.begin(), files.end());
    require(!files.empty(), ErrorCode::MissingColumn, "no forecasts.csv under " + root.string());
    std::vector<std::pair<std::array<std::string, 3>, ForecastRows>> groups;
    for (const auto& f : files) {
        const auto lines = csv::read_lines(f);
        require(!lines.empty(), ErrorCode::IoError, f.string() + " is empty");
        const auto header = csv::split_record(lines.front());
        const auto col = [&](const std::string& name) {
            const auto it = std::find(header.begin(), header.end(), name);
            require(it != header.end(), ErrorCode::MissingColumn, f.string() + " lacks column '" + name + "'");
            return static_cast<std::size_t>(it - header.begin());
        };
        const std::size_t c_plant = col("plant"), c_method = col("method"), c_mode = col("mode"),
                          c_ts = col("timestamp"), c_off = col("utc_offset_minutes"), c_y = col("y"),
                          c_w = col("weather"), c_med = col("q0.5");
        for (std::size_t i = 1; i < lines.size(); ++i) {
            if (lines[i].empty()) {
                continue;
            }
            const auto rec = csv::split_record(lines[i]);
            require(rec.size() == header.size(), ErrorCode::ShapeMismatch,
                    f.string() + ": row " + std::to_string(i + 1) + " has the wrong field count");
            const std::array<std::string, 3> key{rec[c_plant], rec[c_method], rec[c_mode]};
            auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) { return g.first == key; });
            if (it == groups.end()) {
                groups.push_back({key, {}});
                it = std::prev(groups.end());
            }
            ForecastRows& g = it->second;
            const auto y = csv::parse_number(rec[c_y]);
            const auto yhat = csv::parse_number(rec[c_med]);
            const auto off = csv::parse_number(rec[c_off]);
            require(yhat.has_value() && off.has_value(), ErrorCode::ShapeMismatch,
                    f.string() + ": row " + std::to_string(i + 1) + " lacks a median or offset");
            g.offset = static_cast<int>(*off);
            const Timestamp t = parse_timestamp(rec[c_ts]);
            if (!rec[c_w].empty()) {
                g.labels[local_date(t, g.offset)] = features::parse_weather(rec[c_w]);
            }
            if (!y || is_missing(*y)) {
                continue;
            }
            g.timestamps.push_back(t);
            g.y.push_back(*y);
            g.yhat.push_back(*yhat);
        }
    }
    return groups;
}

inline std::vector<std::string> unique_in_order(const std::vector<std::string>& v) {
    std::vector<std::string> out;
    for (const auto& s : v) {
        if (std::find(out.begin(), out.end(), s) == out.end()) {
            out.push_back(s);
        }
    }
    return out;
}

/// Forecast files → cross-tabulated report. `--aggregate indiv` adds the
/// Site-Indiv row; Site-Sum rows are scored as ordinary plants.
inline int cmd_evaluate(const Options& o) {
    require_data(o);
    require_out(o);
    const ExperimentConfig c = effective_config(o);
    const auto groups = read_forecasts(o.data);
    std::vector<std::string> plants, methods, modes;
    for (const auto& [key, rows] : groups) {
        if (wanted(c, key[0]) || key[0] == "Site-Sum") {
            plants.push_back(key[0]);
        }
        methods.push_back(key[1]);
        modes.push_back(key[2]);
    }
    eval::GridSpec grid{unique_in_order(plants), unique_in_order(methods), unique_in_order(modes)};
    std::vector<eval::GridCell> cells;
    std::map<std::pair<std::string, std::string>, std::vector<eval::EvaluationInput>> by_method_mode;
    std::map<LocalDate, features::WeatherType> site_labels;
    for (const auto& [key, rows] : groups) {
        if (std::find(grid.plants.begin(), grid.plants.end(), key[0]) == grid.plants.end()) {
            continue;
        }
        eval::EvaluationInput in = eval::EvaluationInput::make(rows.y, rows.yhat, rows.timestamps, key[0], rows.offset);
        cells.push_back({key[0], key[1], key[2], eval::evaluate_by_weather(in, rows.labels)});
        if (key[0].rfind("Site-", 0) != 0) {
            by_method_mode[{key[1], key[2]}].push_back(std::move(in));
            if (site_labels.empty()) {
                site_labels = rows.labels;
            }
        }
    }
    for (const auto& a : c.aggregates) {
        if (eval::parse_aggregate(a) == eval::Aggregate::Sum) {
            require(std::find(grid.plants.begin(), grid.plants.end(), "Site-Sum") != grid.plants.end(),
                    ErrorCode::ConfigError, "Site-Sum needs forecasts of a model trained on the summed site series");
            continue;
        }
        grid.plants.push_back("Site-Indiv");
        for (const auto& [mm, inputs] : by_method_mode) {
            require(inputs.size() >= 2, ErrorCode::ConfigError, "Site-Indiv needs at least two plants");
            const auto site = eval::site_aggregate(inputs, eval::Aggregate::Indiv);
            cells.push_back({"Site-Indiv", mm.first, mm.second, eval::evaluate_by_weather(site, site_labels)});
        }
    }
    log("scoring " + std::to_string(cells.size()) + " grid cells");
    const eval::EvaluationReport report = eval::compare_methods(cells, grid);
    const fs::path out = o.out;
    csv::write_file(out / "report.csv", report.to_csv());
    csv::write_file(out / "report.json", report.to_json().dump(2) + "\n");
    csv::write_file(out / "plot.csv", report.plot_csv());
    csv::write_file(out / "tables.md", report.to_tables());
    Manifest m{"evaluate", {{"options", o.to_json()}, {"aggregates", c.aggregates}}, {}, {}};
    m.add_input("data", o.data);
    m.outputs = {"report.csv", "report.json", "plot.csv", "tables.md"};
    m.write(out);
    return 0;
}

// ---------------------------------------------------------------- experiment

/// Full grid from raw data (or the synthetic generator) to reports.
inline int cmd_experiment(const Options& o) {
    require_out(o);
    ExperimentConfig c = effective_config(o);
    if (!c.synth && c.data_dir.empty()) {
        c.synth = synth::SynthConfig{};
    }
    log("running " + std::to_string(c.methods.size()) + " method(s) x " + std::to_string(c.modes.size()) +
        " mode(s) with " + std::to_string(c.jobs) + " worker(s)");
    const ExperimentResult r = run_experiment(c);
    write_experiment(r, o.out);
    csv::write_file(fs::path(o.out) / "config.json", c.to_json().dump(2) + "\n");
    Manifest m{"experiment", {{"options", o.to_json()}, {"experiment", c.to_json()}}, {}, {}};
    if (!o.config.empty()) {
        m.add_input("config", o.config);
    }
    if (!c.data_dir.empty()) {
        m.add_input("data", c.data_dir);
    }
    m.outputs = {"report.csv", "report.json", "plot.csv", "tables.md", "summary.json", "point_forecasts.csv", "config.json"};
    m.write(o.out);
    return 0;
}

} // namespace pvfc::cli
