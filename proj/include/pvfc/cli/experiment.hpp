#pragma once

#include "pvfc/core/csv.hpp"
#include "pvfc/core/error.hpp"
#include "pvfc/core/feature_frame.hpp"
#include "pvfc/core/parallel.hpp"
#include "pvfc/core/random.hpp"
#include "pvfc/core/split.hpp"
#include "pvfc/core/time.hpp"
#include "pvfc/eval/metrics.hpp"
#include "pvfc/eval/report.hpp"
#include "pvfc/features/build_frame.hpp"
#include "pvfc/features/weather.hpp"
#include "pvfc/forecast/strategy.hpp"
#include "pvfc/ingest/pipeline.hpp"
#include "pvfc/ingest/records.hpp"
#include "pvfc/synth/generator.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pvfc::cli {

namespace fs = std::filesystem;

/// Raw data directory layout shared by `ingest` and `experiment`:
/// `records.csv`, `schema.json` and `plants.json`.
struct RawDataset {
    ingest::RawRecordSet records;
    std::vector<ingest::PlantSpec> plants;
};

inline RawDataset load_raw_dataset(const fs::path& dir) {
    require(fs::is_directory(dir), ErrorCode::IoError, "data directory '" + dir.string() + "' does not exist");
    const fs::path schema_path = dir / "schema.json";
    const ingest::CsvSchema schema = fs::exists(schema_path) ? ingest::CsvSchema::load(schema_path) : ingest::CsvSchema{};
    RawDataset out;
    out.records = ingest::parse_csv(dir / "records.csv", schema);
    const fs::path plants_path = dir / "plants.json";
    require(fs::exists(plants_path), ErrorCode::MissingColumn, "data directory lacks plants.json");
    nlohmann::json pj;
    try {
        pj = nlohmann::json::parse(csv::read_file(plants_path));
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::ConfigError, "cannot parse plants.json: " + std::string(e.what()));
    }
    for (const auto& p : pj) {
        out.plants.push_back(ingest::PlantSpec::from_json(p));
    }
    return out;
}

struct PlantData {
    ingest::PlantSpec spec;
    FeatureFrame measurements; // hourly ingest output
};

/// Training defaults for a few months of hourly data: one window per day
/// leaves under a hundred training windows, so batches are small and
/// weights decay.
inline forecast::TrainConfig desk_train_config() {
    forecast::TrainConfig c;
    c.batch_size = 8;
    c.weight_decay = 1.0;
    c.patience = 20;
    return c;
}

/// Grid, data and training settings of one experiment.
struct ExperimentConfig {
    std::optional<synth::SynthConfig> synth;
    std::size_t synth_plants = 1;
    std::string data_dir;
    std::vector<std::string> plants;
    std::vector<std::string> methods{"raw", "mstl"};
    std::vector<std::string> modes{"available", "unavailable"};
    std::vector<std::string> aggregates;
    forecast::ForecastTask task;
    forecast::TrainConfig train = desk_train_config();
    forecast::DecompositionConfig decomposition;
    std::optional<LocalDate> test_begin;
    std::optional<LocalDate> test_end;
    std::size_t test_days = 30; // used when no test dates are given: the last days of the data
    int train_parts = 3;
    int val_parts = 1;
    std::uint64_t seed = 0;
    std::size_t jobs = 1;

    void validate() const {
        require(synth.has_value() != !data_dir.empty(), ErrorCode::ConfigError,
                "experiment needs exactly one of a synth config or a data directory");
        require(!methods.empty() && !modes.empty(), ErrorCode::ConfigError, "methods and modes must be non-empty");
        for (const auto& m : methods) {
            forecast::parse_strategy(m);
        }
        for (const auto& m : modes) {
            features::parse_mode(m);
        }
        for (const auto& a : aggregates) {
            eval::parse_aggregate(a);
        }
        require(synth_plants >= 1, ErrorCode::ConfigError, "synthetic site needs at least one plant");
        require(test_begin.has_value() == test_end.has_value(), ErrorCode::ConfigError,
                "test_begin and test_end go together");
        require(jobs >= 1, ErrorCode::ConfigError, "jobs must be positive");
        task.validate();
        train.validate();
    }

    nlohmann::json to_json() const {
        nlohmann::json data = nlohmann::json::object();
        if (synth) {
            data["synth"] = synth->to_json();
            data["synth_plants"] = synth_plants;
        } else {
            data["dir"] = data_dir;
        }
        nlohmann::json split{{"train_parts", train_parts}, {"val_parts", val_parts}, {"test_days", test_days}};
        if (test_begin) {
            split["test_begin"] = format_date(*test_begin);
            split["test_end"] = format_date(*test_end);
        }
        return {{"data", data},
                {"plants", plants},
                {"methods", methods},
                {"modes", modes},
                {"aggregates", aggregates},
                {"task", task.to_json()},
                {"train", train.to_json()},
                {"decomposition", decomposition.to_json()},
                {"split", split},
                {"seed", seed},
                {"jobs", jobs}};
    }

    static ExperimentConfig from_json(const nlohmann::json& j) {
        ExperimentConfig c;
        try {
            if (j.contains("data")) {
                const auto& d = j.at("data");
                if (d.contains("synth")) {
                    c.synth = synth::SynthConfig::from_json(d.at("synth"));
                    c.synth_plants = d.value("synth_plants", c.synth_plants);
                }
                c.data_dir = d.value("dir", c.data_dir);
            }
            c.plants = j.value("plants", c.plants);
            c.methods = j.value("methods", c.methods);
            c.modes = j.value("modes", c.modes);
            c.aggregates = j.value("aggregates", c.aggregates);
            if (j.contains("task")) {
                c.task = forecast::ForecastTask::from_json(j.at("task"));
            }
            if (j.contains("train")) {
                c.train = forecast::TrainConfig::from_json(j.at("train"), c.train);
            }
            if (j.contains("decomposition")) {
                c.decomposition = forecast::DecompositionConfig::from_json(j.at("decomposition"));
            }
            if (j.contains("split")) {
                const auto& s = j.at("split");
                c.train_parts = s.value("train_parts", c.train_parts);
                c.val_parts = s.value("val_parts", c.val_parts);
                c.test_days = s.value("test_days", c.test_days);
                if (s.contains("test_begin")) {
                    c.test_begin = to_civil(parse_timestamp(s.at("test_begin").get<std::string>())).date;
                }
                if (s.contains("test_end")) {
                    c.test_end = to_civil(parse_timestamp(s.at("test_end").get<std::string>())).date;
                }
            }
            c.seed = j.value("seed", c.seed);
            c.jobs = j.value("jobs", c.jobs);
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorCode::ConfigError, std::string("bad experiment config: ") + e.what());
        }
        return c;
    }
};

/// Hourly measurement frame of a synthetic plant, shaped like ingest output.
inline FeatureFrame synth_measurements(const synth::SynthData& site, const synth::SynthPlant& plant) {
    const TimeSeries power = synth::plant_power(site, plant);
    FeatureFrame f = FeatureFrame::contiguous(power.start(), kHour, power.size(), site.utc_offset_minutes);
    auto add = [&](const char* name, const TimeSeries& s, bool known) {
        f.add_real(name, known ? FeatureTag::known_real() : FeatureTag::unknown_real(),
                   std::vector<double>(s.values().begin(), s.values().end()), s.unit());
    };
    add(ingest::columns::kPower, power, false);
    add(ingest::columns::kGhi, site.ghi, false);
    add(ingest::columns::kDhi, site.dhi, false);
    add(ingest::columns::kTemperature, site.temperature, false);
    add(ingest::columns::kHumidity, site.humidity, false);
    add(ingest::columns::kRainfall, site.rainfall, false);
    add(ingest::columns::kZenith, site.zenith, true);
    add(ingest::columns::kAzimuth, site.azimuth, true);
    return f;
}

inline std::vector<PlantData> load_plants(const ExperimentConfig& cfg) {
    std::vector<PlantData> out;
    if (cfg.synth) {
        synth::SynthConfig sc = *cfg.synth;
        sc.seed = derive_seed(cfg.seed, 2);
        const synth::SynthData site = synth::generate(sc);
        for (const auto& p : synth::default_plants(cfg.synth_plants, sc.array_rating)) {
            out.push_back({p.spec, synth_measurements(site, p)});
        }
    } else {
        const RawDataset raw = load_raw_dataset(cfg.data_dir);
        for (const auto& spec : raw.plants) {
            const auto ids = raw.records.plants();
            if (std::find(ids.begin(), ids.end(), spec.plant_id) == ids.end()) {
                continue;
            }
            out.push_back({spec, ingest::ingest_plant(raw.records.for_plant(spec.plant_id), spec).frame});
        }
    }
    if (!cfg.plants.empty()) {
        std::vector<PlantData> chosen;
        for (const auto& id : cfg.plants) {
            const auto it = std::find_if(out.begin(), out.end(), [&](const PlantData& p) { return p.spec.plant_id == id; });
            require(it != out.end(), ErrorCode::MissingColumn, "plant '" + id + "' not found in the data");
            chosen.push_back(*it);
        }
        out = std::move(chosen);
    }
    require(!out.empty(), ErrorCode::MissingColumn, "no plants to evaluate");
    return out;
}

/// Site series: summed power of aligned plants, meteorology of the first
/// plant, rating equal to the summed ratings.
inline PlantData site_sum_plant(const std::vector<PlantData>& plants) {
    const PlantData& first = plants.front();
    std::vector<double> power(first.measurements.size(), 0.0);
    double rating = 0.0;
    for (const PlantData& p : plants) {
        require(std::equal(p.measurements.index().begin(), p.measurements.index().end(),
                           first.measurements.index().begin(), first.measurements.index().end()),
                ErrorCode::Misaligned, "plant frames are not aligned on timestamps");
        const auto& pw = p.measurements.column(ingest::columns::kPower).data;
        for (std::size_t i = 0; i < power.size(); ++i) {
            power[i] += pw[i];
        }
        rating += p.spec.array_rating_kw;
    }
    PlantData site = first;
    site.spec.plant_id = "Site-Sum";
    site.spec.array_rating_kw = rating;
    site.measurements.replace_data(ingest::columns::kPower, std::move(power));
    return site;
}

struct CellResult {
    std::string plant;
    std::string method;
    std::string mode;
    eval::EvaluationInput input;
    nlohmann::json training;
};

struct ExperimentResult {
    eval::EvaluationReport report;
    std::vector<CellResult> cells;
    std::map<std::string, eval::Scores> baseline; // seasonal-naive per plant
    std::map<std::string, eval::WeatherBreakdown> baseline_weather;
    nlohmann::json summary = nlohmann::json::object();
};

inline forecast::DecompositionConfig decomposition_config(const ExperimentConfig& cfg) {
    forecast::DecompositionConfig d = cfg.decomposition;
    d.eemd.seed = derive_seed(cfg.seed, 3);
    return d;
}

/// Trains one grid cell. Seeds depend only on the global seed and the cell
/// key, so results do not depend on grid order or worker count.
inline forecast::StrategyModel fit_cell(const ExperimentConfig& cfg, const FeatureFrame& frame,
                                        const forecast::DatasetRoles& roles, const std::string& plant,
                                        const std::string& method, const std::string& mode, std::size_t jobs = 1) {
    forecast::ForecastTask task = cfg.task;
    task.mode = features::parse_mode(mode);
    forecast::TrainConfig train = cfg.train;
    train.seed = derive_seed(cfg.seed, csv::fnv1a(plant + "|" + method + "|" + mode));
    return forecast::fit_strategy(frame, roles, forecast::parse_strategy(method), decomposition_config(cfg), task,
                                  train, jobs);
}

namespace detail {

struct PreparedPlant {
    PlantData data;
    FeatureFrame frame;
    forecast::DatasetRoles roles;
    std::map<LocalDate, features::WeatherType> labels;
};

inline SplitSpec split_spec(const ExperimentConfig& cfg, const FeatureFrame& frame) {
    SplitSpec s;
    s.train_parts = cfg.train_parts;
    s.val_parts = cfg.val_parts;
    s.seed = derive_seed(cfg.seed, 1);
    if (cfg.test_begin) {
        s.test_begin = *cfg.test_begin;
        s.test_end = *cfg.test_end;
    } else {
        const auto dates = row_dates(frame);
        const LocalDate last = dates.back();
        const std::int64_t end_day = days_since_epoch(last) + 1;
        s.test_begin = date_from_days(end_day - static_cast<std::int64_t>(cfg.test_days));
        s.test_end = date_from_days(end_day);
    }
    return s;
}

inline PreparedPlant prepare(const PlantData& p, const ExperimentConfig& cfg) {
    features::FeatureRecipe recipe;
    const FeatureFrame frame = features::build_from_measurements(p.measurements, p.spec, recipe);
    const SplitResult sp = split(frame, split_spec(cfg, frame));
    forecast::DatasetRoles roles = forecast::assign_roles(frame, sp, cfg.task);
    require(!roles.test_origins.empty(), ErrorCode::SpanTooShort, "no complete test days for " + p.spec.plant_id);
    const auto labels = features::daily_weather(p.measurements.series(ingest::columns::kGhi),
                                                p.measurements.series(ingest::columns::kDhi),
                                                frame.utc_offset_minutes());
    return {p, frame, std::move(roles), labels};
}

/// Truth and point forecasts over the test origins, skipping hours with
/// missing truth.
inline eval::EvaluationInput collect(const PreparedPlant& pp, const std::vector<forecast::ForecastResult>& fc) {
    const auto& truth = pp.frame.column(features::names::kPower).data;
    std::vector<double> y;
    std::vector<double> yhat;
    std::vector<Timestamp> ts;
    for (std::size_t k = 0; k < fc.size(); ++k) {
        const std::size_t origin = pp.roles.test_origins[k];
        const auto& point = fc[k].point();
        for (std::size_t i = 0; i < point.size(); ++i) {
            if (is_missing(truth[origin + i])) {
                continue;
            }
            y.push_back(truth[origin + i]);
            yhat.push_back(point[i]);
            ts.push_back(fc[k].timestamps[i]);
        }
    }
    return eval::EvaluationInput::make(std::move(y), std::move(yhat), std::move(ts), pp.data.spec.plant_id,
                                       pp.frame.utc_offset_minutes());
}

} // namespace detail

/// Trains and scores every (plant, method, mode) cell, the seasonal-naive
/// baseline per plant and the requested site aggregates.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    std::vector<PlantData> plants = load_plants(cfg);
    const bool site = plants.size() > 1 && !cfg.aggregates.empty();
    const bool want_sum = site && std::find(cfg.aggregates.begin(), cfg.aggregates.end(), "sum") != cfg.aggregates.end();
    const bool want_indiv =
        site && std::find(cfg.aggregates.begin(), cfg.aggregates.end(), "indiv") != cfg.aggregates.end();
    std::vector<PlantData> units = plants;
    if (want_sum) {
        units.push_back(site_sum_plant(plants));
    }

    std::vector<detail::PreparedPlant> prepared;
    for (const auto& p : units) {
        prepared.push_back(detail::prepare(p, cfg));
    }


    struct Job {
        std::size_t unit;
        std::string method;
        std::string mode;
    };
    std::vector<Job> jobs;
    for (std::size_t u = 0; u < prepared.size(); ++u) {
        for (const auto& method : cfg.methods) {
            for (const auto& mode : cfg.modes) {
                jobs.push_back({u, method, mode});
            }
        }
    }

    ExperimentResult result;
    result.cells.resize(jobs.size());
    parallel_for(jobs.size(), cfg.jobs, [&](std::size_t j) {
        const Job& job = jobs[j];
        const detail::PreparedPlant& pp = prepared[job.unit];
        const forecast::StrategyModel model = fit_cell(cfg, pp.frame, pp.roles, pp.data.spec.plant_id, job.method, job.mode);
        const auto fc = model.forecast_many(pp.frame, pp.roles.test_origins);
        nlohmann::json training = nlohmann::json::array();
        for (std::size_t k = 0; k < model.models.size(); ++k) {
            const auto& log = model.models[k].log;
            training.push_back({{"component", model.component_names[k]},
                                {"epochs", log.epochs.size()},
                                {"best_epoch", log.best_epoch},
                                {"best_val_loss", log.best_val_loss},
                                {"train_windows", log.train_windows},
                                {"val_windows", log.val_windows}});
        }
        result.cells[j] = {pp.data.spec.plant_id, job.method, job.mode, detail::collect(pp, fc), std::move(training)};
    });

    for (const auto& pp : prepared) {
        const forecast::SeasonalNaiveForecaster naive(cfg.task);
        const auto fc = naive.forecast_many(pp.frame, pp.roles.test_origins);
        const auto in = detail::collect(pp, fc);
        result.baseline[pp.data.spec.plant_id] = eval::score(in);
        result.baseline_weather[pp.data.spec.plant_id] = eval::evaluate_by_weather(in, pp.labels);
    }

    std::vector<eval::GridCell> grid_cells;
    eval::GridSpec grid{{}, cfg.methods, cfg.modes};
    for (const auto& pp : prepared) {
        grid.plants.push_back(pp.data.spec.plant_id);
    }
    auto labels_of = [&](const std::string& plant) -> const std::map<LocalDate, features::WeatherType>& {
        for (const auto& pp : prepared) {
            if (pp.data.spec.plant_id == plant) {
                return pp.labels;
            }
        }
        return prepared.front().labels;
    };
    for (const auto& c : result.cells) {
        grid_cells.push_back({c.plant, c.method, c.mode, eval::evaluate_by_weather(c.input, labels_of(c.plant))});
    }
    if (want_indiv) {
        grid.plants.push_back("Site-Indiv");
        for (const auto& method : cfg.methods) {
            for (const auto& mode : cfg.modes) {
                std::vector<eval::EvaluationInput> parts;
                for (const auto& c : result.cells) {
                    if (c.method == method && c.mode == mode && c.plant != "Site-Sum") {
                        parts.push_back(c.input);
                    }
                }
                const auto in = eval::site_aggregate(parts, eval::Aggregate::Indiv);
                grid_cells.push_back({"Site-Indiv", method, mode, eval::evaluate_by_weather(in, prepared.front().labels)});
            }
        }
    }
    result.report = eval::compare_methods(grid_cells, grid);

    nlohmann::json baseline = nlohmann::json::object();
    for (const auto& [plant, s] : result.baseline) {
        baseline[plant] = {{"NMAE", s.nmae}, {"NRMSE", s.nrmse}};
    }
    nlohmann::json training = nlohmann::json::array();
    for (const auto& c : result.cells) {
        training.push_back({{"plant", c.plant}, {"method", c.method}, {"mode", c.mode}, {"models", c.training}});
    }
    result.summary = {{"baseline_seasonal_naive", baseline},
                      {"training", training},
                      {"test_days", prepared.front().roles.test_origins.size()}};
    return result;
}

inline void write_experiment(const ExperimentResult& r, const fs::path& out) {
    csv::write_file(out / "report.csv", r.report.to_csv());
    csv::write_file(out / "report.json", r.report.to_json().dump(2) + "\n");
    csv::write_file(out / "plot.csv", r.report.plot_csv());
    csv::write_file(out / "tables.md", r.report.to_tables());
    csv::write_file(out / "summary.json", r.summary.dump(2) + "\n");
    std::string fc = "plant,method,mode,timestamp,y,yhat\n";
    for (const auto& c : r.cells) {
        for (std::size_t i = 0; i < c.input.y.size(); ++i) {
            fc += c.plant + "," + c.method + "," + c.mode + "," + format_iso(c.input.timestamps[i]) + "," +
                  csv::format_number(c.input.y[i]) + "," + csv::format_number(c.input.yhat[i]) + "\n";
        }
    }
    csv::write_file(out / "point_forecasts.csv", fc);
}

} // namespace pvfc::cli
