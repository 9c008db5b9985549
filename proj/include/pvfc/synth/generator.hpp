#pragma once

#include "pvfc/core/csv.hpp"
#include "pvfc/core/error.hpp"
#include "pvfc/core/random.hpp"
#include "pvfc/core/time.hpp"
#include "pvfc/core/time_series.hpp"
#include "pvfc/features/weather.hpp"
#include "pvfc/ingest/records.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <map>
#include <numbers>
#include <string>
#include <vector>

namespace pvfc::synth {

using features::WeatherType;

struct ClassProcess {
    double cloud_mean = 1.0;  // multiplicative clear-sky factor
    double cloud_noise = 0.0; // hourly standard deviation of the factor
    double kd_low = 0.0;      // daily DHI/GHI drawn uniformly in [kd_low, kd_high]
    double kd_high = 0.1;
};

struct SynthConfig {
    LocalDate start{2019, 10, 1};
    std::size_t n_days = 120;
    int utc_offset_minutes = 570;
    double mean_day_length = 11.75;     // hours
    double day_length_amplitude = 1.75; // hours; longest day in late December
    double peak_irradiance = 1000.0;    // W/m² at solar noon on the longest day
    // Markov chain over sunny, cloudy, rainy; rows sum to 1
    std::array<std::array<double, 3>, 3> transition{{{0.80, 0.15, 0.05}, {0.45, 0.40, 0.15}, {0.35, 0.35, 0.30}}};
    WeatherType initial = WeatherType::Sunny;
    std::array<ClassProcess, 3> classes{{{1.0, 0.02, 0.03, 0.12}, {0.6, 0.15, 0.20, 0.40}, {0.3, 0.15, 0.50, 0.85}}};
    double temperature_noise = 1.0;
    double array_rating = 100.0; // kW
    std::uint64_t seed = 0;

    void validate() const {
        require(n_days >= 14, ErrorCode::ConfigError, "synthetic data needs at least 14 days");
        require(array_rating > 0.0 && peak_irradiance > 0.0, ErrorCode::ConfigError,
                "rating and peak irradiance must be positive");
        require(mean_day_length - std::abs(day_length_amplitude) > 0.0 &&
                    mean_day_length + std::abs(day_length_amplitude) < 24.0,
                ErrorCode::ConfigError, "day length must stay within (0, 24) hours");
        require(temperature_noise >= 0.0, ErrorCode::ConfigError, "noise scales must be non-negative");
        for (const auto& row : transition) {
            double s = 0.0;
            for (double p : row) {
                require(p >= 0.0, ErrorCode::ConfigError, "transition probabilities must be non-negative");
                s += p;
            }
            require(std::abs(s - 1.0) < 1e-9, ErrorCode::ConfigError, "transition rows must sum to 1");
        }
        for (const auto& c : classes) {
            require(c.cloud_noise >= 0.0 && c.cloud_mean > 0.0 && c.cloud_mean <= 1.0, ErrorCode::ConfigError,
                    "cloud factors must lie in (0, 1] with non-negative noise");
            require(c.kd_low >= 0.0 && c.kd_low <= c.kd_high && c.kd_high <= 1.0, ErrorCode::ConfigError,
                    "diffuse fraction band must lie in [0, 1]");
        }
    }

    /// Every day sunny.
    static SynthConfig all_sunny(std::size_t days, std::uint64_t seed = 0) {
        SynthConfig c;
        c.n_days = days;
        c.seed = seed;
        c.transition = {{{1.0, 0.0, 0.0}, {1.0, 0.0, 0.0}, {1.0, 0.0, 0.0}}};
        return c;
    }

    nlohmann::json to_json() const {
        nlohmann::json cls = nlohmann::json::array();
        for (const auto& c : classes) {
            cls.push_back({{"cloud_mean", c.cloud_mean},
                           {"cloud_noise", c.cloud_noise},
                           {"kd_low", c.kd_low},
                           {"kd_high", c.kd_high}});
        }
        return {{"start", format_date(start)},
                {"n_days", n_days},
                {"utc_offset_minutes", utc_offset_minutes},
                {"mean_day_length", mean_day_length},
                {"day_length_amplitude", day_length_amplitude},
                {"peak_irradiance", peak_irradiance},
                {"transition", transition},
                {"initial", features::weather_name(initial)},
                {"classes", cls},
                {"temperature_noise", temperature_noise},
                {"array_rating", array_rating},
                {"seed", seed}};
    }

    static SynthConfig from_json(const nlohmann::json& j) {
        SynthConfig c;
        if (j.contains("start")) {
            const CivilTime t = to_civil(parse_timestamp(j.at("start").get<std::string>()));
            c.start = t.date;
        }
        c.n_days = j.value("n_days", c.n_days);
        c.utc_offset_minutes = j.value("utc_offset_minutes", c.utc_offset_minutes);
        c.mean_day_length = j.value("mean_day_length", c.mean_day_length);
        c.day_length_amplitude = j.value("day_length_amplitude", c.day_length_amplitude);
        c.peak_irradiance = j.value("peak_irradiance", c.peak_irradiance);
        if (j.contains("transition")) {
            c.transition = j.at("transition").get<std::array<std::array<double, 3>, 3>>();
        }
        if (j.contains("initial")) {
            c.initial = features::parse_weather(j.at("initial").get<std::string>());
        }
        if (j.contains("classes")) {
            const auto& a = j.at("classes");
            require(a.is_array() && a.size() == 3, ErrorCode::ConfigError, "classes must list sunny, cloudy, rainy");
            for (std::size_t k = 0; k < 3; ++k) {
                auto& p = c.classes[k];
                p.cloud_mean = a[k].value("cloud_mean", p.cloud_mean);
                p.cloud_noise = a[k].value("cloud_noise", p.cloud_noise);
                p.kd_low = a[k].value("kd_low", p.kd_low);
                p.kd_high = a[k].value("kd_high", p.kd_high);
            }
        }
        c.temperature_noise = j.value("temperature_noise", c.temperature_noise);
        c.array_rating = j.value("array_rating", c.array_rating);
        c.seed = j.value("seed", c.seed);
        c.validate();
        return c;
    }
};

/// Hourly synthetic site on local hours starting at `start` midnight.
struct SynthData {
    TimeSeries power;
    TimeSeries ghi;
    TimeSeries dhi;
    TimeSeries temperature;
    TimeSeries humidity;
    TimeSeries rainfall;
    TimeSeries zenith;
    TimeSeries azimuth;
    std::map<LocalDate, WeatherType> weather;
    std::map<LocalDate, double> diffuse_fraction;
    int utc_offset_minutes = 0;
};

namespace detail {

constexpr double kPi = std::numbers::pi;

inline int day_of_year(const LocalDate& d) {
    return static_cast<int>(days_since_epoch(d) - days_since_epoch(LocalDate{d.year, 1, 1})) + 1;
}

/// +1 at the December solstice, −1 at the June solstice.
inline double summer_phase(int doy) { return std::cos(2.0 * kPi * (doy + 10) / 365.0); }

inline WeatherType next_weather(WeatherType w, const SynthConfig& cfg, Rng& rng) {
    const auto& row = cfg.transition[features::weather_id(w)];
    const double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
        acc += row[k];
        if (u < acc) {
            return features::weather_from_id(k);
        }
    }
    return features::weather_from_id(2);
}

} // namespace detail

/// Deterministic synthetic series. Each day draws a weather class from the
/// Markov chain and a diffuse fraction inside that class's band; GHI is a
/// clear-sky bell between sunrise and sunset scaled by an hourly cloud
/// factor, DHI is GHI times the day's diffuse fraction, and power is
/// rating · GHI/1000 · a temperature derate, clipped to [0, rating].
inline SynthData generate(const SynthConfig& cfg) {
    cfg.validate();
    Rng weather_rng(derive_seed(cfg.seed, 1));
    Rng cloud_rng(derive_seed(cfg.seed, 2));
    Rng met_rng(derive_seed(cfg.seed, 3));

    const std::size_t n = cfg.n_days * 24;
    std::vector<double> power(n), ghi(n), dhi(n), temp(n), hum(n), rain(n), zen(n), azi(n);
    std::map<LocalDate, WeatherType> labels;
    std::map<LocalDate, double> fractions;

    LocalDate day = cfg.start;
    WeatherType w = cfg.initial;
    for (std::size_t d = 0; d < cfg.n_days; ++d, day = next_day(day)) {
        if (d > 0) {
            w = detail::next_weather(w, cfg, weather_rng);
        }
        const ClassProcess& proc = cfg.classes[features::weather_id(w)];
        const double kd = proc.kd_low + (proc.kd_high - proc.kd_low) * weather_rng.uniform();
        labels[day] = w;
        fractions[day] = kd;

        const int doy = detail::day_of_year(day);
        const double phase = detail::summer_phase(doy);
        const double day_length = cfg.mean_day_length + cfg.day_length_amplitude * phase;
        const double sunrise = 12.0 - 0.5 * day_length;
        const double peak = cfg.peak_irradiance * (0.9 + 0.1 * phase);
        const double max_elevation = 66.3 + 23.4 * phase; // noon elevation near 23.7° S
        const double class_cooling = w == WeatherType::Sunny ? 0.0 : (w == WeatherType::PartiallyCloudy ? 2.0 : 5.0);
        const double class_humidity =
            w == WeatherType::Sunny ? 0.0 : (w == WeatherType::PartiallyCloudy ? 15.0 : 35.0);
        for (int h = 0; h < 24; ++h) {
            const std::size_t i = d * 24 + static_cast<std::size_t>(h);
            const double frac = (h - sunrise) / day_length;
            double g = 0.0;
            if (frac > 0.0 && frac < 1.0) {
                const double bell = std::pow(std::sin(detail::kPi * frac), 1.5);
                double cloud = proc.cloud_mean;
                if (proc.cloud_noise > 0.0) {
                    cloud += proc.cloud_noise * cloud_rng.normal();
                }
                g = peak * bell * std::clamp(cloud, 0.1, 1.0);
            }
            ghi[i] = g;
            dhi[i] = kd * g;

            const double diurnal = std::sin(2.0 * detail::kPi * (h - 9) / 24.0);
            double t = 21.0 + 8.0 * phase + 7.0 * diurnal - class_cooling;
            if (cfg.temperature_noise > 0.0) {
                t += cfg.temperature_noise * met_rng.normal();
            }
            temp[i] = t;
            hum[i] = std::clamp(30.0 + class_humidity - 10.0 * diurnal + 3.0 * met_rng.normal(), 0.0, 100.0);
            rain[i] = 0.0;
            if (w == WeatherType::OvercastRainy && met_rng.uniform() < 0.3) {
                rain[i] = -std::log(1.0 - met_rng.uniform());
            }

            double elevation;
            if (frac > 0.0 && frac < 1.0) {
                elevation = max_elevation * std::sin(detail::kPi * frac);
            } else {
                const double night = (h - (sunrise + day_length) + (h < sunrise ? 24.0 : 0.0)) / (24.0 - day_length);
                elevation = -(90.0 - max_elevation + 40.0) * std::sin(detail::kPi * night);
            }
            zen[i] = 90.0 - elevation;
            azi[i] = std::fmod(360.0 + 90.0 - 15.0 * (h - 6), 360.0);

            const double cell = t + 0.03 * g;
            const double derate = 1.0 - 0.004 * (cell - 25.0);
            power[i] = std::clamp(cfg.array_rating * g / 1000.0 * derate, 0.0, cfg.array_rating);
        }
    }

    const Timestamp start = local_midnight(cfg.start, cfg.utc_offset_minutes);
    return SynthData{TimeSeries(start, kHour, std::move(power), "kW"),
                     TimeSeries(start, kHour, std::move(ghi), "W/m2"),
                     TimeSeries(start, kHour, std::move(dhi), "W/m2"),
                     TimeSeries(start, kHour, std::move(temp), "degC"),
                     TimeSeries(start, kHour, std::move(hum), "%"),
                     TimeSeries(start, kHour, std::move(rain), "mm"),
                     TimeSeries(start, kHour, std::move(zen), "deg"),
                     TimeSeries(start, kHour, std::move(azi), "deg"),
                     std::move(labels),
                     std::move(fractions),
                     cfg.utc_offset_minutes};
}

/// One plant of a synthetic site: shared weather, own rating and a small
/// plant-specific efficiency.
struct SynthPlant {
    ingest::PlantSpec spec;
    double efficiency = 1.0;
};

inline std::vector<SynthPlant> default_plants(std::size_t count, double base_rating = 100.0) {
    static const char* techs[] = {"mono-Si", "poly-Si", "thin-film"};
    static const char* structures[] = {"fixed", "tracking"};
    std::vector<SynthPlant> plants;
    for (std::size_t k = 0; k < count; ++k) {
        ingest::PlantSpec p;
        p.plant_id = "P" + std::to_string(k + 1);
        p.manufacturer = "maker" + std::to_string(k % 2 + 1);
        p.array_rating_kw = base_rating * (1.0 + 0.25 * static_cast<double>(k));
        p.pv_technology = techs[k % 3];
        p.array_structure = structures[k % 2];
        p.install_year = 2010 + static_cast<int>(k);
        plants.push_back({p, 1.0 - 0.03 * static_cast<double>(k % 3)});
    }
    return plants;
}

/// Power of `plant` on the site's irradiance and temperature.
inline TimeSeries plant_power(const SynthData& site, const SynthPlant& plant) {
    std::vector<double> p(site.power.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double cell = site.temperature[i] + 0.03 * site.ghi[i];
        const double derate = 1.0 - 0.004 * (cell - 25.0);
        p[i] = std::clamp(plant.spec.array_rating_kw * plant.efficiency * site.ghi[i] / 1000.0 * derate, 0.0,
                          plant.spec.array_rating_kw);
    }
    return site.power.with_values(std::move(p));
}

/// Writes `records.csv` (ingest schema, optional sub-hourly sample-and-hold
/// rows), `schema.json` and `plants.json` into `dir`.
inline void write_ingest_files(const SynthData& site, const std::vector<SynthPlant>& plants,
                               const std::filesystem::path& dir, std::size_t minutes_per_sample = 60) {
    require(minutes_per_sample >= 1 && 60 % minutes_per_sample == 0, ErrorCode::ConfigError,
            "sample spacing must divide an hour");
    const std::size_t per_hour = 60 / minutes_per_sample;
    std::string out = "timestamp,plant_id,power,ghi,dhi,temperature,humidity,rainfall,zenith,azimuth\n";
    nlohmann::json plant_list = nlohmann::json::array();
    for (const SynthPlant& plant : plants) {
        const TimeSeries p = plant_power(site, plant);
        plant_list.push_back(plant.spec.to_json());
        for (std::size_t i = 0; i < p.size(); ++i) {
            const std::string tail = "," + csv::format_number(p[i]) + "," + csv::format_number(site.ghi[i]) + "," +
                                     csv::format_number(site.dhi[i]) + "," +
                                     csv::format_number(site.temperature[i]) + "," +
                                     csv::format_number(site.humidity[i]) + "," +
                                     csv::format_number(site.rainfall[i]) + "," +
                                     csv::format_number(site.zenith[i]) + "," + csv::format_number(site.azimuth[i]);
            for (std::size_t s = 0; s < per_hour; ++s) {
                const Timestamp t = p.time_at(i) + Duration{static_cast<std::int64_t>(s * minutes_per_sample * 60)};
                out += format_iso(t) + "," + plant.spec.plant_id + tail + "\n";
            }
        }
    }
    csv::write_file(dir / "records.csv", out);
    const nlohmann::json schema{{"columns", nlohmann::json::object()},
                                {"utc_offset_minutes", site.utc_offset_minutes}};
    csv::write_file(dir / "schema.json", schema.dump(2) + "\n");
    csv::write_file(dir / "plants.json", plant_list.dump(2) + "\n");
}

} // namespace pvfc::synth
