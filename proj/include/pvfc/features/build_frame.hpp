#pragma once

#include "pvfc/core/csv.hpp"
#include "pvfc/core/error.hpp"
#include "pvfc/core/feature_frame.hpp"
#include "pvfc/core/time_series.hpp"
#include "pvfc/features/calendar.hpp"
#include "pvfc/features/transform.hpp"
#include "pvfc/features/weather.hpp"
#include "pvfc/ingest/records.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pvfc::features {

/// Whether meteorology is observable over the forecast horizon.
enum class MeteorologyMode { Available, Unavailable };

inline std::string_view mode_name(MeteorologyMode m) {
    return m == MeteorologyMode::Available ? "available" : "unavailable";
}

inline MeteorologyMode parse_mode(std::string_view s) {
    if (s == "available") {
        return MeteorologyMode::Available;
    }
    if (s == "unavailable") {
        return MeteorologyMode::Unavailable;
    }
    fail(ErrorCode::ConfigError, "meteorology mode must be available|unavailable, got '" + std::string(s) + "'");
}

struct MeteorologyInputs {
    TimeSeries ghi;
    TimeSeries dhi;
    std::optional<TimeSeries> temperature;
    std::optional<TimeSeries> rainfall;
    std::optional<TimeSeries> humidity;
};

struct SolarAngles {
    std::optional<TimeSeries> zenith;
    std::optional<TimeSeries> azimuth;
};

/// Feature recipe: lag list, meteorology mode, normalization scope and
/// category vocabularies.
struct FeatureRecipe {
    std::vector<int> lags{24};
    MeteorologyMode mode = MeteorologyMode::Available;
    std::string normalization_scope = "train";
    std::map<std::string, std::vector<std::string>> vocabularies;

    nlohmann::json to_json() const {
        return {{"lags", lags},
                {"meteorology_mode", mode_name(mode)},
                {"normalization_scope", normalization_scope},
                {"vocabularies", vocabularies}};
    }

    static FeatureRecipe from_json(const nlohmann::json& j) {
        FeatureRecipe r;
        r.lags = j.value("lags", r.lags);
        if (j.contains("meteorology_mode")) {
            r.mode = parse_mode(j.at("meteorology_mode").get<std::string>());
        }
        r.normalization_scope = j.value("normalization_scope", r.normalization_scope);
        if (j.contains("vocabularies")) {
            r.vocabularies = j.at("vocabularies").get<std::map<std::string, std::vector<std::string>>>();
        }
        for (int lag : r.lags) {
            require(lag >= 1, ErrorCode::ConfigError, "lags must be positive");
        }
        require(r.normalization_scope == "train", ErrorCode::ConfigError,
                "only 'train' normalization scope is supported");
        return r;
    }

    /// Fingerprint stored with trained models; json dumps keys sorted.
    std::string hash() const { return csv::hex64(csv::fnv1a(to_json().dump())); }
};

namespace names {
inline constexpr const char* kPower = "power";
inline constexpr const char* kMonthSin = "month_sin";
inline constexpr const char* kMonthCos = "month_cos";
inline constexpr const char* kSeason = "season";
inline constexpr const char* kWeather = "weather";
inline constexpr const char* kZenith = "zenith";
inline constexpr const char* kAzimuth = "azimuth";
inline constexpr const char* kGhi = "ghi";
inline constexpr const char* kDhi = "dhi";
inline constexpr const char* kTemperature = "temperature";
inline constexpr const char* kRainfall = "rainfall";
inline constexpr const char* kHumidity = "humidity";
} // namespace names

namespace detail {

inline void require_aligned(const TimeSeries& ref, const TimeSeries& other, std::string_view what) {
    require(other.start() == ref.start() && other.resolution() == ref.resolution() &&
                other.size() == ref.size(),
            ErrorCode::Misaligned, std::string(what) + " is not aligned with power");
}

inline std::vector<std::string> vocab_for(const FeatureRecipe& recipe, const std::string& field,
                                          const std::string& value) {
    const auto it = recipe.vocabularies.find(field);
    if (it == recipe.vocabularies.end()) {
        return {value};
    }
    return it->second;
}

} // namespace detail

/// Assembles the tagged feature frame of one plant from hourly inputs.
inline FeatureFrame build_frame(const ingest::PlantSpec& plant, const TimeSeries& power,
                                const MeteorologyInputs& met, const SolarAngles& angles,
                                const FeatureRecipe& recipe, int utc_offset_minutes) {
    plant.validate();
    require(power.resolution() == kHour, ErrorCode::Misaligned, "features are built on hourly data");
    detail::require_aligned(power, met.ghi, "GHI");
    detail::require_aligned(power, met.dhi, "DHI");

    const bool met_known = recipe.mode == MeteorologyMode::Available;
    const FeatureTag met_real = met_known ? FeatureTag::known_real() : FeatureTag::unknown_real();
    const FeatureTag met_cat = met_known ? FeatureTag::known_categorical() : FeatureTag::unknown_categorical();

    FeatureFrame frame = FeatureFrame::contiguous(power.start(), kHour, power.size(), utc_offset_minutes);
    frame.add_real(names::kPower, FeatureTag::unknown_real(),
                   std::vector<double>(power.values().begin(), power.values().end()), power.unit());
    for (int lag : recipe.lags) {
        frame.add_column(make_lags(power, static_cast<std::size_t>(lag)));
    }

    std::vector<double> msin(power.size());
    std::vector<double> mcos(power.size());
    std::vector<double> season(power.size());
    for (std::size_t i = 0; i < power.size(); ++i) {
        const Timestamp t = power.time_at(i);
        const MonthEncoding m = month_cyclic(t, utc_offset_minutes);
        msin[i] = m.sin_month;
        mcos[i] = m.cos_month;
        season[i] = static_cast<double>(season_of_month(local_date(t, utc_offset_minutes).month));
    }
    frame.add_real(names::kMonthSin, FeatureTag::known_real(), std::move(msin));
    frame.add_real(names::kMonthCos, FeatureTag::known_real(), std::move(mcos));
    frame.add_categorical(names::kSeason, FeatureTag::known_categorical(), std::move(season),
                          season_vocabulary());

    auto add_met = [&](const char* name, const TimeSeries& s) {
        detail::require_aligned(power, s, name);
        frame.add_real(name, met_real, std::vector<double>(s.values().begin(), s.values().end()), s.unit());
    };
    add_met(names::kGhi, met.ghi);
    add_met(names::kDhi, met.dhi);
    if (met.temperature) {
        add_met(names::kTemperature, *met.temperature);
    }
    if (met.rainfall) {
        add_met(names::kRainfall, *met.rainfall);
    }
    if (met.humidity) {
        add_met(names::kHumidity, *met.humidity);
    }

    const auto weather = daily_weather(met.ghi, met.dhi, utc_offset_minutes);
    std::vector<double> weather_ids(power.size(), kMissing);
    for (std::size_t i = 0; i < power.size(); ++i) {
        const auto it = weather.find(local_date(power.time_at(i), utc_offset_minutes));
        if (it != weather.end()) {
            weather_ids[i] = static_cast<double>(weather_id(it->second));
        }
    }
    frame.add_categorical(names::kWeather, met_cat, std::move(weather_ids), weather_vocabulary());

    auto add_angle = [&](const char* name, const std::optional<TimeSeries>& s) {
        if (!s) {
            return;
        }
        detail::require_aligned(power, *s, name);
        frame.add_real(name, FeatureTag::known_real(), std::vector<double>(s->values().begin(), s->values().end()),
                       s->unit());
    };
    add_angle(names::kZenith, angles.zenith);
    add_angle(names::kAzimuth, angles.azimuth);

    auto add_static_cat = [&](const char* name, const std::string& value) {
        auto vocab = detail::vocab_for(recipe, name, value);
        const auto id = category_id(vocab, value);
        frame.add_static(StaticField{name, FeatureTag::static_categorical(), static_cast<double>(id),
                                     std::move(vocab), {}});
    };
    add_static_cat("manufacturer", plant.manufacturer);
    add_static_cat("pv_technology", plant.pv_technology);
    add_static_cat("array_structure", plant.array_structure);
    frame.add_static(StaticField{"array_rating", FeatureTag::static_real(), plant.array_rating_kw, {}, "kW"});
    frame.add_static(StaticField{"install_date", FeatureTag::static_real(),
                                 static_cast<double>(plant.install_year), {}, "year"});
    return frame;
}

/// Re-tags the meteorology columns of an existing frame for another mode.
inline FeatureFrame retag_meteorology(const FeatureFrame& frame, MeteorologyMode mode) {
    FeatureFrame out(std::vector<Timestamp>(frame.index().begin(), frame.index().end()), frame.resolution(),
                     frame.utc_offset_minutes());
    const Knowledge k = mode == MeteorologyMode::Available ? Knowledge::Known : Knowledge::Unknown;
    for (const Column& c : frame.columns()) {
        Column copy = c;
        const bool met = c.name == names::kGhi || c.name == names::kDhi || c.name == names::kTemperature ||
                         c.name == names::kRainfall || c.name == names::kHumidity || c.name == names::kWeather;
        if (met) {
            copy.tag = FeatureTag::make(Temporal::TimeVarying, k, c.tag.kind());
        }
        out.add_column(std::move(copy));
    }
    for (const StaticField& s : frame.statics()) {
        out.add_static(s);
    }
    return out;
}

/// Feature frame from an hourly measurement frame as produced by ingest.
/// Optional meteorology and angle columns are used when present.
inline FeatureFrame build_from_measurements(const FeatureFrame& hourly, const ingest::PlantSpec& plant,
                                            const FeatureRecipe& recipe) {
    require(hourly.resolution() == kHour && hourly.is_contiguous(), ErrorCode::Misaligned,
            "measurement frame must be hourly and contiguous");
    auto optional_series = [&](const char* name) -> std::optional<TimeSeries> {
        if (hourly.has_column(name)) {
            return hourly.series(name);
        }
        return std::nullopt;
    };
    MeteorologyInputs met{hourly.series(names::kGhi), hourly.series(names::kDhi), optional_series(names::kTemperature),
                          optional_series(names::kRainfall), optional_series(names::kHumidity)};
    SolarAngles angles{optional_series(names::kZenith), optional_series(names::kAzimuth)};
    return build_frame(plant, hourly.series(names::kPower), met, angles, recipe, hourly.utc_offset_minutes());
}

} // namespace pvfc::features
