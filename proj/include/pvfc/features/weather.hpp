#pragma once

#include "pvfc/core/error.hpp"
#include "pvfc/core/time.hpp"
#include "pvfc/core/time_series.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pvfc::features {

enum class WeatherType { Sunny = 1, PartiallyCloudy = 2, OvercastRainy = 3 };

inline constexpr WeatherType kAllWeather[] = {WeatherType::Sunny, WeatherType::PartiallyCloudy,
                                              WeatherType::OvercastRainy};

inline std::string_view weather_name(WeatherType w) {
    switch (w) {
    case WeatherType::Sunny: return "sunny";
    case WeatherType::PartiallyCloudy: return "cloudy";
    case WeatherType::OvercastRainy: return "rainy";
    }
    return "unknown";
}

inline WeatherType parse_weather(std::string_view name) {
    for (WeatherType w : kAllWeather) {
        if (weather_name(w) == name) {
            return w;
        }
    }
    fail(ErrorCode::UnknownCategory, "unknown weather '" + std::string(name) + "'");
}

/// Vocabulary used for the categorical `weather` column; id = index.
inline std::vector<std::string> weather_vocabulary() { return {"sunny", "cloudy", "rainy"}; }

inline std::size_t weather_id(WeatherType w) { return static_cast<std::size_t>(w) - 1; }

inline WeatherType weather_from_id(std::size_t id) {
    require(id < 3, ErrorCode::UnknownCategory, "weather id out of range");
    return static_cast<WeatherType>(id + 1);
}

/// Hourly GHI and DHI of one local day.
struct DailyIrradiance {
    LocalDate date;
    std::vector<double> ghi;
    std::vector<double> dhi;
};

/// Ratio of summed diffuse to summed global irradiance over a day, clipped to [0, 1].
inline double clearness_index(const DailyIrradiance& day) {
    require(day.ghi.size() == day.dhi.size(), ErrorCode::ShapeMismatch,
            "GHI and DHI must cover the same hours");
    double ghi = 0.0;
    double dhi = 0.0;
    for (std::size_t t = 0; t < day.ghi.size(); ++t) {
        require(day.ghi[t] >= 0.0 && day.dhi[t] >= 0.0, ErrorCode::OutOfRange,
                "irradiance must be non-negative");
        ghi += day.ghi[t];
        dhi += day.dhi[t];
    }
    if (!(ghi > 0.0)) {
        fail(ErrorCode::ZeroIrradiance, "day " + format_date(day.date) + " has zero GHI");
    }
    return std::clamp(dhi / ghi, 0.0, 1.0);
}

/// Weather class bands on k_d: [0, 0.15] sunny, (0.15, 0.45] partially
/// cloudy, (0.45, 1] overcast/rainy.
inline WeatherType classify_weather(double k_d) {
    require(k_d >= 0.0 && k_d <= 1.0, ErrorCode::OutOfRange, "k_d must lie in [0, 1]");
    if (k_d <= 0.15) {
        return WeatherType::Sunny;
    }
    if (k_d <= 0.45) {
        return WeatherType::PartiallyCloudy;
    }
    return WeatherType::OvercastRainy;
}

/// Weather per local day from hourly GHI/DHI series on the same grid.
/// Days with zero GHI are overcast; days with missing samples use the
/// present hours only.
inline std::map<LocalDate, WeatherType> daily_weather(const TimeSeries& ghi, const TimeSeries& dhi,
                                                      int utc_offset_minutes) {
    require(ghi.size() == dhi.size() && ghi.start() == dhi.start() &&
                ghi.resolution() == dhi.resolution(),
            ErrorCode::Misaligned, "GHI and DHI series must share a grid");
    std::map<LocalDate, DailyIrradiance> days;
    for (std::size_t i = 0; i < ghi.size(); ++i) {
        if (is_missing(ghi[i]) || is_missing(dhi[i])) {
            continue;
        }
        const LocalDate d = local_date(ghi.time_at(i), utc_offset_minutes);
        auto& day = days[d];
        day.date = d;
        day.ghi.push_back(std::max(0.0, ghi[i]));
        day.dhi.push_back(std::max(0.0, dhi[i]));
    }
    std::map<LocalDate, WeatherType> out;
    for (const auto& [d, day] : days) {
        try {
            out[d] = classify_weather(clearness_index(day));
        } catch (const Error& e) {
            if (e.code() != ErrorCode::ZeroIrradiance) {
                throw;
            }
            out[d] = WeatherType::OvercastRainy;
        }
    }
    return out;
}

} // namespace pvfc::features
