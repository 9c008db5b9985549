#pragma once

#include "pvfc/core/error.hpp"
#include "pvfc/core/time_series.hpp"
#include "pvfc/features/weather.hpp"
#include "pvfc/ingest/records.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pvfc::ingest {

/// Thresholds of the power/irradiance consistency screen.
struct ConsistencyRule {
    double power_fraction = 0.05;       // of array rating
    double dark_ghi = 5.0;              // W/m², "no irradiance"
    double lit_ghi = 50.0;              // W/m², "irradiance present"
    int midday_first_hour = 10;         // local, inclusive
    int midday_last_hour = 14;          // local, exclusive
    std::size_t reference_days = 3;     // same-hour, same-weather history used for repair
    std::size_t search_days = 60;
};

enum class RepairTarget { Irradiance, Power };

struct RepairEntry {
    Timestamp time;
    RepairTarget target;
    bool repaired = false;
};

struct RepairLog {
    std::vector<RepairEntry> entries;

    std::size_t repaired() const {
        std::size_t n = 0;
        for (const auto& e : entries) {
            n += e.repaired ? 1 : 0;
        }
        return n;
    }

    nlohmann::json to_json() const {
        nlohmann::json j = nlohmann::json::array();
        for (const auto& e : entries) {
            j.push_back({{"time", format_iso(e.time)},
                         {"target", e.target == RepairTarget::Power ? "power" : "irradiance"},
                         {"repaired", e.repaired}});
        }
        return j;
    }
};

struct HourlyChannels {
    std::vector<double> power;
    std::vector<double> ghi;
    std::vector<double> dhi;
};

/// Screens hourly data for power/irradiance contradictions and replaces the
/// implausible channel with the mean of the most recent same-hour values on
/// days of the same weather class.
///
/// Flags: power above `power_fraction` of rating while GHI is below
/// `dark_ghi` (irradiance is replaced); power below that fraction while GHI
/// is above `lit_ghi` during the midday window (power is replaced).
inline RepairLog repair_inconsistent_hours(HourlyChannels& data, Timestamp start, double array_rating_kw,
                                           int utc_offset_minutes, const ConsistencyRule& rule = {}) {
    const std::size_t n = data.power.size();
    require(data.ghi.size() == n && data.dhi.size() == n, ErrorCode::Misaligned,
            "hourly channels must share length");
    require((start.time_since_epoch().count() + std::int64_t{utc_offset_minutes} * 60) % 3600 == 0,
            ErrorCode::MisalignedStart,
            "hourly channels must start on the hour");
    auto time_at = [&](std::size_t i) { return start + kHour * static_cast<std::int64_t>(i); };

    const double power_threshold = rule.power_fraction * array_rating_kw;
    std::vector<std::optional<RepairTarget>> flag(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double p = data.power[i];
        const double g = data.ghi[i];
        if (is_missing(p) || is_missing(g)) {
            continue;
        }
        if (p > power_threshold && g < rule.dark_ghi) {
            flag[i] = RepairTarget::Irradiance;
            continue;
        }
        const int hour = to_civil(time_at(i), utc_offset_minutes).hour;
        if (hour >= rule.midday_first_hour && hour < rule.midday_last_hour && p < power_threshold &&
            g > rule.lit_ghi) {
            flag[i] = RepairTarget::Power;
        }
    }

    // weather class per local day from unflagged hours
    std::map<LocalDate, std::pair<double, double>> sums;
    std::vector<LocalDate> day_of(n);
    for (std::size_t i = 0; i < n; ++i) {
        day_of[i] = local_date(time_at(i), utc_offset_minutes);
        auto& s = sums[day_of[i]];
        if (!flag[i] && !is_missing(data.ghi[i]) && !is_missing(data.dhi[i])) {
            s.first += std::max(0.0, data.ghi[i]);
            s.second += std::max(0.0, data.dhi[i]);
        }
    }
    std::map<LocalDate, features::WeatherType> weather;
    std::optional<features::WeatherType> previous;
    for (const auto& [d, s] : sums) {
        if (s.first > 0.0) {
            previous = features::classify_weather(std::clamp(s.second / s.first, 0.0, 1.0));
        }
        if (previous) {
            weather[d] = *previous;
        }
    }

    RepairLog log;
    const HourlyChannels original = data;
    for (std::size_t i = 0; i < n; ++i) {
        if (!flag[i]) {
            continue;
        }
        RepairEntry entry{time_at(i), *flag[i], false};
        const auto wit = weather.find(day_of[i]);
        if (wit != weather.end()) {
            double sp = 0.0;
            double sg = 0.0;
            double sd = 0.0;
            std::size_t used = 0;
            for (std::size_t back = 1; back <= rule.search_days && used < rule.reference_days; ++back) {
                if (back * 24 > i) {
                    break;
                }
                const std::size_t j = i - back * 24;
                const auto wj = weather.find(day_of[j]);
                if (flag[j] || wj == weather.end() || wj->second != wit->second ||
                    is_missing(original.power[j]) || is_missing(original.ghi[j]) || is_missing(original.dhi[j])) {
                    continue;
                }
                sp += original.power[j];
                sg += original.ghi[j];
                sd += original.dhi[j];
                ++used;
            }
            if (used > 0) {
                const double k = static_cast<double>(used);
                if (entry.target == RepairTarget::Power) {
                    data.power[i] = sp / k;
                } else {
                    data.ghi[i] = sg / k;
                    data.dhi[i] = sd / k;
                }
                entry.repaired = true;
            }
        }
        log.entries.push_back(entry);
    }
    return log;
}

} // namespace pvfc::ingest
