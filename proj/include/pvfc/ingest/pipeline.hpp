#pragma once

#include "pvfc/core/feature_frame.hpp"
#include "pvfc/core/time_series.hpp"
#include "pvfc/ingest/clean.hpp"
#include "pvfc/ingest/consistency.hpp"
#include "pvfc/ingest/records.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <string>
#include <vector>

namespace pvfc::ingest {

struct IngestResult {
    /// Hourly measurements; power/meteorology tagged unknown, angles known.
    FeatureFrame frame;
    CleaningLog cleaning;
    RepairLog repairs;

    nlohmann::json log_json() const {
        return {{"cleaning", cleaning.to_json()}, {"consistency_repairs", repairs.to_json()}};
    }
};

namespace detail {

/// Pads a series with missing samples so it starts on a local hour.
inline TimeSeries pad_to_hour(const TimeSeries& s, int utc_offset_minutes) {
    const auto res = s.resolution().count();
    const std::int64_t local = s.start().time_since_epoch().count() + std::int64_t{utc_offset_minutes} * 60;
    std::int64_t lead = local % 3600;
    if (lead < 0) {
        lead += 3600;
    }
    if (lead == 0) {
        return s;
    }
    require(lead % res == 0, ErrorCode::MisalignedStart, "samples are not on an hour-compatible grid");
    const auto pad = static_cast<std::size_t>(lead / res);
    std::vector<double> values(pad, kMissing);
    values.insert(values.end(), s.values().begin(), s.values().end());
    return TimeSeries(s.start() - Duration{lead}, s.resolution(), std::move(values), s.unit());
}

} // namespace detail

/// Clean → regular grid → hourly means → consistency repair, for one plant.
inline IngestResult ingest_plant(const RawRecordSet& plant_records, const PlantSpec& plant,
                                 const ConsistencyRule& rule = {}) {
    plant.validate();
    const int offset = plant_records.utc_offset_minutes;
    CleanResult cleaned = clean(plant_records, PhysicalBounds::defaults(plant.array_rating_kw));
    const Duration native = cleaned.records.native_resolution();

    std::map<std::string, TimeSeries> hourly;
    for (const auto& name : canonical_measurements()) {
        if (!cleaned.records.has(name)) {
            continue;
        }
        TimeSeries s = detail::pad_to_hour(cleaned.records.series(name, native), offset);
        hourly.emplace(name, native == kHour ? s : resample_hourly(s, offset));
    }
    require(hourly.contains(columns::kPower) && hourly.contains(columns::kGhi) && hourly.contains(columns::kDhi),
            ErrorCode::MissingColumn, "ingest needs power, GHI and DHI");

    const TimeSeries& power = hourly.at(columns::kPower);
    HourlyChannels channels{
        std::vector<double>(power.values().begin(), power.values().end()),
        std::vector<double>(hourly.at(columns::kGhi).values().begin(), hourly.at(columns::kGhi).values().end()),
        std::vector<double>(hourly.at(columns::kDhi).values().begin(), hourly.at(columns::kDhi).values().end())};
    RepairLog repairs = repair_inconsistent_hours(channels, power.start(), plant.array_rating_kw, offset, rule);

    FeatureFrame frame = FeatureFrame::contiguous(power.start(), kHour, power.size(), offset);
    for (const auto& name : canonical_measurements()) {
        const auto it = hourly.find(name);
        if (it == hourly.end()) {
            continue;
        }
        std::vector<double> data(it->second.values().begin(), it->second.values().end());
        if (name == columns::kPower) {
            data = channels.power;
        } else if (name == columns::kGhi) {
            data = channels.ghi;
        } else if (name == columns::kDhi) {
            data = channels.dhi;
        }
        const bool angle = name == columns::kZenith || name == columns::kAzimuth;
        frame.add_real(name, angle ? FeatureTag::known_real() : FeatureTag::unknown_real(), std::move(data),
                       unit_of(name));
    }
    return IngestResult{std::move(frame), std::move(cleaned.log), std::move(repairs)};
}

} // namespace pvfc::ingest
