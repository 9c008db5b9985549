#pragma once

#include "pvfc/core/error.hpp"
#include "pvfc/core/time_series.hpp"
#include "pvfc/ingest/records.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace pvfc::ingest {

struct Bounds {
    double min = 0.0;
    double max = 0.0;
};

/// Physically admissible range per canonical column.
struct PhysicalBounds {
    std::map<std::string, Bounds> ranges;

    static PhysicalBounds defaults(double array_rating_kw) {
        PhysicalBounds b;
        b.ranges[columns::kPower] = {0.0, array_rating_kw};
        b.ranges[columns::kGhi] = {0.0, 1500.0};
        b.ranges[columns::kDhi] = {0.0, 1500.0};
        b.ranges[columns::kHumidity] = {0.0, 100.0};
        b.ranges[columns::kTemperature] = {-10.0, 60.0};
        b.ranges[columns::kRainfall] = {0.0, 500.0};
        b.ranges[columns::kZenith] = {0.0, 180.0};
        b.ranges[columns::kAzimuth] = {0.0, 360.0};
        b.validate();
        return b;
    }

    void validate() const {
        for (const auto& [name, r] : ranges) {
            require(r.min < r.max, ErrorCode::InvalidArgument, "bounds for '" + name + "' need min < max");
        }
    }
};

struct GapRun {
    std::string plant_id;
    Timestamp start;
    std::size_t length = 0;
};

struct ColumnCleaning {
    std::size_t clamped_low = 0;
    std::size_t clamped_high = 0;
    std::size_t filled = 0;
    std::size_t unfilled = 0;
    std::vector<GapRun> unfilled_runs;
};

struct CleaningLog {
    std::map<std::string, ColumnCleaning> columns;

    nlohmann::json to_json() const {
        nlohmann::json j = nlohmann::json::object();
        for (const auto& [name, c] : columns) {
            nlohmann::json runs = nlohmann::json::array();
            for (const auto& r : c.unfilled_runs) {
                runs.push_back({{"plant_id", r.plant_id}, {"start", format_iso(r.start)}, {"length", r.length}});
            }
            j[name] = {{"clamped_low", c.clamped_low},
                       {"clamped_high", c.clamped_high},
                       {"filled", c.filled},
                       {"unfilled", c.unfilled},
                       {"unfilled_runs", std::move(runs)}};
        }
        return j;
    }
};

struct CleanResult {
    RawRecordSet records;
    CleaningLog log;
};

/// Longest interior run of missing samples that gets linearly interpolated.
inline constexpr std::size_t kMaxInterpolatedRun = 6;

namespace detail {

/// Fills interior runs of at most `max_run` missing samples by linear
/// interpolation in time. `rows` lists the record indices of one plant in
/// time order. Gaps in the timestamp grid count towards the run length.
inline void interpolate_runs(std::vector<double>& v, const std::vector<Timestamp>& ts,
                             const std::vector<std::size_t>& rows, std::int64_t step,
                             std::size_t max_run, const std::string& plant, ColumnCleaning& log) {
    std::size_t k = 0;
    while (k < rows.size()) {
        if (!is_missing(v[rows[k]])) {
            ++k;
            continue;
        }
        std::size_t end = k;
        while (end < rows.size() && is_missing(v[rows[end]])) {
            ++end;
        }
        const bool interior = k > 0 && end < rows.size();
        std::size_t run = end - k;
        if (interior) {
            run = static_cast<std::size_t>((ts[rows[end]] - ts[rows[k - 1]]).count() / step) - 1;
        }
        if (interior && run <= max_run) {
            const double t0 = static_cast<double>(ts[rows[k - 1]].time_since_epoch().count());
            const double t1 = static_cast<double>(ts[rows[end]].time_since_epoch().count());
            const double y0 = v[rows[k - 1]];
            const double y1 = v[rows[end]];
            for (std::size_t m = k; m < end; ++m) {
                const double t = static_cast<double>(ts[rows[m]].time_since_epoch().count());
                v[rows[m]] = y0 + (y1 - y0) * (t - t0) / (t1 - t0);
                ++log.filled;
            }
        } else {
            log.unfilled += end - k;
            log.unfilled_runs.push_back({plant, ts[rows[k]], end - k});
        }
        k = end;
    }
}

} // namespace detail

/// Clamps out-of-bounds values and fills short interior gaps. Longer and
/// boundary gaps stay missing and are reported in the log.
inline CleanResult clean(const RawRecordSet& records, const PhysicalBounds& bounds,
                         std::size_t max_run = kMaxInterpolatedRun) {
    bounds.validate();
    CleanResult out{records, {}};
    for (const auto& [name, v] : records.values) {
        require(bounds.ranges.contains(name), ErrorCode::InvalidArgument,
                "no physical bounds for column '" + name + "'");
    }

    std::map<std::string, std::vector<std::size_t>> rows_by_plant;
    for (std::size_t i = 0; i < records.size(); ++i) {
        rows_by_plant[records.plant_ids[i]].push_back(i);
    }
    std::map<std::string, std::int64_t> step_by_plant;
    for (const auto& [plant, rows] : rows_by_plant) {
        std::int64_t step = 0;
        for (std::size_t k = 1; k < rows.size(); ++k) {
            const auto s = (records.timestamps[rows[k]] - records.timestamps[rows[k - 1]]).count();
            if (s > 0 && (step == 0 || s < step)) {
                step = s;
            }
        }
        step_by_plant[plant] = step == 0 ? 1 : step;
    }

    for (auto& [name, values] : out.records.values) {
        const Bounds b = bounds.ranges.at(name);
        ColumnCleaning& log = out.log.columns[name];
        for (double& x : values) {
            if (is_missing(x)) {
                continue;
            }
            if (x < b.min) {
                x = b.min;
                ++log.clamped_low;
            } else if (x > b.max) {
                x = b.max;
                ++log.clamped_high;
            }
        }
        for (const auto& [plant, rows] : rows_by_plant) {
            detail::interpolate_runs(values, records.timestamps, rows, step_by_plant.at(plant), max_run,
                                     plant, log);
        }
    }
    return out;
}

/// Hourly means of a sub-hourly series. An hour with more than half of its
/// samples missing is missing. Samples past the end of the series count as
/// missing. Hours are local wall-clock hours at the given UTC offset.
inline TimeSeries resample_hourly(const TimeSeries& series, int utc_offset_minutes = 0) {
    const auto res = series.resolution().count();
    require(res > 0 && 3600 % res == 0, ErrorCode::InvalidArgument,
            "resolution must divide one hour");
    require((series.start().time_since_epoch().count() + std::int64_t{utc_offset_minutes} * 60) % 3600 == 0,
            ErrorCode::MisalignedStart,
            "series must start on an hour boundary");
    const auto per_hour = static_cast<std::size_t>(3600 / res);
    const std::size_t hours = (series.size() + per_hour - 1) / per_hour;
    std::vector<double> out(hours, kMissing);
    for (std::size_t h = 0; h < hours; ++h) {
        double sum = 0.0;
        std::size_t present = 0;
        for (std::size_t k = 0; k < per_hour; ++k) {
            const std::size_t i = h * per_hour + k;
            if (i < series.size() && !is_missing(series[i])) {
                sum += series[i];
                ++present;
            }
        }
        const std::size_t missing = per_hour - present;
        if (2 * missing <= per_hour && present > 0) {
            out[h] = sum / static_cast<double>(present);
        }
    }
    return TimeSeries(series.start(), kHour, std::move(out), series.unit());
}

} // namespace pvfc::ingest
