#pragma once

#include "pvfc/core/csv.hpp"
#include "pvfc/core/error.hpp"
#include "pvfc/core/time.hpp"
#include "pvfc/core/time_series.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace pvfc::ingest {

namespace columns {
inline constexpr const char* kTimestamp = "timestamp";
inline constexpr const char* kPlantId = "plant_id";
inline constexpr const char* kPower = "power";
inline constexpr const char* kGhi = "ghi";
inline constexpr const char* kDhi = "dhi";
inline constexpr const char* kTemperature = "temperature";
inline constexpr const char* kHumidity = "humidity";
inline constexpr const char* kRainfall = "rainfall";
inline constexpr const char* kZenith = "zenith";
inline constexpr const char* kAzimuth = "azimuth";
} // namespace columns

inline const std::vector<std::string>& canonical_measurements() {
    static const std::vector<std::string> names{columns::kPower,    columns::kGhi,
                                                columns::kDhi,      columns::kTemperature,
                                                columns::kHumidity, columns::kRainfall,
                                                columns::kZenith,   columns::kAzimuth};
    return names;
}

inline std::string unit_of(const std::string& canonical) {
    static const std::map<std::string, std::string> units{
        {columns::kPower, "kW"},        {columns::kGhi, "W/m2"},     {columns::kDhi, "W/m2"},
        {columns::kTemperature, "degC"}, {columns::kHumidity, "%"},   {columns::kRainfall, "mm"},
        {columns::kZenith, "deg"},       {columns::kAzimuth, "deg"}};
    const auto it = units.find(canonical);
    return it == units.end() ? std::string{} : it->second;
}

/// Raw header → canonical name mapping plus parse options.
struct CsvSchema {
    std::map<std::string, std::string> mapping;
    std::vector<std::string> required{columns::kPower,       columns::kGhi,      columns::kDhi,
                                      columns::kTemperature, columns::kHumidity, columns::kRainfall};
    std::string default_plant_id = "plant";
    int utc_offset_minutes = 0;

    /// Accepts either a flat `{raw: canonical}` object or
    /// `{"columns": {...}, "required": [...], "plant_id": ..., "utc_offset_minutes": ...}`.
    static CsvSchema from_json(const nlohmann::json& j) {
        CsvSchema s;
        const nlohmann::json* map = &j;
        if (j.contains("columns") && j.at("columns").is_object()) {
            map = &j.at("columns");
            if (j.contains("required")) {
                s.required = j.at("required").get<std::vector<std::string>>();
            }
            s.default_plant_id = j.value("plant_id", s.default_plant_id);
            s.utc_offset_minutes = j.value("utc_offset_minutes", 0);
        }
        for (const auto& [raw, canonical] : map->items()) {
            require(canonical.is_string(), ErrorCode::ConfigError,
                    "schema entry '" + raw + "' must map to a string");
            s.mapping[raw] = canonical.get<std::string>();
        }
        return s;
    }

    static CsvSchema load(const std::filesystem::path& path) {
        try {
            return from_json(nlohmann::json::parse(csv::read_file(path)));
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorCode::ConfigError, "bad schema " + path.string() + ": " + e.what());
        }
    }

    std::string canonical(const std::string& raw) const {
        const auto it = mapping.find(raw);
        return it == mapping.end() ? raw : it->second;
    }
};

/// Parsed rows of one or more plants. Measurements are stored column-wise;
/// unparseable cells hold the missing sentinel.
struct RawRecordSet {
    std::vector<Timestamp> timestamps;
    std::vector<std::string> plant_ids;
    std::map<std::string, std::vector<double>> values;
    int utc_offset_minutes = 0;

    std::size_t size() const noexcept { return timestamps.size(); }
    bool has(const std::string& name) const { return values.contains(name); }

    const std::vector<double>& column(const std::string& name) const {
        const auto it = values.find(name);
        if (it == values.end()) {
            fail(ErrorCode::MissingColumn, "records have no column '" + name + "'");
        }
        return it->second;
    }

    std::vector<std::string> plants() const {
        std::vector<std::string> out;
        std::set<std::string> seen;
        for (const auto& id : plant_ids) {
            if (seen.insert(id).second) {
                out.push_back(id);
            }
        }
        return out;
    }

    RawRecordSet for_plant(const std::string& id) const {
        RawRecordSet out;
        out.utc_offset_minutes = utc_offset_minutes;
        for (const auto& [name, v] : values) {
            out.values[name];
        }
        for (std::size_t i = 0; i < size(); ++i) {
            if (plant_ids[i] != id) {
                continue;
            }
            out.timestamps.push_back(timestamps[i]);
            out.plant_ids.push_back(id);
            for (const auto& [name, v] : values) {
                out.values[name].push_back(v[i]);
            }
        }
        return out;
    }

    /// Smallest positive timestamp step; the sampling interval of a plant's rows.
    Duration native_resolution() const {
        std::int64_t best = 0;
        for (std::size_t i = 1; i < size(); ++i) {
            if (plant_ids[i] != plant_ids[i - 1]) {
                continue;
            }
            const auto step = (timestamps[i] - timestamps[i - 1]).count();
            if (step > 0 && (best == 0 || step < best)) {
                best = step;
            }
        }
        require(best > 0, ErrorCode::TooShort, "need at least two rows to infer the sampling interval");
        return Duration{best};
    }

    /// Regular series of one column for a single-plant record set. Absent
    /// timestamps become explicit missing samples.
    TimeSeries series(const std::string& name, Duration resolution) const {
        require(!timestamps.empty(), ErrorCode::TooShort, "no records");
        require(plants().size() == 1, ErrorCode::InvalidArgument,
                "series() needs single-plant records; use for_plant()");
        const auto& col = column(name);
        const Timestamp start = timestamps.front();
        const auto span = (timestamps.back() - start).count();
        require(span % resolution.count() == 0, ErrorCode::Misaligned,
                "records are not on a " + std::to_string(resolution.count()) + " s grid");
        std::vector<double> out(static_cast<std::size_t>(span / resolution.count()) + 1, kMissing);
        for (std::size_t i = 0; i < size(); ++i) {
            const auto off = (timestamps[i] - start).count();
            require(off % resolution.count() == 0, ErrorCode::Misaligned,
                    "record " + format_iso(timestamps[i]) + " is off-grid");
            out[static_cast<std::size_t>(off / resolution.count())] = col[i];
        }
        return TimeSeries(start, resolution, std::move(out), unit_of(name));
    }
};

/// Reads a DKASC-style export: header row, `timestamp` column, remaining
/// columns renamed through the schema.
inline RawRecordSet parse_csv_text(std::string_view text, const CsvSchema& schema) {
    std::vector<std::string> lines;
    {
        std::size_t pos = 0;
        while (pos <= text.size()) {
            const std::size_t nl = text.find('\n', pos);
            std::string_view line =
                text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
            if (!line.empty() && line.back() == '\r') {
                line.remove_suffix(1);
            }
            lines.emplace_back(line);
            if (nl == std::string_view::npos) {
                break;
            }
            pos = nl + 1;
        }
    }
    while (!lines.empty() && csv::trim(lines.back()).empty()) {
        lines.pop_back();
    }
    require(!lines.empty(), ErrorCode::MissingColumn, "CSV has no header row");

    const auto header = csv::split_record(lines.front());
    std::map<std::string, std::size_t> position;
    for (std::size_t j = 0; j < header.size(); ++j) {
        position[schema.canonical(std::string(csv::trim(header[j])))] = j;
    }
    require(position.contains(columns::kTimestamp), ErrorCode::MissingColumn,
            "CSV has no 'timestamp' column");
    for (const auto& name : schema.required) {
        require(position.contains(name), ErrorCode::MissingColumn,
                "CSV has no column mapped to '" + name + "'");
    }

    RawRecordSet records;
    records.utc_offset_minutes = schema.utc_offset_minutes;
    std::vector<std::pair<std::string, std::size_t>> measured;
    for (const auto& name : canonical_measurements()) {
        if (const auto it = position.find(name); it != position.end()) {
            measured.emplace_back(name, it->second);
            records.values[name].reserve(lines.size() - 1);
        }
    }
    const auto ts_col = position.at(columns::kTimestamp);
    const auto plant_it = position.find(columns::kPlantId);

    std::map<std::string, Timestamp> last_seen;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (csv::trim(lines[i]).empty()) {
            continue;
        }
        const auto fields = csv::split_record(lines[i]);
        require(ts_col < fields.size(), ErrorCode::MalformedTimestamp,
                "row " + std::to_string(i) + " has no timestamp");
        const Timestamp t = parse_timestamp(fields[ts_col], schema.utc_offset_minutes);
        std::string plant = schema.default_plant_id;
        if (plant_it != position.end() && plant_it->second < fields.size()) {
            plant = std::string(csv::trim(fields[plant_it->second]));
        }
        if (const auto prev = last_seen.find(plant); prev != last_seen.end()) {
            require(t > prev->second, ErrorCode::MalformedTimestamp,
                    "timestamps not strictly increasing at row " + std::to_string(i));
        }
        last_seen[plant] = t;
        records.timestamps.push_back(t);
        records.plant_ids.push_back(std::move(plant));
        for (const auto& [name, j] : measured) {
            const double v = j < fields.size() ? csv::parse_number(fields[j]).value_or(kMissing) : kMissing;
            records.values[name].push_back(v);
        }
    }
    return records;
}

inline RawRecordSet parse_csv(const std::filesystem::path& path, const CsvSchema& schema) {
    return parse_csv_text(csv::read_file(path), schema);
}

/// Static properties of a plant.
struct PlantSpec {
    std::string plant_id;
    std::string manufacturer = "unknown";
    double array_rating_kw = 1.0;
    std::string pv_technology = "unknown";
    std::string array_structure = "unknown";
    int install_year = 2010;

    void validate() const {
        require(array_rating_kw > 0.0, ErrorCode::InvalidArgument,
                "plant '" + plant_id + "' needs a positive array rating");
    }

    nlohmann::json to_json() const {
        return {{"plant_id", plant_id},         {"manufacturer", manufacturer},
                {"array_rating", array_rating_kw}, {"pv_technology", pv_technology},
                {"array_structure", array_structure}, {"install_date", install_year}};
    }

    static PlantSpec from_json(const nlohmann::json& j) {
        PlantSpec p;
        p.plant_id = j.at("plant_id").get<std::string>();
        p.manufacturer = j.value("manufacturer", p.manufacturer);
        p.array_rating_kw = j.at("array_rating").get<double>();
        p.pv_technology = j.value("pv_technology", p.pv_technology);
        p.array_structure = j.value("array_structure", p.array_structure);
        p.install_year = j.value("install_date", p.install_year);
        p.validate();
        return p;
    }
};

} // namespace pvfc::ingest
