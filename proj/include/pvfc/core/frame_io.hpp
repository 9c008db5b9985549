#pragma once

#include "pvfc/core/csv.hpp"
#include "pvfc/core/error.hpp"
#include "pvfc/core/feature_frame.hpp"
#include "pvfc/core/time.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace pvfc {

// Frame directory layout:
//   index.csv    one ISO-8601 UTC timestamp per row
//   columns.csv  wide table, one column per time-varying feature; blank = missing
//   meta.json    tags, units, vocabularies, static fields, resolution, UTC offset

inline nlohmann::json frame_meta(const FeatureFrame& frame) {
    nlohmann::json meta;
    meta["resolution_seconds"] = frame.resolution().count();
    meta["utc_offset_minutes"] = frame.utc_offset_minutes();
    meta["rows"] = frame.size();
    nlohmann::json cols = nlohmann::json::array();
    for (const Column& c : frame.columns()) {
        cols.push_back({{"name", c.name},
                        {"tag", c.tag.to_string()},
                        {"unit", c.unit},
                        {"vocabulary", c.vocabulary}});
    }
    meta["columns"] = std::move(cols);
    nlohmann::json statics = nlohmann::json::array();
    for (const StaticField& s : frame.statics()) {
        statics.push_back({{"name", s.name},
                           {"tag", s.tag.to_string()},
                           {"value", s.value},
                           {"unit", s.unit},
                           {"vocabulary", s.vocabulary}});
    }
    meta["static_fields"] = std::move(statics);
    return meta;
}

inline void save_frame(const FeatureFrame& frame, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);

    std::string index = "timestamp\n";
    for (Timestamp t : frame.index()) {
        index += format_iso(t);
        index += '\n';
    }
    csv::write_file(dir / "index.csv", index);

    std::string table;
    for (std::size_t j = 0; j < frame.columns().size(); ++j) {
        const std::string& name = frame.columns()[j].name;
        require(name.find_first_of(",\"\n") == std::string::npos, ErrorCode::InvalidArgument,
                "column name '" + name + "' is not CSV-safe");
        table += (j ? "," : "") + name;
    }
    table += '\n';
    for (std::size_t r = 0; r < frame.size(); ++r) {
        for (std::size_t j = 0; j < frame.columns().size(); ++j) {
            if (j) {
                table += ',';
            }
            table += csv::format_number(frame.columns()[j].data[r]);
        }
        table += '\n';
    }
    csv::write_file(dir / "columns.csv", table);
    csv::write_file(dir / "meta.json", frame_meta(frame).dump(2) + "\n");
}

inline FeatureFrame load_frame(const std::filesystem::path& dir) {
    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(csv::read_file(dir / "meta.json"));
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::IoError, "bad meta.json in " + dir.string() + ": " + e.what());
    }

    const auto index_lines = csv::read_lines(dir / "index.csv");
    require(!index_lines.empty(), ErrorCode::IoError, "index.csv has no header");
    std::vector<Timestamp> index;
    for (std::size_t i = 1; i < index_lines.size(); ++i) {
        if (!index_lines[i].empty()) {
            index.push_back(parse_timestamp(index_lines[i], 0));
        }
    }

    FeatureFrame frame(std::move(index), Duration{meta.at("resolution_seconds").get<std::int64_t>()},
                       meta.at("utc_offset_minutes").get<int>());

    const auto table = csv::read_lines(dir / "columns.csv");
    const auto& cols = meta.at("columns");
    std::vector<std::vector<double>> data(cols.size());
    if (!cols.empty()) {
        require(!table.empty(), ErrorCode::IoError, "columns.csv is empty");
        const auto header = csv::split_record(table.front());
        require(header.size() == cols.size(), ErrorCode::Misaligned,
                "columns.csv header disagrees with meta.json");
        for (std::size_t j = 0; j < cols.size(); ++j) {
            require(header[j] == cols[j].at("name").get<std::string>(), ErrorCode::Misaligned,
                    "columns.csv header disagrees with meta.json");
            data[j].reserve(frame.size());
        }
        for (std::size_t i = 1; i < table.size(); ++i) {
            if (table[i].empty() && cols.size() > 1) {
                continue;
            }
            const auto fields = csv::split_record(table[i]);
            require(fields.size() == cols.size(), ErrorCode::Misaligned,
                    "columns.csv row " + std::to_string(i) + " has wrong width");
            for (std::size_t j = 0; j < cols.size(); ++j) {
                data[j].push_back(csv::parse_number(fields[j]).value_or(kMissing));
            }
        }
    }

    for (std::size_t j = 0; j < cols.size(); ++j) {
        const auto& c = cols[j];
        frame.add_column(Column{c.at("name").get<std::string>(),
                                FeatureTag::parse(c.at("tag").get<std::string>()), std::move(data[j]),
                                c.value("vocabulary", std::vector<std::string>{}),
                                c.value("unit", std::string{})});
    }
    for (const auto& s : meta.value("static_fields", nlohmann::json::array())) {
        frame.add_static(StaticField{s.at("name").get<std::string>(),
                                     FeatureTag::parse(s.at("tag").get<std::string>()),
                                     s.at("value").get<double>(),
                                     s.value("vocabulary", std::vector<std::string>{}),
                                     s.value("unit", std::string{})});
    }
    return frame;
}

} // namespace pvfc
