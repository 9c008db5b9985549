#pragma once

#include "pvfc/core/csv.hpp"
#include "pvfc/core/error.hpp"
#include "pvfc/version.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <filesystem>
#include <string>
#include <vector>

namespace pvfc::cli {

namespace fs = std::filesystem;

/// FNV-1a of a file's bytes, hex encoded.
inline std::string file_hash(const fs::path& path) { return csv::hex64(csv::fnv1a(csv::read_file(path))); }

/// Content hashes of a file, or of every regular file below a directory
/// (keys relative to `path`, sorted).
inline nlohmann::json content_hashes(const fs::path& path) {
    require(fs::exists(path), ErrorCode::IoError, "input '" + path.string() + "' does not exist");
    if (fs::is_regular_file(path)) {
        return {{path.filename().string(), file_hash(path)}};
    }
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(path)) {
        if (e.is_regular_file() && e.path().filename() != "manifest.json") {
            files.push_back(e.path());
        }
    }
    std::sort(files.begin(), files.end());
    nlohmann::json out = nlohmann::json::object();
    for (const auto& f : files) {
        out[fs::relative(f, path).generic_string()] = file_hash(f);
    }
    return out;
}

/// Record of how an artifact directory was produced: command, effective
/// configuration, hashed inputs and the toolkit version.
struct Manifest {
    std::string command;
    nlohmann::json config = nlohmann::json::object();
    nlohmann::json inputs = nlohmann::json::object();
    std::vector<std::string> outputs;

    void add_input(const std::string& role, const fs::path& path) {
        inputs[role] = {{"path", path.string()}, {"hashes", content_hashes(path)}};
    }

    nlohmann::json to_json() const {
        std::vector<std::string> sorted = outputs;
        std::sort(sorted.begin(), sorted.end());
        return {{"command", command},
                {"version", std::string(kVersion)},
                {"config", config},
                {"inputs", inputs},
                {"outputs", sorted}};
    }

    void write(const fs::path& dir) const { csv::write_file(dir / "manifest.json", to_json().dump(2) + "\n"); }
};

inline nlohmann::json read_json(const fs::path& path) {
    require(fs::exists(path), ErrorCode::IoError, "'" + path.string() + "' does not exist");
    try {
        return nlohmann::json::parse(csv::read_file(path));
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::ConfigError, "cannot parse '" + path.string() + "': " + e.what());
    }
}

} // namespace pvfc::cli
