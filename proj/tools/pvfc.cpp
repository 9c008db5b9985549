#include "pvfc/cli/commands.hpp"
#include "pvfc/version.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

namespace {

using pvfc::cli::Options;

int exit_code(pvfc::ErrorCategory c) {
    switch (c) {
    case pvfc::ErrorCategory::Config: return 2;
    case pvfc::ErrorCategory::Data: return 3;
    case pvfc::ErrorCategory::Numeric: return 4;
    }
    return 4;
}

int report(int code, std::string_view error, std::string_view category, const std::string& message) {
    const nlohmann::json j{{"error", error}, {"category", category}, {"message", message}, {"exit_code", code}};
    std::cerr << j.dump() << '\n';
    return code;
}

std::string_view category_name(pvfc::ErrorCategory c) {
    switch (c) {
    case pvfc::ErrorCategory::Config: return "config";
    case pvfc::ErrorCategory::Data: return "data";
    case pvfc::ErrorCategory::Numeric: return "numeric";
    }
    return "numeric";
}

struct RawFlags {
    std::string seed;
    std::string jobs;
    std::string method;
    std::string mode;
    std::string aggregate;
    std::string periods;
    std::string plants;
};

std::uint64_t parse_u64(const std::string& s, const char* flag) {
    try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(s, &used);
        if (used == s.size() && s.find('-') == std::string::npos) {
            return v;
        }
    } catch (const std::exception&) {
    }
    pvfc::fail(pvfc::ErrorCode::ConfigError, std::string(flag) + " expects a non-negative integer, got '" + s + "'");
}

Options finish(const Options& base, const RawFlags& raw, CLI::App& sub) {
    Options o = base;
    if (sub.count("--seed")) {
        o.seed = parse_u64(raw.seed, "--seed");
    }
    if (sub.count("--jobs")) {
        o.jobs = parse_u64(raw.jobs, "--jobs");
        pvfc::require(*o.jobs >= 1, pvfc::ErrorCode::ConfigError, "--jobs must be at least 1");
    }
    if (sub.count("--method")) {
        for (const auto& m : pvfc::cli::split_list(raw.method)) {
            pvfc::forecast::parse_strategy(m);
        }
        o.method = raw.method;
    }
    if (sub.count("--mode")) {
        for (const auto& m : pvfc::cli::split_list(raw.mode)) {
            pvfc::features::parse_mode(m);
        }
        o.mode = raw.mode;
    }
    if (sub.count("--aggregate")) {
        for (const auto& a : pvfc::cli::split_list(raw.aggregate)) {
            pvfc::eval::parse_aggregate(a);
        }
        o.aggregate = raw.aggregate;
    }
    if (sub.count("--periods")) {
        std::vector<std::size_t> periods;
        for (const auto& p : pvfc::cli::split_list(raw.periods)) {
            periods.push_back(parse_u64(p, "--periods"));
        }
        pvfc::require(!periods.empty(), pvfc::ErrorCode::ConfigError, "--periods needs at least one period");
        o.periods = periods;
    }
    if (sub.count("--plants")) {
        o.plants = pvfc::cli::split_list(raw.plants);
        pvfc::require(!o.plants->empty(), pvfc::ErrorCode::ConfigError, "--plants needs at least one id");
    }
    return o;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Day-ahead PV power forecasting toolkit"};
    app.set_version_flag("--version", std::string(pvfc::kVersion));
    app.require_subcommand(1);

    Options base;
    RawFlags raw;
    std::function<int(const Options&)> action;
    CLI::App* chosen = nullptr;

    struct Spec {
        const char* name;
        const char* help;
        int (*fn)(const Options&);
    };
    const Spec specs[] = {
        {"synth", "Write a synthetic raw dataset", pvfc::cli::cmd_synth},
        {"ingest", "Clean and resample raw records into hourly frames", pvfc::cli::cmd_ingest},
        {"features", "Build feature frames from ingested measurements", pvfc::cli::cmd_features},
        {"decompose", "Decompose the power series of frames", pvfc::cli::cmd_decompose},
        {"train", "Train quantile forecasters for one method and mode", pvfc::cli::cmd_train},
        {"predict", "Forecast the test days with trained models", pvfc::cli::cmd_predict},
        {"evaluate", "Score forecasts and build the report", pvfc::cli::cmd_evaluate},
        {"experiment", "Run the full method x mode grid", pvfc::cli::cmd_experiment},
    };
    for (const Spec& s : specs) {
        CLI::App* sub = app.add_subcommand(s.name, s.help);
        sub->add_option("--config", base.config, "JSON config file");
        sub->add_option("--data", base.data, "Input directory");
        sub->add_option("--out", base.out, "Output directory");
        sub->add_option("--seed", raw.seed, "Global seed (u64)");
        sub->add_option("--jobs", raw.jobs, "Worker threads");
        sub->add_option("--method", raw.method, "raw|stl|mstl|emd|eemd|vmd|vmd-eemd (comma list for experiment)");
        sub->add_option("--periods", raw.periods, "Seasonal periods, comma separated");
        sub->add_option("--mode", raw.mode, "available|unavailable");
        sub->add_option("--aggregate", raw.aggregate, "indiv|sum");
        sub->add_option("--plants", raw.plants, "Plant ids, comma separated");
        const auto fn = s.fn;
        sub->callback([&, sub, fn] {
            chosen = sub;
            action = fn;
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return report(2, "UsageError", "config", e.what());
    }

    try {
        const Options o = finish(base, raw, *chosen);
        return action(o);
    } catch (const pvfc::Error& e) {
        return report(exit_code(e.category()), pvfc::to_string(e.code()), category_name(e.category()), e.what());
    } catch (const std::filesystem::filesystem_error& e) {
        return report(3, "IoError", "data", e.what());
    } catch (const nlohmann::json::exception& e) {
        return report(2, "ConfigError", "config", e.what());
    } catch (const std::exception& e) {
        return report(4, "InternalError", "numeric", e.what());
    }
}
