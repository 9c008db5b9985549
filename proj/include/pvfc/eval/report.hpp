#pragma once

#include "pvfc/core/csv.hpp"
#include "pvfc/core/error.hpp"
#include "pvfc/eval/metrics.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

namespace pvfc::eval {

/// Scores of one (plant, method, mode) combination.
struct GridCell {
    std::string plant;
    std::string method;
    std::string mode;
    WeatherBreakdown scores;
};

struct GridSpec {
    std::vector<std::string> plants;
    std::vector<std::string> methods;
    std::vector<std::string> modes;
};

struct ReportRow {
    std::string plant;
    std::string method;
    std::string mode;
    std::string weather; // overall | sunny | cloudy | rainy
    std::string metric;  // NMAE | NRMSE
    std::optional<double> value;
    bool best = false;
};

inline const std::vector<std::string>& weather_slices() {
    static const std::vector<std::string> slices{"overall", "sunny", "cloudy", "rainy"};
    return slices;
}

inline const std::vector<std::string>& metric_names() {
    static const std::vector<std::string> names{"NMAE", "NRMSE"};
    return names;
}

/// Long-format cross-tab of the grid. Within each (plant, mode, weather,
/// metric) row the lowest value over methods is flagged best; ties flag
/// every minimum.
struct EvaluationReport {
    GridSpec grid;
    std::vector<ReportRow> rows;
    std::map<std::string, std::map<std::string, double>> shares; // plant → weather → percent

    const ReportRow* find(const std::string& plant, const std::string& method, const std::string& mode,
                          const std::string& weather, const std::string& metric) const {
        for (const auto& r : rows) {
            if (r.plant == plant && r.method == method && r.mode == mode && r.weather == weather &&
                r.metric == metric) {
                return &r;
            }
        }
        return nullptr;
    }

    std::string to_csv() const {
        std::string out = "plant,method,mode,weather,metric,value\n";
        for (const auto& r : rows) {
            out += r.plant + "," + r.method + "," + r.mode + "," + r.weather + "," + r.metric + "," +
                   (r.value ? csv::format_fixed(*r.value, 2) : std::string()) + "\n";
        }
        return out;
    }

    nlohmann::json to_json() const {
        nlohmann::json plants = nlohmann::json::object();
        for (const auto& r : rows) {
            nlohmann::json& cell = plants[r.plant]["methods"][r.method][r.mode][r.weather][r.metric];
            cell["value"] = r.value ? nlohmann::json(*r.value) : nlohmann::json(nullptr);
            cell["best"] = r.best;
        }
        for (const auto& [plant, s] : shares) {
            plants[plant]["weather_share_percent"] = s;
        }
        return {{"grid", {{"plants", grid.plants}, {"methods", grid.methods}, {"modes", grid.modes}}},
                {"plants", plants}};
    }

    /// Overall scores, one row per plant and one column per method/mode/metric.
    std::string plot_csv() const {
        std::string out = "plant";
        for (const auto& mode : grid.modes) {
            for (const auto& method : grid.methods) {
                for (const auto& metric : metric_names()) {
                    out += "," + method + "/" + mode + "/" + metric;
                }
            }
        }
        out += "\n";
        for (const auto& plant : grid.plants) {
            out += plant;
            for (const auto& mode : grid.modes) {
                for (const auto& method : grid.methods) {
                    for (const auto& metric : metric_names()) {
                        const ReportRow* r = find(plant, method, mode, "overall", metric);
                        out += "," + (r && r->value ? csv::format_fixed(*r->value, 2) : std::string());
                    }
                }
            }
            out += "\n";
        }
        return out;
    }

    /// Markdown tables: per mode, plants × methods overall; per mode and
    /// plant, weather × methods. Best values carry a trailing `*`.
    std::string to_tables() const {
        std::ostringstream os;
        auto cell = [&](const std::string& plant, const std::string& method, const std::string& mode,
                        const std::string& weather) {
            std::string s;
            for (const auto& metric : metric_names()) {
                const ReportRow* r = find(plant, method, mode, weather, metric);
                if (!s.empty()) {
                    s += " / ";
                }
                s += r && r->value ? csv::format_fixed(*r->value, 2) + (r->best ? "*" : "") : "absent";
            }
            return s;
        };
        auto header = [&](const std::string& first) {
            os << "| " << first << " |";
            for (const auto& m : grid.methods) {
                os << ' ' << m << " |";
            }
            os << "\n|---|";
            for (std::size_t i = 0; i < grid.methods.size(); ++i) {
                os << "---|";
            }
            os << '\n';
        };
        for (const auto& mode : grid.modes) {
            os << "## Scores, meteorology " << mode << " (NMAE % / NRMSE %)\n\n";
            header("plant");
            for (const auto& plant : grid.plants) {
                os << "| " << plant << " |";
                for (const auto& method : grid.methods) {
                    os << ' ' << cell(plant, method, mode, "overall") << " |";
                }
                os << '\n';
            }
            os << '\n';
        }
        for (const auto& mode : grid.modes) {
            for (const auto& plant : grid.plants) {
                os << "## Weather breakdown, " << plant << ", meteorology " << mode << "\n\n";
                header("weather");
                for (const auto& w : weather_slices()) {
                    std::string label = w;
                    const auto sp = shares.find(plant);
                    if (w != "overall" && sp != shares.end() && sp->second.contains(w)) {
                        label += " (" + csv::format_fixed(sp->second.at(w), 2) + "%)";
                    }
                    os << "| " << label << " |";
                    for (const auto& method : grid.methods) {
                        os << ' ' << cell(plant, method, mode, w) << " |";
                    }
                    os << '\n';
                }
                os << '\n';
            }
        }
        return os.str();
    }
};

/// Builds the report for a full plants × methods × modes grid; a missing
/// combination raises IncompleteGrid listing every gap.
inline EvaluationReport compare_methods(const std::vector<GridCell>& cells, const GridSpec& grid) {
    require(!grid.plants.empty() && !grid.methods.empty() && !grid.modes.empty(), ErrorCode::IncompleteGrid,
            "grid has an empty axis");
    using Key = std::tuple<std::string, std::string, std::string>;
    std::map<Key, const GridCell*> by_key;
    for (const auto& c : cells) {
        by_key[{c.plant, c.method, c.mode}] = &c;
    }
    std::string missing;
    for (const auto& plant : grid.plants) {
        for (const auto& method : grid.methods) {
            for (const auto& mode : grid.modes) {
                if (!by_key.contains({plant, method, mode})) {
                    missing += (missing.empty() ? "" : ", ") + plant + "/" + method + "/" + mode;
                }
            }
        }
    }
    require(missing.empty(), ErrorCode::IncompleteGrid, "grid cells missing: " + missing);

    EvaluationReport report;
    report.grid = grid;
    for (const auto& plant : grid.plants) {
        for (const auto& mode : grid.modes) {
            for (const auto& weather : weather_slices()) {
                for (const auto& metric : metric_names()) {
                    const std::size_t first = report.rows.size();
                    for (const auto& method : grid.methods) {
                        const GridCell& c = *by_key.at({plant, method, mode});
                        std::optional<Scores> s;
                        if (weather == "overall") {
                            s = c.scores.overall;
                        } else {
                            s = c.scores.by_class.at(features::parse_weather(weather));
                        }
                        std::optional<double> v;
                        if (s) {
                            v = metric == "NMAE" ? s->nmae : s->nrmse;
                        }
                        report.rows.push_back({plant, method, mode, weather, metric, v, false});
                    }
                    std::optional<double> best;
                    for (std::size_t i = first; i < report.rows.size(); ++i) {
                        const auto& v = report.rows[i].value;
                        if (v && (!best || *v < *best)) {
                            best = v;
                        }
                    }
                    for (std::size_t i = first; i < report.rows.size(); ++i) {
                        report.rows[i].best = best && report.rows[i].value && *report.rows[i].value == *best;
                    }
                }
            }
        }
        const GridCell& any = *by_key.at({plant, grid.methods.front(), grid.modes.front()});
        for (const auto& [w, pct] : any.scores.share_percent) {
            report.shares[plant][std::string(features::weather_name(w))] = pct;
        }
    }
    return report;
}

} // namespace pvfc::eval
