#pragma once

#include "pvfc/core/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pvfc::decomp {

enum class Method { STL, MSTL, EMD, EEMD, VMD, VmdEemd };

inline std::string_view method_name(Method m) {
    switch (m) {
    case Method::STL: return "stl";
    case Method::MSTL: return "mstl";
    case Method::EMD: return "emd";
    case Method::EEMD: return "eemd";
    case Method::VMD: return "vmd";
    case Method::VmdEemd: return "vmd-eemd";
    }
    return "unknown";
}

struct Component {
    std::string name;
    std::vector<double> values;
    std::optional<std::size_t> period;           // seasonal components
    std::optional<double> center_frequency;      // VMD modes, cycles per sample
};

/// Named components that add back up to the decomposed series.
struct DecompositionResult {
    Method method = Method::STL;
    std::vector<Component> components;
    std::size_t source_length = 0;
    bool converged = true;
    std::size_t iterations = 0;
    nlohmann::json params = nlohmann::json::object();

    const Component& component(std::string_view name) const {
        for (const auto& c : components) {
            if (c.name == name) {
                return c;
            }
        }
        fail(ErrorCode::MissingColumn, "no component '" + std::string(name) + "'");
    }

    bool has(std::string_view name) const {
        return std::any_of(components.begin(), components.end(),
                           [&](const Component& c) { return c.name == name; });
    }

    /// Pointwise sum of components in order.
    std::vector<double> recompose() const {
        std::vector<double> sum(source_length, 0.0);
        for (const auto& c : components) {
            for (std::size_t i = 0; i < source_length; ++i) {
                sum[i] += c.values[i];
            }
        }
        return sum;
    }

    double max_abs_error(std::span<const double> source) const {
        require(source.size() == source_length, ErrorCode::ShapeMismatch, "source length mismatch");
        const auto sum = recompose();
        double worst = 0.0;
        for (std::size_t i = 0; i < source_length; ++i) {
            worst = std::max(worst, std::abs(sum[i] - source[i]));
        }
        return worst;
    }

    nlohmann::json metadata(std::span<const double> source) const {
        nlohmann::json comps = nlohmann::json::array();
        for (const auto& c : components) {
            nlohmann::json jc{{"name", c.name}};
            if (c.period) {
                jc["period"] = *c.period;
            }
            if (c.center_frequency) {
                jc["center_frequency"] = *c.center_frequency;
            }
            comps.push_back(std::move(jc));
        }
        return {{"method", method_name(method)},
                {"params", params},
                {"components", std::move(comps)},
                {"source_length", source_length},
                {"converged", converged},
                {"iterations", iterations},
                {"reconstruction_max_abs_error", max_abs_error(source)}};
    }
};

} // namespace pvfc::decomp
