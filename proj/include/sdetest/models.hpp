#pragma once

// Built-in drift models:
//   sin1d     dX = θ sin t dt + σ dW
//   sincos2d  dX_1 = θ_1 sin t dt + σ_1 dW_1,  dX_2 = θ_2 cos t dt + σ_2 dW_2
//   ou1d      dX = -θ X dt + σ dW

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sdetest/drift.hpp"
#include "sdetest/errors.hpp"

namespace sdetest {

struct ModelInfo {
    std::string_view name;
    std::size_t dimension;
    DriftKind kind;
};

inline constexpr std::array<ModelInfo, 3> kModels{{
    {"sin1d", 1, DriftKind::LinearTime},
    {"sincos2d", 2, DriftKind::LinearTime},
    {"ou1d", 1, DriftKind::StateDependent},
}};

inline const ModelInfo& model_info(std::string_view name) {
    for (const auto& m : kModels)
        if (m.name == name) return m;
    throw ConfigError("unknown model '" + std::string(name) + "' (known: sin1d, sincos2d, ou1d)");
}

/// Drift of a registered model. A single θ is broadcast to every coordinate.
inline DriftSpec make_model(std::string_view name, std::vector<double> theta,
                            std::optional<double> approx_constant = std::nullopt) {
    const ModelInfo& info = model_info(name);
    if (theta.size() == 1 && info.dimension > 1) theta.assign(info.dimension, theta[0]);
    if (theta.size() != info.dimension)
        throw ConfigError("model " + std::string(name) + " takes " + std::to_string(info.dimension) +
                          " theta value(s), got " + std::to_string(theta.size()));
    if (name == "sin1d") return DriftSpec::linear_time({TimeFunction::sine()}, theta);
    if (name == "sincos2d") return DriftSpec::linear_time({TimeFunction::sine(), TimeFunction::cosine()}, theta);
    const double rate = theta[0];
    return DriftSpec::state_dependent({[rate](double x) { return -rate * x; }}, approx_constant.value_or(0.0));
}

}  // namespace sdetest
