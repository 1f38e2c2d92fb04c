#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "sdetest/drift.hpp"
#include "sdetest/errors.hpp"

namespace sdetest {

/// Equidistant observations X_0, X_Δ, ..., X_{nΔ} of a d-dimensional path.
class PathSample {
public:
    PathSample(double delta, std::size_t dimension, std::vector<double> values)
        : delta_(delta), dim_(dimension), values_(std::move(values)) {
        if (!(delta_ > 0.0) || !std::isfinite(delta_)) throw DataError("observation step must be > 0");
        if (dim_ == 0) throw DataError("path dimension must be >= 1");
        if (values_.size() % dim_ != 0) throw DataError("value count is not a multiple of the dimension");
        if (rows() < 2) throw DataError("path needs at least two observations");
        for (std::size_t i = 0; i < values_.size(); ++i)
            if (!std::isfinite(values_[i]))
                throw DataError("non-finite observation", static_cast<long>(i / dim_));
    }

    double delta() const noexcept { return delta_; }
    std::size_t dimension() const noexcept { return dim_; }
    std::size_t rows() const noexcept { return values_.size() / dim_; }
    /// Number of increments n.
    std::size_t increments() const noexcept { return rows() - 1; }
    double at(std::size_t row, std::size_t coord) const { return values_[row * dim_ + coord]; }
    std::span<const double> row(std::size_t i) const { return {values_.data() + i * dim_, dim_}; }
    const std::vector<double>& values() const noexcept { return values_; }

    std::vector<double> column(std::size_t coord) const {
        std::vector<double> out(rows());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = at(i, coord);
        return out;
    }

    /// Observations rows [0, last_row], used to drop a trailing observation.
    PathSample truncated(std::size_t last_row) const {
        return PathSample(delta_, dim_,
                          std::vector<double>(values_.begin(), values_.begin() + (last_row + 1) * dim_));
    }

    bool operator==(const PathSample&) const = default;

private:
    double delta_;
    std::size_t dim_;
    std::vector<double> values_;
};

/// Euler-Maruyama configuration. Σ is diagonal with entries `sigma`.
struct SimConfig {
    std::vector<double> sigma;
    std::vector<double> x0;
    double horizon = 1.0;     // T
    double fine_step = 0.01;  // integration step
    double obs_step = 0.01;   // Δ
    std::uint64_t seed = 0;

    std::size_t dimension() const noexcept { return sigma.size(); }

    /// n = T/Δ, validated to be a positive integer.
    std::size_t observation_count() const {
        const double ratio = horizon / obs_step;
        const double rounded = std::round(ratio);
        if (!(rounded >= 1.0) || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio))
            throw ConfigError("T/Δ must be a positive integer (T=" + std::to_string(horizon) +
                              ", Δ=" + std::to_string(obs_step) + ")");
        return static_cast<std::size_t>(rounded);
    }

    /// Fine steps per observation, validated to be a positive integer.
    std::size_t substeps() const {
        const double ratio = obs_step / fine_step;
        const double rounded = std::round(ratio);
        if (!(rounded >= 1.0) || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio))
            throw ConfigError("Δ must be an integer multiple of the fine step (Δ=" +
                              std::to_string(obs_step) + ", fine=" + std::to_string(fine_step) + ")");
        return static_cast<std::size_t>(rounded);
    }

    void validate() const {
        if (sigma.empty()) throw ConfigError("sigma must have at least one entry");
        if (x0.size() != sigma.size()) throw ConfigError("x0 and sigma lengths differ");
        for (double s : sigma)
            if (!(s >= 0.0) || !std::isfinite(s)) throw ConfigError("sigma entries must be finite and >= 0");
        if (!(horizon > 0.0) || !(fine_step > 0.0) || !(obs_step > 0.0))
            throw ConfigError("T, Δ and fine step must be > 0");
        (void)observation_count();
        (void)substeps();
    }
};

/// Noise stream for one (seed, coordinate) pair. Streams with different keys
/// are seeded independently, so replicates can be simulated in any order.
class NoiseStream {
public:
    NoiseStream(std::uint64_t seed, std::uint64_t coordinate) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(coordinate),
                          static_cast<std::uint32_t>(coordinate >> 32), 0x5de7e57u};
        engine_.seed(seq);
    }

    double next() { return normal_(engine_); }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_;
};

/// Simulate dX = b dt + Σ dW by Euler-Maruyama on the fine grid and keep
/// every Δ/fine_step-th state.
inline PathSample simulate(const DriftSpec& drift, const SimConfig& cfg) {
    cfg.validate();
    const std::size_t d = cfg.dimension();
    if (drift.dimension() != d)
        throw ConfigError("drift dimension " + std::to_string(drift.dimension()) +
                          " does not match sigma dimension " + std::to_string(d));
    if (drift.kind() == DriftKind::LinearTime && !drift.theta())
        throw ConfigError("simulation of a linear drift needs theta");

    const std::size_t n = cfg.observation_count();
    const std::size_t sub = cfg.substeps();
    const double h = cfg.fine_step;
    const double sqrt_h = std::sqrt(h);

    std::vector<double> values((n + 1) * d);
    std::vector<double> state = cfg.x0;
    std::copy(state.begin(), state.end(), values.begin());

    for (std::size_t j = 0; j < d; ++j) {
        NoiseStream noise(cfg.seed, j);
        double x = state[j];
        const double scale = cfg.sigma[j] * sqrt_h;
        std::size_t step = 0;
        for (std::size_t i = 1; i <= n; ++i) {
            for (std::size_t k = 0; k < sub; ++k, ++step) {
                const double t = static_cast<double>(step) * h;
                x += drift.rate(j, t, x) * h + scale * noise.next();
            }
            if (!std::isfinite(x))
                throw SimulationDiverged("simulation diverged in coordinate " + std::to_string(j),
                                         static_cast<double>(step) * h);
            values[i * d + j] = x;
        }
    }
    return PathSample(cfg.obs_step, d, std::move(values));
}

/// ∫_{(i-1)Δ}^{iΔ} b_s ds per coordinate, i >= 1.
inline std::vector<double> drift_integral(const DriftSpec& drift, std::size_t i, double delta) {
    if (drift.kind() == DriftKind::StateDependent)
        throw ConfigError("drift_integral is undefined for a state-dependent drift; use euler_centering_term");
    if (drift.kind() == DriftKind::LinearTime && !drift.theta())
        throw ConfigError("drift_integral needs theta for a linear drift");
    if (i < 1) throw DomainError("drift_integral index starts at 1");
    const double a = static_cast<double>(i - 1) * delta;
    const double b = static_cast<double>(i) * delta;
    std::vector<double> out(drift.dimension());
    for (std::size_t j = 0; j < out.size(); ++j) {
        const double integral = integrate(drift.time_functions()[j], a, b);
        out[j] = drift.kind() == DriftKind::LinearTime ? (*drift.theta())[j] * integral : integral;
    }
    return out;
}

/// Euler approximation Δ·b(x_prev) of the drift integral (state-dependent drift).
inline std::vector<double> euler_centering_term(const DriftSpec& drift, std::span<const double> x_prev,
                                                double delta) {
    if (drift.kind() != DriftKind::StateDependent)
        throw ConfigError("euler_centering_term requires a state-dependent drift");
    if (x_prev.size() != drift.dimension()) throw ConfigError("state dimension mismatch");
    std::vector<double> out(x_prev.size());
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = delta * drift.state_functions()[j](x_prev[j]);
    return out;
}

}  // namespace sdetest
