#pragma once

// Monte-Carlo power curves: for each σ² on a grid, simulate N paths and record
// the proportion rejected by each test. Replicate (g, r) draws its noise from
// the stream keyed base_seed ^ (g << 40 | r), so results do not depend on
// evaluation order or thread count.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <map>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>
#include <unordered_set>
#include <vector>

#include "sdetest/drift.hpp"
#include "sdetest/errors.hpp"
#include "sdetest/outcome.hpp"
#include "sdetest/path_csv.hpp"
#include "sdetest/procedure.hpp"
#include "sdetest/simulate.hpp"

namespace sdetest {

struct PowerStudySpec {
    std::string label;
    DriftSpec model = DriftSpec::zero(1);  // simulated drift, also the drift known to the tests
    SimConfig sim;                         // sigma[varied_coordinate] is overwritten per grid point
    std::size_t varied_coordinate = 0;
    std::vector<double> sigma_sq_grid;
    std::size_t replicates = 5000;
    std::vector<TestId> tests;
    TestParams params;
    std::uint64_t base_seed = 0;
    unsigned threads = 0;  // 0: hardware concurrency

    void validate() const {
        if (replicates < 1) throw ConfigError("N must be >= 1");
        if (replicates >= (std::uint64_t{1} << 40)) throw ConfigError("N must be < 2^40");
        if (sigma_sq_grid.empty()) throw ConfigError("sigma grid is empty");
        if (sigma_sq_grid.size() >= (std::size_t{1} << 24)) throw ConfigError("sigma grid too long");
        for (std::size_t g = 0; g < sigma_sq_grid.size(); ++g) {
            if (!(sigma_sq_grid[g] >= 0.0) || !std::isfinite(sigma_sq_grid[g]))
                throw ConfigError("sigma grid values must be finite and >= 0");
            if (g > 0 && !(sigma_sq_grid[g] > sigma_sq_grid[g - 1]))
                throw ConfigError("sigma grid must be strictly increasing");
        }
        if (tests.empty()) throw ConfigError("no tests selected");
        if (varied_coordinate >= sim.dimension()) throw ConfigError("varied coordinate out of range");
        sim.validate();
    }
};

struct PowerCurve {
    std::vector<double> sigma_sq;
    std::vector<TestId> tests;
    std::vector<std::vector<double>> power;  // [grid][test]
    std::vector<std::vector<double>> mc_se;  // √(p(1-p)/N)
    std::size_t replicates = 0;

    std::size_t test_index(TestId id) const {
        for (std::size_t t = 0; t < tests.size(); ++t)
            if (tests[t] == id) return t;
        throw ConfigError("test " + std::string(to_string(id)) + " not in curve");
    }
    double power_at(std::size_t grid, TestId id) const { return power.at(grid).at(test_index(id)); }
    double se_at(std::size_t grid, TestId id) const { return mc_se.at(grid).at(test_index(id)); }

    bool operator==(const PowerCurve&) const = default;
};

/// Replicate failure, tagged with its grid point and replicate index.
class HarnessError : public Error {
public:
    HarnessError(std::size_t grid, std::size_t replicate, double sigma_sq, const std::string& cause)
        : Error("grid point " + std::to_string(grid) + " (sigma_sq=" + format_double(sigma_sq) + "), replicate " +
                std::to_string(replicate) + ": " + cause),
          grid_(grid),
          replicate_(replicate) {}
    std::size_t grid() const noexcept { return grid_; }
    std::size_t replicate() const noexcept { return replicate_; }

private:
    std::size_t grid_;
    std::size_t replicate_;
};

inline std::uint64_t replicate_key(std::uint64_t base_seed, std::size_t grid, std::size_t replicate) {
    return base_seed ^ ((static_cast<std::uint64_t>(grid) << 40) | static_cast<std::uint64_t>(replicate));
}

/// Every stream key a study uses, in (grid, replicate) order.
inline std::vector<std::uint64_t> stream_keys(const PowerStudySpec& spec) {
    std::vector<std::uint64_t> keys;
    keys.reserve(spec.sigma_sq_grid.size() * spec.replicates);
    for (std::size_t g = 0; g < spec.sigma_sq_grid.size(); ++g)
        for (std::size_t r = 0; r < spec.replicates; ++r) keys.push_back(replicate_key(spec.base_seed, g, r));
    return keys;
}

inline bool stream_keys_unique(const PowerStudySpec& spec) {
    const auto keys = stream_keys(spec);
    std::unordered_set<std::uint64_t> seen(keys.begin(), keys.end());
    return seen.size() == keys.size();
}

inline PowerCurve estimate_power(const PowerStudySpec& spec) {
    spec.validate();
    const std::size_t n = spec.sim.observation_count();
    std::vector<Procedure> procedures;
    for (TestId id : spec.tests) procedures.emplace_back(id, spec.model, spec.params, n, spec.sim.obs_step);

    const std::size_t grid_size = spec.sigma_sq_grid.size();
    const std::size_t tests = procedures.size();
    const std::size_t total = grid_size * spec.replicates;
    unsigned workers = spec.threads ? spec.threads : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, total));

    std::vector<std::vector<std::size_t>> counts(workers, std::vector<std::size_t>(grid_size * tests, 0));
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::atomic<bool> stop{false};

    const auto work = [&](unsigned w) {
        SimConfig cfg = spec.sim;
        try {
            for (std::size_t job = w; job < total; job += workers) {
                const std::size_t g = job / spec.replicates;
                const std::size_t r = job % spec.replicates;
                try {
                    cfg.sigma[spec.varied_coordinate] = std::sqrt(spec.sigma_sq_grid[g]);
                    cfg.seed = replicate_key(spec.base_seed, g, r);
                    const PathSample path = simulate(spec.model, cfg);
                    for (std::size_t t = 0; t < tests; ++t)
                        if (procedures[t].rejects(path)) ++counts[w][g * tests + t];
                } catch (const std::exception& e) {
                    throw HarnessError(g, r, spec.sigma_sq_grid[g], e.what());
                }
                if (stop.load(std::memory_order_relaxed)) return;
            }
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            stop = true;
        }
    };

    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);

    PowerCurve curve;
    curve.sigma_sq = spec.sigma_sq_grid;
    curve.tests = spec.tests;
    curve.replicates = spec.replicates;
    curve.power.assign(grid_size, std::vector<double>(tests));
    curve.mc_se.assign(grid_size, std::vector<double>(tests));
    const double reps = static_cast<double>(spec.replicates);
    for (std::size_t g = 0; g < grid_size; ++g)
        for (std::size_t t = 0; t < tests; ++t) {
            std::size_t hits = 0;
            for (const auto& c : counts) hits += c[g * tests + t];
            const double p = static_cast<double>(hits) / reps;
            curve.power[g][t] = p;
            curve.mc_se[g][t] = std::sqrt(p * (1.0 - p) / reps);
        }
    return curve;
}

/// Type-I rejection rate per test; the spec's grid must be the single null value.
inline std::vector<double> calibrate_type1(const PowerStudySpec& spec) {
    if (spec.sigma_sq_grid.size() != 1) throw ConfigError("calibrate_type1 needs a single grid point");
    const auto& null = spec.params.sigma0_sq;
    if (spec.varied_coordinate >= null.size() ||
        std::abs(spec.sigma_sq_grid[0] - null[spec.varied_coordinate]) > 1e-12 * null[spec.varied_coordinate])
        throw ConfigError("calibrate_type1 must simulate at sigma_sq = sigma0_sq");
    return estimate_power(spec).power[0];
}

/// Evenly spaced grid start, start+step, ... up to stop (inclusive within rounding).
/// Points are rounded to 12 significant digits so 0.004·9 is stored as 0.036.
inline std::vector<double> make_grid(double start, double stop, double step) {
    if (!(step > 0.0)) throw ConfigError("grid step must be > 0");
    if (!(stop >= start)) throw ConfigError("grid stop must be >= start");
    const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    std::vector<double> grid(count);
    char buf[32];
    for (std::size_t k = 0; k < count; ++k) {
        std::snprintf(buf, sizeof buf, "%.12g", start + static_cast<double>(k) * step);
        grid[k] = std::strtod(buf, nullptr);
    }
    return grid;
}

inline void write_power_csv(std::ostream& out, const PowerCurve& curve) {
    out << "sigma_sq";
    for (TestId id : curve.tests) out << ',' << to_string(id) << "_power," << to_string(id) << "_se";
    out << '\n';
    for (std::size_t g = 0; g < curve.sigma_sq.size(); ++g) {
        out << format_double(curve.sigma_sq[g]);
        for (std::size_t t = 0; t < curve.tests.size(); ++t)
            out << ',' << format_double(curve.power[g][t]) << ',' << format_double(curve.mc_se[g][t]);
        out << '\n';
    }
}

/// Flat `key = value` metadata, one entry per line in key order.
inline void write_metadata(std::ostream& out, const std::map<std::string, std::string>& entries) {
    for (const auto& [key, value] : entries) out << key << " = " << value << '\n';
}

}  // namespace sdetest
