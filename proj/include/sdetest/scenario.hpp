#pragma once

// Power-study scenario files: flat `key = value` lines, `#` starts a comment.
//
//   model = sincos2d
//   theta = 1, 1
//   sigma0_sq = 0.01, 1
//   sigma_grid_start = 0.004
//   sigma_grid_stop = 0.36
//   sigma_grid_step = 0.004
//   T = 1
//   delta = 0.01
//   N = 5000
//   tests = 2d-known, multi-known
//   seed = 7

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "sdetest/errors.hpp"
#include "sdetest/harness.hpp"
#include "sdetest/models.hpp"
#include "sdetest/outcome.hpp"
#include "sdetest/path_csv.hpp"

namespace sdetest {

struct Scenario {
    std::string model = "sin1d";
    std::vector<double> theta{1.0};
    std::vector<double> sigma0_sq{0.01};
    double sigma_grid_start = 0.004;
    double sigma_grid_stop = 0.36;
    double sigma_grid_step = 0.004;
    double horizon = 1.0;
    double delta = 0.01;
    double fine_step = 0.01;
    std::size_t replicates = 5000;
    std::vector<TestId> tests{TestId::Noncentered1D, TestId::CenteredKnown1D, TestId::CenteredEstimated1D};
    std::uint64_t seed = 1;
    std::optional<std::size_t> n_e;
    double alpha = 0.05;
    std::optional<double> beta;
    std::optional<double> eta;
    std::optional<double> approx_constant;
    std::vector<double> x0;  // empty: zeros
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split_list(std::string_view s) {
    std::vector<std::string_view> out;
    for (;;) {
        const auto comma = s.find(',');
        out.push_back(trim(s.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        s.remove_prefix(comma + 1);
    }
    return out;
}

inline double config_number(std::string_view key, std::string_view text) {
    try {
        return parse_double(text);
    } catch (const DataError&) {
        throw ConfigError(std::string(key) + ": not a number: '" + std::string(text) + "'");
    }
}

inline std::vector<double> config_numbers(std::string_view key, std::string_view text) {
    std::vector<double> out;
    for (auto item : split_list(text)) out.push_back(config_number(key, item));
    return out;
}

inline std::uint64_t config_unsigned(std::string_view key, std::string_view text) {
    std::uint64_t value = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size())
        throw ConfigError(std::string(key) + ": not a non-negative integer: '" + std::string(text) + "'");
    return value;
}

inline std::string join(const std::vector<double>& values) {
    std::string out;
    for (std::size_t k = 0; k < values.size(); ++k) out += (k ? ", " : "") + format_double(values[k]);
    return out;
}

}  // namespace detail

inline Scenario parse_scenario(std::istream& in) {
    Scenario sc;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view(line);
        if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
        view = detail::trim(view);
        if (view.empty()) continue;
        const auto eq = view.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("scenario line " + std::to_string(line_no) + ": expected key = value");
        const auto key = detail::trim(view.substr(0, eq));
        const auto value = detail::trim(view.substr(eq + 1));
        if (key == "model") sc.model = std::string(value);
        else if (key == "theta") sc.theta = detail::config_numbers(key, value);
        else if (key == "sigma0_sq") sc.sigma0_sq = detail::config_numbers(key, value);
        else if (key == "sigma_grid_start") sc.sigma_grid_start = detail::config_number(key, value);
        else if (key == "sigma_grid_stop") sc.sigma_grid_stop = detail::config_number(key, value);
        else if (key == "sigma_grid_step") sc.sigma_grid_step = detail::config_number(key, value);
        else if (key == "T") sc.horizon = detail::config_number(key, value);
        else if (key == "delta") sc.delta = detail::config_number(key, value);
        else if (key == "fine_step") sc.fine_step = detail::config_number(key, value);
        else if (key == "N") sc.replicates = detail::config_unsigned(key, value);
        else if (key == "seed") sc.seed = detail::config_unsigned(key, value);
        else if (key == "n_e") sc.n_e = detail::config_unsigned(key, value);
        else if (key == "alpha") sc.alpha = detail::config_number(key, value);
        else if (key == "beta") sc.beta = detail::config_number(key, value);
        else if (key == "eta") sc.eta = detail::config_number(key, value);
        else if (key == "K") sc.approx_constant = detail::config_number(key, value);
        else if (key == "x0") sc.x0 = detail::config_numbers(key, value);
        else if (key == "tests") {
            sc.tests.clear();
            for (auto item : detail::split_list(value)) sc.tests.push_back(parse_test_id(item));
        } else {
            throw ConfigError("scenario line " + std::to_string(line_no) + ": unknown key '" + std::string(key) + "'");
        }
    }
    return sc;
}

inline Scenario read_scenario(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot open scenario '" + file + "'");
    return parse_scenario(in);
}

/// The study a scenario describes. The first coordinate's σ² follows the grid;
/// the remaining coordinates are simulated at their null values.
inline PowerStudySpec to_study(const Scenario& sc, const std::string& label = "") {
    const ModelInfo& info = model_info(sc.model);
    const std::size_t d = info.dimension;
    if (sc.sigma0_sq.size() != d)
        throw ConfigError("sigma0_sq needs " + std::to_string(d) + " value(s) for model " + sc.model);
    PowerStudySpec spec;
    spec.label = label.empty() ? sc.model : label;
    spec.model = make_model(sc.model, sc.theta, sc.approx_constant);
    spec.sim.sigma.resize(d);
    for (std::size_t j = 0; j < d; ++j) spec.sim.sigma[j] = std::sqrt(sc.sigma0_sq[j]);
    spec.sim.x0 = sc.x0.empty() ? std::vector<double>(d, 0.0) : sc.x0;
    spec.sim.horizon = sc.horizon;
    spec.sim.obs_step = sc.delta;
    spec.sim.fine_step = sc.fine_step;
    spec.sigma_sq_grid = make_grid(sc.sigma_grid_start, sc.sigma_grid_stop, sc.sigma_grid_step);
    spec.replicates = sc.replicates;
    spec.tests = sc.tests;
    spec.params = TestParams{sc.alpha, sc.sigma0_sq, sc.beta, sc.eta, sc.approx_constant, sc.n_e};
    spec.base_seed = sc.seed;
    return spec;
}

/// Every scenario input as key/value pairs, sufficient to rerun the study.
inline std::map<std::string, std::string> scenario_metadata(const Scenario& sc) {
    std::map<std::string, std::string> m;
    m["model"] = sc.model;
    m["theta"] = detail::join(sc.theta);
    m["sigma0_sq"] = detail::join(sc.sigma0_sq);
    m["sigma_grid_start"] = format_double(sc.sigma_grid_start);
    m["sigma_grid_stop"] = format_double(sc.sigma_grid_stop);
    m["sigma_grid_step"] = format_double(sc.sigma_grid_step);
    m["T"] = format_double(sc.horizon);
    m["delta"] = format_double(sc.delta);
    m["fine_step"] = format_double(sc.fine_step);
    m["N"] = std::to_string(sc.replicates);
    std::string tests;
    for (std::size_t k = 0; k < sc.tests.size(); ++k) tests += (k ? ", " : "") + std::string(to_string(sc.tests[k]));
    m["tests"] = tests;
    m["seed"] = std::to_string(sc.seed);
    m["alpha"] = format_double(sc.alpha);
    if (sc.n_e) m["n_e"] = std::to_string(*sc.n_e);
    if (sc.beta) m["beta"] = format_double(*sc.beta);
    if (sc.eta) m["eta"] = format_double(*sc.eta);
    if (sc.approx_constant) m["K"] = format_double(*sc.approx_constant);
    if (!sc.x0.empty()) m["x0"] = detail::join(sc.x0);
    return m;
}

}  // namespace sdetest
