#pragma once

// Command-line front end.
//
//   sdetest simulate --model sin1d --theta 1 --sigma 0.1 --T 1 --delta 0.01 --seed 42 -o path.csv
//   sdetest test --variant 1d-centered-known --sigma0-sq 0.01 --alpha 0.05 -i path.csv
//   sdetest power --config scenario.cfg -o curve.csv
//
// Exit codes: 0 accept / success, 10 reject, 2 usage or configuration error,
// 3 data error, 1 internal failure.

#include <CLI11.hpp>

#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "sdetest/errors.hpp"
#include "sdetest/harness.hpp"
#include "sdetest/models.hpp"
#include "sdetest/outcome.hpp"
#include "sdetest/path_csv.hpp"
#include "sdetest/procedure.hpp"
#include "sdetest/scenario.hpp"
#include "sdetest/simulate.hpp"

namespace sdetest {

enum ExitCode : int { kExitAccept = 0, kExitInternal = 1, kExitUsage = 2, kExitData = 3, kExitReject = 10 };

namespace detail {

inline std::vector<double> parse_list_flag(const std::string& flag, const std::string& text) {
    std::vector<double> out;
    for (auto item : split_list(text)) {
        try {
            out.push_back(parse_double(item));
        } catch (const DataError&) {
            throw ConfigError(flag + ": not a number list: '" + text + "'");
        }
    }
    return out;
}

inline void write_file(const std::string& file, const std::string& content) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw DataError("cannot open '" + file + "' for writing");
    out << content;
    if (!out) throw DataError("failed writing '" + file + "'");
}

inline std::string metadata_text(const std::map<std::string, std::string>& entries) {
    std::ostringstream out;
    write_metadata(out, entries);
    return out.str();
}

struct SimulateArgs {
    std::string model = "sin1d";
    std::string theta = "1";
    std::string sigma;
    std::string x0;
    double horizon = 1.0;
    double delta = 0.01;
    std::optional<double> fine_step;
    std::uint64_t seed = 0;
    std::string output;
};

struct TestArgs {
    std::string variant;
    std::string sigma0_sq;
    double alpha = 0.05;
    std::string input;
    std::optional<std::string> model;
    std::string theta = "1";
    std::optional<double> beta;
    std::optional<double> eta;
    std::optional<double> approx_constant;
    std::optional<std::size_t> n_e;
};

struct PowerArgs {
    std::string config;
    std::string output;
    unsigned threads = 0;
    bool full_fidelity = false;
};

inline int run_simulate(const SimulateArgs& a, std::ostream& out) {
    const ModelInfo& info = model_info(a.model);
    SimConfig cfg;
    cfg.sigma = parse_list_flag("--sigma", a.sigma);
    if (cfg.sigma.size() == 1 && info.dimension > 1) cfg.sigma.assign(info.dimension, cfg.sigma[0]);
    if (cfg.sigma.size() != info.dimension)
        throw ConfigError("--sigma needs " + std::to_string(info.dimension) + " value(s) for model " + a.model);
    cfg.x0 = a.x0.empty() ? std::vector<double>(info.dimension, 0.0) : parse_list_flag("--x0", a.x0);
    cfg.horizon = a.horizon;
    cfg.obs_step = a.delta;
    cfg.fine_step = a.fine_step.value_or(std::min(0.01, a.delta));
    cfg.seed = a.seed;
    const DriftSpec drift = make_model(a.model, parse_list_flag("--theta", a.theta));
    const PathSample path = simulate(drift, cfg);
    write_path_csv(a.output, path);

    std::map<std::string, std::string> meta{
        {"command", "simulate"},
        {"model", a.model},
        {"theta", join(parse_list_flag("--theta", a.theta))},
        {"sigma", join(cfg.sigma)},
        {"x0", join(cfg.x0)},
        {"T", format_double(cfg.horizon)},
        {"delta", format_double(cfg.obs_step)},
        {"fine_step", format_double(cfg.fine_step)},
        {"seed", std::to_string(cfg.seed)},
    };
    write_file(a.output + ".meta", metadata_text(meta));
    out << "wrote " << path.rows() << " observations to " << a.output << '\n';
    return kExitAccept;
}

inline int run_test(const TestArgs& a, std::ostream& out, std::ostream& err) {
    const TestId id = parse_test_id(a.variant);
    const std::vector<double> sigma0_sq = parse_list_flag("--sigma0-sq", a.sigma0_sq);
    const PathSample path = read_path_csv(a.input);
    const bool multi = id == TestId::MultipleKnown || id == TestId::MultipleEstimated;
    if (multi ? path.dimension() < 2 : path.dimension() != test_dimension(id))
        throw ConfigError(std::string(to_string(id)) + " requires d=" + (multi ? ">=2" : std::to_string(test_dimension(id))) +
                          " input, got d=" + std::to_string(path.dimension()));

    std::string model = a.model.value_or("");
    if (model.empty()) {
        if (id == TestId::StateDependent1D) model = "ou1d";
        else model = path.dimension() == 2 ? "sincos2d" : "sin1d";
    }
    const DriftSpec drift = make_model(model, parse_list_flag("--theta", a.theta), a.approx_constant);
    if (drift.dimension() != path.dimension())
        throw ConfigError(std::string(to_string(id)) + ": model " + model + " is " +
                          std::to_string(drift.dimension()) + "-dimensional but the input has d=" +
                          std::to_string(path.dimension()));

    TestParams params{a.alpha, sigma0_sq, a.beta, a.eta, a.approx_constant, a.n_e};
    const Procedure procedure(id, drift, params, path.increments(), path.delta());
    const TestOutcome outcome = procedure.run(path);
    for (const auto& w : outcome.warnings) err << "warning: " << w << '\n';
    out << to_string(outcome.test_id) << ' ' << format_double(outcome.statistic) << ' '
        << format_double(outcome.critical_value) << ' ' << (outcome.reject ? 1 : 0) << ' '
        << (outcome.p_value ? format_double(*outcome.p_value) : std::string("NA")) << '\n';
    return outcome.reject ? kExitReject : kExitAccept;
}

inline int run_power(const PowerArgs& a, std::ostream& out) {
    Scenario sc = read_scenario(a.config);
    if (a.full_fidelity) sc.sigma_grid_step = 0.001;
    PowerStudySpec spec = to_study(sc, a.config);
    spec.threads = a.threads;
    const PowerCurve curve = estimate_power(spec);
    std::ostringstream csv;
    write_power_csv(csv, curve);
    write_file(a.output, csv.str());
    write_file(a.output + ".meta", metadata_text(scenario_metadata(sc)));
    out << "wrote " << curve.sigma_sq.size() << " grid points to " << a.output << '\n';
    return kExitAccept;
}

}  // namespace detail

/// Parses argv and runs the selected subcommand; returns the process exit code.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Diffusion-coefficient tests for discretely observed SDEs"};
    app.require_subcommand(1);

    detail::SimulateArgs sim;
    auto* simulate_cmd = app.add_subcommand("simulate", "Simulate a model path to CSV");
    simulate_cmd->add_option("--model", sim.model, "sin1d | sincos2d | ou1d")->capture_default_str();
    simulate_cmd->add_option("--theta", sim.theta, "drift parameter(s), comma separated")->capture_default_str();
    simulate_cmd->add_option("--sigma", sim.sigma, "diffusion coefficient(s), comma separated")->required();
    simulate_cmd->add_option("--x0", sim.x0, "initial state, comma separated (default 0)");
    simulate_cmd->add_option("--T", sim.horizon, "time horizon")->capture_default_str();
    simulate_cmd->add_option("--delta", sim.delta, "observation step")->capture_default_str();
    simulate_cmd->add_option("--fine-step", sim.fine_step, "Euler step (default min(0.01, delta))");
    simulate_cmd->add_option("--seed", sim.seed, "random seed")->capture_default_str();
    simulate_cmd->add_option("-o,--output", sim.output, "output CSV")->required();

    detail::TestArgs test;
    auto* test_cmd = app.add_subcommand("test", "Run a test on a path CSV");
    test_cmd->add_option("--variant", test.variant,
                         "1d-noncentered | 1d-centered-known | 1d-centered-estimated | 1d-state-dependent | "
                         "2d-known | 2d-estimated | multi-known | multi-estimated")
        ->required();
    test_cmd->add_option("--sigma0-sq", test.sigma0_sq, "null variance(s), one per coordinate")->required();
    test_cmd->add_option("--alpha", test.alpha, "level")->capture_default_str();
    test_cmd->add_option("-i,--input", test.input, "input CSV")->required();
    test_cmd->add_option("--model", test.model, "drift model (default sin1d, sincos2d for d=2, ou1d for state tests)");
    test_cmd->add_option("--theta", test.theta, "drift parameter(s)")->capture_default_str();
    test_cmd->add_option("--beta", test.beta, "Type II target for separability diagnostics");
    test_cmd->add_option("--eta", test.eta, "slack for the state-dependent test, in (0, 1)");
    test_cmd->add_option("--K", test.approx_constant, "drift approximation constant");
    test_cmd->add_option("--n-e", test.n_e, "fit window for 2d-estimated (default n/2, made odd)");

    detail::PowerArgs power;
    auto* power_cmd = app.add_subcommand("power", "Estimate power curves from a scenario file");
    power_cmd->add_option("--config", power.config, "scenario file")->required();
    power_cmd->add_option("-o,--output", power.output, "output CSV")->required();
    power_cmd->add_option("--threads", power.threads, "worker threads (0: all cores)")->capture_default_str();
    power_cmd->add_flag("--full-fidelity", power.full_fidelity, "use a sigma grid step of 0.001");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitAccept;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (simulate_cmd->parsed()) return detail::run_simulate(sim, out);
        if (test_cmd->parsed()) return detail::run_test(test, out, err);
        return detail::run_power(power, out);
    } catch (const DataError& e) {
        err << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const LengthError& e) {
        err << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const ZeroDesignError& e) {
        err << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "failure: " << e.what() << '\n';
        return kExitInternal;
    }
}

}  // namespace sdetest
