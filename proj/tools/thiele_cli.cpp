// Batch front door for the reserving engine: loads a contract config,
// dispatches to the shared library and writes plain-text outputs.  Links
// the C API only.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "thiele.h"

namespace {

struct ContractDeleter {
    void operator()(thiele_contract* c) const { thiele_contract_free(c); }
};
struct ValuesDeleter {
    void operator()(thiele_values* v) const { thiele_values_free(v); }
};
struct FrozenDeleter {
    void operator()(thiele_frozen* f) const { thiele_frozen_free(f); }
};
using ContractPtr = std::unique_ptr<thiele_contract, ContractDeleter>;
using ValuesPtr = std::unique_ptr<thiele_values, ValuesDeleter>;
using FrozenPtr = std::unique_ptr<thiele_frozen, FrozenDeleter>;

[[noreturn]] void die(thiele_status status) {
    std::cerr << "error: " << thiele_last_error() << " (status " << status << ")\n";
    std::exit(1);
}

void check(thiele_status status) {
    if (status != THIELE_OK) die(status);
}

ContractPtr load(const std::string& path) {
    thiele_contract* raw = nullptr;
    check(thiele_contract_load_file(path.c_str(), &raw));
    return ContractPtr(raw);
}

std::string out_file(const std::string& dir, const std::string& name) {
    std::filesystem::create_directories(dir);
    return (std::filesystem::path(dir) / name).string();
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        std::cerr << "error: cannot open '" << path << "'\n";
        std::exit(1);
    }
    out << content;
}

double initial_value(const thiele_contract* c, const thiele_values* v) {
    size_t state = 0, mode = 0;
    check(thiele_contract_initial(c, &state, &mode));
    double out = 0.0;
    check(thiele_values_at(v, 0.0, state, mode, 0.0, &out));
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-state life insurance reserving engine"};
    app.require_subcommand(1);

    std::string contract_path;
    std::string out_dir = ".";
    double step = 1e-3;
    double duration_step = 0.0;
    std::size_t paths = 100000;
    std::uint64_t seed = 1;
    double tol = 1e-6;
    std::size_t mode_jump_cap = 100;
    long mode_jump_limit = -1;
    bool adjusted = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("contract", contract_path, "contract config (JSON)")->required();
        cmd->add_option("--out", out_dir, "output directory");
        cmd->add_option("--step", step, "time step in years");
        cmd->add_option("--duration-step", duration_step, "duration step (semi-Markov)");
        cmd->add_option("--paths", paths, "Monte Carlo path count");
        cmd->add_option("--seed", seed, "random seed");
        cmd->add_option("--tol", tol, "fixed-point tolerance");
        cmd->add_option("--mode-jump-cap", mode_jump_cap, "modification cap per path");
    };

    CLI::App* solve = app.add_subcommand("solve", "solve the Thiele equations");
    add_common(solve);
    CLI::App* solve_nl =
        app.add_subcommand("solve-nonlinear", "solve with the surrender driver");
    add_common(solve_nl);
    CLI::App* simulate = app.add_subcommand("simulate", "dump simulated paths");
    add_common(simulate);
    simulate->add_option("--mode-jump-limit", mode_jump_limit,
                         "kill mode intensities after this many modifications (-1: off)");
    CLI::App* estimate = app.add_subcommand("estimate", "Monte Carlo reserve estimate");
    add_common(estimate);
    estimate->add_flag("--adjusted", adjusted, "value the adjusted cash flow");
    CLI::App* modifications =
        app.add_subcommand("modifications", "adjustment factors and adjusted estimate");
    add_common(modifications);
    CLI::App* verify = app.add_subcommand("verify", "run the verification battery");
    add_common(verify);

    CLI11_PARSE(app, argc, argv);

    ContractPtr contract = load(contract_path);
    size_t n_states = 0, n_modes = 0;
    double horizon = 0.0;
    int semi = 0;
    check(thiele_contract_info(contract.get(), &n_states, &n_modes, &horizon, &semi));
    if (duration_step <= 0.0) duration_step = step;

    if (solve->parsed() || solve_nl->parsed()) {
        thiele_values* raw = nullptr;
        if (solve_nl->parsed())
            check(thiele_solve_surrender(contract.get(), step, tol, 200, &raw));
        else if (semi)
            check(thiele_solve_semimarkov(contract.get(), step, duration_step, &raw));
        else
            check(thiele_solve_markov(contract.get(), step, &raw));
        ValuesPtr values(raw);
        const std::string path = out_file(out_dir, "values.csv");
        check(thiele_values_write_csv(values.get(), path.c_str()));
        std::printf("V(0) = %.10g\n", initial_value(contract.get(), values.get()));
        std::printf("wrote %s\n", path.c_str());
        return 0;
    }

    if (simulate->parsed()) {
        const std::string path = out_file(out_dir, "paths.csv");
        check(thiele_simulate_dump(contract.get(), paths, seed, mode_jump_limit,
                                   path.c_str()));
        std::printf("wrote %s\n", path.c_str());
        return 0;
    }

    if (estimate->parsed()) {
        FrozenPtr frozen;
        int has_surrender = 0;
        check(thiele_contract_has_surrender(contract.get(), &has_surrender));
        if (!semi && (adjusted || has_surrender || n_modes > 1)) {
            thiele_frozen* raw = nullptr;
            check(thiele_frozen_solve(contract.get(), step, &raw));
            frozen.reset(raw);
        }
        const std::string path = out_file(out_dir, "estimate.txt");
        double mean = 0.0, stderr_ = 0.0;
        const auto t0 = std::chrono::steady_clock::now();
        check(thiele_estimate(contract.get(), adjusted ? 1 : 0, paths, seed, frozen.get(),
                              mode_jump_cap, path.c_str(), &mean, &stderr_));
        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - t0;
        std::printf("mean = %.10g  stderr = %.3g  paths = %zu  elapsed = %.2fs\n", mean,
                    stderr_, paths, elapsed.count());
        std::printf("wrote %s\n", path.c_str());
        return 0;
    }

    if (modifications->parsed()) {
        const std::string trace_path = out_file(out_dir, "trace.csv");
        double mean = 0.0, stderr_ = 0.0;
        check(thiele_modifications_run(contract.get(), paths, seed, step, mode_jump_cap,
                                       trace_path.c_str(), &mean, &stderr_));
        double residual = 0.0;
        check(thiele_cantelli_residual(contract.get(), step, 1, &residual));
        char buf[256];
        std::snprintf(buf, sizeof buf,
                      "adjusted_mean: %.17g\nadjusted_stderr: %.17g\npaths: %zu\nseed: "
                      "%llu\ncantelli_grid_residual: %.3g\n",
                      mean, stderr_, paths, static_cast<unsigned long long>(seed), residual);
        write_text(out_file(out_dir, "adjusted_estimate.txt"), buf);
        std::printf("adjusted mean = %.10g  stderr = %.3g  cantelli residual = %.3g\n", mean,
                    stderr_, residual);
        std::printf("wrote %s\n", trace_path.c_str());
        return 0;
    }

    if (verify->parsed()) {
        char* report = nullptr;
        int ok = 0;
        check(thiele_verify(contract.get(), step, paths, seed, mode_jump_cap, &report, &ok));
        std::string text = report ? report : "";
        thiele_string_free(report);
        write_text(out_file(out_dir, "verify.txt"), text);
        std::fputs(text.c_str(), stdout);
        return ok ? 0 : 1;
    }

    return 1;
}
