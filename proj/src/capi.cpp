#include "thiele.h"

#include <cstring>
#include <fstream>
#include <string>

#include "thiele/config.hpp"
#include "thiele/errors.hpp"
#include "thiele/modifications.hpp"
#include "thiele/montecarlo.hpp"
#include "thiele/reserve_linear.hpp"
#include "thiele/reserve_nonlinear.hpp"
#include "thiele/simulate.hpp"
#include "thiele/value_function.hpp"
#include "thiele/verify.hpp"

struct thiele_contract {
    thiele::ContractSpec spec;
};
struct thiele_values {
    thiele::ValueFunction vf;
};
struct thiele_frozen {
    thiele::FrozenValues frozen;
};

namespace {

thread_local std::string g_last_error;

thiele_status fail(thiele_status code, const char* what) {
    g_last_error = what;
    return code;
}

// Maps C++ exceptions onto status codes at the C boundary.
template <typename Fn>
thiele_status guarded(Fn&& fn) {
    try {
        fn();
        return THIELE_OK;
    } catch (const thiele::ParseError& e) {
        return fail(THIELE_ERR_PARSE, e.what());
    } catch (const thiele::ValidationError& e) {
        return fail(THIELE_ERR_VALIDATION, e.what());
    } catch (const thiele::SolverError& e) {
        return fail(THIELE_ERR_SOLVER, e.what());
    } catch (const thiele::SimulationError& e) {
        return fail(THIELE_ERR_SIMULATION, e.what());
    } catch (const thiele::ConvergenceError& e) {
        return fail(THIELE_ERR_CONVERGENCE, e.what());
    } catch (const thiele::EquivalenceError& e) {
        return fail(THIELE_ERR_EQUIVALENCE, e.what());
    } catch (const thiele::UsageError& e) {
        return fail(THIELE_ERR_USAGE, e.what());
    } catch (const thiele::IoError& e) {
        return fail(THIELE_ERR_IO, e.what());
    } catch (const std::exception& e) {
        return fail(THIELE_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(THIELE_ERR_INTERNAL, "unknown error");
    }
}

char* dup_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

thiele_status require_arg(bool ok, const char* what) {
    return ok ? THIELE_OK : fail(THIELE_ERR_USAGE, what);
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw thiele::IoError("cannot open output file '" + path + "'");
    out << content;
    if (!out) throw thiele::IoError("write failed for '" + path + "'");
}

} // namespace

extern "C" {

const char* thiele_last_error(void) { return g_last_error.c_str(); }

void thiele_string_free(char* s) { delete[] s; }

thiele_status thiele_contract_load_text(const char* json_text, thiele_contract** out) {
    if (auto s = require_arg(json_text && out, "null argument")) return s;
    return guarded([&] { *out = new thiele_contract{thiele::load_contract(json_text)}; });
}

thiele_status thiele_contract_load_file(const char* path, thiele_contract** out) {
    if (auto s = require_arg(path && out, "null argument")) return s;
    return guarded([&] { *out = new thiele_contract{thiele::load_contract_file(path)}; });
}

void thiele_contract_free(thiele_contract* c) { delete c; }

thiele_status thiele_contract_info(const thiele_contract* c, size_t* n_states,
                                   size_t* n_modes, double* horizon, int* is_semi_markov) {
    if (auto s = require_arg(c != nullptr, "null contract")) return s;
    if (n_states) *n_states = c->spec.n_states();
    if (n_modes) *n_modes = c->spec.n_modes();
    if (horizon) *horizon = c->spec.horizon;
    if (is_semi_markov)
        *is_semi_markov = c->spec.intensities.kind == thiele::ModelKind::semi_markov ? 1 : 0;
    return THIELE_OK;
}

thiele_status thiele_contract_initial(const thiele_contract* c, size_t* state,
                                      size_t* mode) {
    if (auto s = require_arg(c != nullptr, "null contract")) return s;
    if (state) *state = c->spec.states.initial_state;
    if (mode) *mode = c->spec.modes.initial_mode;
    return THIELE_OK;
}

thiele_status thiele_contract_has_surrender(const thiele_contract* c, int* out) {
    if (auto s = require_arg(c && out, "null argument")) return s;
    *out = c->spec.payments.surrender_reserve_fraction.empty() ? 0 : 1;
    return THIELE_OK;
}

thiele_status thiele_contract_validate(const thiele_contract* c, size_t sample_count,
                                       char** report_text, int* all_passed) {
    if (auto s = require_arg(c != nullptr, "null contract")) return s;
    return guarded([&] {
        const thiele::ValidationReport report =
            thiele::validate_assumptions(c->spec, sample_count);
        if (report_text) *report_text = dup_string(report.to_text());
        if (all_passed) *all_passed = report.all_passed() ? 1 : 0;
    });
}

thiele_status thiele_solve_markov(const thiele_contract* c, double step,
                                  thiele_values** out) {
    if (auto s = require_arg(c && out, "null argument")) return s;
    return guarded(
        [&] { *out = new thiele_values{thiele::solve_thiele_markov(c->spec, step)}; });
}

thiele_status thiele_solve_semimarkov(const thiele_contract* c, double step,
                                      double duration_step, thiele_values** out) {
    if (auto s = require_arg(c && out, "null argument")) return s;
    return guarded([&] {
        *out = new thiele_values{
            thiele::solve_thiele_semimarkov(c->spec, step, duration_step)};
    });
}

thiele_status thiele_solve_surrender(const thiele_contract* c, double step,
                                     double picard_tol, int max_iters, thiele_values** out) {
    if (auto s = require_arg(c && out, "null argument")) return s;
    return guarded([&] {
        const thiele::NonlinearDriver driver = thiele::surrender_driver(c->spec);
        *out = new thiele_values{
            thiele::solve_nonlinear_markov(c->spec, driver, step, picard_tol, max_iters)};
    });
}

thiele_status thiele_values_at(const thiele_values* v, double t, size_t state, size_t mode,
                               double duration, double* out) {
    if (auto s = require_arg(v && out, "null argument")) return s;
    return guarded([&] { *out = v->vf.value(t, state, mode, duration); });
}

thiele_status thiele_values_write_csv(const thiele_values* v, const char* path) {
    if (auto s = require_arg(v && path, "null argument")) return s;
    return guarded([&] {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw thiele::IoError(std::string("cannot open output file '") + path + "'");
        v->vf.write_csv(out);
    });
}

void thiele_values_free(thiele_values* v) { delete v; }

thiele_status thiele_simulate_dump(const thiele_contract* c, size_t path_count,
                                   uint64_t seed, long mode_jump_limit,
                                   const char* csv_path) {
    if (auto s = require_arg(c && csv_path, "null argument")) return s;
    return guarded([&] {
        std::ofstream out(csv_path, std::ios::binary);
        if (!out)
            throw thiele::IoError(std::string("cannot open output file '") + csv_path + "'");
        std::optional<std::size_t> limit;
        if (mode_jump_limit >= 0) limit = static_cast<std::size_t>(mode_jump_limit);
        thiele::dump_paths(out, c->spec, path_count, seed, limit);
    });
}

thiele_status thiele_martingale_check(const thiele_contract* c, size_t path_count,
                                      uint64_t seed, char** report_text, double* max_mean_z,
                                      double* max_covariance_z) {
    if (auto s = require_arg(c != nullptr, "null contract")) return s;
    return guarded([&] {
        const thiele::MartingaleReport report =
            thiele::martingale_diagnostics(c->spec, path_count, seed);
        if (report_text) *report_text = dup_string(report.to_text());
        if (max_mean_z) *max_mean_z = report.max_abs_mean_z();
        if (max_covariance_z) *max_covariance_z = report.max_abs_covariance_z();
    });
}

thiele_status thiele_frozen_solve(const thiele_contract* c, double step,
                                  thiele_frozen** out) {
    if (auto s = require_arg(c && out, "null argument")) return s;
    return guarded([&] {
        *out = new thiele_frozen{thiele::frozen_value_functions(c->spec, step)};
    });
}

thiele_status thiele_frozen_value(const thiele_frozen* f, size_t mode, double t,
                                  size_t state, double* out) {
    if (auto s = require_arg(f && out, "null argument")) return s;
    return guarded([&] { *out = f->frozen.value(mode, t, state); });
}

void thiele_frozen_free(thiele_frozen* f) { delete f; }

thiele_status thiele_estimate(const thiele_contract* c, int adjusted, size_t path_count,
                              uint64_t seed, const thiele_frozen* frozen,
                              size_t mode_jump_cap, const char* report_path, double* mean,
                              double* standard_error) {
    if (auto s = require_arg(c != nullptr, "null contract")) return s;
    return guarded([&] {
        const thiele::ReserveEstimate est = thiele::estimate_reserve(
            c->spec, adjusted ? thiele::CashflowKind::adjusted : thiele::CashflowKind::plain,
            path_count, seed, frozen ? &frozen->frozen : nullptr, mode_jump_cap);
        if (report_path) write_file(report_path, thiele::estimate_report(est));
        if (mean) *mean = est.mean;
        if (standard_error) *standard_error = est.stderr_;
    });
}

thiele_status thiele_modifications_run(const thiele_contract* c, size_t path_count,
                                       uint64_t seed, double step, size_t mode_jump_cap,
                                       const char* trace_csv_path, double* adjusted_mean,
                                       double* adjusted_stderr) {
    if (auto s = require_arg(c != nullptr, "null contract")) return s;
    return guarded([&] {
        const thiele::FrozenValues frozen = thiele::frozen_value_functions(c->spec, step);
        if (trace_csv_path) {
            std::ofstream out(trace_csv_path, std::ios::binary);
            if (!out)
                throw thiele::IoError(std::string("cannot open output file '") +
                                      trace_csv_path + "'");
            thiele::write_trace_header(out);
            for (std::size_t p = 0; p < path_count; ++p) {
                const thiele::Path path = thiele::simulate_path(c->spec, seed + p);
                thiele::write_trace(
                    out, p, thiele::adjustment_factors(path, frozen, c->spec, mode_jump_cap));
            }
        }
        const thiele::ReserveEstimate est =
            thiele::estimate_reserve(c->spec, thiele::CashflowKind::adjusted, path_count,
                                     seed, &frozen, mode_jump_cap);
        if (adjusted_mean) *adjusted_mean = est.mean;
        if (adjusted_stderr) *adjusted_stderr = est.stderr_;
    });
}

thiele_status thiele_cantelli_residual(const thiele_contract* c, double step, int adjusted,
                                       double* out) {
    if (auto s = require_arg(c && out, "null argument")) return s;
    return guarded([&] {
        const thiele::FrozenValues frozen = thiele::frozen_value_functions(c->spec, step);
        *out = thiele::cantelli_residual(frozen, c->spec, step, adjusted != 0);
    });
}

thiele_status thiele_verify(const thiele_contract* c, double step, size_t path_count,
                            uint64_t seed, size_t mode_jump_cap, char** report_text,
                            int* all_passed) {
    if (auto s = require_arg(c != nullptr, "null contract")) return s;
    return guarded([&] {
        thiele::VerifyOptions options;
        options.step = step;
        options.paths = path_count;
        options.martingale_paths = std::min<std::size_t>(path_count, 10000);
        options.seed = seed;
        options.mode_jump_cap = mode_jump_cap;
        const thiele::VerifyReport report = thiele::verify_contract(c->spec, options);
        if (report_text) *report_text = dup_string(report.to_text());
        if (all_passed) *all_passed = report.all_passed() ? 1 : 0;
    });
}

} // extern "C"
