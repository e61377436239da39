/* C interface to the multi-state reserving engine.
 *
 * All functions return a thiele_status; on failure thiele_last_error()
 * gives a thread-local message.  Objects are opaque handles owned by the
 * caller and released with the matching _free function.  Strings returned
 * through char** are heap-allocated and released with thiele_string_free.
 */

#ifndef THIELE_H
#define THIELE_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum thiele_status {
    THIELE_OK = 0,
    THIELE_ERR_PARSE = 1,
    THIELE_ERR_VALIDATION = 2,
    THIELE_ERR_SOLVER = 3,
    THIELE_ERR_SIMULATION = 4,
    THIELE_ERR_CONVERGENCE = 5,
    THIELE_ERR_EQUIVALENCE = 6,
    THIELE_ERR_USAGE = 7,
    THIELE_ERR_IO = 8,
    THIELE_ERR_INTERNAL = 9
} thiele_status;

typedef struct thiele_contract thiele_contract;
typedef struct thiele_values thiele_values;   /* solved value function */
typedef struct thiele_frozen thiele_frozen;   /* per-mode frozen value functions */

const char* thiele_last_error(void);
void thiele_string_free(char* s);

/* ---- contracts ------------------------------------------------------- */

thiele_status thiele_contract_load_text(const char* json_text, thiele_contract** out);
thiele_status thiele_contract_load_file(const char* path, thiele_contract** out);
void thiele_contract_free(thiele_contract* c);

thiele_status thiele_contract_info(const thiele_contract* c, size_t* n_states,
                                   size_t* n_modes, double* horizon, int* is_semi_markov);
thiele_status thiele_contract_initial(const thiele_contract* c, size_t* state, size_t* mode);
/* 1 when the contract declares reserve-dependent surrender payments. */
thiele_status thiele_contract_has_surrender(const thiele_contract* c, int* out);

/* Pass/fail report of the standing-assumption checks on sampled points.
 * all_passed may be NULL; report_text may be NULL when only the flag is
 * wanted. */
thiele_status thiele_contract_validate(const thiele_contract* c, size_t sample_count,
                                       char** report_text, int* all_passed);

/* ---- solvers ---------------------------------------------------------- */

thiele_status thiele_solve_markov(const thiele_contract* c, double step,
                                  thiele_values** out);
thiele_status thiele_solve_semimarkov(const thiele_contract* c, double step,
                                      double duration_step, thiele_values** out);
/* Nonlinear solve with the canonical surrender driver built from the
 * contract's surrender fractions. */
thiele_status thiele_solve_surrender(const thiele_contract* c, double step,
                                     double picard_tol, int max_iters, thiele_values** out);

thiele_status thiele_values_at(const thiele_values* v, double t, size_t state, size_t mode,
                               double duration, double* out);
thiele_status thiele_values_write_csv(const thiele_values* v, const char* path);
void thiele_values_free(thiele_values* v);

/* ---- simulation and estimation ---------------------------------------- */

/* Dumps path_count simulated paths as CSV (path_id,time,kind,from,to).
 * mode_jump_limit < 0 means unlimited. */
thiele_status thiele_simulate_dump(const thiele_contract* c, size_t path_count,
                                   uint64_t seed, long mode_jump_limit, const char* csv_path);

/* Martingale diagnostics; writes a text report and the worst z-scores. */
thiele_status thiele_martingale_check(const thiele_contract* c, size_t path_count,
                                      uint64_t seed, char** report_text,
                                      double* max_mean_z, double* max_covariance_z);

thiele_status thiele_frozen_solve(const thiele_contract* c, double step,
                                  thiele_frozen** out);
thiele_status thiele_frozen_value(const thiele_frozen* f, size_t mode, double t,
                                  size_t state, double* out);
void thiele_frozen_free(thiele_frozen* f);

/* Monte Carlo reserve estimate.  adjusted != 0 values the adjusted cash
 * flow A-hat (requires frozen); frozen may be NULL for plain contracts
 * without surrender fractions.  report_path may be NULL. */
thiele_status thiele_estimate(const thiele_contract* c, int adjusted, size_t path_count,
                              uint64_t seed, const thiele_frozen* frozen,
                              size_t mode_jump_cap, const char* report_path, double* mean,
                              double* standard_error);

/* Simulates paths, computes adjustment factors along each and writes the
 * trace CSV; also returns the adjusted Monte Carlo estimate. */
thiele_status thiele_modifications_run(const thiele_contract* c, size_t path_count,
                                       uint64_t seed, double step, size_t mode_jump_cap,
                                       const char* trace_csv_path, double* adjusted_mean,
                                       double* adjusted_stderr);

/* Grid residual of the Cantelli condition under the recursion's factors
 * (adjusted != 0) or under factor 1. */
thiele_status thiele_cantelli_residual(const thiele_contract* c, double step, int adjusted,
                                       double* out);

/* ---- verification ------------------------------------------------------ */

/* Runs the per-contract verification battery; writes one PASS/FAIL line
 * per check into report_text. */
thiele_status thiele_verify(const thiele_contract* c, double step, size_t path_count,
                            uint64_t seed, size_t mode_jump_cap, char** report_text,
                            int* all_passed);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* THIELE_H */
