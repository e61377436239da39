#pragma once

// Internal backward stepper shared by the linear and nonlinear Markov
// solvers.  Not installed.

#include <functional>
#include <span>

#include "thiele/model.hpp"
#include "thiele/value_function.hpp"

namespace thiele::detail {

// Extra driver terms for reserve-dependent payments.  When present,
// surrender-fraction transitions are excluded from the linear coupling and
// must be represented by `gamma`; the per-cell fixed point evaluates gamma
// at the step-midpoint candidate with z taken from candidate value
// differences within the same mode.
struct DriverHooks {
    std::function<double(double t, StateId i, ModeId k, double u, double y,
                         std::span<const double> z)>
        gamma;
    std::function<double(double t, StateId i, ModeId k, double u, double y,
                         std::span<const double> z)>
        lump;
    double picard_tol = 1e-12;
    int max_iters = 50;
    // Diagnostics: worst successive-residual ratio and iteration count seen.
    double* max_contraction_ratio = nullptr;
    int* max_iterations_used = nullptr;
};

ValueFunction solve_markov_ode(const ContractSpec& spec, double step,
                               const DriverHooks* hooks);

} // namespace thiele::detail
