#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>

#include "thiele/model.hpp"
#include "thiele/value_function.hpp"

namespace thiele {

// Reserve-dependent payment terms gamma(t, i, k, u, y, z) and, at lump
// atoms, a(t, i, k, u, y, z); y is the candidate reserve in the current
// cell and z[j] the candidate jump coefficient to state j within the same
// mode.  The declared constants are the contraction data of the
// well-posedness assumptions: lipschitz_c bounds gamma in (y, z), lump_c1
// (< 1 required) and lump_c2 bound the lump term.
//
// When a contract declares surrender fractions, the nonlinear solver drops
// those transitions from its linear coupling and the driver must carry
// them; surrender_driver builds the standard fold -sum kappa lambda(t) y.
struct NonlinearDriver {
    using Fn = std::function<double(double t, StateId i, ModeId k, double u, double y,
                                    std::span<const double> z)>;
    Fn gamma;
    Fn lump;   // optional
    double lipschitz_c = 0.0;
    double lump_c1 = 0.0;
    double lump_c2 = 0.0;
};

// Canonical driver for surrender payments f*Y(t-): folds the whole
// reserve-dependent transition term into gamma(y) = -sum (1-f) lambda(t) y,
// which presumes the surrender target states have identically zero value
// (absorbing, no payments); this is checked by sampling.  Such contracts
// can also be solved by the linear route, which needs no such assumption.
NonlinearDriver surrender_driver(const ContractSpec& spec);

struct NonlinearSolveStats {
    double max_contraction_ratio = 0.0;   // worst successive-residual ratio
    int max_iterations_used = 0;
};

// Backward RK4 with a per-time-step fixed point: the driver is evaluated
// at the step-midpoint candidate, z from candidate value differences,
// iterated until successive step values differ by less than picard_tol.
// Exceeding max_iters raises ConvergenceError with the last residual;
// lump_c1 >= 1 is rejected up front.
ValueFunction solve_nonlinear_markov(const ContractSpec& spec, const NonlinearDriver& driver,
                                     double step, double picard_tol = 1e-12,
                                     int max_iters = 50,
                                     NonlinearSolveStats* stats = nullptr);

// Empirical Lipschitz ratios of a driver against its declared constants.
struct LipschitzReport {
    double max_gamma_ratio = 0.0;        // vs lipschitz_c
    double max_lump_ratio_sq = 0.0;      // |da|^2 / (C1 |dy|^2 + C2 ||dz||^2)
    bool gamma_violations = false;
    bool lump_violations = false;
    bool gamma_finite_at_origin = true;  // (A4) surrogate
    std::string witness;
    bool all_passed() const {
        return !gamma_violations && !lump_violations && gamma_finite_at_origin;
    }
};

// Samples argument pairs (y, z), (y', z') at random points (t, i, k, u) and
// estimates |gamma - gamma'| / (|y - y'| + ||z - z'||_Lambda) with the
// intensity-weighted norm ||z||^2 = sum_j z_j^2 lambda_ij(t).  Ratios above
// the declared constants are flagged, never thrown.
LipschitzReport check_lipschitz(const NonlinearDriver& driver, const ContractSpec& spec,
                                std::size_t sample_count, std::uint64_t seed);

} // namespace thiele
