#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "thiele/model.hpp"
#include "thiele/path.hpp"
#include "thiele/value_function.hpp"

namespace thiele {

// Value functions of the intensity-killed contracts: one reserve per mode
// k, solved with all mode intensities set to zero, so mode k's function
// never references other modes.  These are the building blocks of the
// adjustment-factor recursion: once the m-th modification has happened the
// reserve is a lookup in the frozen function of the current mode.
struct FrozenValues {
    ValueFunction values;

    double value(ModeId mode, double t, StateId state, double u = 0.0) const {
        return values.value(t, state, mode, u);
    }
    double value_left(ModeId mode, double t, StateId state, double u = 0.0) const {
        return values.value_left(t, state, mode, u);
    }
};

// Solves the mode-frozen Thiele equations (mode intensities zeroed).
FrozenValues frozen_value_functions(const ContractSpec& spec, double step);

struct AdjustmentRecord {
    double time = 0.0;
    ModeId from_mode = 0;
    ModeId to_mode = 0;
    StateId state = 0;      // state of X at the modification
    double rho = 1.0;       // scaling applied to all cash flows afterwards
};

// The sequence (tau_m, rho_m) along one path.  Cash flows before the first
// modification carry the original contract's scaling 1; the paper's rho_0
// convention is realized as that effective factor.
struct AdjustmentTrace {
    std::vector<AdjustmentRecord> records;
    bool has_negative_factor = false;

    // Scaling in force on the segment with the given number of preceding
    // mode jumps (1 before the first modification).
    double factor_for_segment(std::size_t mode_jumps_before) const {
        if (mode_jumps_before == 0) return 1.0;
        return records[mode_jumps_before - 1].rho;
    }
};

// Walks the path's mode jumps and applies the forward recursion
//
//   rho_{m+1} = (rho_m^eff V_k(tau-, i) - rho_m^eff beta-bar_kl(tau, i))
//               / V_l(tau, i)
//
// with 0/0 := 1 and left limits of the frozen values at tau.  A zero
// denominator with nonzero numerator raises EquivalenceError naming tau;
// more than mode_jump_cap modifications raise SimulationError.
AdjustmentTrace adjustment_factors(const Path& path, const FrozenValues& frozen,
                                   const ContractSpec& spec, std::size_t mode_jump_cap = 100);

// Discounted value at time 0 of the path's cash flow.  With frozen/trace
// present the adjusted flow rho_m dA is valued (surrender payments read
// f * rho^eff * V_frozen(t-)); both null gives the plain flow.  frozen is
// required whenever the contract declares surrender fractions.
double discounted_cashflow(const Path& path, const ContractSpec& spec,
                           const FrozenValues* frozen, const AdjustmentTrace* trace);

// Adjusted cash flow of one path under its trace.
double adjusted_cashflow_value(const Path& path, const AdjustmentTrace& trace,
                               const ContractSpec& spec, const FrozenValues& frozen);

// Grid sweep of the adjusted mode-jump sum-at-risk
//   rho(t,(i,l)) V_l(t,i) - (rho_prev V_k(t-,i) - rho_prev beta-bar_kl(t,i))
// which vanishes identically when rho comes from the recursion; the return
// is the maximum absolute residual (floating-point error only).  With
// adjusted = false the factor is forced to 1 and the residual measures how
// far an unadjusted modification is from actuarial equivalence.
double cantelli_residual(const FrozenValues& frozen, const ContractSpec& spec, double step,
                         bool adjusted = true);

// Re-derives every factor of the path's trace through the alternative
// fixed-point form (the recursion's pivot identity) and returns the
// maximum absolute disagreement between the two routes.
double recursion_consistency_residual(const Path& path, const FrozenValues& frozen,
                                      const ContractSpec& spec,
                                      std::size_t mode_jump_cap = 100);

// Trace dump: path_id,m,tau,from_mode,to_mode,state,rho.
void write_trace_header(std::ostream& os);
void write_trace(std::ostream& os, std::uint64_t path_id, const AdjustmentTrace& trace);

} // namespace thiele
