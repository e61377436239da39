#pragma once

#include "thiele/model.hpp"
#include "thiele/path.hpp"
#include "thiele/value_function.hpp"

namespace thiele {

// Backward RK4 solve of the mode-modulated Thiele equation
//
//   d/dt V(t,i,k) = delta(t) V - gamma_(i,k)(t) - Q0 V - Q1 V,   V(T,.,.) = 0,
//
// where Q0 couples policyholder states within a mode and Q1 couples modes
// within a state.  Integration restarts at every rate-table breakpoint so
// the classical order holds piecewise; lump atoms of nu are snapped onto
// the grid and applied as V(t-,i,k) = V(t,i,k) + a_(i,k)(t).  Transitions
// with a declared surrender fraction f pay f*V(t-,i,k) and stay linear:
// their coupling term becomes lambda (V_j - (1-f) V_i).
ValueFunction solve_thiele_markov(const ContractSpec& spec, double step);

// Semi-Markov Thiele equation solved along the characteristics u - t = const
// of (d_t + d_u) V(t,i,u) = delta V - alpha - sum_j mu_ij(t,u) [beta_ij +
// V(t,j,0) - V(t,i,u)] on a triangular duration grid (u <= t), explicit
// trapezoid (Heun) stepping with a predictor pass for the duration-reset
// coupling V(t,.,0).  Multi-mode contracts carry the duration unchanged
// across mode jumps unless the spec's reset flag says otherwise.
ValueFunction solve_thiele_semimarkov(const ContractSpec& spec, double step,
                                      double duration_step);

// Sums-at-risk derived from a solved value function:
//   state transitions  R_ij(t,k)  = beta_ij(t,k) + V(t,j,k) - V(t,i,k)
//   mode transitions   R_kl(t,i)  = beta-bar_kl(t,i) + V(t,i,l) - V(t,i,k)
// Surrender-fraction transitions use the reserve-dependent payment
// f*V(t-,i,k).  Semi-Markov state risks reset the new state's duration:
// R_ij(t,u) = beta_ij(t,u) + V(t,j,0) - V(t,i,u).
class SumAtRisk {
public:
    SumAtRisk(ValueFunction values, ContractSpec spec);

    double state_risk(double t, StateId i, StateId j, ModeId k = 0, double u = 0.0) const;
    double mode_risk(double t, ModeId k, ModeId l, StateId i, double u = 0.0) const;
    // The payment due on the transition (fixed beta or reserve fraction).
    double state_payment(double t, StateId i, StateId j, ModeId k = 0, double u = 0.0) const;

    const ValueFunction& values() const { return values_; }

private:
    ValueFunction values_;
    ContractSpec spec_;
};

SumAtRisk sum_at_risk(ValueFunction values, ContractSpec spec);

// Discrete residual of the backward dynamics along one simulated path,
// with Y(t) := V(t, X(t), J(t) [, U(t)]) and the jump coefficients taken
// from the sum-at-risk:
//
//   dY = (delta Y - alpha) dt - a dnu - dpay + sum R dM,  dM = dN - I lambda dt.
//
// Cells of width `step`; flow cells measure the drift identity, cells
// containing events additionally measure the jump identity.
struct BsdeResidual {
    double max_flow_cell = 0.0;
    double max_jump_cell = 0.0;
    double total() const { return max_flow_cell + max_jump_cell; }
};

BsdeResidual pathwise_bsde_residual(const Path& path, const ValueFunction& values,
                                    const ContractSpec& spec, double step);

} // namespace thiele
