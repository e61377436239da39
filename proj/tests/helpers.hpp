#pragma once

// Shared test fixtures and independent oracles.  The oracles here are
// deliberately separate from the engine's numerics: closed forms are
// derived from the scalar ODE V' = r V - c, V(T) = 0, and the quadrature
// oracle is a plain fixed-panel Simpson rule.

#include <cmath>
#include <functional>
#include <string>

#include "thiele/config.hpp"
#include "thiele/model.hpp"

namespace testutil {

inline std::string fixture_path(const std::string& name) {
    return std::string(FIXTURES_DIR) + "/" + name;
}

inline thiele::ContractSpec load_fixture(const std::string& name) {
    return thiele::load_contract_file(fixture_path(name));
}

// Solution at time 0 of V' = r V - c with V(T) = 0: V(0) = (c/r)(1 - e^{-rT}).
inline double annuity_ode_value(double c, double r, double T) {
    if (r == 0.0) return c * T;
    return c / r * (-std::expm1(-r * T));
}

// Term insurance: constant death rate mu, discount delta, benefit 1.
// Thiele: V' = (delta+mu)V - mu.
inline double term_insurance_value(double mu, double delta, double T) {
    return annuity_ode_value(mu, mu + delta, T);
}

// Pure endowment paying 1 at T while alive: V(t) = e^{-(mu+delta)(T-t)}.
inline double pure_endowment_value(double mu, double delta, double T) {
    return std::exp(-(mu + delta) * T);
}

// Surrender contract (alive/dead/surrendered): death benefit 1 at rate mu,
// surrender at rate sigma paying (1-kappa)Y(t-).  The reserve-dependent
// payment linearizes Thiele to V' = (delta+mu+kappa*sigma)V - mu.
inline double surrender_value(double mu, double sigma, double delta, double kappa, double T) {
    return annuity_ode_value(mu, delta + mu + kappa * sigma, T);
}

// Example free-policy contract, premium mode: net continuous rate b - pi
// plus death cover mu * b_ad, same linearization as the surrender model.
inline double free_policy_mode0_value(double mu, double sigma, double delta, double kappa,
                                      double b_minus_pi, double b_ad, double T) {
    return annuity_ode_value(b_minus_pi + mu * b_ad, delta + mu + kappa * sigma, T);
}

// Fixed-panel composite Simpson; panels must be even.
inline double simpson(const std::function<double(double)>& f, double a, double b,
                      int panels) {
    const double h = (b - a) / panels;
    double s = f(a) + f(b);
    for (int i = 1; i < panels; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

// Single-life occupation-probability representation of the term reserve:
// V(0) = int_0^T e^{-delta s} p(s) mu(s) ds with survival p(s).
inline double occupation_quadrature_term_value(const std::function<double(double)>& mu,
                                               double delta, double T, int panels = 20000) {
    auto integrand = [&](double s) {
        const double hazard = simpson(mu, 0.0, s, 400);
        return std::exp(-delta * s - hazard) * mu(s);
    };
    return simpson(integrand, 0.0, T, panels);
}

// Two-state Markov contract built in code (for defect injection).
inline thiele::ContractSpec two_state_spec(double mu, double delta, double death_benefit,
                                           double T, double lump_at_T = 0.0) {
    thiele::ContractSpec spec;
    spec.states.labels = {"alive", "dead"};
    spec.states.initial_state = 0;
    spec.modes.labels = {"standard"};
    spec.intensities.kind = thiele::ModelKind::markov;
    spec.intensities.state_rates = [mu](double, thiele::StateId i, thiele::StateId j,
                                        thiele::ModeId, double) {
        return (i == 0 && j == 1) ? mu : 0.0;
    };
    spec.intensities.mode_rates = [](double, thiele::ModeId, thiele::ModeId,
                                     thiele::StateId) { return 0.0; };
    spec.intensities.rate_bound = mu;
    spec.payments.sojourn_rate = [](double, thiele::StateId, thiele::ModeId, double) {
        return 0.0;
    };
    spec.payments.state_transition_payment =
        [death_benefit, T](double t, thiele::StateId i, thiele::StateId j, thiele::ModeId,
                           double) {
            return (t <= T && i == 0 && j == 1) ? death_benefit : 0.0;
        };
    spec.payments.mode_transition_payment = [](double, thiele::ModeId, thiele::ModeId,
                                               thiele::StateId, double) { return 0.0; };
    if (lump_at_T != 0.0) {
        spec.payments.lump_times = {T};
        spec.payments.lump_amount = [lump_at_T, T](double t, thiele::StateId i,
                                                   thiele::ModeId, double) {
            return (t == T && i == 0) ? lump_at_T : 0.0;
        };
    }
    spec.discount.rate = thiele::PiecewiseCurve::constant(delta);
    spec.discount.bound = std::abs(delta);
    spec.horizon = T;
    return spec;
}

} // namespace testutil
