#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "thiele/curve.hpp"

namespace thiele {

using StateId = std::size_t;
using ModeId = std::size_t;

// Policyholder states (alive, disabled, dead, ...).  Index = state id.
struct StateSpace {
    std::vector<std::string> labels;
    StateId initial_state = 0;

    std::size_t size() const { return labels.size(); }
    StateId index_of(const std::string& label) const;
    void validate() const;
};

// Contract modes (premium-paying, free policy, ...).  Index = mode id.
struct ModeSpace {
    std::vector<std::string> labels;
    ModeId initial_mode = 0;

    std::size_t size() const { return labels.size(); }
    ModeId index_of(const std::string& label) const;
    void validate() const;
};

enum class ModelKind { markov, semi_markov };

// Transition intensities for the bivariate process (X, J).
//
// state_rates(t, i, j, k, u) is the rate per year for a policyholder
// transition i -> j at time t in mode k after u years in state i; for a
// Markov model it must not depend on u.  mode_rates(t, k, l, i) is the rate
// for a contract modification k -> l while in state i.  Diagonal entries
// are never queried.  rate_bound must dominate the total exit rate
// (state plus mode) everywhere on [0, horizon]; the simulator thins
// proposals against it.  breakpoints lists the time discontinuities of the
// rate functions so solvers can restart integration there.
struct IntensityModel {
    ModelKind kind = ModelKind::markov;
    std::function<double(double t, StateId i, StateId j, ModeId k, double u)> state_rates;
    std::function<double(double t, ModeId k, ModeId l, StateId i)> mode_rates;
    double rate_bound = 0.0;
    std::vector<double> breakpoints;
};

struct LumpAtom {
    double time = 0.0;
};

// Contractual payments.  Benefits positive, premiums negative.
//
// All functions must return exactly 0 for t > horizon.  Lump sums are
// paid at the atoms of the deterministic counting measure nu, listed in
// lump_times (sorted, within [0, horizon]).  surrender_reserve_fraction
// maps a transition (i, j) to the fraction of the running reserve Y(t-)
// paid out on that transition instead of a fixed amount; the stored
// number is the paid fraction (1 - kappa) in [0, 1].
struct PaymentModel {
    std::function<double(double t, StateId i, ModeId k, double u)> sojourn_rate;
    std::vector<double> lump_times;
    std::function<double(double t, StateId i, ModeId k, double u)> lump_amount;
    std::function<double(double t, StateId i, StateId j, ModeId k, double u)> state_transition_payment;
    std::function<double(double t, ModeId k, ModeId l, StateId i, double u)> mode_transition_payment;
    std::map<std::pair<StateId, StateId>, double> surrender_reserve_fraction;
    std::vector<double> breakpoints;

    bool is_surrender(StateId i, StateId j) const {
        return surrender_reserve_fraction.count({i, j}) > 0;
    }
    double paid_fraction(StateId i, StateId j) const {
        return surrender_reserve_fraction.at({i, j});
    }
};

// Deterministic short rate, piecewise polynomial; integrals are exact.
struct DiscountModel {
    PiecewiseCurve rate;
    double bound = 0.0;

    double operator()(double t) const { return rate(t); }
    // int_a^b delta(u) du
    double integral(double a, double b) const { return rate.integrate(a, b); }
    // exp(-int_0^t delta)
    double factor(double t) const;
};

// Full contract description.  Immutable after construction; all functional
// fields must be pure so the spec can be shared across worker threads.
struct ContractSpec {
    StateSpace states;
    ModeSpace modes;
    IntensityModel intensities;
    PaymentModel payments;
    DiscountModel discount;
    double horizon = 0.0;
    // Whether the duration clock U restarts at contract modifications.
    // The duration is defined from jumps of X; resetting at jumps of J is a
    // non-standard convention kept behind this flag.
    bool duration_resets_on_mode_jump = false;

    std::size_t n_states() const { return states.size(); }
    std::size_t n_modes() const { return modes.size(); }
    // Structural invariants; throws ValidationError.
    void validate() const;
    // Sorted union of intensity/payment/discount breakpoints inside [0, T].
    std::vector<double> time_knots() const;
};

struct CheckResult {
    std::string name;
    bool passed = true;
    std::string witness;   // offending point / value when failed
};

struct ValidationReport {
    std::vector<CheckResult> checks;
    bool all_passed() const;
    std::string to_text() const;
};

// Samples (t, i, j, k, u) points and checks the standing assumptions:
// nonnegative finite rates, total exit rate within rate_bound, bounded
// payments, payments vanishing beyond the horizon, surrender fractions in
// [0, 1], duration-invariance of Markov rates.  Failures are reported with
// a witness point, never thrown.
ValidationReport validate_assumptions(const ContractSpec& spec, std::size_t sample_count);

} // namespace thiele
