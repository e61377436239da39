#include "thiele/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "thiele/errors.hpp"
#include "thiele/rng.hpp"

namespace thiele {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw ValidationError(what);
}

std::string point_str(double t, StateId i, ModeId k, double u) {
    std::ostringstream os;
    os << "t=" << t << " state=" << i << " mode=" << k << " u=" << u;
    return os.str();
}

} // namespace

StateId StateSpace::index_of(const std::string& label) const {
    for (StateId i = 0; i < labels.size(); ++i)
        if (labels[i] == label) return i;
    throw ValidationError("unknown state label '" + label + "'");
}

void StateSpace::validate() const {
    require(!labels.empty(), "states: empty state space");
    std::set<std::string> seen(labels.begin(), labels.end());
    require(seen.size() == labels.size(), "states: duplicate labels");
    require(initial_state < labels.size(), "states: initial_state out of range");
}

ModeId ModeSpace::index_of(const std::string& label) const {
    for (ModeId k = 0; k < labels.size(); ++k)
        if (labels[k] == label) return k;
    throw ValidationError("unknown mode label '" + label + "'");
}

void ModeSpace::validate() const {
    require(!labels.empty(), "modes: empty mode space");
    std::set<std::string> seen(labels.begin(), labels.end());
    require(seen.size() == labels.size(), "modes: duplicate labels");
    require(initial_mode < labels.size(), "modes: initial_mode out of range");
}

double DiscountModel::factor(double t) const {
    return std::exp(-rate.integrate(0.0, t));
}

void ContractSpec::validate() const {
    states.validate();
    modes.validate();
    require(std::isfinite(horizon) && horizon > 0.0, "horizon must be positive and finite");
    require(static_cast<bool>(intensities.state_rates), "intensities: state_rates not set");
    require(static_cast<bool>(intensities.mode_rates) || modes.size() == 1,
            "intensities: mode_rates not set on a multi-mode contract");
    require(std::isfinite(intensities.rate_bound) && intensities.rate_bound >= 0.0,
            "intensities: rate_bound must be finite and nonnegative");
    require(static_cast<bool>(payments.sojourn_rate), "payments: sojourn_rate not set");
    require(static_cast<bool>(payments.state_transition_payment),
            "payments: state_transition_payment not set");
    require(static_cast<bool>(payments.mode_transition_payment) || modes.size() == 1,
            "payments: mode_transition_payment not set on a multi-mode contract");
    require(payments.lump_times.empty() || static_cast<bool>(payments.lump_amount),
            "payments: lump_amount not set but lump_times given");
    require(std::is_sorted(payments.lump_times.begin(), payments.lump_times.end()),
            "payments: lump_times must be sorted");
    for (double a : payments.lump_times)
        require(a >= 0.0 && a <= horizon, "payments: lump atom outside [0, horizon]");
    for (const auto& [pair, frac] : payments.surrender_reserve_fraction) {
        require(pair.first < states.size() && pair.second < states.size() &&
                    pair.first != pair.second,
                "payments: surrender fraction on invalid transition");
        require(frac >= 0.0 && frac <= 1.0, "payments: surrender fraction outside [0, 1]");
    }
    require(!discount.rate.empty(), "discount: rate curve not set");
    require(std::isfinite(discount.bound) && discount.bound >= 0.0,
            "discount: bound must be finite and nonnegative");
}

std::vector<double> ContractSpec::time_knots() const {
    std::set<double> knots;
    auto add = [&](const std::vector<double>& xs) {
        for (double x : xs)
            if (x > 0.0 && x < horizon) knots.insert(x);
    };
    add(intensities.breakpoints);
    add(payments.breakpoints);
    add(discount.rate.breakpoints());
    return {knots.begin(), knots.end()};
}

bool ValidationReport::all_passed() const {
    for (const auto& c : checks)
        if (!c.passed) return false;
    return true;
}

std::string ValidationReport::to_text() const {
    std::ostringstream os;
    for (const auto& c : checks) {
        os << (c.passed ? "PASS" : "FAIL") << ' ' << c.name;
        if (!c.passed && !c.witness.empty()) os << "  [" << c.witness << ']';
        os << '\n';
    }
    return os.str();
}

ValidationReport validate_assumptions(const ContractSpec& spec, std::size_t sample_count) {
    if (sample_count < 1) throw UsageError("validate_assumptions: sample_count must be >= 1");

    const double T = spec.horizon;
    const std::size_t ns = spec.n_states();
    const std::size_t nm = spec.n_modes();
    RandomStream rs(0x7a1e5eed, 0);   // fixed stream: the report is deterministic

    CheckResult state_nonneg{"state_rates_nonnegative_finite"};
    CheckResult mode_nonneg{"mode_rates_nonnegative_finite"};
    CheckResult exit_bound{"total_exit_rate_within_bound"};
    CheckResult markov_u{"markov_rates_duration_invariant"};
    CheckResult sojourn_bounded{"sojourn_payments_bounded"};
    CheckResult lump_bounded{"lump_payments_bounded"};
    CheckResult transition_bounded{"transition_payments_bounded"};
    CheckResult beyond_horizon{"payments_vanish_beyond_horizon"};
    CheckResult fractions{"surrender_fractions_in_unit_interval"};
    CheckResult discount_bound{"discount_rate_within_bound"};
    CheckResult atoms{"lump_atoms_sorted_within_horizon"};

    auto fail = [](CheckResult& c, const std::string& witness) {
        if (c.passed) {
            c.passed = false;
            c.witness = witness;
        }
    };

    for (std::size_t n = 0; n < sample_count; ++n) {
        const double t = rs.uniform() * T;
        const double u = rs.uniform() * t;
        const StateId i = n % ns;
        const ModeId k = (n / ns) % nm;

        double total_exit = 0.0;
        for (StateId j = 0; j < ns; ++j) {
            if (j == i) continue;
            const double r = spec.intensities.state_rates(t, i, j, k, u);
            if (!(std::isfinite(r) && r >= 0.0))
                fail(state_nonneg, "rate(" + point_str(t, i, k, u) + " ->" +
                                       std::to_string(j) + ")=" + std::to_string(r));
            else
                total_exit += r;
            if (spec.intensities.kind == ModelKind::markov) {
                const double r2 = spec.intensities.state_rates(t, i, j, k, u * 0.5 + 0.1);
                if (std::isfinite(r) && r2 != r)
                    fail(markov_u, point_str(t, i, k, u));
            }
            const double b = spec.payments.state_transition_payment(t, i, j, k, u);
            if (!std::isfinite(b)) fail(transition_bounded, point_str(t, i, k, u));
        }
        if (spec.intensities.mode_rates) {
            for (ModeId l = 0; l < nm; ++l) {
                if (l == k) continue;
                const double r = spec.intensities.mode_rates(t, k, l, i);
                if (!(std::isfinite(r) && r >= 0.0))
                    fail(mode_nonneg, "rate(" + point_str(t, i, k, u) + " mode->" +
                                          std::to_string(l) + ")=" + std::to_string(r));
                else
                    total_exit += r;
                if (spec.payments.mode_transition_payment) {
                    const double b = spec.payments.mode_transition_payment(t, k, l, i, u);
                    if (!std::isfinite(b)) fail(transition_bounded, point_str(t, i, k, u));
                }
            }
        }
        if (total_exit > spec.intensities.rate_bound * (1.0 + 1e-12))
            fail(exit_bound, point_str(t, i, k, u) + " total=" + std::to_string(total_exit));

        const double alpha = spec.payments.sojourn_rate(t, i, k, u);
        if (!std::isfinite(alpha)) fail(sojourn_bounded, point_str(t, i, k, u));

        // Beyond-horizon probe: everything must pay exactly 0 there.
        const double t_beyond = T * (1.0 + rs.uniform());
        if (spec.payments.sojourn_rate(t_beyond, i, k, u) != 0.0)
            fail(beyond_horizon, "sojourn at " + point_str(t_beyond, i, k, u));
        for (StateId j = 0; j < ns; ++j)
            if (j != i &&
                spec.payments.state_transition_payment(t_beyond, i, j, k, u) != 0.0)
                fail(beyond_horizon, "transition at " + point_str(t_beyond, i, k, u));

        const double d = spec.discount(t);
        if (!(std::isfinite(d) && std::abs(d) <= spec.discount.bound + 1e-12))
            fail(discount_bound, "delta(" + std::to_string(t) + ")=" + std::to_string(d));
    }

    for (double a : spec.payments.lump_times) {
        if (!(a >= 0.0 && a <= T)) fail(atoms, "atom at " + std::to_string(a));
        for (std::size_t i = 0; i < ns; ++i)
            for (std::size_t k = 0; k < nm; ++k)
                if (!std::isfinite(spec.payments.lump_amount(a, i, k, 0.0)))
                    fail(lump_bounded, "atom at " + std::to_string(a));
    }
    if (!std::is_sorted(spec.payments.lump_times.begin(), spec.payments.lump_times.end()))
        fail(atoms, "unsorted lump_times");

    for (const auto& [pair, frac] : spec.payments.surrender_reserve_fraction)
        if (!(frac >= 0.0 && frac <= 1.0))
            fail(fractions, "fraction(" + std::to_string(pair.first) + "->" +
                                std::to_string(pair.second) + ")=" + std::to_string(frac));

    ValidationReport report;
    report.checks = {state_nonneg, mode_nonneg,        exit_bound,     markov_u,
                     sojourn_bounded, lump_bounded,    transition_bounded,
                     beyond_horizon,  fractions,       discount_bound, atoms};
    return report;
}

} // namespace thiele
