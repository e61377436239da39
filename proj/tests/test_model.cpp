#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "thiele/config.hpp"
#include "thiele/curve.hpp"
#include "thiele/errors.hpp"
#include "thiele/model.hpp"

using namespace thiele;

TEST_CASE("piecewise curve: step evaluation is right-continuous") {
    auto c = PiecewiseCurve::step({0.0, 1.0, 2.0}, {0.1, 0.2, 0.3});
    CHECK(c(0.0) == 0.1);
    CHECK(c(0.999999) == 0.1);
    CHECK(c(1.0) == 0.2);   // value at a breakpoint is the piece starting there
    CHECK(c(2.0) == 0.3);
    CHECK(c(50.0) == 0.3);  // last piece extends
    CHECK(c(-0.5) == 0.0);  // before the first breakpoint
}

TEST_CASE("piecewise curve: exact integrals") {
    auto c = PiecewiseCurve::step({0.0, 1.0}, {2.0, 3.0});
    CHECK(c.integrate(0.0, 2.0) == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(c.integrate(0.5, 1.5) == doctest::Approx(1.0 + 1.5).epsilon(1e-15));
    CHECK(c.integrate(-1.0, 0.5) == doctest::Approx(1.0).epsilon(1e-15));

    // quadratic piece: 1 + 2(t-1) + 3(t-1)^2 on [1, inf)
    auto p = PiecewiseCurve::polynomial({1.0}, {{1.0, 2.0, 3.0}});
    CHECK(p(2.0) == doctest::Approx(6.0));
    CHECK(p.integrate(1.0, 2.0) == doctest::Approx(1.0 + 1.0 + 1.0).epsilon(1e-15));
}

TEST_CASE("piecewise curve: validation") {
    CHECK_THROWS_AS(PiecewiseCurve::step({1.0, 0.0}, {1.0, 2.0}), ValidationError);
    CHECK_THROWS_AS(PiecewiseCurve::step({0.0, 0.0}, {1.0, 2.0}), ValidationError);
    CHECK_THROWS_AS(PiecewiseCurve::step({0.0}, {}), ValidationError);
    CHECK_THROWS_AS(PiecewiseCurve::step({0.0}, {std::nan("")}), ValidationError);
}

TEST_CASE("load_contract: minimal term insurance document") {
    const auto spec = testutil::load_fixture("term_insurance.json");
    CHECK(spec.n_states() == 2);
    CHECK(spec.n_modes() == 1);
    CHECK(spec.horizon == 10.0);
    CHECK(spec.states.initial_state == 0);
    CHECK(spec.intensities.state_rates(3.7, 0, 1, 0, 0.0) == 0.01);
    CHECK(spec.intensities.state_rates(3.7, 1, 0, 0, 0.0) == 0.0);
    CHECK(spec.payments.state_transition_payment(5.0, 0, 1, 0, 0.0) == 1.0);
    CHECK(spec.discount(9.0) == 0.03);
    CHECK(spec.intensities.rate_bound >= 0.01);
}

TEST_CASE("load_contract: missing horizon names the key") {
    const std::string doc = R"({"states": {"labels": ["a"], "initial": "a"}})";
    CHECK_THROWS_WITH_AS(thiele::load_contract(doc), doctest::Contains("horizon"),
                         ParseError);
}

TEST_CASE("load_contract: free-policy document expands states and modes") {
    const auto spec = testutil::load_fixture("free_policy.json");
    CHECK(spec.n_states() == 3);
    CHECK(spec.n_modes() == 2);
    // mode intensity only from the alive state
    CHECK(spec.intensities.mode_rates(1.0, 0, 1, 0) == 0.1);
    CHECK(spec.intensities.mode_rates(1.0, 0, 1, 1) == 0.0);
    // premiums only in the premium mode
    CHECK(spec.payments.sojourn_rate(1.0, 0, 0, 0.0) == -0.02);
    CHECK(spec.payments.sojourn_rate(1.0, 0, 1, 0.0) == 0.0);
    // death benefit in both modes (no "mode" key in the document)
    CHECK(spec.payments.state_transition_payment(1.0, 0, 1, 0, 0.0) == 1.0);
    CHECK(spec.payments.state_transition_payment(1.0, 0, 1, 1, 0.0) == 1.0);
    CHECK(spec.payments.is_surrender(0, 2));
    CHECK(spec.payments.paid_fraction(0, 2) == 0.9);
}

TEST_CASE("load_contract: validation errors") {
    const std::string negative_rate = R"({
        "horizon": 10.0,
        "states": {"labels": ["a", "b"], "initial": "a"},
        "intensities": {"kind": "markov",
                        "state": [{"from": "a", "to": "b", "value": -0.1}]},
        "payments": {},
        "discount": {"value": 0.03}})";
    CHECK_THROWS_AS(thiele::load_contract(negative_rate), ValidationError);

    const std::string bad_horizon = R"({
        "horizon": -1.0,
        "states": {"labels": ["a"], "initial": "a"},
        "intensities": {"kind": "markov"},
        "payments": {},
        "discount": {"value": 0.03}})";
    CHECK_THROWS_AS(thiele::load_contract(bad_horizon), ValidationError);

    const std::string bad_fraction = R"({
        "horizon": 10.0,
        "states": {"labels": ["a", "b"], "initial": "a"},
        "intensities": {"kind": "markov"},
        "payments": {"surrender_fraction": [{"from": "a", "to": "b", "fraction": 1.2}]},
        "discount": {"value": 0.03}})";
    CHECK_THROWS_AS(thiele::load_contract(bad_fraction), ValidationError);

    CHECK_THROWS_AS(thiele::load_contract("not json"), ParseError);
    CHECK_THROWS_AS(thiele::load_contract_file("/nonexistent/path.json"), IoError);
}

TEST_CASE("load_contract is deterministic across loads") {
    const auto a = testutil::load_fixture("free_policy.json");
    const auto b = testutil::load_fixture("free_policy.json");
    for (int n = 0; n <= 100; ++n) {
        const double t = 10.0 * n / 100.0;
        for (StateId i = 0; i < 3; ++i)
            for (ModeId k = 0; k < 2; ++k) {
                CHECK(a.payments.sojourn_rate(t, i, k, 0.0) ==
                      b.payments.sojourn_rate(t, i, k, 0.0));
                for (StateId j = 0; j < 3; ++j)
                    if (i != j)
                        CHECK(a.intensities.state_rates(t, i, j, k, 0.0) ==
                              b.intensities.state_rates(t, i, j, k, 0.0));
            }
    }
}

TEST_CASE("payments evaluate to exactly zero beyond the horizon") {
    const auto spec = testutil::load_fixture("free_policy.json");
    for (double t : {10.0001, 11.0, 200.0}) {
        CHECK(spec.payments.sojourn_rate(t, 0, 0, 0.0) == 0.0);
        CHECK(spec.payments.state_transition_payment(t, 0, 1, 0, 0.0) == 0.0);
        CHECK(spec.payments.mode_transition_payment(t, 0, 1, 0, 0.0) == 0.0);
    }
}

TEST_CASE("validate_assumptions: clean contract passes all checks") {
    const auto spec = testutil::load_fixture("term_insurance.json");
    const auto report = validate_assumptions(spec, 1000);
    CHECK(report.all_passed());
    CHECK(report.checks.size() >= 10);

    // Every accepted rate stays finite, nonnegative and within the bound
    // on a dense grid.
    for (int n = 0; n < 1000; ++n) {
        const double t = spec.horizon * n / 999.0;
        const double r = spec.intensities.state_rates(t, 0, 1, 0, 0.0);
        CHECK(std::isfinite(r));
        CHECK(r >= 0.0);
        CHECK(r <= spec.intensities.rate_bound);
    }
}

TEST_CASE("validate_assumptions: injected defects are reported with witnesses") {
    auto spec = testutil::two_state_spec(0.01, 0.03, 1.0, 10.0);

    SUBCASE("negative rate at some times") {
        spec.intensities.state_rates = [](double t, StateId i, StateId j, ModeId, double) {
            if (i == 0 && j == 1) return t > 5.0 ? -0.1 : 0.01;
            return 0.0;
        };
        const auto report = validate_assumptions(spec, 1000);
        CHECK_FALSE(report.all_passed());
        for (const auto& c : report.checks)
            if (c.name == "state_rates_nonnegative_finite") {
                CHECK_FALSE(c.passed);
                CHECK_FALSE(c.witness.empty());
            }
    }

    SUBCASE("surrender fraction above one") {
        spec.payments.surrender_reserve_fraction[{0, 1}] = 1.2;
        const auto report = validate_assumptions(spec, 100);
        bool flagged = false;
        for (const auto& c : report.checks)
            if (c.name == "surrender_fractions_in_unit_interval" && !c.passed) flagged = true;
        CHECK(flagged);
    }

    SUBCASE("total exit rate above the declared bound") {
        spec.intensities.rate_bound = 0.001;
        const auto report = validate_assumptions(spec, 100);
        bool flagged = false;
        for (const auto& c : report.checks)
            if (c.name == "total_exit_rate_within_bound" && !c.passed) flagged = true;
        CHECK(flagged);
    }

    SUBCASE("failures are reported, not thrown") {
        spec.intensities.rate_bound = 0.0;
        CHECK_NOTHROW(validate_assumptions(spec, 100));
    }
}

TEST_CASE("validate_assumptions: markov rates must not depend on duration") {
    auto spec = testutil::two_state_spec(0.01, 0.03, 1.0, 10.0);
    spec.intensities.state_rates = [](double, StateId i, StateId j, ModeId, double u) {
        return (i == 0 && j == 1) ? 0.01 * std::exp(-u) : 0.0;
    };
    const auto report = validate_assumptions(spec, 200);
    bool flagged = false;
    for (const auto& c : report.checks)
        if (c.name == "markov_rates_duration_invariant" && !c.passed) flagged = true;
    CHECK(flagged);
}

TEST_CASE("contract structural validation") {
    auto spec = testutil::two_state_spec(0.01, 0.03, 1.0, 10.0);
    CHECK_NOTHROW(spec.validate());
    spec.horizon = 0.0;
    CHECK_THROWS_AS(spec.validate(), ValidationError);
    spec.horizon = 10.0;
    spec.states.labels = {"alive", "alive"};
    CHECK_THROWS_AS(spec.validate(), ValidationError);
}
