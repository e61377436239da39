#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "thiele/errors.hpp"
#include "thiele/reserve_linear.hpp"
#include "thiele/simulate.hpp"

using namespace thiele;

namespace {
const double kTermV0 = testutil::term_insurance_value(0.01, 0.03, 10.0);
const double kEndowV0 = testutil::pure_endowment_value(0.01, 0.03, 10.0);
} // namespace

TEST_CASE("term insurance matches the closed form") {
    const auto spec = testutil::load_fixture("term_insurance.json");
    const auto vf = solve_thiele_markov(spec, 1e-3);
    const double v0 = vf.value(0.0, 0, 0);
    CHECK(std::abs(v0 - 0.0824200) <= 1e-6);
    CHECK(std::abs(v0 - kTermV0) <= 1e-10);
    // whole-curve agreement, not just t = 0
    for (double t : {1.0, 3.7, 5.0, 9.25})
        CHECK(vf.value(t, 0, 0) ==
              doctest::Approx(testutil::term_insurance_value(0.01, 0.03, 10.0 - t))
                  .epsilon(1e-9));
    CHECK(vf.value(10.0, 0, 0) == 0.0);
}

TEST_CASE("pure endowment matches the closed form") {
    const auto spec = testutil::load_fixture("pure_endowment.json");
    const auto vf = solve_thiele_markov(spec, 1e-3);
    CHECK(std::abs(vf.value(0.0, 0, 0) - 0.6703200) <= 1e-6);
    CHECK(std::abs(vf.value(0.0, 0, 0) - kEndowV0) <= 1e-10);
    // terminal node keeps both limits: 0 after the payment, 1 before
    CHECK(vf.value(10.0, 0, 0) == 0.0);
    CHECK(vf.value_left(10.0, 0, 0) == doctest::Approx(1.0));
}

TEST_CASE("zero payments solve to the zero function") {
    const auto spec = testutil::two_state_spec(0.01, 0.03, 0.0, 10.0);
    const auto vf = solve_thiele_markov(spec, 1e-2);
    for (std::size_t n = 0; n < vf.n_nodes(); ++n)
        for (StateId i = 0; i < 2; ++i) CHECK(vf.at(n, i, 0) == 0.0);
}

TEST_CASE("absorbing state without payments keeps zero value") {
    const auto spec = testutil::load_fixture("term_insurance.json");
    const auto vf = solve_thiele_markov(spec, 1e-3);
    for (std::size_t n = 0; n < vf.n_nodes(); ++n) CHECK(vf.at(n, 1, 0) == 0.0);
}

TEST_CASE("occupation-probability quadrature representation agrees") {
    // V(0) = int e^{-delta s} p(s) mu ds with p(s) = e^{-mu s}, evaluated by
    // an independent Simpson rule.
    const auto spec = testutil::load_fixture("term_insurance.json");
    const double v0 = solve_thiele_markov(spec, 1e-3).value(0.0, 0, 0);
    const double quad = testutil::occupation_quadrature_term_value(
        [](double) { return 0.01; }, 0.03, 10.0);
    CHECK(std::abs(v0 - quad) <= 1e-8);
}

TEST_CASE("time-varying hazard with off-grid breakpoint") {
    // mu jumps from 0.01 to 0.05 at t = 4.99951, far from any 1e-3 grid
    // node; the solver restarts integration there.
    const std::string doc = R"({
        "horizon": 10.0,
        "states": {"labels": ["alive", "dead"], "initial": "alive"},
        "intensities": {"kind": "markov", "state": [
            {"from": "alive", "to": "dead",
             "breakpoints": [0.0, 4.99951], "values": [0.01, 0.05]}]},
        "payments": {"state_transition": [{"from": "alive", "to": "dead", "value": 1.0}]},
        "discount": {"value": 0.03}})";
    const auto spec = thiele::load_contract(doc);
    const double v0 = solve_thiele_markov(spec, 1e-3).value(0.0, 0, 0);
    const double quad = testutil::occupation_quadrature_term_value(
        [](double s) { return s < 4.99951 ? 0.01 : 0.05; }, 0.03, 10.0, 100000);
    CHECK(std::abs(v0 - quad) <= 1e-7);
}

TEST_CASE("solver configuration errors") {
    const auto spec = testutil::load_fixture("term_insurance.json");
    CHECK_THROWS_AS(solve_thiele_markov(spec, 0.0), UsageError);
    CHECK_THROWS_AS(solve_thiele_markov(spec, 0.3), UsageError);   // does not divide T

    // step larger than the smallest breakpoint gap
    const std::string doc = R"({
        "horizon": 10.0,
        "states": {"labels": ["a", "b"], "initial": "a"},
        "intensities": {"kind": "markov", "state": [
            {"from": "a", "to": "b", "breakpoints": [0.0, 0.5, 0.5004], "values": [0.01, 0.02, 0.01]}]},
        "payments": {},
        "discount": {"value": 0.03}})";
    CHECK_THROWS_AS(solve_thiele_markov(thiele::load_contract(doc), 1e-3), UsageError);

    const auto semi = testutil::load_fixture("disability_semimarkov.json");
    CHECK_THROWS_AS(solve_thiele_markov(semi, 1e-2), UsageError);
}

TEST_CASE("fourth-order convergence on a stiff short contract") {
    // T=1, mu=2, delta=1: errors sit far above the rounding floor, so the
    // halving ratios show the clean RK4 order (~16).
    const auto spec = testutil::two_state_spec(2.0, 1.0, 1.0, 1.0);
    const double exact = testutil::term_insurance_value(2.0, 1.0, 1.0);
    double prev = -1.0;
    for (double h : {4e-3, 2e-3, 1e-3}) {
        const double err = std::abs(solve_thiele_markov(spec, h).value(0.0, 0, 0) - exact);
        if (prev > 0.0) CHECK(prev / err >= 8.0);
        prev = err;
    }
}

TEST_CASE("term-insurance errors sit at the floating-point floor") {
    // At these steps the RK4 truncation error (~1e-18) is far below the
    // accumulated rounding of ~1e4 steps, so only the floor is observable.
    const auto spec = testutil::load_fixture("term_insurance.json");
    for (double h : {4e-3, 2e-3, 1e-3})
        CHECK(std::abs(solve_thiele_markov(spec, h).value(0.0, 0, 0) - kTermV0) <= 1e-13);
}

TEST_CASE("raising the death benefit never lowers the reserve") {
    for (double bump : {0.1, 0.5, 2.0}) {
        const auto base = testutil::two_state_spec(0.01, 0.03, 1.0, 10.0);
        const auto more = testutil::two_state_spec(0.01, 0.03, 1.0 + bump, 10.0);
        const auto vf0 = solve_thiele_markov(base, 1e-2);
        const auto vf1 = solve_thiele_markov(more, 1e-2);
        for (std::size_t n = 0; n < vf0.n_nodes(); ++n)
            CHECK(vf1.at(n, 0, 0) >= vf0.at(n, 0, 0));
    }
}

TEST_CASE("discount shift scales the endowment by exp(-cT)") {
    const double c = 0.017;
    const auto base = testutil::two_state_spec(0.01, 0.03, 0.0, 10.0, 1.0);
    const auto shifted = testutil::two_state_spec(0.01, 0.03 + c, 0.0, 10.0, 1.0);
    const double v = solve_thiele_markov(base, 1e-3).value(0.0, 0, 0);
    const double vs = solve_thiele_markov(shifted, 1e-3).value(0.0, 0, 0);
    CHECK(std::abs(vs / v - std::exp(-c * 10.0)) <= 1e-8);
}

TEST_CASE("sum at risk") {
    const auto spec = testutil::load_fixture("term_insurance.json");
    const auto risk = sum_at_risk(solve_thiele_markov(spec, 1e-3), spec);

    SUBCASE("term insurance: R_01(0) = 1 - V(0)") {
        CHECK(risk.state_risk(0.0, 0, 1, 0) == doctest::Approx(1.0 - kTermV0).epsilon(1e-9));
        CHECK(std::abs(risk.state_risk(0.0, 0, 1, 0) - 0.9175800) <= 1e-6);
    }

    SUBCASE("zero payments make all risks antisymmetric value differences") {
        const auto plain = testutil::two_state_spec(0.01, 0.03, 0.0, 10.0, 1.0);
        const auto r = sum_at_risk(solve_thiele_markov(plain, 1e-2), plain);
        for (double t : {0.0, 2.5, 7.75, 9.99})
            CHECK(r.state_risk(t, 0, 1, 0) ==
                  doctest::Approx(-r.state_risk(t, 1, 0, 0)).epsilon(1e-12));
    }

    SUBCASE("endowment forfeited on death just before maturity") {
        const auto endow = testutil::load_fixture("pure_endowment.json");
        const auto r = sum_at_risk(solve_thiele_markov(endow, 1e-3), endow);
        CHECK(r.state_risk(10.0, 0, 1, 0) == doctest::Approx(-1.0));
    }
}

TEST_CASE("pathwise backward residual") {
    const auto spec = testutil::load_fixture("term_insurance.json");
    const auto vf = solve_thiele_markov(spec, 1e-3);
    const double h = 1e-3;

    SUBCASE("bounded by 10h across seeds, including death paths") {
        bool saw_jump = false;
        for (std::uint64_t seed = 0; seed < 30; ++seed) {
            const Path path = simulate_path(spec, seed);
            saw_jump = saw_jump || !path.events.empty();
            const auto r = pathwise_bsde_residual(path, vf, spec, h);
            CHECK(r.total() <= 10.0 * h);
        }
        CHECK(saw_jump);
    }

    SUBCASE("zero payments give an exactly zero residual") {
        const auto plain = testutil::two_state_spec(0.01, 0.03, 0.0, 10.0);
        const auto vf0 = solve_thiele_markov(plain, 1e-2);
        const Path path = simulate_path(plain, 5);
        const auto r = pathwise_bsde_residual(path, vf0, plain, 1e-2);
        CHECK(r.total() == 0.0);
    }

    SUBCASE("horizon mismatch is rejected") {
        Path path = simulate_path(spec, 1);
        path.horizon = 7.0;
        CHECK_THROWS_AS(pathwise_bsde_residual(path, vf, spec, h), UsageError);
    }
}

TEST_CASE("semi-Markov solver") {
    SUBCASE("duration-independent rates reduce to the Markov solution") {
        const std::string doc = R"({
            "horizon": 10.0,
            "states": {"labels": ["alive", "dead"], "initial": "alive"},
            "intensities": {"kind": "semi_markov",
                            "state": [{"from": "alive", "to": "dead", "value": 0.01}]},
            "payments": {"state_transition": [{"from": "alive", "to": "dead", "value": 1.0}]},
            "discount": {"value": 0.03}})";
        const auto semi = thiele::load_contract(doc);
        const auto vf = solve_thiele_semimarkov(semi, 1e-2, 1e-2);
        const auto markov = testutil::load_fixture("term_insurance.json");
        const auto ref = solve_thiele_markov(markov, 1e-2);
        for (std::size_t n = 0; n < vf.n_nodes(); ++n) {
            const double t = vf.node_time(n);
            for (std::size_t m = 0; m < vf.slice_size(n); ++m)
                CHECK(std::abs(vf.at_u(n, m, 0, 0) - ref.at(n, 0, 0)) <= 1e-6);
            CHECK(std::abs(vf.value(t, 0, 0, 0.37 * t) - ref.value(t, 0, 0)) <= 1e-6);
        }
    }

    SUBCASE("zero payments solve to zero") {
        const std::string doc = R"({
            "horizon": 10.0,
            "states": {"labels": ["a", "b"], "initial": "a"},
            "intensities": {"kind": "semi_markov",
                            "state": [{"from": "a", "to": "b", "value": 0.05,
                                       "duration_factor": {"kind": "exp", "rate": -0.5}}]},
            "payments": {},
            "discount": {"value": 0.03}})";
        const auto spec = thiele::load_contract(doc);
        const auto vf = solve_thiele_semimarkov(spec, 1e-2, 1e-2);
        CHECK(vf.value(0.0, 0, 0, 0.0) == 0.0);
        CHECK(vf.value(5.0, 0, 0, 2.0) == 0.0);
    }

    SUBCASE("misaligned duration step interpolates to the same answer") {
        const auto spec = testutil::load_fixture("disability_semimarkov.json");
        const double a = solve_thiele_semimarkov(spec, 0.02, 0.02).value(0.0, 0, 0, 0.0);
        const double b = solve_thiele_semimarkov(spec, 0.02, 0.03).value(0.0, 0, 0, 0.0);
        CHECK(std::abs(a - b) <= 5e-4);
    }

    SUBCASE("queries beyond the diagonal clamp and count a warning") {
        const auto spec = testutil::load_fixture("disability_semimarkov.json");
        const auto vf = solve_thiele_semimarkov(spec, 0.1, 0.1);
        CHECK(vf.clamp_warnings() == 0);
        (void)vf.value(1.0, 0, 0, 5.0);   // u > t
        CHECK(vf.clamp_warnings() > 0);
    }

    SUBCASE("markov contract is rejected") {
        const auto markov = testutil::load_fixture("term_insurance.json");
        CHECK_THROWS_AS(solve_thiele_semimarkov(markov, 1e-2, 1e-2), UsageError);
    }
}

TEST_CASE("semi-Markov pathwise residual on the disability fixture") {
    const auto spec = testutil::load_fixture("disability_semimarkov.json");
    const auto vf = solve_thiele_semimarkov(spec, 0.01, 0.01);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Path path = simulate_path(spec, seed);
        CHECK(pathwise_bsde_residual(path, vf, spec, 0.01).total() <= 0.1);
    }
}

TEST_CASE("multi-mode semi-Markov degenerates to the coupled Markov solve") {
    const std::string base = R"({
        "horizon": 10.0,
        "states": {"labels": ["alive", "dead"], "initial": "alive"},
        "modes": {"labels": ["m0", "m1"], "initial": "m0"},
        "intensities": {"kind": "KIND",
                        "state": [{"from": "alive", "to": "dead", "value": 0.01}],
                        "mode": [{"from": "m0", "to": "m1", "value": 0.05}]},
        "payments": {"state_transition": [{"from": "alive", "to": "dead", "mode": "m0", "value": 1.0},
                                          {"from": "alive", "to": "dead", "mode": "m1", "value": 0.5}]},
        "discount": {"value": 0.03}})";
    auto semi_doc = base;
    semi_doc.replace(semi_doc.find("KIND"), 4, "semi_markov");
    auto markov_doc = base;
    markov_doc.replace(markov_doc.find("KIND"), 4, "markov");
    const auto vf = solve_thiele_semimarkov(thiele::load_contract(semi_doc), 1e-2, 1e-2);
    const auto ref = solve_thiele_markov(thiele::load_contract(markov_doc), 1e-2);
    for (std::size_t n = 0; n < vf.n_nodes(); n += 100)
        for (ModeId k = 0; k < 2; ++k)
            CHECK(std::abs(vf.at_u(n, 0, 0, k) - ref.at(n, 0, k)) <= 1e-6);
}
