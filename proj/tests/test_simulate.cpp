#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "helpers.hpp"
#include "thiele/errors.hpp"
#include "thiele/simulate.hpp"

using namespace thiele;

TEST_CASE("zero intensity: no events for any seed") {
    const auto spec = testutil::two_state_spec(0.0, 0.03, 1.0, 10.0);
    for (std::uint64_t seed : {0ull, 1ull, 42ull, 987654321ull})
        CHECK(simulate_path(spec, seed).events.empty());
}

TEST_CASE("death fraction matches the exponential survival probability") {
    // P(death before T) = 1 - e^{-mu T} = 1 - e^{-0.1}
    const auto spec = testutil::load_fixture("term_insurance.json");
    const std::size_t n = 100000;
    std::size_t deaths = 0;
    for (std::size_t p = 0; p < n; ++p)
        if (!simulate_path(spec, 1000 + p).events.empty()) ++deaths;
    const double expect = -std::expm1(-0.1);
    const double frac = static_cast<double>(deaths) / n;
    const double se = std::sqrt(expect * (1.0 - expect) / n);
    CHECK(std::abs(frac - expect) <= 3.0 * se);
}

TEST_CASE("paths satisfy the structural invariants") {
    for (const char* name :
         {"term_insurance.json", "free_policy.json", "disability_semimarkov.json"}) {
        const auto spec = testutil::load_fixture(name);
        for (std::uint64_t seed = 0; seed < 300; ++seed) {
            const Path path = simulate_path(spec, seed);
            CHECK_NOTHROW(path.check_invariants());
        }
    }
}

TEST_CASE("reproducibility: identical seed gives the identical path") {
    const auto spec = testutil::load_fixture("free_policy.json");
    for (std::uint64_t seed : {3ull, 77ull, 123456ull}) {
        const Path a = simulate_path(spec, seed);
        const Path b = simulate_path(spec, seed);
        REQUIRE(a.events.size() == b.events.size());
        for (std::size_t e = 0; e < a.events.size(); ++e) {
            CHECK(a.events[e].time == b.events[e].time);   // bit-for-bit
            CHECK(a.events[e].kind == b.events[e].kind);
            CHECK(a.events[e].from == b.events[e].from);
            CHECK(a.events[e].to == b.events[e].to);
        }
    }
}

TEST_CASE("mode jump limit kills modifications") {
    const auto spec = testutil::load_fixture("free_policy.json");

    SUBCASE("limit 0: no path has a mode jump") {
        for (std::uint64_t seed = 0; seed < 500; ++seed) {
            const Path path = simulate_path(spec, seed, 0);
            for (const auto& e : path.events) CHECK(e.kind != EventKind::mode_jump);
        }
    }

    SUBCASE("limit m bounds the modification count") {
        for (std::uint64_t seed = 0; seed < 500; ++seed)
            CHECK(simulate_path(spec, seed, 1).mode_jump_count() <= 1);
    }
}

TEST_CASE("thinning correctness: first-jump law by Kolmogorov-Smirnov") {
    // Two-state constant rate 0.2; compare jump times against the
    // horizon-truncated exponential at level 1e-3.
    const double mu = 0.2, T = 10.0;
    const auto spec = testutil::two_state_spec(mu, 0.0, 1.0, T);
    std::vector<double> times;
    const std::size_t n = 100000;
    for (std::size_t p = 0; p < n; ++p) {
        const Path path = simulate_path(spec, 50000 + p);
        if (!path.events.empty()) times.push_back(path.events.front().time);
    }
    std::sort(times.begin(), times.end());
    const double denom = -std::expm1(-mu * T);
    double d = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double cdf = -std::expm1(-mu * times[i]) / denom;
        d = std::max(d, std::abs(cdf - static_cast<double>(i + 1) / times.size()));
        d = std::max(d, std::abs(cdf - static_cast<double>(i) / times.size()));
    }
    const double critical =
        std::sqrt(-0.5 * std::log(0.5e-3)) / std::sqrt(static_cast<double>(times.size()));
    CHECK(d <= critical);
}

TEST_CASE("rate above the declared bound raises a simulation error") {
    auto spec = testutil::two_state_spec(0.5, 0.03, 1.0, 10.0);
    spec.intensities.rate_bound = 0.1;   // bound too small: thinning must refuse
    bool raised = false;
    for (std::uint64_t seed = 0; seed < 50 && !raised; ++seed) {
        try {
            simulate_path(spec, seed);
        } catch (const SimulationError&) {
            raised = true;
        }
    }
    CHECK(raised);
}

TEST_CASE("martingale diagnostics: compensated means vanish") {
    const auto spec = testutil::load_fixture("term_insurance.json");
    const auto report = martingale_diagnostics(spec, 10000, 7);
    CHECK(report.max_abs_mean_z() <= 4.0);
    REQUIRE(report.pairs.size() == 2);
}

TEST_CASE("martingale diagnostics: orthogonality of disjoint pairs") {
    // 3-state chain a -> b -> c: the pairs (a,b) and (b,c) never fire together.
    const std::string doc = R"({
        "horizon": 10.0,
        "states": {"labels": ["a", "b", "c"], "initial": "a"},
        "intensities": {"kind": "markov", "state": [
            {"from": "a", "to": "b", "value": 0.2},
            {"from": "b", "to": "c", "value": 0.3}]},
        "payments": {},
        "discount": {"value": 0.0}})";
    const auto spec = thiele::load_contract(doc);
    const auto report = martingale_diagnostics(spec, 10000, 11);
    CHECK(report.max_abs_mean_z() <= 4.0);
    CHECK(report.max_abs_covariance_z() <= 4.0);
}

TEST_CASE("martingale diagnostics: zero intensity means are exactly zero") {
    const auto spec = testutil::two_state_spec(0.0, 0.03, 1.0, 10.0);
    const auto report = martingale_diagnostics(spec, 200, 3);
    for (const auto& p : report.pairs) {
        CHECK(p.mean == 0.0);
        CHECK(p.z == 0.0);
    }
}

TEST_CASE("martingale diagnostics: mode pairs are included and centered") {
    const auto spec = testutil::load_fixture("free_policy.json");
    const auto report = martingale_diagnostics(spec, 4000, 19);
    bool has_mode_pair = false;
    for (const auto& p : report.pairs)
        if (p.is_mode_pair) has_mode_pair = true;
    CHECK(has_mode_pair);
    CHECK(report.max_abs_mean_z() <= 4.0);
    CHECK(report.max_abs_covariance_z() <= 4.0);
    CHECK_FALSE(report.to_text().empty());
}

TEST_CASE("martingale diagnostics rejects tiny path counts") {
    const auto spec = testutil::load_fixture("term_insurance.json");
    CHECK_THROWS_AS(martingale_diagnostics(spec, 50, 1), UsageError);
}

TEST_CASE("path dump format") {
    const auto spec = testutil::load_fixture("term_insurance.json");
    std::ostringstream os;
    write_path_header(os);
    Path path = simulate_path(spec, 4242);
    for (std::uint64_t seed = 0; path.events.empty(); ++seed)
        path = simulate_path(spec, seed);
    write_path_events(os, 0, path);
    const std::string dump = os.str();
    CHECK(dump.rfind("path_id,time,kind,from,to\n", 0) == 0);
    CHECK(dump.find("state") != std::string::npos);
}
