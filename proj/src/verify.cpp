#include "thiele/verify.hpp"

#include <cmath>
#include <sstream>

#include "thiele/errors.hpp"
#include "thiele/modifications.hpp"
#include "thiele/montecarlo.hpp"
#include "thiele/reserve_linear.hpp"
#include "thiele/simulate.hpp"

namespace thiele {

namespace {

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(10);
    os << x;
    return os.str();
}

} // namespace

bool VerifyReport::all_passed() const {
    for (const auto& c : checks)
        if (!c.passed) return false;
    return true;
}

std::string VerifyReport::to_text() const {
    std::ostringstream os;
    for (const auto& c : checks)
        os << (c.passed ? "PASS" : "FAIL") << ' ' << c.name << "  " << c.detail << '\n';
    os << (all_passed() ? "all checks passed" : "some checks FAILED") << '\n';
    return os.str();
}

VerifyReport verify_contract(const ContractSpec& spec, const VerifyOptions& options) {
    VerifyReport report;
    auto add = [&](const std::string& name, bool ok, const std::string& detail) {
        report.checks.push_back({name, ok, detail});
    };

    const bool markov = spec.intensities.kind == ModelKind::markov;
    const bool multi_mode = spec.n_modes() > 1;
    const bool has_surrender = !spec.payments.surrender_reserve_fraction.empty();
    const double h = options.step;
    const double hu = options.duration_step > 0.0 ? options.duration_step : h;

    // Standing assumptions.
    {
        const ValidationReport v = validate_assumptions(spec, 1000);
        std::string bad;
        for (const auto& c : v.checks)
            if (!c.passed) bad += c.name + " ";
        add("standing_assumptions", v.all_passed(), bad.empty() ? "1000 samples" : bad);
    }

    // Solve.
    ValueFunction vf = markov ? solve_thiele_markov(spec, h)
                              : solve_thiele_semimarkov(spec, h, hu);
    const double v0 = vf.value(0.0, spec.states.initial_state, spec.modes.initial_mode, 0.0);
    add("solver_finite", std::isfinite(v0), "V(0)=" + fmt(v0));

    FrozenValues frozen;
    const bool need_frozen = has_surrender || multi_mode;
    if (need_frozen && markov) frozen = frozen_value_functions(spec, h);
    const FrozenValues* frozen_ptr = nullptr;
    if (markov && need_frozen)
        frozen_ptr = &frozen;
    else if (has_surrender && !markov) {
        // Single-mode semi-Markov with surrender: the solved function is its
        // own frozen value.
        frozen = FrozenValues{vf};
        frozen_ptr = &frozen;
    }

    // Plain Monte Carlo vs the solver.  For multi-mode contracts with
    // surrender the plain flow is defined off frozen values, which does not
    // match the coupled solve, so the comparison runs on the adjusted side.
    if (!(multi_mode && has_surrender)) {
        const ReserveEstimate est = estimate_reserve(spec, CashflowKind::plain, options.paths,
                                                     options.seed, frozen_ptr,
                                                     options.mode_jump_cap);
        const ZReport z = compare_to_solver(est, v0);
        add("solver_vs_monte_carlo", z.pass,
            "V(0)=" + fmt(v0) + " mc=" + fmt(est.mean) + " z=" + fmt(z.z));
    }

    // Martingale structure.
    {
        const MartingaleReport mr =
            martingale_diagnostics(spec, options.martingale_paths, options.seed + 1);
        add("martingale_means", mr.max_abs_mean_z() <= 4.0,
            "max |z|=" + fmt(mr.max_abs_mean_z()));
        add("martingale_orthogonality", mr.max_abs_covariance_z() <= 4.0,
            "max |z|=" + fmt(mr.max_abs_covariance_z()));
    }

    // Pathwise backward residual.
    {
        double worst = 0.0;
        for (std::size_t s = 0; s < options.residual_seeds; ++s) {
            const Path path = simulate_path(spec, options.seed + 100 + s);
            worst = std::max(worst, pathwise_bsde_residual(path, vf, spec, h).total());
        }
        add("pathwise_backward_residual", worst <= 10.0 * h,
            "max=" + fmt(worst) + " bound=" + fmt(10.0 * h));
    }

    // Convergence order under step halving, against a finer reference.
    if (markov) {
        const double ref = solve_thiele_markov(spec, h / 2.0)
                               .value(0.0, spec.states.initial_state, spec.modes.initial_mode);
        double err_prev = -1.0;
        bool ok = true;
        std::string detail;
        for (double hh : {8.0 * h, 4.0 * h, 2.0 * h}) {
            const double err = std::abs(
                solve_thiele_markov(spec, hh).value(0.0, spec.states.initial_state,
                                                    spec.modes.initial_mode) -
                ref);
            if (err_prev >= 0.0) {
                const bool at_floor = err_prev <= 1e-13;
                if (!at_floor && err > 0.0 && err_prev / err < 8.0) ok = false;
                detail += fmt(err_prev / std::max(err, 1e-300)) + " ";
            }
            err_prev = err;
        }
        add("convergence_order", ok, "ratios: " + detail);
    }

    // Determinism: identical seeds give byte-identical dumps and estimates.
    {
        std::ostringstream d1, d2;
        dump_paths(d1, spec, 10, options.seed + 7);
        dump_paths(d2, spec, 10, options.seed + 7);
        const ReserveEstimate e1 = estimate_reserve(spec, CashflowKind::plain, 1000,
                                                    options.seed, frozen_ptr,
                                                    options.mode_jump_cap);
        const ReserveEstimate e2 = estimate_reserve(spec, CashflowKind::plain, 1000,
                                                    options.seed, frozen_ptr,
                                                    options.mode_jump_cap);
        const bool ok =
            d1.str() == d2.str() && estimate_report(e1) == estimate_report(e2);
        add("determinism", ok, "10-path dump and 1000-path estimate repeated");
    }

    // Contract-modification machinery.
    if (multi_mode && markov) {
        const double grid_resid = cantelli_residual(frozen, spec, h, true);
        add("cantelli_grid_residual", grid_resid <= 1e-9, "max=" + fmt(grid_resid));

        double rec_resid = 0.0;
        for (std::size_t s = 0; s < options.residual_seeds; ++s) {
            const Path path = simulate_path(spec, options.seed + 300 + s);
            rec_resid = std::max(
                rec_resid,
                recursion_consistency_residual(path, frozen, spec, options.mode_jump_cap));
        }
        add("recursion_consistency", rec_resid <= 1e-9, "max=" + fmt(rec_resid));

        const ReserveEstimate adj = estimate_reserve(spec, CashflowKind::adjusted,
                                                     options.paths, options.seed, &frozen,
                                                     options.mode_jump_cap);
        const double target =
            frozen.value(spec.modes.initial_mode, 0.0, spec.states.initial_state);
        const ZReport z = compare_to_solver(adj, target);
        add("adjusted_mc_equivalence", z.pass,
            "frozen V(0)=" + fmt(target) + " mc=" + fmt(adj.mean) + " z=" + fmt(z.z));
    }

    return report;
}

} // namespace thiele
