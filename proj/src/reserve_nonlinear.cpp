#include "thiele/reserve_nonlinear.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "markov_ode.hpp"
#include "thiele/errors.hpp"
#include "thiele/rng.hpp"

namespace thiele {

NonlinearDriver surrender_driver(const ContractSpec& spec) {
    const auto& fractions = spec.payments.surrender_reserve_fraction;
    if (fractions.empty())
        throw UsageError("surrender_driver: contract declares no surrender fractions");

    // The fold is exact only when the surrender target keeps zero value.
    for (const auto& [pair, frac] : fractions) {
        (void)frac;
        const StateId tgt = pair.second;
        for (double t : {0.0, 0.25 * spec.horizon, 0.5 * spec.horizon, 0.99 * spec.horizon})
            for (ModeId k = 0; k < spec.n_modes(); ++k) {
                if (spec.payments.sojourn_rate(t, tgt, k, 0.0) != 0.0)
                    throw UsageError("surrender_driver: target state has sojourn payments");
                for (StateId j = 0; j < spec.n_states(); ++j)
                    if (j != tgt &&
                        spec.payments.state_transition_payment(t, tgt, j, k, 0.0) != 0.0)
                        throw UsageError(
                            "surrender_driver: target state has transition payments");
                for (double a : spec.payments.lump_times)
                    if (spec.payments.lump_amount(a, tgt, k, 0.0) != 0.0)
                        throw UsageError("surrender_driver: target state has lump payments");
            }
    }

    // Lipschitz constant: sup over time of sum kappa_ij lambda_ij.
    auto fold_rate = [fractions, intens = spec.intensities](double t, StateId i, ModeId k,
                                                            double u) {
        double c = 0.0;
        for (const auto& [pair, frac] : fractions)
            if (pair.first == i)
                c += (1.0 - frac) * intens.state_rates(t, i, pair.second, k, u);
        return c;
    };
    double c_max = 0.0;
    for (int s = 0; s <= 1000; ++s) {
        const double t = spec.horizon * s / 1000.0;
        for (StateId i = 0; i < spec.n_states(); ++i)
            for (ModeId k = 0; k < spec.n_modes(); ++k)
                c_max = std::max(c_max, fold_rate(t, i, k, 0.0));
    }

    NonlinearDriver driver;
    driver.gamma = [fold_rate](double t, StateId i, ModeId k, double u, double y,
                               std::span<const double>) {
        return -fold_rate(t, i, k, u) * y;
    };
    driver.lipschitz_c = c_max;
    return driver;
}

ValueFunction solve_nonlinear_markov(const ContractSpec& spec, const NonlinearDriver& driver,
                                     double step, double picard_tol, int max_iters,
                                     NonlinearSolveStats* stats) {
    if (!driver.gamma) throw UsageError("solve_nonlinear_markov: driver has no gamma");
    if (!(driver.lipschitz_c >= 0.0) || !std::isfinite(driver.lipschitz_c))
        throw UsageError("solve_nonlinear_markov: invalid Lipschitz constant");
    if (driver.lump && (!(driver.lump_c1 >= 0.0) || driver.lump_c1 >= 1.0))
        throw UsageError("solve_nonlinear_markov: lump constant C1 must lie in [0, 1)");
    if (!(driver.lump_c2 >= 0.0))
        throw UsageError("solve_nonlinear_markov: lump constant C2 must be nonnegative");
    if (!(picard_tol > 0.0) || max_iters < 1)
        throw UsageError("solve_nonlinear_markov: bad tolerance or iteration cap");

    detail::DriverHooks hooks;
    hooks.gamma = driver.gamma;
    hooks.lump = driver.lump;
    hooks.picard_tol = picard_tol;
    hooks.max_iters = max_iters;
    NonlinearSolveStats local;
    hooks.max_contraction_ratio = &local.max_contraction_ratio;
    hooks.max_iterations_used = &local.max_iterations_used;
    ValueFunction vf = detail::solve_markov_ode(spec, step, &hooks);
    if (stats) *stats = local;
    return vf;
}

LipschitzReport check_lipschitz(const NonlinearDriver& driver, const ContractSpec& spec,
                                std::size_t sample_count, std::uint64_t seed) {
    if (sample_count < 2) throw UsageError("check_lipschitz: sample_count must be >= 2");
    if (!driver.gamma) throw UsageError("check_lipschitz: driver has no gamma");

    const std::size_t ns = spec.n_states();
    RandomStream rs(seed, 0);
    LipschitzReport report;

    std::vector<double> z(ns), zb(ns), dz(ns);
    for (std::size_t s = 0; s < sample_count; ++s) {
        const double t = rs.uniform() * spec.horizon;
        const double u = rs.uniform() * t;
        const StateId i = s % ns;
        const ModeId k = (s / ns) % spec.n_modes();

        auto draw = [&] { return -10.0 + 20.0 * rs.uniform(); };
        const double y = draw(), yb = draw();
        for (StateId j = 0; j < ns; ++j) {
            z[j] = (j == i) ? 0.0 : draw();
            zb[j] = (j == i) ? 0.0 : draw();
            dz[j] = z[j] - zb[j];
        }

        // Intensity-weighted norm of the z difference at this point.
        double norm_sq = 0.0;
        for (StateId j = 0; j < ns; ++j)
            if (j != i)
                norm_sq += dz[j] * dz[j] * spec.intensities.state_rates(t, i, j, k, u);
        const double denom = std::abs(y - yb) + std::sqrt(norm_sq);
        if (denom < 1e-12) continue;

        const double g = driver.gamma(t, i, k, u, y, z);
        const double gb = driver.gamma(t, i, k, u, yb, zb);
        const double ratio = std::abs(g - gb) / denom;
        if (ratio > report.max_gamma_ratio) {
            report.max_gamma_ratio = ratio;
            if (ratio > driver.lipschitz_c * (1.0 + 1e-9)) {
                report.gamma_violations = true;
                std::ostringstream os;
                os << "gamma ratio " << ratio << " > C=" << driver.lipschitz_c << " at t=" << t
                   << " state=" << i << " y=" << y << " yb=" << yb;
                report.witness = os.str();
            }
        }

        const double g0 = driver.gamma(t, i, k, u, 0.0, std::vector<double>(ns, 0.0));
        if (!std::isfinite(g0)) report.gamma_finite_at_origin = false;

        if (driver.lump) {
            const double a = driver.lump(t, i, k, u, y, z);
            const double ab = driver.lump(t, i, k, u, yb, zb);
            const double lhs = (a - ab) * (a - ab);
            const double rhs =
                driver.lump_c1 * (y - yb) * (y - yb) + driver.lump_c2 * norm_sq;
            if (rhs > 1e-24) report.max_lump_ratio_sq = std::max(report.max_lump_ratio_sq, lhs / rhs);
            if (lhs > rhs * (1.0 + 1e-9) + 1e-24) {
                report.lump_violations = true;
                if (report.witness.empty()) {
                    std::ostringstream os;
                    os << "lump bound violated at t=" << t << " state=" << i;
                    report.witness = os.str();
                }
            }
        }
    }
    return report;
}

} // namespace thiele
