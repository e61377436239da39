#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "thiele/errors.hpp"
#include "thiele/reserve_linear.hpp"

namespace thiele {

namespace {

// RHS of the transport equation at (t, u) for one (state, mode) cell.
// v is the candidate value there; coupling values live on the same slice.
struct SemiMarkovRhs {
    const ContractSpec& spec;

    double operator()(double t, double u, StateId i, ModeId k, double v,
                      const std::function<double(StateId, ModeId, double)>& coupling) const {
        const auto& pay = spec.payments;
        double f = spec.discount(t) * v - pay.sojourn_rate(t, i, k, u);
        for (StateId j = 0; j < spec.n_states(); ++j) {
            if (j == i) continue;
            const double rate = spec.intensities.state_rates(t, i, j, k, u);
            if (rate == 0.0) continue;
            const double vj0 = coupling(j, k, 0.0);   // new state restarts its clock
            if (pay.is_surrender(i, j))
                f -= rate * (pay.paid_fraction(i, j) * v + vj0 - v);
            else
                f -= rate * (pay.state_transition_payment(t, i, j, k, u) + vj0 - v);
        }
        if (spec.n_modes() > 1 && spec.intensities.mode_rates) {
            const double u_after = spec.duration_resets_on_mode_jump ? 0.0 : u;
            for (ModeId l = 0; l < spec.n_modes(); ++l) {
                if (l == k) continue;
                const double rate = spec.intensities.mode_rates(t, k, l, i);
                if (rate == 0.0) continue;
                f -= rate * (pay.mode_transition_payment(t, k, l, i, u) +
                             coupling(i, l, u_after) - v);
            }
        }
        return f;
    }
};

} // namespace

ValueFunction solve_thiele_semimarkov(const ContractSpec& spec, double step,
                                      double duration_step) {
    spec.validate();
    if (spec.intensities.kind != ModelKind::semi_markov)
        throw UsageError("solve_thiele_semimarkov: contract is not semi-Markov");
    if (!(step > 0.0) || !(duration_step > 0.0))
        throw UsageError("solve_thiele_semimarkov: steps must be positive");
    const double T = spec.horizon;
    const double ratio = T / step;
    const auto N = static_cast<std::size_t>(std::llround(ratio));
    if (N < 1 || std::abs(ratio - static_cast<double>(N)) > 1e-6)
        throw UsageError("solver: step must divide the horizon");
    const double h = T / static_cast<double>(N);

    const std::size_t ns = spec.n_states();
    const std::size_t nm = spec.n_modes();
    ValueFunction vf = ValueFunction::semi_markov(T, N + 1, duration_step, ns, nm);

    std::vector<char> atom_at(N + 1, 0);
    for (double a : spec.payments.lump_times)
        atom_at[static_cast<std::size_t>(std::llround(a / h))] = 1;

    auto apply_lump = [&](std::size_t n) {
        const double t = vf.node_time(n);
        for (std::size_t m = 0; m < vf.slice_size(n); ++m) {
            const double u = vf.slice_u(n, m);
            for (StateId i = 0; i < ns; ++i)
                for (ModeId k = 0; k < nm; ++k)
                    vf.at_u_left(n, m, i, k) =
                        vf.at_u(n, m, i, k) +
                        (atom_at[n] ? spec.payments.lump_amount(t, i, k, u) : 0.0);
        }
    };
    apply_lump(N);   // terminal values are zero; the lump, if any, remains

    SemiMarkovRhs rhs{spec};
    for (std::size_t n = N; n-- > 0;) {
        const double t_lo = vf.node_time(n);
        const double t_hi = vf.node_time(n + 1);
        const double eps = h * 1e-9;
        const double te_hi = t_hi - eps;   // keep lookups inside the cell's pieces
        const double te_lo = t_lo + eps;
        const std::size_t size = vf.slice_size(n);

        // Terminal data at the upper slice along each characteristic.
        std::vector<double> end_vals(size * ns * nm), f_hi(size * ns * nm);
        std::vector<double> pred(size * ns * nm);

        auto coupling_hi = [&](StateId j, ModeId l, double u) {
            return vf.slice_value(n + 1, u, j, l, /*left=*/true);
        };
        for (std::size_t m = 0; m < size; ++m) {
            const double u_lo = vf.slice_u(n, m);
            const double u_hi = u_lo + h;
            for (StateId i = 0; i < ns; ++i)
                for (ModeId k = 0; k < nm; ++k) {
                    const std::size_t q = (m * ns + i) * nm + k;
                    end_vals[q] = vf.slice_value(n + 1, u_hi, i, k, true);
                    // Mode coupling keeps the running duration u_hi.
                    auto coup = [&](StateId j, ModeId l, double u) {
                        return coupling_hi(j, l, u == 0.0 ? 0.0 : u_hi);
                    };
                    f_hi[q] = rhs(te_hi, u_hi, i, k, end_vals[q], coup);
                    pred[q] = end_vals[q] - h * f_hi[q];
                }
        }

        // Heun correction; couplings at the lower slice use predictor values.
        auto coupling_lo = [&](StateId j, ModeId l, double u, std::size_t m_self) {
            if (u == 0.0) return pred[(0 * ns + j) * nm + l];
            return pred[(m_self * ns + j) * nm + l];
        };
        for (std::size_t m = 0; m < size; ++m) {
            const double u_lo = vf.slice_u(n, m);
            for (StateId i = 0; i < ns; ++i)
                for (ModeId k = 0; k < nm; ++k) {
                    const std::size_t q = (m * ns + i) * nm + k;
                    auto coup = [&](StateId j, ModeId l, double u) {
                        return coupling_lo(j, l, u, m);
                    };
                    const double f_lo = rhs(te_lo, u_lo, i, k, pred[q], coup);
                    const double w = end_vals[q] - 0.5 * h * (f_hi[q] + f_lo);
                    if (!std::isfinite(w)) {
                        std::ostringstream os;
                        os << "solver: non-finite value at t=" << t_lo << " u=" << u_lo;
                        throw SolverError(os.str());
                    }
                    vf.at_u(n, m, i, k) = w;
                }
        }
        apply_lump(n);
    }
    return vf;
}

} // namespace thiele
