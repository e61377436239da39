#include "thiele/reserve_linear.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "markov_ode.hpp"
#include "thiele/errors.hpp"

namespace thiele {

namespace detail {

namespace {

std::size_t grid_cells(double horizon, double step) {
    if (!(step > 0.0)) throw UsageError("solver: step must be positive");
    const double ratio = horizon / step;
    const auto n = static_cast<std::size_t>(std::llround(ratio));
    if (n < 1 || std::abs(ratio - static_cast<double>(n)) > 1e-6)
        throw UsageError("solver: step must divide the horizon");
    return n;
}

void check_knot_gaps(const ContractSpec& spec, double step) {
    std::vector<double> knots = spec.time_knots();
    knots.insert(knots.begin(), 0.0);
    knots.push_back(spec.horizon);
    for (std::size_t k = 1; k < knots.size(); ++k)
        if (knots[k] - knots[k - 1] < step * (1.0 - 1e-9))
            throw UsageError("solver: step larger than smallest breakpoint gap");
}

// Linear RHS of the backward ODE at time t given node values v (flattened
// (i,k)).  Surrender transitions are folded linearly unless a driver owns
// them.
class MarkovRhs {
public:
    MarkovRhs(const ContractSpec& spec, bool surrender_via_driver)
        : spec_(spec),
          ns_(spec.n_states()),
          nm_(spec.n_modes()),
          surrender_via_driver_(surrender_via_driver) {}

    void eval(double t, const std::vector<double>& v, std::vector<double>& out) const {
        const auto& pay = spec_.payments;
        const auto& intens = spec_.intensities;
        for (StateId i = 0; i < ns_; ++i) {
            for (ModeId k = 0; k < nm_; ++k) {
                const double vi = v[i * nm_ + k];
                double f = spec_.discount(t) * vi - pay.sojourn_rate(t, i, k, 0.0);
                for (StateId j = 0; j < ns_; ++j) {
                    if (j == i) continue;
                    const double rate = intens.state_rates(t, i, j, k, 0.0);
                    if (rate == 0.0) continue;
                    const double vj = v[j * nm_ + k];
                    if (pay.is_surrender(i, j)) {
                        if (surrender_via_driver_) continue;
                        f -= rate * (pay.paid_fraction(i, j) * vi + vj - vi);
                    } else {
                        f -= rate * (pay.state_transition_payment(t, i, j, k, 0.0) + vj - vi);
                    }
                }
                if (nm_ > 1 && intens.mode_rates) {
                    for (ModeId l = 0; l < nm_; ++l) {
                        if (l == k) continue;
                        const double rate = intens.mode_rates(t, k, l, i);
                        if (rate == 0.0) continue;
                        const double vl = v[i * nm_ + l];
                        f -= rate *
                             (pay.mode_transition_payment(t, k, l, i, 0.0) + vl - vi);
                    }
                }
                out[i * nm_ + k] = f;
            }
        }
    }

private:
    const ContractSpec& spec_;
    std::size_t ns_, nm_;
    bool surrender_via_driver_;
};

} // namespace

ValueFunction solve_markov_ode(const ContractSpec& spec, double step,
                               const DriverHooks* hooks) {
    spec.validate();
    if (spec.intensities.kind != ModelKind::markov)
        throw UsageError("solve_thiele_markov: contract is not Markov");
    const double T = spec.horizon;
    const std::size_t N = grid_cells(T, step);
    check_knot_gaps(spec, T / static_cast<double>(N));
    const double h = T / static_cast<double>(N);

    const std::size_t ns = spec.n_states();
    const std::size_t nm = spec.n_modes();
    const std::size_t dim = ns * nm;
    ValueFunction vf = ValueFunction::markov(T, N + 1, ns, nm);

    // Lump atoms snapped to the nearest grid node (timing error <= h/2).
    std::vector<char> atom_at(N + 1, 0);
    for (double a : spec.payments.lump_times)
        atom_at[static_cast<std::size_t>(std::llround(a / h))] = 1;

    const std::vector<double> knots = spec.time_knots();
    MarkovRhs rhs(spec, hooks != nullptr);

    std::vector<double> v(dim), vnew(dim), cand(dim), mid(dim), zrow(ns);
    std::vector<double> k1(dim), k2(dim), k3(dim), k4(dim), stage(dim);

    // One backward RK4 sweep over [lo, hi], sub-stepping at interior knots.
    // Coefficient lookups are nudged off the sub-interval ends so piecewise
    // tables resolve to the interior piece.
    auto integrate_cell = [&](double lo, double hi, const std::vector<double>& start,
                              std::vector<double>& result, auto&& extra) {
        result = start;
        auto upper = std::upper_bound(knots.begin(), knots.end(), lo);
        std::vector<double> cuts;
        for (auto it = upper; it != knots.end() && *it < hi; ++it) cuts.push_back(*it);
        double b = hi;
        for (std::size_t c = cuts.size() + 1; c-- > 0;) {
            const double a = (c == 0) ? lo : cuts[c - 1];
            const double hh = b - a;
            const double eps = hh * 1e-9;
            auto f = [&](double t, const std::vector<double>& y, std::vector<double>& out) {
                const double te = std::clamp(t, a + eps, b - eps);
                rhs.eval(te, y, out);
                extra(te, y, out);
            };
            f(b, result, k1);
            for (std::size_t q = 0; q < dim; ++q) stage[q] = result[q] - 0.5 * hh * k1[q];
            f(b - 0.5 * hh, stage, k2);
            for (std::size_t q = 0; q < dim; ++q) stage[q] = result[q] - 0.5 * hh * k2[q];
            f(b - 0.5 * hh, stage, k3);
            for (std::size_t q = 0; q < dim; ++q) stage[q] = result[q] - hh * k3[q];
            f(a, stage, k4);
            for (std::size_t q = 0; q < dim; ++q)
                result[q] -= hh / 6.0 * (k1[q] + 2.0 * k2[q] + 2.0 * k3[q] + k4[q]);
            b = a;
        }
    };

    // Terminal condition and terminal lump.
    for (std::size_t q = 0; q < dim; ++q) vf.at(N, q / nm, q % nm) = 0.0;
    auto apply_lump = [&](std::size_t n) {
        const double t = vf.node_time(n);
        for (StateId i = 0; i < ns; ++i)
            for (ModeId k = 0; k < nm; ++k) {
                double a_lin = atom_at[n] ? spec.payments.lump_amount(t, i, k, 0.0) : 0.0;
                double left = vf.at(n, i, k) + a_lin;
                if (atom_at[n] && hooks && hooks->lump) {
                    // Lump may depend on Y(t-): fixed point, contraction under C1 < 1.
                    for (int it = 0; it < hooks->max_iters; ++it) {
                        for (StateId j = 0; j < ns; ++j)
                            zrow[j] = vf.at(n, j, k) - left;
                        const double next = vf.at(n, i, k) + a_lin +
                                            hooks->lump(t, i, k, 0.0, left, zrow);
                        const bool done = std::abs(next - left) < hooks->picard_tol;
                        left = next;
                        if (done) break;
                    }
                }
                vf.at_left(n, i, k) = left;
            }
    };
    apply_lump(N);

    for (std::size_t n = N; n-- > 0;) {
        const double hi = vf.node_time(n + 1);
        const double lo = vf.node_time(n);
        for (std::size_t q = 0; q < dim; ++q) v[q] = vf.at_left(n + 1, q / nm, q % nm);

        if (!hooks || !hooks->gamma) {
            integrate_cell(lo, hi, v, vnew,
                           [](double, const std::vector<double>&, std::vector<double>&) {});
        } else {
            // Per-cell fixed point: the driver sees the midpoint candidate
            // 1/2 (y_cand + V(t_hi)) with z from its value differences.
            cand = v;
            double prev_resid = -1.0;
            bool converged = false;
            double resid = 0.0;
            for (int it = 0; it < hooks->max_iters; ++it) {
                for (std::size_t q = 0; q < dim; ++q) mid[q] = 0.5 * (cand[q] + v[q]);
                auto drive = [&](double t, const std::vector<double>&,
                                 std::vector<double>& out) {
                    for (StateId i = 0; i < ns; ++i)
                        for (ModeId k = 0; k < nm; ++k) {
                            const double y = mid[i * nm + k];
                            for (StateId j = 0; j < ns; ++j)
                                zrow[j] = mid[j * nm + k] - y;
                            out[i * nm + k] -= hooks->gamma(t, i, k, 0.0, y, zrow);
                        }
                };
                integrate_cell(lo, hi, v, vnew, drive);
                resid = 0.0;
                for (std::size_t q = 0; q < dim; ++q)
                    resid = std::max(resid, std::abs(vnew[q] - cand[q]));
                if (hooks->max_contraction_ratio && prev_resid > 0.0)
                    *hooks->max_contraction_ratio =
                        std::max(*hooks->max_contraction_ratio, resid / prev_resid);
                if (hooks->max_iterations_used)
                    *hooks->max_iterations_used = std::max(*hooks->max_iterations_used, it + 1);
                cand = vnew;
                if (resid < hooks->picard_tol) {
                    converged = true;
                    break;
                }
                prev_resid = resid;
            }
            if (!converged) {
                std::ostringstream os;
                os << "nonlinear solve: fixed point not converged at t=" << lo
                   << ", last residual " << resid;
                throw ConvergenceError(os.str());
            }
            vnew = cand;
        }

        for (std::size_t q = 0; q < dim; ++q) {
            if (!std::isfinite(vnew[q])) {
                std::ostringstream os;
                os << "solver: non-finite value at t=" << lo;
                throw SolverError(os.str());
            }
            vf.at(n, q / nm, q % nm) = vnew[q];
        }
        apply_lump(n);
    }
    return vf;
}

} // namespace detail

ValueFunction solve_thiele_markov(const ContractSpec& spec, double step) {
    return detail::solve_markov_ode(spec, step, nullptr);
}

SumAtRisk::SumAtRisk(ValueFunction values, ContractSpec spec)
    : values_(std::move(values)), spec_(std::move(spec)) {}

SumAtRisk sum_at_risk(ValueFunction values, ContractSpec spec) {
    return SumAtRisk(std::move(values), std::move(spec));
}

double SumAtRisk::state_payment(double t, StateId i, StateId j, ModeId k, double u) const {
    if (spec_.payments.is_surrender(i, j))
        return spec_.payments.paid_fraction(i, j) * values_.value_left(t, i, k, u);
    return spec_.payments.state_transition_payment(t, i, j, k, u);
}

double SumAtRisk::state_risk(double t, StateId i, StateId j, ModeId k, double u) const {
    // The new state's duration clock restarts at the jump.
    return state_payment(t, i, j, k, u) + values_.value(t, j, k, 0.0) -
           values_.value_left(t, i, k, u);
}

double SumAtRisk::mode_risk(double t, ModeId k, ModeId l, StateId i, double u) const {
    const double u_after = spec_.duration_resets_on_mode_jump ? 0.0 : u;
    return spec_.payments.mode_transition_payment(t, k, l, i, u) +
           values_.value(t, i, l, u_after) - values_.value_left(t, i, k, u);
}

BsdeResidual pathwise_bsde_residual(const Path& path, const ValueFunction& values,
                                    const ContractSpec& spec, double step) {
    if (std::abs(path.horizon - spec.horizon) > 1e-12)
        throw UsageError("pathwise_bsde_residual: path horizon differs from contract horizon");
    const double T = spec.horizon;
    const auto N = static_cast<std::size_t>(std::llround(T / step));
    if (N < 1) throw UsageError("pathwise_bsde_residual: step too large");
    const double h = T / static_cast<double>(N);
    const bool semi = values.kind() == ModelKind::semi_markov;

    SumAtRisk risk(values, spec);
    BsdeResidual out;

    StateId state = path.initial_state;
    ModeId mode = path.initial_mode;
    double clock_start = 0.0;
    std::size_t ev = 0;
    auto atom_it = spec.payments.lump_times.begin();
    const auto atom_end = spec.payments.lump_times.end();

    for (std::size_t n = 0; n < N; ++n) {
        const double t1 = h * static_cast<double>(n);
        const double t2 = (n + 1 == N) ? T : h * static_cast<double>(n + 1);
        const StateId i1 = state;
        const ModeId k1 = mode;
        const double u1 = semi ? (t1 - clock_start) : 0.0;
        const double y1 = values.value(t1, i1, k1, u1);

        double rhs = (spec.discount(t1) * y1 - spec.payments.sojourn_rate(t1, i1, k1, u1)) * h;

        // Compensator part of sum R dM, left-endpoint rates and risks.
        for (StateId j = 0; j < spec.n_states(); ++j) {
            if (j == i1) continue;
            const double rate = spec.intensities.state_rates(t1, i1, j, k1, u1);
            if (rate != 0.0) rhs -= risk.state_risk(t1, i1, j, k1, u1) * rate * h;
        }
        if (spec.n_modes() > 1 && spec.intensities.mode_rates) {
            for (ModeId l = 0; l < spec.n_modes(); ++l) {
                if (l == k1) continue;
                const double rate = spec.intensities.mode_rates(t1, k1, l, i1);
                if (rate != 0.0) rhs -= risk.mode_risk(t1, k1, l, i1, u1) * rate * h;
            }
        }

        // Lump payments at atoms inside (t1, t2].
        while (atom_it != atom_end && *atom_it <= t2) {
            if (*atom_it > t1) {
                const auto pos = path.before(*atom_it);
                rhs -= spec.payments.lump_amount(*atom_it, pos.state, pos.mode,
                                                 semi ? pos.duration : 0.0);
            }
            ++atom_it;
        }

        // Events inside (t1, t2]: payment plus jump part of sum R dM.
        bool jump_cell = false;
        while (ev < path.events.size() && path.events[ev].time <= t2) {
            const auto& e = path.events[ev];
            jump_cell = true;
            const double u_pre = semi ? (e.time - clock_start) : 0.0;
            if (e.kind == EventKind::state_jump) {
                rhs -= risk.state_payment(e.time, e.from, e.to, mode, u_pre);
                rhs += risk.state_risk(e.time, e.from, e.to, mode, u_pre);
                state = e.to;
                clock_start = e.time;
            } else {
                rhs -= spec.payments.mode_transition_payment(e.time, e.from, e.to, state,
                                                             u_pre);
                rhs += risk.mode_risk(e.time, e.from, e.to, state, u_pre);
                mode = e.to;
                if (path.duration_resets_on_mode_jump) clock_start = e.time;
            }
            ++ev;
        }

        const double u2 = semi ? (t2 - clock_start) : 0.0;
        const double y2 = values.value(t2, state, mode, u2);
        const double resid = std::abs((y2 - y1) - rhs);
        if (jump_cell)
            out.max_jump_cell = std::max(out.max_jump_cell, resid);
        else
            out.max_flow_cell = std::max(out.max_flow_cell, resid);
    }
    return out;
}

} // namespace thiele
