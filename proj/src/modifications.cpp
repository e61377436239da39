#include "thiele/modifications.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "thiele/errors.hpp"
#include "thiele/quadrature.hpp"
#include "thiele/reserve_linear.hpp"

namespace thiele {

FrozenValues frozen_value_functions(const ContractSpec& spec, double step) {
    if (spec.intensities.kind != ModelKind::markov)
        throw UsageError("frozen_value_functions: contract is not Markov");
    ContractSpec killed = spec;
    killed.intensities.mode_rates = [](double, ModeId, ModeId, StateId) { return 0.0; };
    return FrozenValues{solve_thiele_markov(killed, step)};
}

namespace {

struct RhoStep {
    double rho;
    bool infeasible;   // x/0 with x != 0
};

RhoStep rho_recursion(double rho_eff, double v_from_left, double beta_bar, double v_to) {
    const double num = rho_eff * (v_from_left - beta_bar);
    if (v_to == 0.0) {
        if (num == 0.0) return {1.0, false};   // 0/0 := 1
        return {0.0, true};
    }
    return {num / v_to, false};
}

} // namespace

AdjustmentTrace adjustment_factors(const Path& path, const FrozenValues& frozen,
                                   const ContractSpec& spec, std::size_t mode_jump_cap) {
    if (std::abs(path.horizon - spec.horizon) > 1e-12)
        throw UsageError("adjustment_factors: path horizon differs from contract horizon");

    AdjustmentTrace trace;
    StateId state = path.initial_state;
    ModeId mode = path.initial_mode;
    double rho_eff = 1.0;
    for (const auto& e : path.events) {
        if (e.kind == EventKind::state_jump) {
            state = e.to;
            continue;
        }
        if (trace.records.size() >= mode_jump_cap)
            throw SimulationError("adjustment_factors: trace exceeds mode-jump cap");
        const double beta_bar =
            spec.payments.mode_transition_payment(e.time, e.from, e.to, state, 0.0);
        const double v_from = frozen.value_left(e.from, e.time, state);
        const double v_to = frozen.value(e.to, e.time, state);
        const RhoStep next = rho_recursion(rho_eff, v_from, beta_bar, v_to);
        if (next.infeasible) {
            std::ostringstream os;
            os << "adjustment_factors: equivalence infeasible at tau=" << e.time
               << " (new contract value 0, wealth nonzero)";
            throw EquivalenceError(os.str());
        }
        if (next.rho < 0.0) trace.has_negative_factor = true;
        trace.records.push_back({e.time, e.from, e.to, state, next.rho});
        rho_eff = next.rho;
        mode = e.to;
    }
    (void)mode;
    return trace;
}

double discounted_cashflow(const Path& path, const ContractSpec& spec,
                           const FrozenValues* frozen, const AdjustmentTrace* trace) {
    if (!spec.payments.surrender_reserve_fraction.empty() && frozen == nullptr)
        throw UsageError(
            "discounted_cashflow: surrender payments reference the reserve; frozen values "
            "required");

    const auto& pay = spec.payments;
    std::vector<double> knots = spec.time_knots();
    double total = 0.0;

    auto discount_to = [&](double s) { return std::exp(-spec.discount.integral(0.0, s)); };

    auto atom_lo = pay.lump_times.begin();
    for (const auto& seg : segments(path)) {
        const double scale =
            trace ? trace->factor_for_segment(seg.mode_jumps_before) : 1.0;

        // Sojourn payments over [start, end).
        auto f = [&](double s) {
            return discount_to(s) *
                   pay.sojourn_rate(s, seg.state, seg.mode,
                                    seg.duration_at_start + (s - seg.start));
        };
        total += scale * adaptive_trapezoid(f, seg.start, seg.end, 1e-8, knots);

        // Lump atoms in (start, end]; the atom pays the pre-event holder.
        while (atom_lo != pay.lump_times.end() && *atom_lo <= seg.end) {
            const double a = *atom_lo;
            if (a > seg.start) {
                const double u = seg.duration_at_start + (a - seg.start);
                total += scale * discount_to(a) * pay.lump_amount(a, seg.state, seg.mode, u);
            }
            ++atom_lo;
        }

        if (seg.ending_event) {
            const auto& e = *seg.ending_event;
            const double u = seg.duration_at_start + (e.time - seg.start);
            double amount;
            if (e.kind == EventKind::state_jump) {
                if (pay.is_surrender(e.from, e.to)) {
                    const double u_v =
                        frozen->values.kind() == ModelKind::semi_markov ? u : 0.0;
                    amount = pay.paid_fraction(e.from, e.to) * scale *
                             frozen->value_left(seg.mode, e.time, e.from, u_v);
                } else {
                    amount = scale *
                             pay.state_transition_payment(e.time, e.from, e.to, seg.mode, u);
                }
            } else {
                amount =
                    scale * pay.mode_transition_payment(e.time, e.from, e.to, seg.state, u);
            }
            total += discount_to(e.time) * amount;
        }
    }
    return total;
}

double adjusted_cashflow_value(const Path& path, const AdjustmentTrace& trace,
                               const ContractSpec& spec, const FrozenValues& frozen) {
    if (trace.records.size() != path.mode_jump_count())
        throw UsageError("adjusted_cashflow_value: trace does not match the path");
    return discounted_cashflow(path, spec, &frozen, &trace);
}

double cantelli_residual(const FrozenValues& frozen, const ContractSpec& spec, double step,
                         bool adjusted) {
    const double T = spec.horizon;
    const auto N = static_cast<std::size_t>(std::llround(T / step));
    if (N < 1) throw UsageError("cantelli_residual: step too large");

    double worst = 0.0;
    for (std::size_t n = 0; n <= N; ++n) {
        const double t = T * static_cast<double>(n) / static_cast<double>(N);
        for (StateId i = 0; i < spec.n_states(); ++i) {
            for (ModeId k = 0; k < spec.n_modes(); ++k) {
                for (ModeId l = 0; l < spec.n_modes(); ++l) {
                    if (l == k) continue;
                    const double beta_bar =
                        spec.payments.mode_transition_payment(t, k, l, i, 0.0);
                    const double num = frozen.value_left(k, t, i) - beta_bar;
                    const double v_to = frozen.value(l, t, i);
                    double rho;
                    if (adjusted) {
                        const RhoStep r = rho_recursion(1.0, frozen.value_left(k, t, i),
                                                        beta_bar, v_to);
                        // Infeasible points contribute their full mismatch.
                        rho = r.infeasible ? 0.0 : r.rho;
                    } else {
                        rho = 1.0;
                    }
                    worst = std::max(worst, std::abs(rho * v_to - num));
                }
            }
        }
    }
    return worst;
}

double recursion_consistency_residual(const Path& path, const FrozenValues& frozen,
                                      const ContractSpec& spec, std::size_t mode_jump_cap) {
    const AdjustmentTrace trace = adjustment_factors(path, frozen, spec, mode_jump_cap);
    double worst = 0.0;
    double rho_prev = 1.0;
    for (const auto& rec : trace.records) {
        const double beta_bar = spec.payments.mode_transition_payment(
            rec.time, rec.from_mode, rec.to_mode, rec.state, 0.0);
        const double v_to = frozen.value(rec.to_mode, rec.time, rec.state);
        // Pivot of the recursion proof: the adjusted reserve is continuous
        // across the modification, Y-hat^{m+1}(tau-) = Y-hat^m(tau-).
        const double y_hat_left = rec.rho * v_to + rho_prev * beta_bar;
        const RhoStep again = rho_recursion(1.0, y_hat_left, rho_prev * beta_bar, v_to);
        if (!again.infeasible)
            worst = std::max(worst, std::abs(again.rho - rec.rho));
        rho_prev = rec.rho;
    }
    return worst;
}

void write_trace_header(std::ostream& os) {
    os << "path_id,m,tau,from_mode,to_mode,state,rho\n";
}

void write_trace(std::ostream& os, std::uint64_t path_id, const AdjustmentTrace& trace) {
    char buf[160];
    std::size_t m = 1;
    for (const auto& r : trace.records) {
        std::snprintf(buf, sizeof buf, "%" PRIu64 ",%zu,%.17g,%zu,%zu,%zu,%.17g\n", path_id,
                      m++, r.time, r.from_mode, r.to_mode, r.state, r.rho);
        os << buf;
    }
}

} // namespace thiele
