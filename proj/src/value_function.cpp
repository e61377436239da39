#include "thiele/value_function.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "thiele/errors.hpp"

namespace thiele {

ValueFunction ValueFunction::markov(double horizon, std::size_t n_nodes,
                                    std::size_t n_states, std::size_t n_modes) {
    if (n_nodes < 2) throw UsageError("value function needs at least two time nodes");
    ValueFunction vf;
    vf.kind_ = ModelKind::markov;
    vf.horizon_ = horizon;
    vf.n_nodes_ = n_nodes;
    vf.step_ = horizon / static_cast<double>(n_nodes - 1);
    vf.n_states_ = n_states;
    vf.n_modes_ = n_modes;
    vf.right_.assign(n_nodes * n_states * n_modes, 0.0);
    vf.left_.assign(n_nodes * n_states * n_modes, 0.0);
    vf.clamp_count_ = std::make_shared<std::atomic<std::size_t>>(0);
    return vf;
}

ValueFunction ValueFunction::semi_markov(double horizon, std::size_t n_nodes,
                                         double duration_step, std::size_t n_states,
                                         std::size_t n_modes) {
    if (n_nodes < 2) throw UsageError("value function needs at least two time nodes");
    if (!(duration_step > 0.0)) throw UsageError("duration_step must be positive");
    ValueFunction vf;
    vf.kind_ = ModelKind::semi_markov;
    vf.horizon_ = horizon;
    vf.n_nodes_ = n_nodes;
    vf.step_ = horizon / static_cast<double>(n_nodes - 1);
    vf.duration_step_ = duration_step;
    vf.n_states_ = n_states;
    vf.n_modes_ = n_modes;
    vf.slice_offset_.resize(n_nodes);
    vf.slice_sizes_.resize(n_nodes);
    std::size_t total = 0;
    for (std::size_t n = 0; n < n_nodes; ++n) {
        const double t = vf.node_time(n);
        // Full duration steps below the diagonal, then the diagonal itself.
        const std::size_t full =
            static_cast<std::size_t>(std::floor(t / duration_step + 1e-9));
        const bool diag_on_grid = std::abs(full * duration_step - t) <= 1e-9 * horizon;
        vf.slice_offset_[n] = total;
        vf.slice_sizes_[n] = (diag_on_grid ? full : full + 1) + 1;
        total += vf.slice_sizes_[n];
    }
    if (total > std::size_t(200'000'000) / (n_states * n_modes))
        throw SolverError("semi-Markov grid too large; increase step or duration_step");
    vf.right_.assign(total * n_states * n_modes, 0.0);
    vf.left_.assign(total * n_states * n_modes, 0.0);
    vf.clamp_count_ = std::make_shared<std::atomic<std::size_t>>(0);
    return vf;
}

double& ValueFunction::at(std::size_t n, StateId i, ModeId k) { return right_[index(n, i, k)]; }
double ValueFunction::at(std::size_t n, StateId i, ModeId k) const {
    return right_[index(n, i, k)];
}
double& ValueFunction::at_left(std::size_t n, StateId i, ModeId k) {
    return left_[index(n, i, k)];
}
double ValueFunction::at_left(std::size_t n, StateId i, ModeId k) const {
    return left_[index(n, i, k)];
}
double& ValueFunction::at_u(std::size_t n, std::size_t m, StateId i, ModeId k) {
    return right_[index_u(n, m, i, k)];
}
double ValueFunction::at_u(std::size_t n, std::size_t m, StateId i, ModeId k) const {
    return right_[index_u(n, m, i, k)];
}
double& ValueFunction::at_u_left(std::size_t n, std::size_t m, StateId i, ModeId k) {
    return left_[index_u(n, m, i, k)];
}
double ValueFunction::at_u_left(std::size_t n, std::size_t m, StateId i, ModeId k) const {
    return left_[index_u(n, m, i, k)];
}

std::size_t ValueFunction::slice_size(std::size_t n) const { return slice_sizes_[n]; }

double ValueFunction::slice_u(std::size_t n, std::size_t m) const {
    if (m + 1 == slice_sizes_[n]) return node_time(n);   // diagonal node
    return static_cast<double>(m) * duration_step_;
}

double ValueFunction::slice_value(std::size_t n, double u, StateId i, ModeId k,
                                  bool left) const {
    const double t = node_time(n);
    if (u > t) {
        if (clamp_count_) clamp_count_->fetch_add(1);
        u = t;
    }
    if (u < 0.0) u = 0.0;
    const std::size_t size = slice_sizes_[n];
    const auto& store = left ? left_ : right_;
    // Locate the duration cell; the last node is the diagonal.
    std::size_t m = static_cast<std::size_t>(std::floor(u / duration_step_));
    if (m + 1 >= size) {
        return store[index_u(n, size - 1, i, k)];
    }
    const double u_lo = slice_u(n, m);
    const double u_hi = slice_u(n, m + 1);
    const double w = (u_hi > u_lo) ? (u - u_lo) / (u_hi - u_lo) : 0.0;
    const double v_lo = store[index_u(n, m, i, k)];
    const double v_hi = store[index_u(n, m + 1, i, k)];
    return v_lo + w * (v_hi - v_lo);
}

double ValueFunction::eval(double t, StateId i, ModeId k, double u, bool left) const {
    if (i >= n_states_ || k >= n_modes_) throw UsageError("value: state/mode out of range");
    t = std::min(std::max(t, 0.0), horizon_);
    const double pos = t / step_;
    std::size_t n = static_cast<std::size_t>(std::floor(pos));
    if (n >= n_nodes_ - 1) n = n_nodes_ - 2;
    const double w = pos - static_cast<double>(n);

    if (kind_ == ModelKind::markov) {
        if (w <= 1e-12) return left ? left_[index(n, i, k)] : right_[index(n, i, k)];
        if (w >= 1.0 - 1e-12)
            return left ? left_[index(n + 1, i, k)] : right_[index(n + 1, i, k)];
        // Interior: connect right value at n with left limit at n+1.
        const double lo = right_[index(n, i, k)];
        const double hi = left_[index(n + 1, i, k)];
        return lo + w * (hi - lo);
    }

    if (w <= 1e-12) return slice_value(n, u, i, k, left);
    if (w >= 1.0 - 1e-12) return slice_value(n + 1, u, i, k, left);
    // Blend along the characteristic through (t, u), which meets slice n at
    // duration u - w*h and slice n+1 at u + (1-w)*h; this keeps on-path
    // queries (u close to t) off the diagonal clamp.
    const double lo = slice_value(n, u - w * step_, i, k, false);
    const double hi = slice_value(n + 1, u + (1.0 - w) * step_, i, k, true);
    return lo + w * (hi - lo);
}

double ValueFunction::value(double t, StateId i, ModeId k, double u) const {
    return eval(t, i, k, u, false);
}

double ValueFunction::value_left(double t, StateId i, ModeId k, double u) const {
    return eval(t, i, k, u, true);
}

void ValueFunction::write_csv(std::ostream& os) const {
    char buf[160];
    if (kind_ == ModelKind::markov) {
        os << "t,state,mode,value\n";
        for (std::size_t n = 0; n < n_nodes_; ++n)
            for (StateId i = 0; i < n_states_; ++i)
                for (ModeId k = 0; k < n_modes_; ++k) {
                    std::snprintf(buf, sizeof buf, "%.17g,%zu,%zu,%.17g\n", node_time(n), i,
                                  k, right_[index(n, i, k)]);
                    os << buf;
                }
        return;
    }
    os << "t,state,mode,duration,value\n";
    for (std::size_t n = 0; n < n_nodes_; ++n)
        for (std::size_t m = 0; m < slice_sizes_[n]; ++m)
            for (StateId i = 0; i < n_states_; ++i)
                for (ModeId k = 0; k < n_modes_; ++k) {
                    std::snprintf(buf, sizeof buf, "%.17g,%zu,%zu,%.17g,%.17g\n",
                                  node_time(n), i, k, slice_u(n, m),
                                  right_[index_u(n, m, i, k)]);
                    os << buf;
                }
}

} // namespace thiele
