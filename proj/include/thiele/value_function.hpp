#pragma once

#include <atomic>
#include <cstddef>
#include <iosfwd>
#include <memory>
#include <vector>

#include "thiele/model.hpp"

namespace thiele {

// Grid-backed reserve function.
//
// Markov kind stores V(t_n, i, k) on a uniform time grid; the semi-Markov
// kind adds a triangular duration grid u <= t per slice (duration cannot
// exceed elapsed time).  Nodes carry both the right-continuous value and
// the left limit: at a lump atom of nu they differ by the lump amount,
// V(t-) = V(t) + a(t).  Interpolation is linear in t and linear in u; the
// interpolant on [t_n, t_n+1] connects the right value at t_n with the
// left limit at t_n+1, so lump discontinuities stay sharp.  Queries with
// u > t are clamped to the diagonal and counted (clamp_warnings).
class ValueFunction {
public:
    ValueFunction() = default;

    static ValueFunction markov(double horizon, std::size_t n_nodes, std::size_t n_states,
                                std::size_t n_modes);
    static ValueFunction semi_markov(double horizon, std::size_t n_nodes,
                                     double duration_step, std::size_t n_states,
                                     std::size_t n_modes);

    ModelKind kind() const { return kind_; }
    double horizon() const { return horizon_; }
    double step() const { return step_; }
    double duration_step() const { return duration_step_; }
    std::size_t n_nodes() const { return n_nodes_; }
    std::size_t n_states() const { return n_states_; }
    std::size_t n_modes() const { return n_modes_; }
    double node_time(std::size_t n) const { return horizon_ * n / (n_nodes_ - 1.0); }

    double value(double t, StateId i, ModeId k = 0, double u = 0.0) const;
    double value_left(double t, StateId i, ModeId k = 0, double u = 0.0) const;

    // Node storage, used by the solvers.  Markov addressing ignores m.
    double& at(std::size_t n, StateId i, ModeId k);
    double at(std::size_t n, StateId i, ModeId k) const;
    double& at_left(std::size_t n, StateId i, ModeId k);
    double at_left(std::size_t n, StateId i, ModeId k) const;
    double& at_u(std::size_t n, std::size_t m, StateId i, ModeId k);
    double at_u(std::size_t n, std::size_t m, StateId i, ModeId k) const;
    double& at_u_left(std::size_t n, std::size_t m, StateId i, ModeId k);
    double at_u_left(std::size_t n, std::size_t m, StateId i, ModeId k) const;

    // Duration nodes of slice n: m*duration_step for m < slice_size(n)-1,
    // then the diagonal t_n itself as the last node.
    std::size_t slice_size(std::size_t n) const;
    double slice_u(std::size_t n, std::size_t m) const;
    // Value at (t_n, u) by linear interpolation within slice n.
    double slice_value(std::size_t n, double u, StateId i, ModeId k, bool left) const;

    std::size_t clamp_warnings() const { return clamp_count_ ? clamp_count_->load() : 0; }

    // Columns t,state,mode[,duration],value; right-continuous node values.
    void write_csv(std::ostream& os) const;

private:
    std::size_t index(std::size_t n, StateId i, ModeId k) const {
        return (n * n_states_ + i) * n_modes_ + k;
    }
    std::size_t index_u(std::size_t n, std::size_t m, StateId i, ModeId k) const {
        return (slice_offset_[n] + m) * n_states_ * n_modes_ + i * n_modes_ + k;
    }
    double eval(double t, StateId i, ModeId k, double u, bool left) const;

    ModelKind kind_ = ModelKind::markov;
    double horizon_ = 0.0;
    double step_ = 0.0;
    double duration_step_ = 0.0;
    std::size_t n_nodes_ = 0;
    std::size_t n_states_ = 0;
    std::size_t n_modes_ = 0;
    std::vector<double> right_;
    std::vector<double> left_;
    std::vector<std::size_t> slice_offset_;   // semi-Markov slice starts
    std::vector<std::size_t> slice_sizes_;
    std::shared_ptr<std::atomic<std::size_t>> clamp_count_;
};

} // namespace thiele
