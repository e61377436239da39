#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "thiele/model.hpp"

namespace thiele {

enum class EventKind { state_jump, mode_jump };

struct PathEvent {
    double time = 0.0;
    EventKind kind = EventKind::state_jump;
    std::size_t from = 0;
    std::size_t to = 0;
};

// One realized trajectory of (X, J) on [0, horizon].
//
// Event times are strictly increasing in (0, horizon]; X and J never jump
// at the same instant; the from-field of each event equals the state/mode
// produced by the preceding events.
struct Path {
    std::vector<PathEvent> events;
    StateId initial_state = 0;
    ModeId initial_mode = 0;
    double horizon = 0.0;
    bool duration_resets_on_mode_jump = false;

    // Throws ValidationError when an invariant is broken.
    void check_invariants() const;

    std::size_t mode_jump_count() const;

    // State, mode and duration immediately before time t (left limits).
    struct Position {
        StateId state;
        ModeId mode;
        double duration;
    };
    Position before(double t) const;
};

// Homogeneous stretch of a path: constant (state, mode) on [start, end),
// terminated by the event at `end` (nullptr for the final stretch, which
// closes at the horizon).
struct PathSegment {
    double start = 0.0;
    double end = 0.0;
    StateId state = 0;
    ModeId mode = 0;
    double duration_at_start = 0.0;   // time already spent in `state` at `start`
    std::size_t mode_jumps_before = 0; // jumps of J in [0, start]
    const PathEvent* ending_event = nullptr;
};

std::vector<PathSegment> segments(const Path& path);

// Event dump, one line per event: path_id,time,kind,from,to.
void write_path_header(std::ostream& os);
void write_path_events(std::ostream& os, std::uint64_t path_id, const Path& path);

} // namespace thiele
