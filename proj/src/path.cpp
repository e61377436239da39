#include "thiele/path.hpp"

#include <cinttypes>
#include <cstdio>
#include <ostream>

#include "thiele/errors.hpp"

namespace thiele {

void Path::check_invariants() const {
    double prev = 0.0;
    StateId state = initial_state;
    ModeId mode = initial_mode;
    for (const auto& e : events) {
        if (!(e.time > prev) || !(e.time > 0.0) || !(e.time <= horizon))
            throw ValidationError("path: event times must be strictly increasing in (0, horizon]");
        if (e.time == prev)
            throw ValidationError("path: simultaneous events");
        if (e.kind == EventKind::state_jump) {
            if (e.from != state) throw ValidationError("path: state jump from wrong state");
            if (e.to == e.from) throw ValidationError("path: state jump to same state");
            state = e.to;
        } else {
            if (e.from != mode) throw ValidationError("path: mode jump from wrong mode");
            if (e.to == e.from) throw ValidationError("path: mode jump to same mode");
            mode = e.to;
        }
        prev = e.time;
    }
}

std::size_t Path::mode_jump_count() const {
    std::size_t n = 0;
    for (const auto& e : events)
        if (e.kind == EventKind::mode_jump) ++n;
    return n;
}

Path::Position Path::before(double t) const {
    StateId state = initial_state;
    ModeId mode = initial_mode;
    double clock_start = 0.0;
    for (const auto& e : events) {
        if (e.time >= t) break;
        if (e.kind == EventKind::state_jump) {
            state = e.to;
            clock_start = e.time;
        } else {
            mode = e.to;
            if (duration_resets_on_mode_jump) clock_start = e.time;
        }
    }
    return {state, mode, t - clock_start};
}

std::vector<PathSegment> segments(const Path& path) {
    std::vector<PathSegment> out;
    PathSegment seg;
    seg.state = path.initial_state;
    seg.mode = path.initial_mode;
    double clock_start = 0.0;
    std::size_t mode_jumps = 0;
    for (const auto& e : path.events) {
        seg.end = e.time;
        seg.ending_event = &e;
        seg.mode_jumps_before = mode_jumps;
        out.push_back(seg);
        if (e.kind == EventKind::state_jump) {
            seg.state = e.to;
            clock_start = e.time;
        } else {
            seg.mode = e.to;
            ++mode_jumps;
            if (path.duration_resets_on_mode_jump) clock_start = e.time;
        }
        seg.start = e.time;
        seg.duration_at_start = e.time - clock_start;
    }
    seg.end = path.horizon;
    seg.ending_event = nullptr;
    seg.mode_jumps_before = mode_jumps;
    out.push_back(seg);
    return out;
}

void write_path_header(std::ostream& os) {
    os << "path_id,time,kind,from,to\n";
}

void write_path_events(std::ostream& os, std::uint64_t path_id, const Path& path) {
    char buf[128];
    for (const auto& e : path.events) {
        std::snprintf(buf, sizeof buf, "%" PRIu64 ",%.17g,%s,%zu,%zu\n", path_id, e.time,
                      e.kind == EventKind::state_jump ? "state" : "mode", e.from, e.to);
        os << buf;
    }
}

} // namespace thiele
