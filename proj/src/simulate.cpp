#include "thiele/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "thiele/errors.hpp"
#include "thiele/quadrature.hpp"
#include "thiele/rng.hpp"

namespace thiele {

Path simulate_path(const ContractSpec& spec, std::uint64_t seed,
                   std::optional<std::size_t> mode_jump_limit) {
    const double T = spec.horizon;
    const double bound = spec.intensities.rate_bound;
    const std::size_t ns = spec.n_states();
    const std::size_t nm = spec.n_modes();

    Path path;
    path.initial_state = spec.states.initial_state;
    path.initial_mode = spec.modes.initial_mode;
    path.horizon = T;
    path.duration_resets_on_mode_jump = spec.duration_resets_on_mode_jump;

    if (bound == 0.0) return path;

    RandomStream rng(seed, 0);
    StateId state = path.initial_state;
    ModeId mode = path.initial_mode;
    double t = 0.0;
    double clock_start = 0.0;
    std::size_t mode_jumps = 0;
    std::vector<double> rates(ns + nm, 0.0);

    while (true) {
        t += rng.exponential(bound);
        if (t > T) break;

        // Proposals landing exactly on a lump atom are nudged one ulp later
        // so payment times and jump times never tie.
        while (std::binary_search(spec.payments.lump_times.begin(),
                                  spec.payments.lump_times.end(), t))
            t = std::nextafter(t, T + 1.0);
        if (t > T) break;

        const double u = t - clock_start;
        const bool modes_active =
            !mode_jump_limit.has_value() || mode_jumps < *mode_jump_limit;

        double total = 0.0;
        for (StateId j = 0; j < ns; ++j) {
            double r = 0.0;
            if (j != state) {
                r = spec.intensities.state_rates(t, state, j, mode, u);
                if (!(std::isfinite(r) && r >= 0.0)) {
                    std::ostringstream os;
                    os << "simulate: invalid state rate " << r << " at t=" << t;
                    throw SimulationError(os.str());
                }
            }
            rates[j] = r;
            total += r;
        }
        for (ModeId l = 0; l < nm; ++l) {
            double r = 0.0;
            if (l != mode && modes_active && spec.intensities.mode_rates) {
                r = spec.intensities.mode_rates(t, mode, l, state);
                if (!(std::isfinite(r) && r >= 0.0)) {
                    std::ostringstream os;
                    os << "simulate: invalid mode rate " << r << " at t=" << t;
                    throw SimulationError(os.str());
                }
            }
            rates[ns + l] = r;
            total += r;
        }
        if (total > bound * (1.0 + 1e-12)) {
            std::ostringstream os;
            os << "simulate: total exit rate " << total << " exceeds rate_bound " << bound
               << " at t=" << t << " state=" << state << " mode=" << mode;
            throw SimulationError(os.str());
        }

        if (rng.uniform() * bound >= total) continue;   // thinned proposal

        // Pick the transition proportionally to its rate.
        double pick = rng.uniform() * total;
        std::size_t idx = 0;
        for (; idx + 1 < rates.size(); ++idx) {
            pick -= rates[idx];
            if (pick < 0.0) break;
        }
        // Guard against landing on a zero-rate cell through rounding.
        while (rates[idx] == 0.0 && idx > 0) --idx;

        if (idx < ns) {
            path.events.push_back({t, EventKind::state_jump, state, idx});
            state = idx;
            clock_start = t;
        } else {
            const ModeId l = idx - ns;
            path.events.push_back({t, EventKind::mode_jump, mode, l});
            mode = l;
            ++mode_jumps;
            if (spec.duration_resets_on_mode_jump) clock_start = t;
        }
    }
    return path;
}

namespace {

struct PairAccumulator {
    double sum = 0.0;
    double sum_sq = 0.0;
};

// Terminal martingale values M(T) for every ordered pair on one path.
void martingale_terminals(const ContractSpec& spec, const Path& path,
                          std::vector<double>& state_m, std::vector<double>& mode_m) {
    const std::size_t ns = spec.n_states();
    const std::size_t nm = spec.n_modes();
    std::fill(state_m.begin(), state_m.end(), 0.0);
    std::fill(mode_m.begin(), mode_m.end(), 0.0);

    for (const auto& e : path.events) {
        if (e.kind == EventKind::state_jump)
            state_m[e.from * ns + e.to] += 1.0;
        else
            mode_m[e.from * nm + e.to] += 1.0;
    }

    const auto& knots = spec.intensities.breakpoints;
    for (const auto& seg : segments(path)) {
        for (StateId j = 0; j < ns; ++j) {
            if (j == seg.state) continue;
            auto rate = [&](double s) {
                return spec.intensities.state_rates(s, seg.state, j, seg.mode,
                                                    seg.duration_at_start + (s - seg.start));
            };
            state_m[seg.state * ns + j] -=
                adaptive_trapezoid(rate, seg.start, seg.end, 1e-8, knots);
        }
        if (spec.intensities.mode_rates) {
            for (ModeId l = 0; l < nm; ++l) {
                if (l == seg.mode) continue;
                auto rate = [&](double s) {
                    return spec.intensities.mode_rates(s, seg.mode, l, seg.state);
                };
                mode_m[seg.mode * nm + l] -=
                    adaptive_trapezoid(rate, seg.start, seg.end, 1e-8, knots);
            }
        }
    }
}

} // namespace

MartingaleReport martingale_diagnostics(const ContractSpec& spec, std::size_t path_count,
                                        std::uint64_t seed) {
    if (path_count < 100)
        throw UsageError("martingale_diagnostics: path_count must be >= 100");

    const std::size_t ns = spec.n_states();
    const std::size_t nm = spec.n_modes();

    // Ordered pairs, states first then modes.
    struct PairId {
        bool is_mode;
        std::size_t from, to;
    };
    std::vector<PairId> ids;
    for (StateId i = 0; i < ns; ++i)
        for (StateId j = 0; j < ns; ++j)
            if (i != j) ids.push_back({false, i, j});
    for (ModeId k = 0; k < nm; ++k)
        for (ModeId l = 0; l < nm; ++l)
            if (k != l) ids.push_back({true, k, l});

    const std::size_t np = ids.size();
    std::vector<double> sums(np, 0.0), sums_sq(np, 0.0);
    std::vector<double> cross(np * np, 0.0), cross_sq(np * np, 0.0);

    std::vector<double> state_m(ns * ns), mode_m(nm * nm), values(np);
    for (std::size_t p = 0; p < path_count; ++p) {
        const Path path = simulate_path(spec, seed + p);
        martingale_terminals(spec, path, state_m, mode_m);
        for (std::size_t q = 0; q < np; ++q)
            values[q] = ids[q].is_mode ? mode_m[ids[q].from * nm + ids[q].to]
                                       : state_m[ids[q].from * ns + ids[q].to];
        for (std::size_t q = 0; q < np; ++q) {
            sums[q] += values[q];
            sums_sq[q] += values[q] * values[q];
            for (std::size_t r = q + 1; r < np; ++r) {
                const double prod = values[q] * values[r];
                cross[q * np + r] += prod;
                cross_sq[q * np + r] += prod * prod;
            }
        }
    }

    const double n = static_cast<double>(path_count);
    MartingaleReport report;
    report.path_count = path_count;
    report.pairs.resize(np);
    for (std::size_t q = 0; q < np; ++q) {
        auto& s = report.pairs[q];
        s.is_mode_pair = ids[q].is_mode;
        s.from = ids[q].from;
        s.to = ids[q].to;
        s.mean = sums[q] / n;
        const double var = std::max(0.0, (sums_sq[q] - n * s.mean * s.mean) / (n - 1.0));
        s.stderr_ = std::sqrt(var / n);
        s.z = (s.stderr_ > 0.0) ? s.mean / s.stderr_ : 0.0;
    }
    for (std::size_t q = 0; q < np; ++q) {
        for (std::size_t r = q + 1; r < np; ++r) {
            MartingaleCovariance c;
            c.pair_a = q;
            c.pair_b = r;
            const double mean_prod = cross[q * np + r] / n;
            c.covariance = mean_prod - report.pairs[q].mean * report.pairs[r].mean;
            const double var_prod =
                std::max(0.0, (cross_sq[q * np + r] - n * mean_prod * mean_prod) / (n - 1.0));
            c.stderr_ = std::sqrt(var_prod / n);
            c.z = (c.stderr_ > 0.0) ? c.covariance / c.stderr_ : 0.0;
            report.covariances.push_back(c);
        }
    }
    return report;
}

double MartingaleReport::max_abs_mean_z() const {
    double m = 0.0;
    for (const auto& p : pairs) m = std::max(m, std::abs(p.z));
    return m;
}

double MartingaleReport::max_abs_covariance_z() const {
    double m = 0.0;
    for (const auto& c : covariances) m = std::max(m, std::abs(c.z));
    return m;
}

std::string MartingaleReport::to_text() const {
    std::ostringstream os;
    os << "paths: " << path_count << '\n';
    for (const auto& p : pairs)
        os << (p.is_mode_pair ? "mode " : "state ") << p.from << "->" << p.to
           << "  mean=" << p.mean << " stderr=" << p.stderr_ << " z=" << p.z << '\n';
    for (const auto& c : covariances)
        os << "cov(" << c.pair_a << ',' << c.pair_b << ")=" << c.covariance
           << " stderr=" << c.stderr_ << " z=" << c.z << '\n';
    return os.str();
}

} // namespace thiele
