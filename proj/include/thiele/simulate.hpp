#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "thiele/model.hpp"
#include "thiele/path.hpp"

namespace thiele {

// Exact simulation of (X, J) by thinning against rate_bound: propose
// exponential inter-arrivals at the bound, accept with probability
// (total actual rate)/bound, then pick the transition proportionally to
// its rate.  The duration clock resets at state jumps (and at mode jumps
// only when the spec says so).  Deterministic given (spec, seed).
//
// If mode_jump_limit is set, simulation runs under the killed measure: mode
// intensities are forced to 0 once that many mode jumps have occurred, so
// limit 0 disables contract modifications from time zero on.
Path simulate_path(const ContractSpec& spec, std::uint64_t seed,
                   std::optional<std::size_t> mode_jump_limit = std::nullopt);

// Statistics for one compensated martingale M(T) = N(T) - int I(s-) lambda(s) ds.
struct MartingalePairStats {
    bool is_mode_pair = false;
    std::size_t from = 0;
    std::size_t to = 0;
    double mean = 0.0;
    double stderr_ = 0.0;
    double z = 0.0;   // mean / stderr, 0 when both are exactly 0
};

// Empirical covariance between two martingale terminal values.
struct MartingaleCovariance {
    std::size_t pair_a = 0;   // indices into MartingaleReport::pairs
    std::size_t pair_b = 0;
    double covariance = 0.0;
    double stderr_ = 0.0;
    double z = 0.0;
};

struct MartingaleReport {
    std::size_t path_count = 0;
    std::vector<MartingalePairStats> pairs;
    std::vector<MartingaleCovariance> covariances;
    double max_abs_mean_z() const;
    double max_abs_covariance_z() const;
    std::string to_text() const;
};

// Simulates path_count paths (streams seed, seed+1, ... derived per path
// index) and reports per-pair means, standard errors and z-scores of M(T),
// plus all pairwise covariances.  Compensator integrals use adaptive
// trapezoid quadrature (rtol 1e-8) split at the rate-table breakpoints
// between consecutive events.
MartingaleReport martingale_diagnostics(const ContractSpec& spec, std::size_t path_count,
                                        std::uint64_t seed);

} // namespace thiele
