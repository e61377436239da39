#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "thiele/model.hpp"

namespace thiele {

struct VerifyOptions {
    double step = 1e-3;
    double duration_step = 0.0;   // 0: same as step (semi-Markov only)
    std::size_t paths = 100000;
    std::size_t martingale_paths = 10000;
    std::uint64_t seed = 1;
    double tolerance = 1e-6;      // closed-form style comparisons
    std::size_t mode_jump_cap = 100;
    std::size_t residual_seeds = 20;   // paths checked for the backward residual
};

struct VerifyCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct VerifyReport {
    std::vector<VerifyCheck> checks;
    bool all_passed() const;
    std::string to_text() const;
};

// Runs the generic per-contract verification battery: solver vs Monte
// Carlo (|z| <= 3), martingale means and orthogonality (|z| <= 4), the
// pathwise backward residual (<= 10 h), step-halving convergence order,
// determinism of dumps and estimates, and, for multi-mode contracts, the
// Cantelli grid residual, the recursion-consistency check and adjusted
// Monte Carlo equivalence (|z| <= 3).
VerifyReport verify_contract(const ContractSpec& spec, const VerifyOptions& options);

} // namespace thiele
