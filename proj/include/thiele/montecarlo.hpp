#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "thiele/model.hpp"
#include "thiele/modifications.hpp"

namespace thiele {

enum class CashflowKind { plain, adjusted };

struct ReserveEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;
    std::size_t path_count = 0;
    std::uint64_t seed = 0;
    CashflowKind kind = CashflowKind::plain;
};

// Monte Carlo estimate of the time-zero reserve: simulates path_count
// paths on streams seed, seed+1, ..., values each path's discounted cash
// flow (plain A or adjusted A-hat through the modifications engine) and
// returns the sample mean with its standard error.  frozen is required for
// the adjusted kind and whenever surrender payments reference Y(t-).
//
// The path loop runs on a thread pool over fixed-size chunks with pairwise
// in-chunk summation and an in-order final reduction, so results are
// identical for any thread count.  threads = 0 picks the hardware count.
ReserveEstimate estimate_reserve(const ContractSpec& spec, CashflowKind kind,
                                 std::size_t path_count, std::uint64_t seed,
                                 const FrozenValues* frozen = nullptr,
                                 std::size_t mode_jump_cap = 100, unsigned threads = 0);

struct ZReport {
    double z = 0.0;
    bool pass = false;
};

// (solver - mean)/stderr with pass = |z| <= 3; a zero standard error
// demands exact equality.
ZReport compare_to_solver(const ReserveEstimate& estimate, double solver_value);

// Deterministic report (kind, mean, stderr, paths, seed); wall-clock time
// is deliberately not part of the file so repeated runs are byte-identical.
std::string estimate_report(const ReserveEstimate& estimate);

// Simulates and dumps paths (one event per line) to the stream.
void dump_paths(std::ostream& os, const ContractSpec& spec, std::size_t path_count,
                std::uint64_t seed, std::optional<std::size_t> mode_jump_limit = std::nullopt);

} // namespace thiele
