#include "thiele/montecarlo.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <future>
#include <ostream>
#include <thread>
#include <vector>

#include "thiele/errors.hpp"
#include "thiele/simulate.hpp"

namespace thiele {

namespace {

double pairwise_sum(const double* xs, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += xs[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(xs, half) + pairwise_sum(xs + half, n - half);
}

constexpr std::size_t kChunk = 4096;

} // namespace

ReserveEstimate estimate_reserve(const ContractSpec& spec, CashflowKind kind,
                                 std::size_t path_count, std::uint64_t seed,
                                 const FrozenValues* frozen, std::size_t mode_jump_cap,
                                 unsigned threads) {
    if (path_count < 100) throw UsageError("estimate_reserve: path_count must be >= 100");
    if (kind == CashflowKind::adjusted && frozen == nullptr)
        throw UsageError("estimate_reserve: adjusted cash flows need frozen values");
    if (!spec.payments.surrender_reserve_fraction.empty() && frozen == nullptr)
        throw UsageError("estimate_reserve: surrender payments need frozen values");

    const std::size_t n_chunks = (path_count + kChunk - 1) / kChunk;
    std::vector<double> chunk_sum(n_chunks, 0.0), chunk_sum_sq(n_chunks, 0.0);

    auto run_chunk = [&](std::size_t c) {
        const std::size_t lo = c * kChunk;
        const std::size_t hi = std::min(path_count, lo + kChunk);
        std::vector<double> vals(hi - lo), sqs(hi - lo);
        for (std::size_t p = lo; p < hi; ++p) {
            const Path path = simulate_path(spec, seed + p);
            double v;
            if (kind == CashflowKind::adjusted) {
                const AdjustmentTrace trace =
                    adjustment_factors(path, *frozen, spec, mode_jump_cap);
                v = discounted_cashflow(path, spec, frozen, &trace);
            } else {
                v = discounted_cashflow(path, spec, frozen, nullptr);
            }
            vals[p - lo] = v;
            sqs[p - lo] = v * v;
        }
        chunk_sum[c] = pairwise_sum(vals.data(), vals.size());
        chunk_sum_sq[c] = pairwise_sum(sqs.data(), sqs.size());
    };

    unsigned n_threads = threads ? threads : std::thread::hardware_concurrency();
    n_threads = std::max(1u, std::min<unsigned>(n_threads, n_chunks));
    if (n_threads == 1) {
        for (std::size_t c = 0; c < n_chunks; ++c) run_chunk(c);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::future<void>> workers;
        workers.reserve(n_threads);
        for (unsigned w = 0; w < n_threads; ++w)
            workers.push_back(std::async(std::launch::async, [&] {
                for (std::size_t c = next.fetch_add(1); c < n_chunks; c = next.fetch_add(1))
                    run_chunk(c);
            }));
        for (auto& f : workers) f.get();   // rethrows worker exceptions
    }

    const double n = static_cast<double>(path_count);
    const double sum = pairwise_sum(chunk_sum.data(), chunk_sum.size());
    const double sum_sq = pairwise_sum(chunk_sum_sq.data(), chunk_sum_sq.size());
    ReserveEstimate est;
    est.mean = sum / n;
    const double var = std::max(0.0, (sum_sq - n * est.mean * est.mean) / (n - 1.0));
    est.stderr_ = std::sqrt(var / n);
    est.path_count = path_count;
    est.seed = seed;
    est.kind = kind;
    return est;
}

ZReport compare_to_solver(const ReserveEstimate& estimate, double solver_value) {
    if (!(estimate.stderr_ >= 0.0)) throw UsageError("compare_to_solver: negative stderr");
    ZReport r;
    if (estimate.stderr_ == 0.0) {
        r.z = 0.0;
        r.pass = (solver_value == estimate.mean);
        return r;
    }
    r.z = (solver_value - estimate.mean) / estimate.stderr_;
    r.pass = std::abs(r.z) <= 3.0;
    return r;
}

std::string estimate_report(const ReserveEstimate& estimate) {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "kind: %s\nmean: %.17g\nstderr: %.17g\npaths: %zu\nseed: %llu\n",
                  estimate.kind == CashflowKind::plain ? "plain" : "adjusted", estimate.mean,
                  estimate.stderr_, estimate.path_count,
                  static_cast<unsigned long long>(estimate.seed));
    return buf;
}

void dump_paths(std::ostream& os, const ContractSpec& spec, std::size_t path_count,
                std::uint64_t seed, std::optional<std::size_t> mode_jump_limit) {
    write_path_header(os);
    for (std::size_t p = 0; p < path_count; ++p)
        write_path_events(os, p, simulate_path(spec, seed + p, mode_jump_limit));
}

} // namespace thiele
