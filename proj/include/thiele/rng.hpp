#pragma once

#include <cmath>
#include <cstdint>

namespace thiele {

// Deterministic, splittable random streams.
//
// Stream (seed, index) is derived by running splitmix64 over the pair, then
// feeding xoshiro256++.  Unlike std::<random> distributions the output is
// bit-identical across standard libraries, which the path dumps and
// estimate reports rely on.  Streams for distinct indices are independent
// for Monte Carlo purposes, so path loops can run on any number of threads
// without changing results.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t stream_index) {
        std::uint64_t x = seed;
        x = splitmix(x) ^ (stream_index * 0x9E3779B97F4A7C15ull);
        for (auto& s : s_) {
            x += 0x9E3779B97F4A7C15ull;
            s = mix(x);
        }
        // xoshiro must not start from the all-zero state
        if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 0x1ull;
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform on (0, 1]; never returns 0 so -log(u) is always finite.
    double uniform_open() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    // Uniform on [0, 1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Exponential with the given rate via inverse CDF.
    double exponential(double rate) {
        return -std::log(uniform_open()) / rate;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ull;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBull;
        z ^= z >> 31;
        return z;
    }
    static std::uint64_t splitmix(std::uint64_t& x) {
        x += 0x9E3779B97F4A7C15ull;
        return mix(x);
    }

    std::uint64_t s_[4];
};

} // namespace thiele
