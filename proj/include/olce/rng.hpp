// Copyright 2026 The olce authors
// Seeded RNG with substream derivation. All draws go through explicit
// helpers so results are reproducible across standard libraries.
//
// Licensed under the Apache License, Version 2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace olce {

/// splitmix64 step; used both as a mixer and to expand seeds.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(splitmix64(seed)) {}

    /// Derive an independent substream id from a base seed and salts.
    static uint64_t derive(uint64_t seed, uint64_t salt) {
        return splitmix64(seed ^ splitmix64(salt ^ 0xa5a5a5a55a5a5a5aULL));
    }
    static uint64_t derive(uint64_t seed, uint64_t salt1, uint64_t salt2) {
        return derive(derive(seed, salt1), salt2);
    }

    uint64_t next_u64() { return eng_(); }

    /// Uniform in [0, 1).
    double uniform() { return (next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller (two uniforms per draw, no cached
    /// spare, so the draw count per call is fixed).
    double gaussian() {
        double u1 = 1.0 - uniform(); // (0, 1]
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * std::numbers::pi * u2);
    }

    /// Uniform integer in [0, n).
    int below(int n) { return static_cast<int>(next_u64() % static_cast<uint64_t>(n)); }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i)
            std::swap(v[i - 1], v[static_cast<size_t>(below(static_cast<int>(i)))]);
    }

private:
    std::mt19937_64 eng_;
};

} // namespace olce
