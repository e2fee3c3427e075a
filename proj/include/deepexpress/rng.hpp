#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "tensor.hpp"

namespace dx {

/**
 * Deterministic random source. std::mt19937_64 has a fully specified output
 * sequence, but the std distributions do not, so uniform/normal/shuffle are
 * spelled out here to make every draw reproducible across compilers.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // Independent substream: same seed + different stream id never collides
    // with the base sequence in any way we care about.
    Rng(std::uint64_t seed, std::uint64_t stream) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream),
                          static_cast<std::uint32_t>(stream >> 32)};
        gen_.seed(seq);
    }

    std::uint64_t next_u64() { return gen_(); }

    // Uniform on [0, 1) with 53 significant bits.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Box-Muller; two uniform draws per sample, no cached spare.
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log1p(-u1));
        return r * std::cos(6.283185307179586476925286766559 * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // Index in [0, n). Modulo bias is ~2^-60 for any n we use.
    std::size_t index(std::size_t n) {
        if (n == 0) throw ValueError("rng index: n must be positive");
        return static_cast<std::size_t>(gen_() % n);
    }

    // Fisher-Yates, descending positions.
    template <class T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = index(i);
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace dx
