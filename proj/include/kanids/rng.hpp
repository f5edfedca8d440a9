#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace kanids {

/// Seeded generator whose output is identical across standard libraries.
/// std::mt19937_64 is fully specified; the distributions here avoid the
/// implementation-defined std:: distributions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Derives an independent stream from a base seed and a salt (epoch, layer index, ...).
    static Rng derive(std::uint64_t seed, std::uint64_t salt);

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n), rejection-sampled.
    std::uint64_t below(std::uint64_t n);

    double normal();

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = below(i);
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

std::uint64_t mix64(std::uint64_t x);

}  // namespace kanids
