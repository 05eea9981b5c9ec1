#pragma once

// Seeded random streams. The generator is SplitMix64 with labeled
// sub-seeding: every consumer (the splitter, each sampler, each
// classifier) derives its own stream from the master seed and a text
// label, so reruns are byte-identical regardless of evaluation order
// or thread count. All variate algorithms are fixed here rather than
// delegated to <random>, whose distributions differ across standard
// library implementations.

#include <cstdint>
#include <string_view>
#include <vector>

namespace rebalance {

// 64-bit FNV-1a, used to fold stream labels into seeds.
std::uint64_t fnv1a64(std::string_view text);

// Child seed for the stream named `label` under `master`.
std::uint64_t derive_seed(std::uint64_t master, std::string_view label);

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    static Rng derive(std::uint64_t master, std::string_view label) {
        return Rng(derive_seed(master, label));
    }

    std::uint64_t next_u64();

    // Uniform on [0,1), 53-bit resolution.
    double uniform();
    // Uniform on (0,1]; safe as a log argument.
    double uniform_open();
    double uniform(double lo, double hi);
    // Uniform integer in [0, n); n must be positive.
    std::size_t uniform_index(std::size_t n);

    // Box-Muller standard normal (single value per call).
    double normal();
    // Marsaglia-Tsang for shape >= 1, boosted for shape < 1. Unit scale.
    double gamma(double shape);
    // Two-gamma construction: Gamma(a) / (Gamma(a) + Gamma(b)).
    double beta(double a, double b);

    template <class T>
    void shuffle(std::vector<T>& values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            std::size_t j = uniform_index(i);
            std::swap(values[i - 1], values[j]);
        }
    }

private:
    std::uint64_t state_;
};

}  // namespace rebalance
