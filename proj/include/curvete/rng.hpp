#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace curvete {

// Deterministic random utilities.
//
// std::mt19937_64's raw output sequence is pinned by the standard, but the
// standard *distributions* are implementation-defined, so every transform
// here (uniform, normal, shuffle) is hand-rolled. Results are bit-identical
// across platforms and standard libraries for a given seed.

// splitmix64 finalizer; also the per-step generator used for seed derivation.
std::uint64_t splitmix64(std::uint64_t& state);

// Derives an independent child seed from a master seed, a purpose tag and up
// to three structural coordinates (cycle, level, epoch, ...). Checkpoint
// resume relies on every stochastic step being reachable through this
// function alone.
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                          std::uint64_t a = 0, std::uint64_t b = 0,
                          std::uint64_t c = 0);

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // [0,1) with 53 random bits.
    double uniform();
    // [lo,hi)
    double uniform(double lo, double hi);
    // [0,n), unbiased via rejection sampling; n must be > 0.
    std::uint64_t uniform_int(std::uint64_t n);
    // Standard normal, Box-Muller. Always consumes exactly two uniforms so
    // the stream position is a pure function of the call count.
    double normal();

    // Fisher-Yates.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        if (v.size() < 2) return;
        for (std::size_t i = v.size() - 1; i > 0; --i) {
            const std::size_t j = static_cast<std::size_t>(uniform_int(i + 1));
            std::swap(v[i], v[j]);
        }
    }

    std::uint64_t next_u64() { return engine_(); }

  private:
    std::mt19937_64 engine_;
};

}  // namespace curvete
