#include "curvete/rng.hpp"

#include <cmath>

#include "curvete/errors.hpp"

namespace curvete {

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                          std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    // FNV-1a over the tag, then splitmix rounds folding in the coordinates.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char ch : tag) {
        h ^= static_cast<unsigned char>(ch);
        h *= 0x100000001b3ULL;
    }
    std::uint64_t state = master;
    std::uint64_t out = splitmix64(state) ^ h;
    state = out ^ a;
    out = splitmix64(state);
    state = out ^ b;
    out = splitmix64(state);
    state = out ^ c;
    return splitmix64(state);
}

double Rng::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

std::uint64_t Rng::uniform_int(std::uint64_t n) {
    if (n == 0) throw InputError("uniform_int: n must be > 0");
    if ((n & (n - 1)) == 0) return engine_() & (n - 1);  // power of two
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % n;
}

double Rng::normal() {
    // Box-Muller; discards the second deviate so every call is two draws.
    double u1 = uniform();
    const double u2 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    constexpr double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

}  // namespace curvete
