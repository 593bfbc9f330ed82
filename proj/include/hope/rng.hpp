#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace hope {

/// Name recorded in reports so runs can be replayed by another implementation.
inline constexpr const char* kRngAlgorithm =
    "mt19937_64; seeds derived by splitmix64 chaining; uniform01 = (x >> 11) * 2^-53; "
    "uniform_index by rejection on the top of the 64-bit range";

std::uint64_t splitmix64(std::uint64_t x);

/// Deterministic child seed for (seed, k1, k2, ...).
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> keys);

/// mt19937_64 with distribution code written out, so draws do not depend on
/// the standard library's (implementation-defined) distributions.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 1) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    /// Uniform on [0, n); n > 0.
    std::uint64_t uniform_index(std::uint64_t n);
    bool bernoulli(double p) { return uniform01() < p; }

    friend bool operator==(const Rng&, const Rng&) = default;

private:
    std::mt19937_64 engine_;
};

}  // namespace hope
