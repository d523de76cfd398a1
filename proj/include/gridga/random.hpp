#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace gridga {

/// Engine used everywhere. mt19937_64 output is fixed by the standard; the
/// helpers below avoid std distributions so results do not depend on the
/// standard library vendor.
using Rng = std::mt19937_64;

/// One SplitMix64 step from state `x`: advance by the golden gamma, then mix.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Child seed for an independent stream `stream` under `base`.
/// derive_seed(s, i) = mix64(mix64(s) ^ mix64(i + 0x9e3779b97f4a7c15)).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept;

/// Uniform double in [0, 1) with 53 random bits.
double uniform01(Rng& rng) noexcept;

/// Uniform integer in [0, n). n must be > 0. Rejection-sampled, unbiased.
std::uint64_t uniform_index(Rng& rng, std::uint64_t n) noexcept;

/// Standard normal via Box-Muller (one value per call, no caching).
double standard_normal(Rng& rng) noexcept;

bool bernoulli(Rng& rng, double p) noexcept;

template <typename T>
void shuffle(std::span<T> values, Rng& rng) {
    for (std::size_t i = values.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(uniform_index(rng, i));
        std::swap(values[i - 1], values[j]);
    }
}

template <typename T>
void shuffle(std::vector<T>& values, Rng& rng) {
    shuffle(std::span<T>(values), rng);
}

}  // namespace gridga
