#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace sscl {

// mt19937_64's output sequence is fixed by the standard; the distributions in
// <random> are not, so the helpers below are used everywhere instead of
// std::uniform_*_distribution to keep runs reproducible across toolchains.
using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

// Seed for a named sub-stream of a root seed ("init", "augment", "shuffle", ...).
std::uint64_t derive_seed(std::uint64_t root, std::string_view stream);
std::uint64_t derive_seed(std::uint64_t root, std::string_view stream, std::uint64_t index);

inline Rng make_rng(std::uint64_t root, std::string_view stream) {
  return Rng(derive_seed(root, stream));
}

// Uniform integer in [0, n), unbiased (rejection sampling). n must be > 0.
std::uint64_t uniform_index(Rng& rng, std::uint64_t n);

// Uniform double in [0, 1) with 53 random bits.
double uniform01(Rng& rng);

double uniform(Rng& rng, double lo, double hi);

// Standard normal via Box-Muller.
double standard_normal(Rng& rng);

// Fisher-Yates shuffle driven by uniform_index.
template <typename T>
void shuffle(std::vector<T>& values, Rng& rng) {
  for (std::size_t i = values.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_index(rng, i));
    std::swap(values[i - 1], values[j]);
  }
}

// k distinct indices from [0, n), uniformly without replacement, in draw order.
std::vector<std::size_t> sample_without_replacement(Rng& rng, std::size_t n, std::size_t k);

}  // namespace sscl
