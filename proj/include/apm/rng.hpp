#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace apm {

using Rng = std::mt19937_64;

// Every random consumer draws from its own labelled substream of the one
// top-level seed, so adding a consumer never perturbs the others.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label) noexcept;

inline Rng make_rng(std::uint64_t seed, std::string_view label) {
  return Rng(derive_seed(seed, label));
}

}  // namespace apm
