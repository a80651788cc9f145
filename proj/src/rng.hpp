#pragma once

#include <array>
#include <cstdint>

namespace martrep::rng {

/// Philox4x32-10 block function (counter-based, splittable). Pure: the output
/// depends only on (key, counter), so draws are reproducible under any
/// parallel work split.
std::array<uint32_t, 4> philox4x32(const std::array<uint32_t, 2>& key,
                                   const std::array<uint32_t, 4>& counter);

/// Uniform draw in the open interval (0,1), keyed by (seed, sample, index).
double uniform01(uint64_t seed, uint64_t sample, uint64_t index);

/// Inverse of the standard normal CDF (long-double-accurate rational
/// approximation, relative error below 1e-15 in the bulk).
/// pre: 0 < p < 1.
double inverse_normal_cdf(double p);

/// Standard normal draw keyed by (seed, sample, index): the inverse CDF of
/// the matching uniform draw.
double normal_draw(uint64_t seed, uint64_t sample, uint64_t index);

}  // namespace martrep::rng
