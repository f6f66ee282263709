#pragma once

#include <cstdint>
#include <vector>

#include "cwb/common.hpp"

namespace cwb {

// Apportions `total` slots to ratios by largest remainder; ties go to the
// lower index. Ratios must be nonnegative and sum to 1 within 1e-9.
std::vector<int> largest_remainder_counts(const std::vector<double>& ratios, int total);

// Interleaved class sequence of length `total`: exact largest-remainder
// counts per class, order fixed by a seeded Fisher-Yates shuffle.
std::vector<int> mixture_schedule(const std::vector<double>& ratios, int total,
                                  std::uint64_t seed);

}  // namespace cwb
