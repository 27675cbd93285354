#pragma once

#include <cstdint>

#include "amber/dataset.hpp"

namespace amber {

// 4 features: x0 ~ N(0,1) drives the label (y = [x0 > 0]), x1 and x2 are
// independent noise, x3 duplicates x0.
Dataset gen_duplicate_feature(std::size_t n, std::uint64_t seed);

// d features, y = [x0 > 0], the rest independent noise.
Dataset gen_single_informative(std::size_t n, std::size_t d, std::uint64_t seed);

// 2*samples features grouped into pairs {i, i+samples}; the label is decided
// by pair 0 (y = [x0 + x_samples > 0]), every other pair is noise.
Dataset gen_paired_groups(std::size_t n, std::size_t samples, std::uint64_t seed);

}  // namespace amber
