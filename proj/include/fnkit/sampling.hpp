#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace fnkit {

// n_per_class rows of each label (0 and 1) drawn without replacement,
// returned in ascending row order. InsufficientClass when a class is short.
std::vector<std::size_t> balanced_indices(std::span<const int> labels, std::size_t n_per_class, std::uint64_t seed);

}  // namespace fnkit
