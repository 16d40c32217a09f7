#include "fnkit/sampling.hpp"

#include "fnkit/error.hpp"
#include "fnkit/rng.hpp"

#include <algorithm>
#include <string>

namespace fnkit {

std::vector<std::size_t> balanced_indices(std::span<const int> labels, std::size_t n_per_class, std::uint64_t seed) {
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 0 || labels[i] == 1) by_class[labels[i]].push_back(i);
  }
  std::vector<std::size_t> out;
  out.reserve(2 * n_per_class);
  for (int c = 0; c < 2; ++c) {
    const auto& pool = by_class[c];
    if (pool.size() < n_per_class) {
      fail(ErrorKind::InsufficientClass, "class " + std::string(c == 0 ? "fake" : "true") + " has " +
                                             std::to_string(pool.size()) + " rows, need " + std::to_string(n_per_class));
    }
    Rng rng(derive_seed(seed, 0xba1a, static_cast<std::uint64_t>(c)));
    for (auto i : rng.sample_without_replacement(pool.size(), n_per_class)) out.push_back(pool[i]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace fnkit
