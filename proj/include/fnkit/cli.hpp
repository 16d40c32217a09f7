#pragma once

#include "fnkit/learners.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace fnkit::cli {

std::string_view version();

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kWarnings = 1;
inline constexpr int kUsage = 2;

// Flat INI file:
//
//   [seeds]    global, fold, sample (fold/sample default to global)
//   [paths]    data_dir, filter_list, liwc_dictionary, output_dir
//   [features] group, with_monetisation
//   [model]    kind, logreg_l2, svm_l2, svm_epochs, tree_max_depth,
//              forest_trees, gboost_stages, gboost_learn_rate, gboost_depth,
//              ffnn_hidden, ffnn_max_epochs
//   [eval]     k, n_per_class, pfi_repeats, max_features
//   [ingest]   cap_quantile
//   [fetch]    archive_endpoint, timeout, retries, delay_ms, max_in_flight
struct RunConfig {
  std::uint64_t seed = 42;
  std::uint64_t fold_seed = 42;
  std::uint64_t sample_seed = 42;

  std::string data_dir;
  std::string filter_list;
  std::string liwc_dictionary;
  std::string output_dir = ".";

  std::string group = "nela";
  bool with_monetisation = false;

  ModelSpec model;

  std::size_t k = 10;
  std::size_t n_per_class = 500;
  std::size_t pfi_repeats = 10;
  std::size_t max_features = 10000;

  double cap_quantile = 0.25;

  std::string archive_endpoint = "https://archive.org/wayback/available?url=";
  std::size_t timeout_s = 20;
  std::size_t retries = 2;
  std::size_t delay_ms = 0;
  std::size_t max_in_flight = 8;

  static RunConfig load(const std::string& path);

  // Throws InvalidInput for k < 2 or a configured path that does not exist.
  void validate() const;
  // key=value lines in a fixed order; hashed into reports.
  std::string canonical() const;
  std::string hash() const;
};

// Entry point shared by the executable and the tests. args excludes argv[0].
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fnkit::cli
