#pragma once

#include "fnkit/matrix.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace fnkit {

// lowercase -> strip URLs and @handles -> drop punctuation -> drop
// stopwords -> lemmatise. Token order is preserved.
std::vector<std::string> preprocess_tokens(std::string_view text, const std::unordered_set<std::string>& stopwords);

inline constexpr std::size_t kDefaultMaxFeatures = 10000;

class Vocabulary {
 public:
  // Terms ranked by total corpus frequency (ties: lexicographic), top
  // max_features kept, then indexed in lexicographic order.
  static Vocabulary fit(std::span<const std::vector<std::string>> docs, std::size_t max_features = kDefaultMaxFeatures);

  std::size_t size() const { return terms_.size(); }
  std::size_t n_docs() const { return n_docs_; }
  std::size_t max_features() const { return max_features_; }
  const std::vector<std::string>& terms() const { return terms_; }
  const std::vector<std::size_t>& document_frequencies() const { return df_; }
  // npos when absent.
  std::size_t index_of(std::string_view term) const;
  double idf(std::size_t index) const;

  std::string serialise() const;
  static Vocabulary parse(std::string_view text);
  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

  bool operator==(const Vocabulary& o) const {
    return terms_ == o.terms_ && df_ == o.df_ && n_docs_ == o.n_docs_ && max_features_ == o.max_features_;
  }

 private:
  void rebuild_index();

  std::vector<std::string> terms_;
  std::vector<std::size_t> df_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t n_docs_ = 0;
  std::size_t max_features_ = 0;
};

struct SparseVector {
  std::vector<std::pair<std::size_t, double>> entries;  // strictly increasing index, non-zero values

  double sum() const;
  double norm() const;
  void add_to(std::span<double> dense) const;
};

SparseVector bow_vector(std::span<const std::string> tokens, const Vocabulary& vocab);
// tf * (ln((1+N)/(1+df)) + 1), L2-normalised unless all zero. N defaults to
// the vocabulary's document count.
SparseVector tfidf_vector(std::span<const std::string> tokens, const Vocabulary& vocab);
SparseVector tfidf_vector(std::span<const std::string> tokens, const Vocabulary& vocab, std::size_t corpus_size);

Matrix to_dense(std::span<const SparseVector> rows, std::size_t dim);

}  // namespace fnkit
