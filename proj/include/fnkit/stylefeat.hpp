#pragma once

#include "fnkit/matrix.hpp"
#include "fnkit/monetise.hpp"
#include "fnkit/resources.hpp"

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fnkit {

enum class FeatureGroup { Fernandez, Abonizio, Liwc, Nela, NelaModified, TokenBow, TokenTfidf };

std::string_view to_string(FeatureGroup group);
// Accepts the CLI spellings: fernandez, abonizio, liwc, nela, nela-mod, bow, tfidf.
FeatureGroup parse_feature_group(std::string_view name);
bool is_token_group(FeatureGroup group);

struct FeatureSchema {
  FeatureGroup group = FeatureGroup::Fernandez;
  std::vector<std::string> names;
  bool with_monetisation = false;
  // Baseline columns dropped by this schema (informational).
  std::vector<std::string> removed;

  std::size_t size() const { return names.size(); }
  std::size_t index_of(std::string_view name) const;  // throws SchemaError
  // Stable identifier derived from group, flag and names.
  std::string id() const;
};

using SchemaPtr = std::shared_ptr<const FeatureSchema>;

struct FeatureVector {
  SchemaPtr schema;
  std::vector<double> values;

  double at(std::string_view name) const { return values[schema->index_of(name)]; }
};

inline constexpr std::size_t kFernandezFeatureCount = 34;
inline constexpr std::size_t kAbonizioFeatureCount = 21;
inline constexpr std::size_t kNelaFeatureCount = 91;
inline constexpr std::size_t kMonetisationFeatureCount = 4;

inline const std::vector<std::string> kMonetisationNames = {"ads", "ext_total", "fb", "twit"};

SchemaPtr fernandez_schema();
SchemaPtr abonizio_schema();
SchemaPtr nela_schema();
SchemaPtr nela_modified_schema();
SchemaPtr liwc_schema(const Lexicon& dictionary);
// Same schema with the four monetisation names appended; SchemaError if
// already present.
SchemaPtr with_monetisation(const SchemaPtr& schema);

// Every extractor throws DegenerateText when the text has no words.
FeatureVector fernandez_features(std::string_view text, const LinguisticResources& res);
FeatureVector abonizio_features(std::string_view text, const LinguisticResources& res);
// Throws DictionaryRequired when `dictionary` is null.
FeatureVector liwc_features(std::string_view text, const Lexicon* dictionary);
FeatureVector nela_features(std::string_view text, const LinguisticResources& res);
FeatureVector modified_nela_features(std::string_view text, const LinguisticResources& res);

// Dispatch for the five stylistic groups; liwc uses res.liwc.
FeatureVector extract_features(FeatureGroup group, std::string_view text, const LinguisticResources& res);
SchemaPtr schema_for(FeatureGroup group, const LinguisticResources& res);

FeatureVector append_monetisation(const FeatureVector& v, const MonetisationFeatures& m);

class Standardizer {
 public:
  Standardizer() = default;
  Standardizer(std::vector<double> means, std::vector<double> stds);

  // Population standard deviation per column.
  static Standardizer fit(const Matrix& train);

  bool fitted() const { return fitted_; }
  const std::vector<double>& means() const { return means_; }
  const std::vector<double>& stds() const { return stds_; }

  // Columns with zero spread map to 0. Throws NotFitted / SchemaError.
  Matrix transform(const Matrix& x) const;
  void transform_row(std::span<double> row) const;

 private:
  std::vector<double> means_;
  std::vector<double> stds_;
  bool fitted_ = false;
};

struct FeatureTable {
  std::vector<std::string> ids;
  std::vector<int> labels;  // 0 = fake, 1 = true
  FeatureSchema schema;
  Matrix values;

  LabeledMatrix labeled() const;
};

// CSV: id,label,<schema names...>; labels written as fake/true.
void write_feature_csv(const std::string& path, const FeatureTable& table);
FeatureTable read_feature_csv(const std::string& path);  // schema from header; group/flag from sidecar if present
std::string schema_sidecar_json(const FeatureSchema& schema);
FeatureSchema parse_schema_sidecar(std::string_view json);
std::string sidecar_path_for(const std::string& csv_path);

// Shortest round-trip decimal for a finite double.
std::string format_double(double v);

}  // namespace fnkit
