#pragma once

#include "fnkit/learners.hpp"
#include "fnkit/matrix.hpp"
#include "fnkit/stylefeat.hpp"
#include "fnkit/tokenfeat.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fnkit {

// ---- folds and metrics ----------------------------------------------------

struct FoldPlan {
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::vector<std::size_t> assignments;  // row -> fold

  std::vector<std::size_t> test_rows(std::size_t fold) const;
  std::vector<std::size_t> train_rows(std::size_t fold) const;
  std::vector<std::size_t> fold_sizes() const;
};

// Shuffle rows with the seed, then deal them into k contiguous blocks; the
// first n mod k blocks get one extra row.
FoldPlan kfold_plan(std::size_t n_rows, std::size_t k = 10, std::uint64_t seed = 42);

// Positive class = true news (label 1).
struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  bool operator==(const ConfusionCounts&) const = default;
};

ConfusionCounts confusion(std::span<const int> truth, std::span<const int> predicted);

struct Metrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double specificity = 0.0;
  double f1 = 0.0;
  bool degenerate = false;  // some ratio was 0/0 and reported as 0

  bool operator==(const Metrics&) const = default;
};

Metrics compute_metrics(const ConfusionCounts& c);

struct MetricSummary {
  Metrics mean;
  Metrics std;  // population standard deviation across folds
};

MetricSummary summarise(std::span<const Metrics> folds);

// ---- datasets and per-fold pipelines --------------------------------------

// Either a dense stylistic matrix or token documents, with labels.
struct Dataset {
  std::string name;
  std::vector<std::string> ids;
  std::vector<int> labels;
  Matrix features;
  std::vector<std::string> feature_names;
  std::string schema_id;
  std::vector<std::vector<std::string>> documents;

  std::size_t rows() const { return labels.size(); }
  bool has_documents() const { return !documents.empty(); }
  Dataset select_rows(std::span<const std::size_t> rows) const;

  static Dataset from_table(const FeatureTable& table, std::string name = {});
  static Dataset from_labeled(const LabeledMatrix& data, std::string name = {});
  static Dataset from_documents(std::vector<std::vector<std::string>> docs, std::vector<int> labels,
                                std::string name = {});
};

enum class PipelineKind { Stylistic, Bow, Tfidf };

std::string_view to_string(PipelineKind kind);
PipelineKind pipeline_for(FeatureGroup group);

struct PipelineSpec {
  PipelineKind kind = PipelineKind::Stylistic;
  bool standardize = true;
  std::size_t max_features = kDefaultMaxFeatures;
  std::vector<std::string> columns;  // stylistic subset by name; empty = all

  std::string describe() const;
};

// State fitted on a fold's training rows only.
struct FittedPipeline {
  PipelineSpec spec;
  std::vector<std::string> feature_names;
  Standardizer standardizer;
  std::optional<Vocabulary> vocabulary;
  std::string schema_id;

  // SchemaError when a stylistic dataset lacks one of the fitted columns.
  LabeledMatrix transform(const Dataset& data) const;
  LabeledMatrix transform(const Dataset& data, std::span<const std::size_t> rows) const;

  std::string to_json() const;
  static FittedPipeline from_json(std::string_view text);
  bool operator==(const FittedPipeline& o) const;
};

FittedPipeline fit_pipeline(const PipelineSpec& spec, const Dataset& data, std::span<const std::size_t> train_rows);

// ---- K-fold and cross-dataset evaluation ----------------------------------

struct FoldResult {
  std::size_t fold = 0;
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
  FittedPipeline pipeline;
  TrainedModel model;
  ConfusionCounts counts;
  Metrics metrics;
};

struct KFoldResult {
  FoldPlan plan;
  PipelineSpec pipeline;
  ModelSpec model;
  std::vector<FoldResult> folds;
  MetricSummary summary;
};

// Folds run in parallel; results are ordered by fold index.
KFoldResult run_kfold(const Dataset& data, const PipelineSpec& pipeline, const ModelSpec& model, std::size_t k = 10,
                      std::uint64_t seed = 42);

struct ExternalFold {
  std::size_t fold = 0;
  std::vector<std::size_t> sample;  // external rows used
  ConfusionCounts counts;
  Metrics metrics;
};

struct ExternalResult {
  std::size_t n_per_class = 0;
  std::uint64_t seed = 0;
  std::vector<ExternalFold> folds;
  MetricSummary summary;
};

// Each fold model scores its own balanced sample of the external set,
// transformed with that fold's fitted pipeline.
ExternalResult cross_dataset_eval(const KFoldResult& kfold, const Dataset& external, std::size_t n_per_class = 500,
                                  std::uint64_t seed = 42);

std::vector<double> accuracies(const KFoldResult& r);
std::vector<double> accuracies(const ExternalResult& r);

// ---- Mann-Whitney U -------------------------------------------------------

enum class MwuMethod { Exact, NormalApprox };
enum class Sided { TwoSided, Less, Greater };

std::string_view to_string(MwuMethod m);

struct MwuResult {
  double u = 0.0;  // U for the first sample
  double p = 1.0;
  MwuMethod method = MwuMethod::Exact;
  bool ties_degenerate = false;  // every value tied; p reported as 1
};

inline constexpr std::size_t kMwuExactLimit = 8;

// Exact p by enumeration when max(|a|,|b|) <= 8, else the normal
// approximation with tie and continuity corrections. `Greater` tests whether
// a tends to exceed b.
MwuResult mann_whitney_u(std::span<const double> a, std::span<const double> b, Sided sided = Sided::TwoSided);

// ---- permutation importance -----------------------------------------------

struct PfiEntry {
  std::string name;
  double mean = 0.0;  // accuracy drop
  double std = 0.0;
};

struct PfiReport {
  std::vector<PfiEntry> features;  // schema order
  std::size_t repeats = 0;
  std::uint64_t seed = 0;
  double baseline = 0.0;

  std::vector<PfiEntry> ranked() const;  // importance descending, ties in schema order
};

PfiReport permutation_importance(const TrainedModel& model, const LabeledMatrix& data, std::size_t repeats = 10,
                                 std::uint64_t seed = 42);

// Names with importance > 0 in both reports, by external importance
// descending. SchemaError when the reports cover different features.
std::vector<std::string> select_generalisable_features(const PfiReport& internal, const PfiReport& external);

// CSV: rank,feature,importance_mean,importance_std
std::string pfi_csv(const PfiReport& report);
PfiReport parse_pfi_csv(std::string_view text);

// ---- with/without comparison ----------------------------------------------

struct Comparison {
  std::vector<double> accuracy_a;
  std::vector<double> accuracy_b;
  MwuResult mwu;  // sample b against sample a
};

// Same fold plan for both pipelines; compares per-fold external accuracies.
Comparison compare_with_without(const PipelineSpec& a, const PipelineSpec& b, const Dataset& data,
                                const Dataset& external, const ModelSpec& model, std::size_t k = 10,
                                std::uint64_t seed = 42, std::size_t n_per_class = 500);

// ---- reports --------------------------------------------------------------

struct FoldMetrics {
  std::size_t fold = 0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  ConfusionCounts counts;
  Metrics metrics;
};

struct EvalReport {
  std::string tool_version;
  std::string config_hash;
  std::string pipeline;
  std::string model;
  std::string schema_id;
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::vector<FoldMetrics> kfold;
  MetricSummary kfold_summary;
  std::size_t n_per_class = 0;
  std::vector<FoldMetrics> external;
  std::optional<MetricSummary> external_summary;
  std::vector<std::pair<std::string, MwuResult>> tests;
  std::vector<std::pair<std::string, PfiReport>> pfi;

  // External per-fold accuracies when present, otherwise the K-fold ones.
  std::vector<double> headline_accuracies() const;

  std::string to_json() const;
  static EvalReport from_json(std::string_view text);
};

EvalReport make_report(const KFoldResult& kfold, const ExternalResult* external, std::string tool_version,
                       std::string config_hash);

}  // namespace fnkit
