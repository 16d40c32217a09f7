#pragma once

#include "fnkit/matrix.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fnkit {

enum class ModelKind { LogReg, LinearSvm, Tree, Forest, GBoost, Ffnn };

std::string_view to_string(ModelKind kind);
// logreg, svm (or linear_svm), tree, forest, gboost, ffnn
ModelKind parse_model_kind(std::string_view name);

struct LogRegParams {
  double l2 = 1.0;
  std::size_t max_iter = 1000;
  double tol = 1e-6;

  bool operator==(const LogRegParams&) const = default;
};

struct SvmParams {
  double l2 = 1e-3;
  std::size_t epochs = 50;

  bool operator==(const SvmParams&) const = default;
};

struct TreeParams {
  std::optional<std::size_t> max_depth;  // none = grow until pure
  std::size_t min_leaf = 1;

  bool operator==(const TreeParams&) const = default;
};

struct ForestParams {
  std::size_t n_trees = 100;
  bool bootstrap = true;
  std::size_t max_features = 0;  // 0 = floor(sqrt(d)), at least 1
  TreeParams tree;

  bool operator==(const ForestParams&) const = default;
};

struct GBoostParams {
  std::size_t n_stages = 100;
  double learn_rate = 0.1;
  std::size_t depth = 3;

  bool operator==(const GBoostParams&) const = default;
};

struct FfnnParams {
  std::size_t hidden = 10;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-7;
  double min_delta = 0.01;
  std::size_t patience = 5;
  std::size_t max_epochs = 200;
  std::size_t batch_size = 32;

  bool operator==(const FfnnParams&) const = default;
};

struct ModelSpec {
  ModelKind kind = ModelKind::LogReg;
  std::uint64_t seed = 42;
  LogRegParams logreg;
  SvmParams svm;
  TreeParams tree;
  ForestParams forest;
  GBoostParams gboost;
  FfnnParams ffnn;

  bool operator==(const ModelSpec&) const = default;
};

// Node of a binary tree stored in a flat array; a leaf has feature < 0.
// For classification trees `value` is P(class 1); for boosting stages it is
// the additive score.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double evaluate(std::span<const double> row) const;
  std::size_t depth() const;
  std::size_t leaf_count() const;
  bool uses_feature(std::size_t f) const;
  bool operator==(const Tree&) const = default;
};

struct FfnnWeights {
  std::size_t inputs = 0;
  std::size_t hidden = 0;
  std::vector<double> w1;  // hidden x inputs, row-major
  std::vector<double> b1;  // hidden
  std::vector<double> w2;  // hidden
  double b2 = 0.0;

  std::vector<double> flatten() const;
  void unflatten(std::span<const double> flat);
  bool operator==(const FfnnWeights&) const = default;
};

class TrainedModel {
 public:
  ModelSpec spec;
  std::string schema_id;
  std::size_t n_features = 0;

  // logreg / linear_svm
  std::vector<double> weights;
  double bias = 0.0;
  // tree / forest / gboost
  std::vector<Tree> trees;
  double init_score = 0.0;
  std::vector<double> stage_losses;  // gboost: training loss after init and after each stage
  // ffnn
  FfnnWeights net;
  std::size_t epochs_run = 0;
  std::vector<double> epoch_losses;

  ModelKind kind() const { return spec.kind; }

  std::string to_json() const;
  static TrainedModel from_json(std::string_view json);
  void save(const std::string& path) const;
  static TrainedModel load(const std::string& path);

  bool operator==(const TrainedModel&) const = default;
};

// All trainers throw DegenerateLabels unless both classes are present and
// TooFewRows on empty input. Labels: 0 = fake, 1 = true.
TrainedModel train_logreg(const LabeledMatrix& data, const LogRegParams& params = {});
TrainedModel train_linear_svm(const LabeledMatrix& data, const SvmParams& params = {}, std::uint64_t seed = 42);
TrainedModel train_tree(const LabeledMatrix& data, const TreeParams& params = {});
TrainedModel train_random_forest(const LabeledMatrix& data, const ForestParams& params = {}, std::uint64_t seed = 42);
TrainedModel train_gradient_boosting(const LabeledMatrix& data, const GBoostParams& params = {});
TrainedModel train_ffnn(const LabeledMatrix& data, const FfnnParams& params = {}, std::uint64_t seed = 42);
TrainedModel train_model(const LabeledMatrix& data, const ModelSpec& spec);

struct Prediction {
  std::vector<int> labels;
  std::vector<double> probabilities;  // P(class 1)
};

// SchemaError when the column count (or, for LabeledMatrix, the schema id)
// differs from training.
Prediction predict(const TrainedModel& model, const Matrix& x);
Prediction predict(const TrainedModel& model, const LabeledMatrix& data);
double accuracy(const TrainedModel& model, const LabeledMatrix& data);

// Objective pieces exposed for gradient checking.
struct LossGrad {
  double loss = 0.0;
  std::vector<double> grad;
};

// Mean log-loss + (l2/2)*|w|^2; params = [w..., b].
LossGrad logreg_objective(const Matrix& x, std::span<const int> y, std::span<const double> params, double l2);
// Mean binary cross-entropy of the network; gradient in flatten() order.
LossGrad ffnn_objective(const FfnnWeights& net, const Matrix& x, std::span<const int> y);
FfnnWeights ffnn_init(std::size_t inputs, std::size_t hidden, std::uint64_t seed);
double ffnn_forward(const FfnnWeights& net, std::span<const double> row);
// Mean log-loss of raw scores.
double log_loss_of_scores(std::span<const double> scores, std::span<const int> y);

double sigmoid(double z);

}  // namespace fnkit
