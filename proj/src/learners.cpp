#include "fnkit/learners.hpp"

#include "fnkit/error.hpp"
#include "fnkit/parallel.hpp"
#include "fnkit/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>

namespace fnkit {

using json = nlohmann::ordered_json;

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::LogReg: return "logreg";
    case ModelKind::LinearSvm: return "svm";
    case ModelKind::Tree: return "tree";
    case ModelKind::Forest: return "forest";
    case ModelKind::GBoost: return "gboost";
    case ModelKind::Ffnn: return "ffnn";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
  for (auto k : {ModelKind::LogReg, ModelKind::LinearSvm, ModelKind::Tree, ModelKind::Forest, ModelKind::GBoost,
                 ModelKind::Ffnn}) {
    if (to_string(k) == name) return k;
  }
  if (name == "linear_svm") return ModelKind::LinearSvm;
  fail(ErrorKind::InvalidInput, "unknown model kind '" + std::string(name) + "'");
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

namespace {

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

// Log-loss of a raw score: softplus(z) - y*z.
double score_loss(double z, int y) { return softplus(z) - (y == 1 ? z : 0.0); }

void check_training_data(const LabeledMatrix& data) {
  if (data.x.rows() != data.y.size()) fail(ErrorKind::SchemaError, "row count and label count differ");
  if (data.x.rows() == 0) fail(ErrorKind::TooFewRows, "no training rows");
  bool has0 = false;
  bool has1 = false;
  for (int y : data.y) {
    if (y == 0) {
      has0 = true;
    } else if (y == 1) {
      has1 = true;
    } else {
      fail(ErrorKind::InvalidInput, "labels must be 0 or 1");
    }
  }
  if (!has0 || !has1) fail(ErrorKind::DegenerateLabels, "training data must contain both classes");
  for (double v : data.x.data()) {
    if (!std::isfinite(v)) fail(ErrorKind::InvalidInput, "training matrix has non-finite entries");
  }
}

TrainedModel base_model(const LabeledMatrix& data, ModelKind kind) {
  TrainedModel m;
  m.spec.kind = kind;
  m.schema_id = data.schema_id;
  m.n_features = data.x.cols();
  return m;
}

// Compressed rows for the linear learners; BoW matrices are mostly zeros.
struct SparseRows {
  std::vector<std::size_t> start;
  std::vector<std::size_t> col;
  std::vector<double> val;

  explicit SparseRows(const Matrix& x) {
    start.reserve(x.rows() + 1);
    start.push_back(0);
    for (std::size_t r = 0; r < x.rows(); ++r) {
      for (std::size_t c = 0; c < x.cols(); ++c) {
        const double v = x(r, c);
        if (v != 0.0) {
          col.push_back(c);
          val.push_back(v);
        }
      }
      start.push_back(col.size());
    }
  }

  double dot(std::size_t r, std::span<const double> w) const {
    double s = 0.0;
    for (std::size_t k = start[r]; k < start[r + 1]; ++k) s += val[k] * w[col[k]];
    return s;
  }
};

LossGrad logreg_objective_sparse(const SparseRows& xs, std::size_t d, std::span<const int> y,
                                 std::span<const double> params, double l2, bool want_grad) {
  const std::size_t n = y.size();
  LossGrad out;
  if (want_grad) out.grad.assign(d + 1, 0.0);
  const auto w = params.subspan(0, d);
  const double b = params[d];
  double loss = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    const double z = xs.dot(r, w) + b;
    loss += score_loss(z, y[r]);
    if (want_grad) {
      const double g = sigmoid(z) - y[r];
      for (std::size_t k = xs.start[r]; k < xs.start[r + 1]; ++k) out.grad[xs.col[k]] += g * xs.val[k];
      out.grad[d] += g;
    }
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  double reg = 0.0;
  for (std::size_t j = 0; j < d; ++j) reg += w[j] * w[j];
  out.loss = loss * inv_n + 0.5 * l2 * reg;
  if (want_grad) {
    for (std::size_t j = 0; j < d; ++j) out.grad[j] = out.grad[j] * inv_n + l2 * w[j];
    out.grad[d] *= inv_n;
  }
  return out;
}

// ---- CART -----------------------------------------------------------------

struct BuildOptions {
  bool classification = true;
  std::optional<std::size_t> max_depth;
  std::size_t min_leaf = 1;
  std::size_t max_features = 0;  // 0 = all features in index order
  Rng* rng = nullptr;
  std::function<double(std::span<const std::size_t>)> leaf_value;
};

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, std::span<const double> target, BuildOptions opts)
      : x_(x), target_(target), opts_(std::move(opts)) {}

  Tree build(std::vector<std::size_t> rows) {
    tree_.nodes.clear();
    grow(rows, 0);
    return std::move(tree_);
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double gain = -std::numeric_limits<double>::infinity();
  };

  bool pure(std::span<const std::size_t> rows) const {
    for (auto r : rows) {
      if (target_[r] != target_[rows[0]]) return false;
    }
    return true;
  }

  double leaf(std::span<const std::size_t> rows) const {
    if (opts_.leaf_value) return opts_.leaf_value(rows);
    double s = 0.0;
    for (auto r : rows) s += target_[r];
    return s / static_cast<double>(rows.size());
  }

  double gini(double ones, double n) const {
    if (n <= 0.0) return 0.0;
    const double p = ones / n;
    return 1.0 - p * p - (1.0 - p) * (1.0 - p);
  }

  void scan_feature(std::size_t f, std::span<const std::size_t> rows, Split& best) const {
    std::vector<std::pair<double, std::size_t>> vals;
    vals.reserve(rows.size());
    for (auto r : rows) vals.emplace_back(x_(r, f), r);
    std::sort(vals.begin(), vals.end());
    if (vals.front().first == vals.back().first) return;
    const double n = static_cast<double>(rows.size());
    double total = 0.0;
    for (const auto& [_, r] : vals) total += target_[r];
    const double parent = opts_.classification ? gini(total, n) : total * total / n;
    double left_sum = 0.0;
    for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
      left_sum += target_[vals[i].second];
      if (vals[i].first == vals[i + 1].first) continue;
      const std::size_t nl = i + 1;
      const std::size_t nr = vals.size() - nl;
      if (nl < opts_.min_leaf || nr < opts_.min_leaf) continue;
      const double dl = static_cast<double>(nl);
      const double dr = static_cast<double>(nr);
      double gain;
      if (opts_.classification) {
        gain = parent - (dl * gini(left_sum, dl) + dr * gini(total - left_sum, dr)) / n;
      } else {
        const double right_sum = total - left_sum;
        gain = (left_sum * left_sum / dl + right_sum * right_sum / dr - parent) / n;
      }
      if (gain > best.gain + 1e-12) {
        double thr = 0.5 * (vals[i].first + vals[i + 1].first);
        if (!(thr < vals[i + 1].first)) thr = vals[i].first;
        best = {static_cast<int>(f), thr, gain};
      }
    }
  }

  Split find_split(std::span<const std::size_t> rows) const {
    Split best;
    const std::size_t d = x_.cols();
    if (opts_.max_features == 0 || opts_.max_features >= d) {
      for (std::size_t f = 0; f < d; ++f) scan_feature(f, rows, best);
      return best;
    }
    auto order = opts_.rng->sample_without_replacement(d, d);
    const std::size_t k = opts_.max_features;
    std::vector<std::size_t> first(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(first.begin(), first.end());
    for (auto f : first) scan_feature(f, rows, best);
    // No usable feature among the sample: keep drawing until one splits.
    for (std::size_t i = k; best.feature < 0 && i < d; ++i) scan_feature(order[i], rows, best);
    return best;
  }

  int grow(std::vector<std::size_t>& rows, std::size_t depth) {
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.push_back({});
    const bool depth_ok = !opts_.max_depth || depth < *opts_.max_depth;
    const bool can_split = depth_ok && rows.size() >= 2 * opts_.min_leaf && !(opts_.classification && pure(rows));
    Split s;
    if (can_split) s = find_split(rows);
    if (s.feature < 0) {
      tree_.nodes[static_cast<std::size_t>(id)].value = leaf(rows);
      return id;
    }
    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (auto r : rows) (x_(r, static_cast<std::size_t>(s.feature)) <= s.threshold ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();
    const int l = grow(left, depth + 1);
    const int r = grow(right, depth + 1);
    auto& node = tree_.nodes[static_cast<std::size_t>(id)];
    node.feature = s.feature;
    node.threshold = s.threshold;
    node.left = l;
    node.right = r;
    return id;
  }

  const Matrix& x_;
  std::span<const double> target_;
  BuildOptions opts_;
  Tree tree_;
};

std::vector<double> labels_as_double(std::span<const int> y) { return {y.begin(), y.end()}; }

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> r(n);
  std::iota(r.begin(), r.end(), std::size_t{0});
  return r;
}

}  // namespace

double Tree::evaluate(std::span<const double> row) const {
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const auto& n = nodes[i];
    i = static_cast<std::size_t>(row[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
  }
  return nodes[i].value;
}

std::size_t Tree::depth() const {
  std::function<std::size_t(std::size_t)> rec = [&](std::size_t i) -> std::size_t {
    if (nodes[i].is_leaf()) return 0;
    return 1 + std::max(rec(static_cast<std::size_t>(nodes[i].left)), rec(static_cast<std::size_t>(nodes[i].right)));
  };
  return nodes.empty() ? 0 : rec(0);
}

std::size_t Tree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

bool Tree::uses_feature(std::size_t f) const {
  return std::any_of(nodes.begin(), nodes.end(),
                     [f](const TreeNode& n) { return !n.is_leaf() && static_cast<std::size_t>(n.feature) == f; });
}

std::vector<double> FfnnWeights::flatten() const {
  std::vector<double> out;
  out.reserve(w1.size() + b1.size() + w2.size() + 1);
  out.insert(out.end(), w1.begin(), w1.end());
  out.insert(out.end(), b1.begin(), b1.end());
  out.insert(out.end(), w2.begin(), w2.end());
  out.push_back(b2);
  return out;
}

void FfnnWeights::unflatten(std::span<const double> flat) {
  const std::size_t n1 = hidden * inputs;
  if (flat.size() != n1 + 2 * hidden + 1) fail(ErrorKind::SchemaError, "flat parameter vector has wrong length");
  w1.assign(flat.begin(), flat.begin() + static_cast<std::ptrdiff_t>(n1));
  b1.assign(flat.begin() + static_cast<std::ptrdiff_t>(n1), flat.begin() + static_cast<std::ptrdiff_t>(n1 + hidden));
  w2.assign(flat.begin() + static_cast<std::ptrdiff_t>(n1 + hidden),
            flat.begin() + static_cast<std::ptrdiff_t>(n1 + 2 * hidden));
  b2 = flat.back();
}

LossGrad logreg_objective(const Matrix& x, std::span<const int> y, std::span<const double> params, double l2) {
  if (params.size() != x.cols() + 1) fail(ErrorKind::SchemaError, "logreg parameter vector has wrong length");
  return logreg_objective_sparse(SparseRows(x), x.cols(), y, params, l2, true);
}

double log_loss_of_scores(std::span<const double> scores, std::span<const int> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) s += score_loss(scores[i], y[i]);
  return scores.empty() ? 0.0 : s / static_cast<double>(scores.size());
}

TrainedModel train_logreg(const LabeledMatrix& data, const LogRegParams& p) {
  check_training_data(data);
  if (!(p.l2 >= 0.0)) fail(ErrorKind::InvalidInput, "l2 must be non-negative");
  const std::size_t d = data.x.cols();
  const SparseRows xs(data.x);
  std::vector<double> params(d + 1, 0.0);
  std::vector<double> trial(d + 1);
  double step = 1.0;
  LossGrad cur = logreg_objective_sparse(xs, d, data.y, params, p.l2, true);
  for (std::size_t it = 0; it < p.max_iter; ++it) {
    double gmax = 0.0;
    double gsq = 0.0;
    for (double g : cur.grad) {
      gmax = std::max(gmax, std::abs(g));
      gsq += g * g;
    }
    if (gmax < p.tol) break;
    step = std::min(step * 2.0, 1e6);
    bool moved = false;
    for (int halvings = 0; halvings < 80; ++halvings) {
      for (std::size_t j = 0; j <= d; ++j) trial[j] = params[j] - step * cur.grad[j];
      const double f = logreg_objective_sparse(xs, d, data.y, trial, p.l2, false).loss;
      if (f <= cur.loss - 1e-4 * step * gsq) {
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
    params.swap(trial);
    cur = logreg_objective_sparse(xs, d, data.y, params, p.l2, true);
  }
  TrainedModel m = base_model(data, ModelKind::LogReg);
  m.spec.logreg = p;
  m.weights.assign(params.begin(), params.begin() + static_cast<std::ptrdiff_t>(d));
  m.bias = params[d];
  return m;
}

TrainedModel train_linear_svm(const LabeledMatrix& data, const SvmParams& p, std::uint64_t seed) {
  check_training_data(data);
  if (!(p.l2 > 0.0)) fail(ErrorKind::InvalidInput, "svm l2 must be positive");
  if (p.epochs == 0) fail(ErrorKind::InvalidInput, "svm needs at least one epoch");
  const std::size_t n = data.x.rows();
  const std::size_t d = data.x.cols();
  const SparseRows xs(data.x);
  // Pegasos on [w, b] with the bias treated as a weight on a constant 1
  // feature; w is kept as scale * v so the shrink step is O(1).
  std::vector<double> v(d + 1, 0.0);
  double scale = 1.0;
  std::vector<double> avg(d + 1, 0.0);
  std::size_t averaged = 0;
  const std::size_t avg_from = p.epochs / 2;
  Rng rng(derive_seed(seed, 0x5e6a));
  std::vector<std::size_t> order = all_rows(n);
  std::size_t t = 0;
  for (std::size_t epoch = 0; epoch < p.epochs; ++epoch) {
    rng.shuffle(order);
    for (auto r : order) {
      ++t;
      const double eta = 1.0 / (p.l2 * static_cast<double>(t));
      const double yr = data.y[r] == 1 ? 1.0 : -1.0;
      const double margin = yr * scale * (xs.dot(r, std::span<const double>(v).subspan(0, d)) + v[d]);
      const double shrink = 1.0 - eta * p.l2;
      if (shrink <= 0.0) {
        std::fill(v.begin(), v.end(), 0.0);
        scale = 1.0;
      } else {
        scale *= shrink;
      }
      if (margin < 1.0) {
        const double c = eta * yr / scale;
        for (std::size_t k = xs.start[r]; k < xs.start[r + 1]; ++k) v[xs.col[k]] += c * xs.val[k];
        v[d] += c;
      }
      if (scale < 1e-100) {
        for (auto& x : v) x *= scale;
        scale = 1.0;
      }
    }
    if (epoch >= avg_from) {
      for (std::size_t j = 0; j <= d; ++j) avg[j] += scale * v[j];
      ++averaged;
    }
  }
  TrainedModel m = base_model(data, ModelKind::LinearSvm);
  m.spec.svm = p;
  m.spec.seed = seed;
  m.weights.resize(d);
  for (std::size_t j = 0; j < d; ++j) m.weights[j] = avg[j] / static_cast<double>(averaged);
  m.bias = avg[d] / static_cast<double>(averaged);
  return m;
}

TrainedModel train_tree(const LabeledMatrix& data, const TreeParams& p) {
  check_training_data(data);
  if (p.min_leaf == 0) fail(ErrorKind::InvalidInput, "min_leaf must be at least 1");
  const auto target = labels_as_double(data.y);
  BuildOptions opts;
  opts.max_depth = p.max_depth;
  opts.min_leaf = p.min_leaf;
  TreeBuilder builder(data.x, target, opts);
  TrainedModel m = base_model(data, ModelKind::Tree);
  m.spec.tree = p;
  m.trees.push_back(builder.build(all_rows(data.x.rows())));
  return m;
}

TrainedModel train_random_forest(const LabeledMatrix& data, const ForestParams& p, std::uint64_t seed) {
  check_training_data(data);
  if (p.n_trees == 0) fail(ErrorKind::InvalidInput, "forest needs at least one tree");
  if (p.tree.min_leaf == 0) fail(ErrorKind::InvalidInput, "min_leaf must be at least 1");
  const std::size_t n = data.x.rows();
  const std::size_t d = data.x.cols();
  const std::size_t k = p.max_features == 0
                            ? std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(d)))))
                            : std::min(p.max_features, d);
  const auto target = labels_as_double(data.y);
  TrainedModel m = base_model(data, ModelKind::Forest);
  m.spec.forest = p;
  m.spec.seed = seed;
  m.trees.resize(p.n_trees);
  parallel_for(p.n_trees, [&](std::size_t t) {
    Rng rng(seed + t);
    std::vector<std::size_t> rows;
    if (p.bootstrap) {
      rows.resize(n);
      for (auto& r : rows) r = static_cast<std::size_t>(rng.below(n));
      std::sort(rows.begin(), rows.end());
    } else {
      rows = all_rows(n);
    }
    BuildOptions opts;
    opts.max_depth = p.tree.max_depth;
    opts.min_leaf = p.tree.min_leaf;
    opts.max_features = k;
    opts.rng = &rng;
    TreeBuilder builder(data.x, target, opts);
    m.trees[t] = builder.build(std::move(rows));
  });
  return m;
}

TrainedModel train_gradient_boosting(const LabeledMatrix& data, const GBoostParams& p) {
  check_training_data(data);
  if (!(p.learn_rate > 0.0)) fail(ErrorKind::InvalidInput, "learn_rate must be positive");
  const std::size_t n = data.x.rows();
  double pos = 0.0;
  for (int y : data.y) pos += y;
  const double prior = pos / static_cast<double>(n);
  TrainedModel m = base_model(data, ModelKind::GBoost);
  m.spec.gboost = p;
  m.init_score = std::log(prior / (1.0 - prior));
  std::vector<double> f(n, m.init_score);
  double loss = log_loss_of_scores(f, data.y);
  m.stage_losses.push_back(loss);
  std::vector<double> resid(n);
  std::vector<double> prob(n);
  std::vector<double> trial(n);
  std::vector<double> stage_out(n);
  for (std::size_t s = 0; s < p.n_stages; ++s) {
    for (std::size_t i = 0; i < n; ++i) {
      prob[i] = sigmoid(f[i]);
      resid[i] = data.y[i] - prob[i];
    }
    BuildOptions opts;
    opts.classification = false;
    opts.max_depth = p.depth;
    opts.leaf_value = [&](std::span<const std::size_t> rows) {
      double num = 0.0;
      double den = 0.0;
      for (auto r : rows) {
        num += resid[r];
        den += prob[r] * (1.0 - prob[r]);
      }
      return den < 1e-150 ? 0.0 : num / den;
    };
    TreeBuilder builder(data.x, resid, opts);
    Tree tree = builder.build(all_rows(n));
    for (std::size_t i = 0; i < n; ++i) stage_out[i] = tree.evaluate(data.x.row(i));
    double scale = p.learn_rate;
    double new_loss = loss;
    bool accepted = false;
    for (int h = 0; h < 60; ++h) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = f[i] + scale * stage_out[i];
      new_loss = log_loss_of_scores(trial, data.y);
      if (new_loss <= loss) {
        accepted = true;
        break;
      }
      scale *= 0.5;
    }
    if (!accepted) {
      scale = 0.0;
      new_loss = loss;
      trial = f;
    }
    for (auto& node : tree.nodes) {
      if (node.is_leaf()) node.value *= scale;
    }
    f.swap(trial);
    loss = new_loss;
    m.stage_losses.push_back(loss);
    m.trees.push_back(std::move(tree));
  }
  return m;
}

FfnnWeights ffnn_init(std::size_t inputs, std::size_t hidden, std::uint64_t seed) {
  FfnnWeights w;
  w.inputs = inputs;
  w.hidden = hidden;
  Rng rng(derive_seed(seed, 0xff));
  const double lim1 = std::sqrt(6.0 / static_cast<double>(inputs + hidden));
  const double lim2 = std::sqrt(6.0 / static_cast<double>(hidden + 1));
  w.w1.resize(hidden * inputs);
  for (auto& x : w.w1) x = rng.uniform(-lim1, lim1);
  w.b1.assign(hidden, 0.0);
  w.w2.resize(hidden);
  for (auto& x : w.w2) x = rng.uniform(-lim2, lim2);
  w.b2 = 0.0;
  return w;
}

namespace {

double ffnn_score(const FfnnWeights& net, std::span<const double> row, std::vector<double>* hidden_pre) {
  double z2 = net.b2;
  for (std::size_t h = 0; h < net.hidden; ++h) {
    double z = net.b1[h];
    const double* w = net.w1.data() + h * net.inputs;
    for (std::size_t j = 0; j < net.inputs; ++j) z += w[j] * row[j];
    if (hidden_pre) (*hidden_pre)[h] = z;
    if (z > 0.0) z2 += net.w2[h] * z;
  }
  return z2;
}

// Accumulates the batch gradient (mean over `rows`) into grad (flatten order).
double ffnn_batch(const FfnnWeights& net, const Matrix& x, std::span<const int> y, std::span<const std::size_t> rows,
                  std::vector<double>& grad) {
  const std::size_t n1 = net.hidden * net.inputs;
  std::fill(grad.begin(), grad.end(), 0.0);
  std::vector<double> pre(net.hidden);
  double loss = 0.0;
  const double inv = 1.0 / static_cast<double>(rows.size());
  for (auto r : rows) {
    const auto row = x.row(r);
    const double z2 = ffnn_score(net, row, &pre);
    loss += score_loss(z2, y[r]);
    const double dz2 = (sigmoid(z2) - y[r]) * inv;
    for (std::size_t h = 0; h < net.hidden; ++h) {
      if (pre[h] <= 0.0) continue;
      grad[n1 + net.hidden + h] += dz2 * pre[h];
      const double dz1 = dz2 * net.w2[h];
      double* g = grad.data() + h * net.inputs;
      for (std::size_t j = 0; j < net.inputs; ++j) g[j] += dz1 * row[j];
      grad[n1 + h] += dz1;
    }
    grad.back() += dz2;
  }
  return loss * inv;
}

}  // namespace

double ffnn_forward(const FfnnWeights& net, std::span<const double> row) { return sigmoid(ffnn_score(net, row, nullptr)); }

LossGrad ffnn_objective(const FfnnWeights& net, const Matrix& x, std::span<const int> y) {
  LossGrad out;
  out.grad.assign(net.hidden * net.inputs + 2 * net.hidden + 1, 0.0);
  const auto rows = all_rows(x.rows());
  out.loss = ffnn_batch(net, x, y, rows, out.grad);
  return out;
}

TrainedModel train_ffnn(const LabeledMatrix& data, const FfnnParams& p, std::uint64_t seed) {
  check_training_data(data);
  if (p.hidden == 0 || p.batch_size == 0) fail(ErrorKind::InvalidInput, "ffnn hidden size and batch size must be positive");
  const std::size_t n = data.x.rows();
  TrainedModel m = base_model(data, ModelKind::Ffnn);
  m.spec.ffnn = p;
  m.spec.seed = seed;
  m.net = ffnn_init(data.x.cols(), p.hidden, seed);
  std::vector<double> params = m.net.flatten();
  std::vector<double> grad(params.size());
  std::vector<double> mom(params.size(), 0.0);
  std::vector<double> vel(params.size(), 0.0);
  Rng rng(derive_seed(seed, 0xba7c));
  std::vector<std::size_t> order = all_rows(n);
  double best = std::numeric_limits<double>::infinity();
  std::size_t wait = 0;
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < p.max_epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t b = 0; b < n; b += p.batch_size) {
      const std::size_t e = std::min(n, b + p.batch_size);
      const std::span<const std::size_t> batch(order.data() + b, e - b);
      epoch_loss += ffnn_batch(m.net, data.x, data.y, batch, grad) * static_cast<double>(e - b);
      ++step;
      const double bc1 = 1.0 - std::pow(p.beta1, static_cast<double>(step));
      const double bc2 = 1.0 - std::pow(p.beta2, static_cast<double>(step));
      const double lr_t = p.lr * std::sqrt(bc2) / bc1;
      for (std::size_t i = 0; i < params.size(); ++i) {
        mom[i] = p.beta1 * mom[i] + (1.0 - p.beta1) * grad[i];
        vel[i] = p.beta2 * vel[i] + (1.0 - p.beta2) * grad[i] * grad[i];
        params[i] -= lr_t * mom[i] / (std::sqrt(vel[i]) + p.eps);
      }
      m.net.unflatten(params);
    }
    epoch_loss /= static_cast<double>(n);
    m.epoch_losses.push_back(epoch_loss);
    m.epochs_run = epoch + 1;
    if (epoch_loss < best - p.min_delta) {
      best = epoch_loss;
      wait = 0;
    } else if (++wait >= p.patience) {
      break;
    }
  }
  return m;
}

TrainedModel train_model(const LabeledMatrix& data, const ModelSpec& spec) {
  TrainedModel m;
  switch (spec.kind) {
    case ModelKind::LogReg: m = train_logreg(data, spec.logreg); break;
    case ModelKind::LinearSvm: m = train_linear_svm(data, spec.svm, spec.seed); break;
    case ModelKind::Tree: m = train_tree(data, spec.tree); break;
    case ModelKind::Forest: m = train_random_forest(data, spec.forest, spec.seed); break;
    case ModelKind::GBoost: m = train_gradient_boosting(data, spec.gboost); break;
    case ModelKind::Ffnn: m = train_ffnn(data, spec.ffnn, spec.seed); break;
  }
  m.spec = spec;
  return m;
}

Prediction predict(const TrainedModel& model, const Matrix& x) {
  Prediction out;
  if (x.rows() == 0) return out;
  if (x.cols() != model.n_features) {
    fail(ErrorKind::SchemaError, "matrix has " + std::to_string(x.cols()) + " columns, model expects " +
                                     std::to_string(model.n_features));
  }
  out.labels.resize(x.rows());
  out.probabilities.resize(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto row = x.row(r);
    double p = 0.0;
    int label = 0;
    switch (model.kind()) {
      case ModelKind::LogReg:
      case ModelKind::LinearSvm: {
        double z = model.bias;
        for (std::size_t j = 0; j < row.size(); ++j) z += model.weights[j] * row[j];
        p = sigmoid(z);
        label = p >= 0.5 ? 1 : 0;
        break;
      }
      case ModelKind::Tree:
        p = model.trees[0].evaluate(row);
        label = p >= 0.5 ? 1 : 0;
        break;
      case ModelKind::Forest: {
        std::size_t votes = 0;
        for (const auto& t : model.trees) votes += t.evaluate(row) >= 0.5 ? 1 : 0;
        p = static_cast<double>(votes) / static_cast<double>(model.trees.size());
        label = 2 * votes > model.trees.size() ? 1 : 0;
        break;
      }
      case ModelKind::GBoost: {
        double z = model.init_score;
        for (const auto& t : model.trees) z += t.evaluate(row);
        p = sigmoid(z);
        label = p >= 0.5 ? 1 : 0;
        break;
      }
      case ModelKind::Ffnn:
        p = ffnn_forward(model.net, row);
        label = p >= 0.5 ? 1 : 0;
        break;
    }
    out.probabilities[r] = p;
    out.labels[r] = label;
  }
  return out;
}

Prediction predict(const TrainedModel& model, const LabeledMatrix& data) {
  if (!model.schema_id.empty() && !data.schema_id.empty() && model.schema_id != data.schema_id) {
    fail(ErrorKind::SchemaError, "model trained on schema " + model.schema_id + ", got " + data.schema_id);
  }
  return predict(model, data.x);
}

double accuracy(const TrainedModel& model, const LabeledMatrix& data) {
  if (data.rows() == 0) fail(ErrorKind::EmptyEvaluation, "no rows to score");
  const auto pred = predict(model, data);
  std::size_t ok = 0;
  for (std::size_t i = 0; i < data.y.size(); ++i) ok += pred.labels[i] == data.y[i];
  return static_cast<double>(ok) / static_cast<double>(data.y.size());
}

// ---- persistence ----------------------------------------------------------

namespace {

json tree_to_json(const Tree& t) {
  json nodes = json::array();
  for (const auto& n : t.nodes) nodes.push_back(json::array({n.feature, n.threshold, n.left, n.right, n.value}));
  return nodes;
}

Tree tree_from_json(const json& j) {
  Tree t;
  for (const auto& n : j) {
    t.nodes.push_back({n.at(0).get<int>(), n.at(1).get<double>(), n.at(2).get<int>(), n.at(3).get<int>(),
                       n.at(4).get<double>()});
  }
  const auto count = static_cast<int>(t.nodes.size());
  if (count == 0) fail(ErrorKind::SchemaError, "empty tree in model file");
  for (const auto& n : t.nodes) {
    if (!n.is_leaf() && (n.left <= 0 || n.right <= 0 || n.left >= count || n.right >= count)) {
      fail(ErrorKind::SchemaError, "tree node child index out of range");
    }
  }
  return t;
}

json spec_to_json(const ModelSpec& s) {
  json j;
  j["kind"] = std::string(to_string(s.kind));
  j["seed"] = s.seed;
  switch (s.kind) {
    case ModelKind::LogReg:
      j["hyperparameters"] = {{"l2", s.logreg.l2}, {"max_iter", s.logreg.max_iter}, {"tol", s.logreg.tol}};
      break;
    case ModelKind::LinearSvm:
      j["hyperparameters"] = {{"l2", s.svm.l2}, {"epochs", s.svm.epochs}};
      break;
    case ModelKind::Tree:
      j["hyperparameters"] = {{"max_depth", s.tree.max_depth ? json(*s.tree.max_depth) : json(nullptr)},
                              {"min_leaf", s.tree.min_leaf}};
      break;
    case ModelKind::Forest:
      j["hyperparameters"] = {{"n_trees", s.forest.n_trees},
                              {"bootstrap", s.forest.bootstrap},
                              {"max_features", s.forest.max_features},
                              {"max_depth", s.forest.tree.max_depth ? json(*s.forest.tree.max_depth) : json(nullptr)},
                              {"min_leaf", s.forest.tree.min_leaf}};
      break;
    case ModelKind::GBoost:
      j["hyperparameters"] = {{"n_stages", s.gboost.n_stages}, {"learn_rate", s.gboost.learn_rate}, {"depth", s.gboost.depth}};
      break;
    case ModelKind::Ffnn:
      j["hyperparameters"] = {{"hidden", s.ffnn.hidden},         {"lr", s.ffnn.lr},
                              {"beta1", s.ffnn.beta1},           {"beta2", s.ffnn.beta2},
                              {"eps", s.ffnn.eps},               {"min_delta", s.ffnn.min_delta},
                              {"patience", s.ffnn.patience},     {"max_epochs", s.ffnn.max_epochs},
                              {"batch_size", s.ffnn.batch_size}};
      break;
  }
  return j;
}

std::optional<std::size_t> opt_size(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<std::size_t>();
}

ModelSpec spec_from_json(const json& j) {
  ModelSpec s;
  s.kind = parse_model_kind(j.at("kind").get<std::string>());
  s.seed = j.at("seed").get<std::uint64_t>();
  const json& h = j.at("hyperparameters");
  switch (s.kind) {
    case ModelKind::LogReg:
      s.logreg = {h.at("l2").get<double>(), h.at("max_iter").get<std::size_t>(), h.at("tol").get<double>()};
      break;
    case ModelKind::LinearSvm:
      s.svm = {h.at("l2").get<double>(), h.at("epochs").get<std::size_t>()};
      break;
    case ModelKind::Tree:
      s.tree = {opt_size(h.at("max_depth")), h.at("min_leaf").get<std::size_t>()};
      break;
    case ModelKind::Forest:
      s.forest.n_trees = h.at("n_trees").get<std::size_t>();
      s.forest.bootstrap = h.at("bootstrap").get<bool>();
      s.forest.max_features = h.at("max_features").get<std::size_t>();
      s.forest.tree = {opt_size(h.at("max_depth")), h.at("min_leaf").get<std::size_t>()};
      break;
    case ModelKind::GBoost:
      s.gboost = {h.at("n_stages").get<std::size_t>(), h.at("learn_rate").get<double>(), h.at("depth").get<std::size_t>()};
      break;
    case ModelKind::Ffnn:
      s.ffnn.hidden = h.at("hidden").get<std::size_t>();
      s.ffnn.lr = h.at("lr").get<double>();
      s.ffnn.beta1 = h.at("beta1").get<double>();
      s.ffnn.beta2 = h.at("beta2").get<double>();
      s.ffnn.eps = h.at("eps").get<double>();
      s.ffnn.min_delta = h.at("min_delta").get<double>();
      s.ffnn.patience = h.at("patience").get<std::size_t>();
      s.ffnn.max_epochs = h.at("max_epochs").get<std::size_t>();
      s.ffnn.batch_size = h.at("batch_size").get<std::size_t>();
      break;
  }
  return s;
}

}  // namespace

std::string TrainedModel::to_json() const {
  json j;
  j["format"] = "fnkit-model";
  j["version"] = 1;
  j["spec"] = spec_to_json(spec);
  j["schema_id"] = schema_id;
  j["n_features"] = n_features;
  json params;
  switch (kind()) {
    case ModelKind::LogReg:
    case ModelKind::LinearSvm:
      params["weights"] = weights;
      params["bias"] = bias;
      break;
    case ModelKind::Tree:
    case ModelKind::Forest: {
      json ts = json::array();
      for (const auto& t : trees) ts.push_back(tree_to_json(t));
      params["trees"] = ts;
      break;
    }
    case ModelKind::GBoost: {
      json ts = json::array();
      for (const auto& t : trees) ts.push_back(tree_to_json(t));
      params["init_score"] = init_score;
      params["trees"] = ts;
      params["stage_losses"] = stage_losses;
      break;
    }
    case ModelKind::Ffnn:
      params["inputs"] = net.inputs;
      params["hidden"] = net.hidden;
      params["w1"] = net.w1;
      params["b1"] = net.b1;
      params["w2"] = net.w2;
      params["b2"] = net.b2;
      params["epochs_run"] = epochs_run;
      params["epoch_losses"] = epoch_losses;
      break;
  }
  j["parameters"] = params;
  return j.dump(1) + "\n";
}

TrainedModel TrainedModel::from_json(std::string_view text) {
  TrainedModel m;
  try {
    const json j = json::parse(text);
    if (j.at("format").get<std::string>() != "fnkit-model") fail(ErrorKind::SchemaError, "not an fnkit model file");
    if (j.at("version").get<int>() != 1) fail(ErrorKind::SchemaError, "unsupported model file version");
    m.spec = spec_from_json(j.at("spec"));
    m.schema_id = j.at("schema_id").get<std::string>();
    m.n_features = j.at("n_features").get<std::size_t>();
    const json& p = j.at("parameters");
    switch (m.kind()) {
      case ModelKind::LogReg:
      case ModelKind::LinearSvm:
        m.weights = p.at("weights").get<std::vector<double>>();
        m.bias = p.at("bias").get<double>();
        if (m.weights.size() != m.n_features) fail(ErrorKind::SchemaError, "weight vector length mismatch");
        break;
      case ModelKind::Tree:
      case ModelKind::Forest:
      case ModelKind::GBoost:
        for (const auto& t : p.at("trees")) m.trees.push_back(tree_from_json(t));
        if (m.kind() == ModelKind::GBoost) {
          m.init_score = p.at("init_score").get<double>();
          m.stage_losses = p.at("stage_losses").get<std::vector<double>>();
        } else if (m.trees.empty()) {
          fail(ErrorKind::SchemaError, "tree model without trees");
        }
        for (const auto& t : m.trees) {
          for (const auto& n : t.nodes) {
            if (!n.is_leaf() && static_cast<std::size_t>(n.feature) >= m.n_features) {
              fail(ErrorKind::SchemaError, "tree splits on a feature outside the schema");
            }
          }
        }
        break;
      case ModelKind::Ffnn:
        m.net.inputs = p.at("inputs").get<std::size_t>();
        m.net.hidden = p.at("hidden").get<std::size_t>();
        m.net.w1 = p.at("w1").get<std::vector<double>>();
        m.net.b1 = p.at("b1").get<std::vector<double>>();
        m.net.w2 = p.at("w2").get<std::vector<double>>();
        m.net.b2 = p.at("b2").get<double>();
        m.epochs_run = p.at("epochs_run").get<std::size_t>();
        m.epoch_losses = p.at("epoch_losses").get<std::vector<double>>();
        if (m.net.inputs != m.n_features || m.net.w1.size() != m.net.inputs * m.net.hidden ||
            m.net.b1.size() != m.net.hidden || m.net.w2.size() != m.net.hidden) {
          fail(ErrorKind::SchemaError, "network shape mismatch");
        }
        break;
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::SchemaError, std::string("bad model file: ") + e.what());
  }
  return m;
}

void TrainedModel::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write " + path);
  out << to_json();
}

TrainedModel TrainedModel::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

}  // namespace fnkit
