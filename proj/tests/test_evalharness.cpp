#include "fnkit/error.hpp"
#include "fnkit/evalharness.hpp"
#include "fnkit/rng.hpp"
#include "fnkit/sampling.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

using namespace fnkit;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::InvalidInput;
}

// Column 0 copies the label, column 1 is noise.
LabeledMatrix label_copy(std::size_t rows, std::uint64_t seed) {
  Rng rng(seed);
  LabeledMatrix m;
  m.x = Matrix(rows, 2);
  for (std::size_t r = 0; r < rows; ++r) {
    const int y = r % 2 == 0 ? 1 : 0;
    m.y.push_back(y);
    m.x(r, 0) = y;
    m.x(r, 1) = rng.normal();
  }
  m.feature_names = {"copy", "noise"};
  return m;
}

Dataset token_dataset(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<std::string>> docs;
  std::vector<int> labels;
  for (std::size_t i = 0; i < n; ++i) {
    const int y = i % 2 == 0 ? 1 : 0;
    std::vector<std::string> d;
    for (int w = 0; w < 8; ++w) d.push_back("w" + std::to_string(rng.below(40)));
    d.push_back(y ? "good" : "bad");
    d.push_back("uniq" + std::to_string(i));
    docs.push_back(d);
    labels.push_back(y);
  }
  return Dataset::from_documents(docs, labels, "tok");
}

}  // namespace

TEST(KFold, Sizes) {
  auto p = kfold_plan(10, 10, 42);
  for (auto s : p.fold_sizes()) EXPECT_EQ(s, 1u);
  p = kfold_plan(21, 10, 42);
  std::vector<std::size_t> expect(10, 2);
  expect[0] = 3;
  EXPECT_EQ(p.fold_sizes(), expect);
  EXPECT_EQ(p.assignments, kfold_plan(21, 10, 42).assignments);
  EXPECT_EQ(kind_of([] { kfold_plan(5, 10, 1); }), ErrorKind::TooFewRows);
}

TEST(KFold, Partition) {
  for (std::size_t n : {10, 23, 100, 101}) {
    const auto p = kfold_plan(n, 10, n);
    std::vector<int> seen(n, 0);
    for (std::size_t f = 0; f < 10; ++f) {
      const auto test = p.test_rows(f);
      const auto train = p.train_rows(f);
      EXPECT_EQ(test.size() + train.size(), n);
      for (auto r : test) ++seen[r];
      for (auto r : train) EXPECT_FALSE(std::binary_search(test.begin(), test.end(), r));
    }
    for (int s : seen) EXPECT_EQ(s, 1);
    const auto sizes = p.fold_sizes();
    EXPECT_LE(*std::max_element(sizes.begin(), sizes.end()) - *std::min_element(sizes.begin(), sizes.end()), 1u);
  }
}

TEST(Metrics, OracleExhaustive) {
  for (std::size_t tp = 0; tp <= 5; ++tp) {
    for (std::size_t fp = 0; fp <= 5; ++fp) {
      for (std::size_t tn = 0; tn <= 5; ++tn) {
        for (std::size_t fn = 0; fn <= 5; ++fn) {
          if (tp + fp + tn + fn == 0) {
            EXPECT_EQ(kind_of([] { compute_metrics({}); }), ErrorKind::EmptyEvaluation);
            continue;
          }
          const auto m = compute_metrics({tp, fp, tn, fn});
          const auto r = oracle::metrics_reference(tp, fp, tn, fn);
          EXPECT_EQ(m.accuracy, r.accuracy);
          EXPECT_EQ(m.precision, r.precision);
          EXPECT_EQ(m.recall, r.recall);
          EXPECT_EQ(m.specificity, r.specificity);
          EXPECT_EQ(m.f1, r.f1);
          EXPECT_EQ(m.degenerate, r.degenerate);
          for (double v : {m.accuracy, m.precision, m.recall, m.specificity, m.f1}) {
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 1.0);
          }
        }
      }
    }
  }
}

TEST(Metrics, Examples) {
  auto m = compute_metrics({5, 0, 5, 0});
  EXPECT_EQ(m, (Metrics{1, 1, 1, 1, 1, false}));
  m = compute_metrics({0, 0, 3, 2});
  EXPECT_EQ(m.precision, 0.0);
  EXPECT_TRUE(m.degenerate);
  m = compute_metrics({1, 1, 1, 1});
  EXPECT_EQ(m, (Metrics{0.5, 0.5, 0.5, 0.5, 0.5, false}));
}

TEST(Metrics, Confusion) {
  const std::vector<int> t = {1, 1, 0, 0, 1};
  const std::vector<int> p = {1, 0, 0, 1, 1};
  EXPECT_EQ(confusion(t, p), (ConfusionCounts{2, 1, 1, 1}));
}

TEST(Summary, PopulationStd) {
  const std::vector<Metrics> ms = {{0.5, 0, 0, 0, 0, false}, {1.0, 0, 0, 0, 0, false}};
  const auto s = summarise(ms);
  EXPECT_DOUBLE_EQ(s.mean.accuracy, 0.75);
  EXPECT_DOUBLE_EQ(s.std.accuracy, 0.25);
}

TEST(Mwu, Example) {
  const std::vector<double> a = {1, 2}, b = {3, 4};
  const auto r = mann_whitney_u(a, b);
  EXPECT_EQ(r.u, 0.0);
  EXPECT_NEAR(r.p, 1.0 / 3.0, 1e-15);
  EXPECT_EQ(r.method, MwuMethod::Exact);
}

TEST(Mwu, IdenticalAndSwap) {
  const std::vector<double> a = {0.7, 0.8, 0.8, 0.9};
  const auto same = mann_whitney_u(a, a);
  EXPECT_EQ(same.u, 8.0);
  EXPECT_DOUBLE_EQ(same.p, 1.0);
  const std::vector<double> b = {0.5, 0.75, 0.85, 0.95, 0.99};
  const auto ab = mann_whitney_u(a, b);
  const auto ba = mann_whitney_u(b, a);
  EXPECT_EQ(ab.u, 20.0 - ba.u);
  EXPECT_DOUBLE_EQ(ab.p, ba.p);
  EXPECT_EQ(kind_of([&] { mann_whitney_u(a, std::vector<double>{}); }), ErrorKind::InvalidInput);
}

TEST(Mwu, ExactMatchesEnumeration) {
  Rng rng(17);
  for (std::size_t n = 1; n <= 6; ++n) {
    for (std::size_t m = 1; m <= 6; ++m) {
      for (int rep = 0; rep < 3; ++rep) {
        std::vector<double> a(n), b(m);
        // Small integer values so ties are common.
        for (auto& v : a) v = double(rng.below(rep == 0 ? 100 : 4));
        for (auto& v : b) v = double(rng.below(rep == 0 ? 100 : 4));
        for (auto [s, t] : {std::pair{Sided::TwoSided, oracle::Tail::Two}, std::pair{Sided::Less, oracle::Tail::Less},
                            std::pair{Sided::Greater, oracle::Tail::Greater}}) {
          const auto r = mann_whitney_u(a, b, s);
          EXPECT_EQ(r.u, oracle::u_pairwise(a, b));
          EXPECT_NEAR(r.p, oracle::mwu_enumeration_p(a, b, t), 1e-12) << n << "x" << m;
          EXPECT_GT(r.p, 0.0);
          EXPECT_LE(r.p, 1.0);
        }
      }
    }
  }
}

TEST(Mwu, NormalApproximation) {
  std::vector<double> a, b;
  for (int i = 0; i < 10; ++i) {
    a.push_back(0.60 + 0.01 * i);
    b.push_back(0.70 + 0.01 * i);
  }
  const auto r = mann_whitney_u(a, b, Sided::Less);
  EXPECT_EQ(r.method, MwuMethod::NormalApprox);
  EXPECT_EQ(r.u, 0.0);
  EXPECT_LT(r.p, 1e-3);
  const std::vector<double> tied(10, 0.5);
  const auto d = mann_whitney_u(tied, tied);
  EXPECT_TRUE(d.ties_degenerate);
  EXPECT_EQ(d.p, 1.0);
}

TEST(Pfi, UnusedAndConstantFeaturesExactlyZero) {
  auto d = label_copy(400, 1);
  d.x = Matrix(400, 3);
  for (std::size_t r = 0; r < 400; ++r) {
    d.x(r, 0) = d.y[r];
    d.x(r, 1) = double(r % 7);
    d.x(r, 2) = 3.0;
  }
  d.feature_names = {"copy", "cycle", "constant"};
  TreeParams p;
  p.max_depth = 1;
  const auto m = train_tree(d, p);
  const auto rep = permutation_importance(m, d, 10, 5);
  ASSERT_EQ(rep.features.size(), 3u);
  EXPECT_EQ(rep.features[1].mean, 0.0);
  EXPECT_EQ(rep.features[1].std, 0.0);
  EXPECT_EQ(rep.features[2].mean, 0.0);
  EXPECT_NEAR(rep.features[0].mean, 0.5, 0.05);
  EXPECT_EQ(kind_of([&] { permutation_importance(m, d, 0, 5); }), ErrorKind::InvalidInput);
  EXPECT_EQ(rep.ranked()[0].name, "copy");
}

TEST(Pfi, CsvRoundTripAndDeterminism) {
  const auto d = synth::gaussian_blobs(200, 4, 2, 2.0, 3);
  const auto m = train_logreg(d);
  const auto a = permutation_importance(m, d, 5, 11);
  const auto b = permutation_importance(m, d, 5, 11);
  EXPECT_EQ(pfi_csv(a), pfi_csv(b));
  const auto back = parse_pfi_csv(pfi_csv(a));
  const auto ranked = a.ranked();
  ASSERT_EQ(back.features.size(), ranked.size());
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    EXPECT_EQ(back.features[i].name, ranked[i].name);
    EXPECT_EQ(back.features[i].mean, ranked[i].mean);
  }
}

TEST(Select, PositiveInBoth) {
  PfiReport in, ex;
  in.features = {{"a", 0.1, 0}, {"b", 0.2, 0}, {"c", 0.05, 0}, {"d", -0.01, 0}};
  ex.features = {{"a", 0.01, 0}, {"b", 0.0, 0}, {"c", 0.3, 0}, {"d", 0.2, 0}};
  EXPECT_EQ(select_generalisable_features(in, ex), (std::vector<std::string>{"c", "a"}));
  ex.features.pop_back();
  EXPECT_EQ(kind_of([&] { select_generalisable_features(in, ex); }), ErrorKind::SchemaError);
}

TEST(RunKFold, PerfectPredictorTree) {
  const auto d = Dataset::from_labeled(label_copy(40, 2));
  ModelSpec s;
  s.kind = ModelKind::Tree;
  const auto r = run_kfold(d, {}, s, 2, 42);
  for (const auto& f : r.folds) EXPECT_EQ(f.metrics.accuracy, 1.0);
  const auto again = run_kfold(d, {}, s, 2, 42);
  EXPECT_EQ(accuracies(r), accuracies(again));
}

TEST(RunKFold, NoLeakageTokens) {
  const auto d = token_dataset(60, 5);
  PipelineSpec ps;
  ps.kind = PipelineKind::Tfidf;
  const auto r = run_kfold(d, ps, {}, 10, 42);
  for (const auto& f : r.folds) {
    EXPECT_EQ(f.pipeline, fit_pipeline(ps, d, f.train_rows));
    for (auto row : f.test_rows) EXPECT_EQ(f.pipeline.vocabulary->index_of("uniq" + std::to_string(row)), std::size_t(-1));
  }
}

TEST(RunKFold, NoLeakageStandardizer) {
  const auto d = Dataset::from_labeled(synth::gaussian_blobs(100, 5, 2, 1.0, 8));
  const auto r = run_kfold(d, {}, {}, 10, 42);
  for (const auto& f : r.folds) {
    const auto sub = d.features.select_rows(f.train_rows);
    const auto st = Standardizer::fit(sub);
    EXPECT_EQ(f.pipeline.standardizer.means(), st.means());
    EXPECT_EQ(f.pipeline.standardizer.stds(), st.stds());
  }
}

TEST(CrossDataset, PerfectAndDecorrelated) {
  const auto train = Dataset::from_labeled(label_copy(200, 3));
  ModelSpec s;
  s.kind = ModelKind::Tree;
  const auto kf = run_kfold(train, {}, s, 10, 42);
  const auto same = cross_dataset_eval(kf, Dataset::from_labeled(label_copy(1200, 4)), 500, 42);
  for (const auto& f : same.folds) EXPECT_EQ(f.metrics.accuracy, 1.0);

  auto dec = label_copy(1200, 5);
  Rng rng(6);
  for (std::size_t r = 0; r < dec.rows(); ++r) dec.x(r, 0) = double(rng.below(2));
  const auto ext = cross_dataset_eval(kf, Dataset::from_labeled(dec), 500, 42);
  for (const auto& f : ext.folds) {
    EXPECT_NEAR(f.metrics.accuracy, 0.5, 0.05);
    EXPECT_EQ(f.sample.size(), 1000u);
  }
  EXPECT_EQ(kind_of([&] { cross_dataset_eval(kf, Dataset::from_labeled(label_copy(100, 7)), 500, 42); }),
            ErrorKind::InsufficientClass);
}

TEST(Compare, IdenticalAndTooFewFolds) {
  const auto d = Dataset::from_labeled(synth::gaussian_blobs(200, 4, 2, 1.0, 1));
  const auto e = Dataset::from_labeled(synth::gaussian_blobs(200, 4, 2, 1.0, 2));
  const auto c = compare_with_without({}, {}, d, e, {}, 10, 42, 50);
  EXPECT_EQ(c.mwu.u, 50.0);
  EXPECT_GT(c.mwu.p, 0.95);
  EXPECT_EQ(kind_of([&] { compare_with_without({}, {}, d, e, {}, 1, 42, 50); }), ErrorKind::InvalidInput);
}

TEST(Compare, LabelFeatureHelps) {
  auto base = synth::gaussian_blobs(400, 3, 3, 0.6, 10);
  auto ext = synth::gaussian_blobs(400, 3, 3, 0.6, 11);
  auto add_copy = [](LabeledMatrix m) {
    Matrix x(m.rows(), m.x.cols() + 1);
    for (std::size_t r = 0; r < m.rows(); ++r) {
      for (std::size_t c = 0; c < m.x.cols(); ++c) x(r, c) = m.x(r, c);
      x(r, m.x.cols()) = m.y[r];
    }
    m.x = x;
    m.feature_names.push_back("label_copy");
    return m;
  };
  const auto d = Dataset::from_labeled(add_copy(base));
  const auto e = Dataset::from_labeled(add_copy(ext));
  PipelineSpec a;
  a.columns = {"x0", "x1", "x2"};
  const auto c = compare_with_without(a, {}, d, e, {}, 10, 42, 100);
  EXPECT_LT(c.mwu.p, 0.05);
}

TEST(Report, JsonRoundTrip) {
  const auto d = Dataset::from_labeled(synth::gaussian_blobs(120, 3, 2, 1.5, 4));
  const auto kf = run_kfold(d, {}, {}, 5, 42);
  const auto ex = cross_dataset_eval(kf, Dataset::from_labeled(synth::gaussian_blobs(120, 3, 2, 1.5, 5)), 30, 42);
  const auto rep = make_report(kf, &ex, "0.1.0", "abc");
  const auto text = rep.to_json();
  EXPECT_EQ(EvalReport::from_json(text).to_json(), text);
  EXPECT_EQ(rep.headline_accuracies(), accuracies(ex));
  const auto only = make_report(kf, nullptr, "0.1.0", "abc");
  EXPECT_FALSE(only.external_summary);
  EXPECT_EQ(only.headline_accuracies(), accuracies(kf));
}

TEST(Sampling, BalancedIndices) {
  std::vector<int> y;
  for (int i = 0; i < 50; ++i) y.push_back(i < 35 ? 0 : 1);
  const auto s = balanced_indices(y, 10, 3);
  EXPECT_EQ(s.size(), 20u);
  EXPECT_TRUE(std::is_sorted(s.begin(), s.end()));
  EXPECT_EQ(std::count_if(s.begin(), s.end(), [&](auto i) { return y[i] == 1; }), 10);
  EXPECT_EQ(s, balanced_indices(y, 10, 3));
  EXPECT_EQ(kind_of([&] { balanced_indices(y, 16, 3); }), ErrorKind::InsufficientClass);
}
