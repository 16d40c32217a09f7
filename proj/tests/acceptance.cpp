// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "fnkit/cli.hpp"
#include "fnkit/corpus.hpp"
#include "fnkit/evalharness.hpp"
#include "fnkit/learners.hpp"
#include "fnkit/lingcore.hpp"
#include "fnkit/monetise.hpp"
#include "fnkit/page_parse.hpp"
#include "fnkit/parallel.hpp"
#include "fnkit/public_suffix.hpp"
#include "fnkit/resources.hpp"
#include "fnkit/rng.hpp"
#include "fnkit/stylefeat.hpp"
#include "fnkit/tokenfeat.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

using namespace fnkit;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / double(v.size()); }

// 1
Outcome metric_oracle() {
  Outcome o;
  std::size_t cases = 0;
  for (std::size_t tp = 0; tp <= 5; ++tp) {
    for (std::size_t fp = 0; fp <= 5; ++fp) {
      for (std::size_t tn = 0; tn <= 5; ++tn) {
        for (std::size_t fn = 0; fn <= 5; ++fn) {
          if (tp + fp + tn + fn == 0) continue;
          const auto m = compute_metrics({tp, fp, tn, fn});
          const auto r = oracle::metrics_reference(tp, fp, tn, fn);
          ++cases;
          if (m.accuracy != r.accuracy || m.precision != r.precision || m.recall != r.recall ||
              m.specificity != r.specificity || m.f1 != r.f1 || m.degenerate != r.degenerate) {
            o.check(false, "mismatch at " + std::to_string(tp) + "," + std::to_string(fp) + "," + std::to_string(tn) +
                               "," + std::to_string(fn));
          }
        }
      }
    }
  }
  if (o.pass) o.detail = std::to_string(cases) + " matrices exact";
  return o;
}

// 2
Outcome readability_oracle() {
  Outcome o;
  double worst = 0.0;
  const auto texts = oracle::readability_texts();
  for (const auto& text : texts) {
    const auto r = readability(text_counts(tokenize(text)));
    const auto ref = oracle::readability_reference(text);
    for (double d : {r.flesch_kincaid_grade - ref.fk, r.smog - ref.smog, r.coleman_liau - ref.coleman_liau,
                     r.lix - ref.lix}) {
      worst = std::max(worst, std::abs(d));
    }
  }
  o.check(texts.size() == 10, "expected 10 texts");
  o.check(worst <= 1e-6, "max deviation " + sci(worst));
  if (o.pass) o.detail = "10 texts, max |diff| " + sci(worst);
  return o;
}

// 3
Outcome tfidf_oracle() {
  Outcome o;
  std::vector<std::vector<std::string>> corpus;
  for (const char* d : {"the cat sat on the mat", "the dog sat", "a cat and a dog", "mat mat mat", "on and on"}) {
    std::istringstream in(d);
    std::vector<std::string> toks;
    for (std::string t; in >> t;) toks.push_back(t);
    corpus.push_back(toks);
  }
  const auto v = Vocabulary::fit(corpus, 1000);
  const auto ref = oracle::tfidf_reference(corpus);
  double worst = 0.0;
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    const auto s = tfidf_vector(corpus[d], v);
    o.check(s.entries.size() == ref[d].size(), "support differs in doc " + std::to_string(d));
    for (const auto& [idx, val] : s.entries) worst = std::max(worst, std::abs(val - ref[d].at(v.terms()[idx])));
  }
  o.check(worst <= 1e-9, "max deviation " + sci(worst));
  if (o.pass) o.detail = "5 docs, max |diff| " + sci(worst);
  return o;
}

// 4
Outcome mwu_oracle() {
  Outcome o;
  Rng rng(2024);
  std::size_t cases = 0;
  double worst = 0.0;
  for (std::size_t n = 1; n <= 6; ++n) {
    for (std::size_t m = 1; m <= 6; ++m) {
      for (int rep = 0; rep < 4; ++rep) {
        std::vector<double> a(n), b(m);
        const std::size_t range = rep < 2 ? 1000 : 3;
        for (auto& x : a) x = double(rng.below(range));
        for (auto& x : b) x = double(rng.below(range));
        for (auto [s, t] : {std::pair{Sided::TwoSided, oracle::Tail::Two}, std::pair{Sided::Less, oracle::Tail::Less},
                            std::pair{Sided::Greater, oracle::Tail::Greater}}) {
          const auto r = mann_whitney_u(a, b, s);
          ++cases;
          worst = std::max(worst, std::abs(r.p - oracle::mwu_enumeration_p(a, b, t)));
          o.check(r.method == MwuMethod::Exact, "not exact at " + std::to_string(n) + "x" + std::to_string(m));
          o.check(r.u == oracle::u_pairwise(a, b), "U mismatch");
        }
      }
    }
  }
  o.check(worst <= 1e-12, "max p deviation " + sci(worst));
  if (o.pass) o.detail = std::to_string(cases) + " tests over n,m<=6, max |dp| " + sci(worst);
  return o;
}

// 5
Outcome gradient_checks() {
  Outcome o;
  double worst_lr = 0.0, worst_nn = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto d = synth::gaussian_blobs(4 + s % 5, 4, 2, 1.0, 500 + s);
    Rng rng(s);
    std::vector<double> p(5);
    for (auto& v : p) v = rng.normal();
    const double l2 = 0.05 * double(s % 3);
    const auto an = logreg_objective(d.x, d.y, p, l2);
    const auto fd = oracle::central_differences(
        [&](const std::vector<double>& q) { return logreg_objective(d.x, d.y, q, l2).loss; }, p);
    worst_lr = std::max(worst_lr, oracle::relative_error(an.grad, fd));

    const auto net = ffnn_init(4, 10, 900 + s);
    const auto nn = ffnn_objective(net, d.x, d.y);
    const auto nfd = oracle::central_differences(
        [&](const std::vector<double>& q) {
          FfnnWeights w = net;
          w.unflatten(q);
          return ffnn_objective(w, d.x, d.y).loss;
        },
        net.flatten());
    worst_nn = std::max(worst_nn, oracle::relative_error(nn.grad, nfd));
  }
  o.check(worst_lr < 1e-4, "logreg rel err " + sci(worst_lr));
  o.check(worst_nn < 1e-4, "ffnn rel err " + sci(worst_nn));
  if (o.pass) o.detail = "20 batches, rel err logreg " + sci(worst_lr) + ", ffnn " + sci(worst_nn);
  return o;
}

// 6
Outcome boosting_monotone() {
  Outcome o;
  const std::vector<LabeledMatrix> sets = {synth::gaussian_blobs(300, 5, 2, 1.0, 61),
                                           synth::gaussian_blobs(300, 8, 8, 0.3, 62),
                                           synth::gaussian_blobs(300, 3, 1, 2.5, 63)};
  for (std::size_t i = 0; i < sets.size(); ++i) {
    GBoostParams p;
    p.n_stages = 100;
    const auto m = train_gradient_boosting(sets[i], p);
    o.check(m.stage_losses.size() == 101, "dataset " + std::to_string(i) + " has " +
                                              std::to_string(m.stage_losses.size()) + " losses");
    for (std::size_t s = 1; s < m.stage_losses.size(); ++s) {
      if (m.stage_losses[s] > m.stage_losses[s - 1]) {
        o.check(false, "dataset " + std::to_string(i) + " loss rose at stage " + std::to_string(s));
        break;
      }
    }
  }
  if (o.pass) o.detail = "3 datasets x 100 stages non-increasing";
  return o;
}

// 7
Outcome pfi_exactness() {
  Outcome o;
  const std::size_t rows = 2000;
  Rng rng(77);
  LabeledMatrix d;
  d.x = Matrix(rows, 3);
  for (std::size_t r = 0; r < rows; ++r) {
    const int y = r % 2 == 0 ? 1 : 0;
    d.y.push_back(y);
    d.x(r, 0) = y;
    d.x(r, 1) = rng.normal();
    d.x(r, 2) = 5.0;
  }
  d.feature_names = {"label_copy", "unused", "constant"};
  TreeParams tp;
  tp.max_depth = 1;
  const auto model = train_tree(d, tp);
  const auto rep = permutation_importance(model, d, 10, 13);
  const auto& f = rep.features;
  o.check(f[1].mean == 0.0 && f[1].std == 0.0, "unused feature importance " + std::to_string(f[1].mean));
  o.check(f[2].mean == 0.0 && f[2].std == 0.0, "constant feature importance " + std::to_string(f[2].mean));
  o.check(std::abs(f[0].mean - 0.5) <= 0.03, "label-copy importance " + std::to_string(f[0].mean));

  // A linear model with a zero weight is also exactly insensitive.
  TrainedModel lin = train_logreg(d);
  lin.weights[1] = 0.0;
  lin.weights[2] = 0.0;
  const auto lr = permutation_importance(lin, d, 10, 13);
  o.check(lr.features[1].mean == 0.0 && lr.features[2].mean == 0.0, "zero-weight logreg feature nonzero");
  if (o.pass) o.detail = "zero-dependence 0 exactly, label copy " + fmt(f[0].mean);
  return o;
}

// 8
Outcome leakage_property() {
  Outcome o;
  auto res = load_resources(FNKIT_DATA_DIR);
  synth::CorpusSpec spec;
  spec.per_class = 150;
  spec.seed = 808;
  const auto recs = synth::make_corpus(spec);
  std::vector<std::vector<std::string>> docs;
  std::vector<int> labels;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    auto toks = preprocess_tokens(recs[i].body_text, res->stopwords);
    toks.push_back("rowmarker" + std::to_string(i));
    docs.push_back(toks);
    labels.push_back(label_value(recs[i].label));
  }
  const auto td = Dataset::from_documents(docs, labels, "tokens");
  for (auto kind : {PipelineKind::Bow, PipelineKind::Tfidf}) {
    PipelineSpec ps;
    ps.kind = kind;
    const auto kf = run_kfold(td, ps, {}, 10, 42);
    o.check(kf.folds.size() == 10, "fold count");
    for (const auto& f : kf.folds) {
      o.check(f.pipeline == fit_pipeline(ps, td, f.train_rows), "vocabulary refit differs in fold " +
                                                                    std::to_string(f.fold));
      for (auto r : f.test_rows) {
        if (f.pipeline.vocabulary->index_of("rowmarker" + std::to_string(r)) != std::size_t(-1)) {
          o.check(false, "test-only term in vocabulary, fold " + std::to_string(f.fold));
          break;
        }
      }
    }
  }
  const auto sd = Dataset::from_labeled(synth::gaussian_blobs(300, 6, 3, 1.0, 809));
  PipelineSpec ps;
  const auto kf = run_kfold(sd, ps, {}, 10, 42);
  for (const auto& f : kf.folds) {
    o.check(f.pipeline == fit_pipeline(ps, sd, f.train_rows), "standardizer refit differs in fold " +
                                                                  std::to_string(f.fold));
    const auto st = Standardizer::fit(sd.features.select_rows(f.train_rows));
    o.check(st.means() == f.pipeline.standardizer.means() && st.stds() == f.pipeline.standardizer.stds(),
            "standardizer statistics differ in fold " + std::to_string(f.fold));
  }
  if (o.pass) o.detail = "bow, tfidf and standardizer refits equal on all 10 folds";
  return o;
}

// 9
struct BenchCorpus {
  Dataset style;   // NELA + monetisation
  Dataset tokens;  // preprocessed body tokens
  double token_label_corr = 0.0;
};

BenchCorpus build_corpus(const synth::CorpusSpec& spec, const LinguisticResources& res, const AdMatcher& matcher,
                         const PublicSuffixList& psl) {
  const auto recs = synth::make_corpus(spec);
  const auto schema = with_monetisation(schema_for(FeatureGroup::Nela, res));
  std::vector<std::vector<double>> rows(recs.size());
  std::vector<std::vector<std::string>> docs(recs.size());
  parallel_for(recs.size(), [&](std::size_t i) {
    const auto& r = recs[i];
    const auto page = parse_page(r.html, r.url);
    const auto v = append_monetisation(extract_features(FeatureGroup::Nela, r.body_text, res),
                                       compute_monetisation(page, r.url, matcher, psl));
    rows[i] = v.values;
    docs[i] = preprocess_tokens(r.body_text, res.stopwords);
  });
  FeatureTable t;
  t.schema = *schema;
  t.values = Matrix(0, schema->size());
  std::vector<int> labels;
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    t.ids.push_back(recs[i].id);
    t.labels.push_back(label_value(recs[i].label));
    t.values.append_row(rows[i]);
    labels.push_back(label_value(recs[i].label));
    // Correlation of token presence with the fake class.
    const double x = std::find(docs[i].begin(), docs[i].end(), synth::kPublisherToken) != docs[i].end() ? 1 : 0;
    const double y = recs[i].label == NewsLabel::Fake ? 1 : 0;
    sx += x, sy += y, sxx += x * x, syy += y * y, sxy += x * y;
  }
  const double n = double(recs.size());
  BenchCorpus c;
  c.token_label_corr = (sxy / n - sx / n * sy / n) /
                       std::sqrt((sxx / n - sx / n * sx / n) * (syy / n - sy / n * sy / n));
  c.style = Dataset::from_table(t, spec.name);
  c.tokens = Dataset::from_documents(std::move(docs), std::move(labels), spec.name);
  return c;
}

Outcome synthetic_benchmark() {
  Outcome o;
  auto res = load_resources(FNKIT_DATA_DIR);
  const AdMatcher matcher(parse_filter_list(synth::kAdFilterList).rules);
  const auto psl = PublicSuffixList::load(fs::path(FNKIT_DATA_DIR) / "public_suffix_list.dat");

  synth::CorpusSpec a;
  a.name = "corpus_a";
  a.seed = 101;
  a.token_rate_fake = 0.975;
  a.token_rate_true = 0.025;
  synth::CorpusSpec b = a;
  b.name = "corpus_b";
  b.seed = 202;
  b.token_rate_fake = 0.5;
  b.token_rate_true = 0.5;
  const auto ca = build_corpus(a, *res, matcher, psl);
  const auto cb = build_corpus(b, *res, matcher, psl);
  o.check(std::abs(ca.token_label_corr - 0.95) < 0.03, "corpus A token correlation " + fmt(ca.token_label_corr));
  o.check(std::abs(cb.token_label_corr) < 0.1, "corpus B token correlation " + fmt(cb.token_label_corr));

  ModelSpec model;
  model.kind = ModelKind::LogReg;
  // Mean-loss scaling: 1e-3 is roughly a unit sum-loss penalty at ~1000 training rows.
  model.logreg.l2 = 1e-3;
  const std::size_t k = 10, n_per_class = 500;
  const std::uint64_t seed = 42;

  auto drop = [&](const Dataset& train, const Dataset& ext, const PipelineSpec& ps, double& kacc, double& xacc) {
    const auto kf = run_kfold(train, ps, model, k, seed);
    const auto ex = cross_dataset_eval(kf, ext, n_per_class, seed);
    kacc = mean(accuracies(kf));
    xacc = mean(accuracies(ex));
    return kacc - xacc;
  };

  std::ostringstream d;
  for (auto kind : {PipelineKind::Bow, PipelineKind::Tfidf}) {
    PipelineSpec ps;
    ps.kind = kind;
    double ka = 0, xa = 0;
    const double dr = drop(ca.tokens, cb.tokens, ps, ka, xa);
    const char* name = kind == PipelineKind::Bow ? "bow" : "tfidf";
    o.check(dr >= 0.15, std::string(name) + " drop " + fmt(dr));
    d << name << " " << fmt(ka, 3) << "->" << fmt(xa, 3) << ", ";
  }

  std::vector<std::string> nela_cols = schema_for(FeatureGroup::Nela, *res)->names;
  PipelineSpec style_only;
  style_only.columns = nela_cols;
  PipelineSpec style_mon;
  for (const auto* ps : {&style_only, &style_mon}) {
    double ka = 0, xa = 0;
    const double dr = drop(ca.style, cb.style, *ps, ka, xa);
    const char* name = ps == &style_only ? "nela" : "nela+mon";
    o.check(dr < 0.10, std::string(name) + " drop " + fmt(dr));
    d << name << " " << fmt(ka, 3) << "->" << fmt(xa, 3) << ", ";
  }

  const auto cmp = compare_with_without(style_only, style_mon, ca.style, cb.style, model, k, seed, n_per_class);
  const double gain = mean(cmp.accuracy_b) - mean(cmp.accuracy_a);
  o.check(gain > 0.0, "monetisation gain " + fmt(gain));
  o.check(cmp.mwu.p < 0.05, "monetisation MWU p " + fmt(cmp.mwu.p, 6));
  d << "mon gain " << fmt(gain, 3) << " (p=" << fmt(cmp.mwu.p, 6) << ")";
  if (o.pass) o.detail = d.str();
  else o.detail += " [" + d.str() + "]";
  return o;
}

// 10
Outcome schema_constants() {
  Outcome o;
  auto res = load_resources(FNKIT_DATA_DIR);
  const std::vector<std::pair<FeatureGroup, std::size_t>> expect = {
      {FeatureGroup::Fernandez, 34}, {FeatureGroup::Abonizio, 21}, {FeatureGroup::Nela, 91}};
  for (const auto& [g, n] : expect) {
    const auto s = schema_for(g, *res);
    const auto m = with_monetisation(s);
    o.check(s->size() == n, std::string(to_string(g)) + " has " + std::to_string(s->size()));
    o.check(m->size() == n + 4, std::string(to_string(g)) + "+mon has " + std::to_string(m->size()));
    const auto v = extract_features(g, "The council met on Monday. Residents asked many questions!", *res);
    o.check(v.values.size() == n, std::string(to_string(g)) + " vector size");
  }
  if (o.pass) o.detail = "34/38, 21/25, 91/95";
  return o;
}

// 11
std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  Outcome o;
  const fs::path root = fs::temp_directory_path() / "fnkit_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  {
    std::ofstream(root / "ads.txt") << synth::kAdFilterList;
    std::ofstream(root / "run.ini") << "[seeds]\nglobal=11\n[paths]\ndata_dir=" FNKIT_DATA_DIR "\nfilter_list="
                                    << (root / "ads.txt").string() << "\n[model]\nkind=forest\nforest_trees=20\n"
                                    << "[eval]\nk=10\nn_per_class=100\npfi_repeats=3\n";
    synth::CorpusSpec s;
    s.per_class = 150;
    s.seed = 1101;
    s.name = "a";
    write_records((root / "a.jsonl").string(), synth::make_corpus(s));
    s.seed = 1102;
    s.name = "b";
    s.token_rate_fake = s.token_rate_true = 0.5;
    write_records((root / "b.jsonl").string(), synth::make_corpus(s));
  }
  const std::string ini = (root / "run.ini").string();
  auto pipeline = [&](const fs::path& out) {
    fs::create_directories(out);
    auto p = [&](const std::string& n) { return (out / n).string(); };
    auto a = [&](const std::string& n) { return (root / n).string(); };
    std::ostringstream sink, errs;
    int worst = 0;
    auto run = [&](std::vector<std::string> args) { worst = std::max(worst, cli::run(args, sink, errs)); };
    run({"features", "--config", ini, "--records", a("a.jsonl"), "--group", "nela", "--with-monetisation", "--out",
         p("a.csv")});
    run({"features", "--config", ini, "--records", a("b.jsonl"), "--group", "nela", "--with-monetisation", "--out",
         p("b.csv")});
    run({"features", "--config", ini, "--records", a("a.jsonl"), "--group", "tfidf", "--out", p("ta.csv")});
    run({"features", "--config", ini, "--records", a("b.jsonl"), "--group", "tfidf", "--out", p("tb.csv")});
    run({"train", "--config", ini, "--features", p("a.csv"), "--out", p("model.json")});
    run({"evaluate", "--config", ini, "--features", p("a.csv"), "--external", p("b.csv"), "--models-dir",
         p("folds"), "--out", p("report.json")});
    run({"evaluate", "--config", ini, "--model", "logreg", "--features", p("ta.csv"), "--external", p("tb.csv"),
         "--out", p("token_report.json")});
    run({"pfi", "--config", ini, "--model-file", p("model.json"), "--features", p("b.csv"), "--out", p("pfi.csv")});
    return worst;
  };
  const int c1 = pipeline(root / "run1");
  const int c2 = pipeline(root / "run2");
  o.check(c1 <= cli::kWarnings && c2 <= cli::kWarnings, "pipeline exit codes " + std::to_string(c1) + "," +
                                                            std::to_string(c2));
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(root / "run1")) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), root / "run1");
    const auto one = slurp(e.path());
    const auto two = slurp(root / "run2" / rel);
    ++files;
    o.check(!one.empty() && one == two, rel.string() + " differs");
  }
  o.check(files >= 10, "only " + std::to_string(files) + " artefacts");
  fs::remove_all(root);
  if (o.pass) o.detail = std::to_string(files) + " artefacts byte-identical";
  return o;
}

struct Criterion {
  const char* name;
  double budget_s;
  std::function<Outcome()> fn;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"metric-oracle", 1, metric_oracle},
      {"readability-oracle", 1, readability_oracle},
      {"tfidf-oracle", 1, tfidf_oracle},
      {"mwu-oracle", 30, mwu_oracle},
      {"gradient-checks", 10, gradient_checks},
      {"boosting-monotone", 30, boosting_monotone},
      {"pfi-exactness", 30, pfi_exactness},
      {"leakage-refit", 60, leakage_property},
      {"synthetic-benchmark", 300, synthetic_benchmark},
      {"schema-constants", 1, schema_constants},
      {"determinism", 300, determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto& c = criteria[i];
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.check(secs <= c.budget_s, "over time budget");
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << (i + 1) << ". " << c.name << " (" << fmt(secs, 2) << " s)  "
              << o.detail << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
