#include "fnkit/evalharness.hpp"

#include "fnkit/csv.hpp"
#include "fnkit/error.hpp"
#include "fnkit/parallel.hpp"
#include "fnkit/rng.hpp"
#include "fnkit/sampling.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <unordered_map>

namespace fnkit {

using json = nlohmann::ordered_json;

namespace {

std::string hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t hash_names(const std::vector<std::string>& names) {
  std::string joined;
  for (const auto& n : names) {
    joined += n;
    joined += '\n';
  }
  return fnv1a64(joined);
}

double ratio(std::size_t num, std::size_t den, bool& degenerate) {
  if (den == 0) {
    degenerate = true;
    return 0.0;
  }
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

// ---- folds and metrics ----------------------------------------------------

FoldPlan kfold_plan(std::size_t n_rows, std::size_t k, std::uint64_t seed) {
  if (k == 0) fail(ErrorKind::InvalidInput, "k must be positive");
  if (n_rows < k) {
    fail(ErrorKind::TooFewRows, std::to_string(n_rows) + " rows cannot fill " + std::to_string(k) + " folds");
  }
  std::vector<std::size_t> order(n_rows);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order);
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.assignments.assign(n_rows, 0);
  const std::size_t base = n_rows / k;
  const std::size_t extra = n_rows % k;
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = base + (f < extra ? 1 : 0);
    for (std::size_t i = 0; i < size; ++i) plan.assignments[order[pos++]] = f;
  }
  return plan;
}

std::vector<std::size_t> FoldPlan::test_rows(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] == fold) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FoldPlan::train_rows(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] != fold) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FoldPlan::fold_sizes() const {
  std::vector<std::size_t> sizes(k, 0);
  for (auto f : assignments) ++sizes[f];
  return sizes;
}

ConfusionCounts confusion(std::span<const int> truth, std::span<const int> predicted) {
  if (truth.size() != predicted.size()) fail(ErrorKind::InvalidInput, "truth and prediction lengths differ");
  ConfusionCounts c;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool t = truth[i] == 1;
    const bool p = predicted[i] == 1;
    if (t && p) {
      ++c.tp;
    } else if (!t && p) {
      ++c.fp;
    } else if (!t) {
      ++c.tn;
    } else {
      ++c.fn;
    }
  }
  return c;
}

Metrics compute_metrics(const ConfusionCounts& c) {
  if (c.total() == 0) fail(ErrorKind::EmptyEvaluation, "no rows were evaluated");
  Metrics m;
  bool deg = false;
  m.accuracy = ratio(c.tp + c.tn, c.total(), deg);
  m.precision = ratio(c.tp, c.tp + c.fp, deg);
  m.recall = ratio(c.tp, c.tp + c.fn, deg);
  m.specificity = ratio(c.tn, c.tn + c.fp, deg);
  if (m.precision + m.recall > 0.0) {
    m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  } else {
    m.f1 = 0.0;
    deg = true;
  }
  m.degenerate = deg;
  return m;
}

MetricSummary summarise(std::span<const Metrics> folds) {
  MetricSummary s;
  if (folds.empty()) return s;
  const double n = static_cast<double>(folds.size());
  auto stat = [&](double Metrics::*field, double& mean, double& sd) {
    double sum = 0.0;
    for (const auto& m : folds) sum += m.*field;
    mean = sum / n;
    double ss = 0.0;
    for (const auto& m : folds) ss += (m.*field - mean) * (m.*field - mean);
    sd = std::sqrt(ss / n);
  };
  stat(&Metrics::accuracy, s.mean.accuracy, s.std.accuracy);
  stat(&Metrics::precision, s.mean.precision, s.std.precision);
  stat(&Metrics::recall, s.mean.recall, s.std.recall);
  stat(&Metrics::specificity, s.mean.specificity, s.std.specificity);
  stat(&Metrics::f1, s.mean.f1, s.std.f1);
  s.mean.degenerate = std::any_of(folds.begin(), folds.end(), [](const Metrics& m) { return m.degenerate; });
  return s;
}

// ---- datasets and pipelines -----------------------------------------------

Dataset Dataset::select_rows(std::span<const std::size_t> rows) const {
  Dataset d;
  d.name = name;
  d.feature_names = feature_names;
  d.schema_id = schema_id;
  for (auto r : rows) {
    if (r >= labels.size()) fail(ErrorKind::InvalidInput, "row index out of range");
    if (!ids.empty()) d.ids.push_back(ids[r]);
    d.labels.push_back(labels[r]);
    if (has_documents()) d.documents.push_back(documents[r]);
  }
  if (!features.empty()) d.features = features.select_rows(rows);
  return d;
}

Dataset Dataset::from_table(const FeatureTable& table, std::string name) {
  Dataset d;
  d.name = std::move(name);
  d.ids = table.ids;
  d.labels = table.labels;
  d.features = table.values;
  d.feature_names = table.schema.names;
  d.schema_id = table.schema.id();
  return d;
}

Dataset Dataset::from_labeled(const LabeledMatrix& data, std::string name) {
  Dataset d;
  d.name = std::move(name);
  d.labels = data.y;
  d.features = data.x;
  d.feature_names = data.feature_names;
  if (d.feature_names.empty()) {
    for (std::size_t c = 0; c < data.x.cols(); ++c) d.feature_names.push_back("f" + std::to_string(c));
  }
  d.schema_id = data.schema_id.empty() ? "matrix/" + hex16(hash_names(d.feature_names)) : data.schema_id;
  return d;
}

Dataset Dataset::from_documents(std::vector<std::vector<std::string>> docs, std::vector<int> labels, std::string name) {
  if (docs.size() != labels.size()) fail(ErrorKind::InvalidInput, "document and label counts differ");
  Dataset d;
  d.name = std::move(name);
  d.documents = std::move(docs);
  d.labels = std::move(labels);
  return d;
}

std::string_view to_string(PipelineKind kind) {
  switch (kind) {
    case PipelineKind::Stylistic: return "stylistic";
    case PipelineKind::Bow: return "bow";
    case PipelineKind::Tfidf: return "tfidf";
  }
  return "unknown";
}

PipelineKind pipeline_for(FeatureGroup group) {
  if (group == FeatureGroup::TokenBow) return PipelineKind::Bow;
  if (group == FeatureGroup::TokenTfidf) return PipelineKind::Tfidf;
  return PipelineKind::Stylistic;
}

std::string PipelineSpec::describe() const {
  std::string s(to_string(kind));
  if (kind == PipelineKind::Stylistic) {
    s += standardize ? "+std" : "";
    if (!columns.empty()) s += "[" + std::to_string(columns.size()) + " cols]";
  } else {
    s += "(max=" + std::to_string(max_features) + ")";
  }
  return s;
}

FittedPipeline fit_pipeline(const PipelineSpec& spec, const Dataset& data, std::span<const std::size_t> train_rows) {
  if (train_rows.empty()) fail(ErrorKind::TooFewRows, "no training rows to fit the pipeline");
  FittedPipeline fp;
  fp.spec = spec;
  if (spec.kind == PipelineKind::Stylistic) {
    if (data.has_documents() || data.features.cols() == 0) {
      fail(ErrorKind::InvalidInput, "stylistic pipeline needs a feature matrix");
    }
    fp.feature_names = spec.columns.empty() ? data.feature_names : spec.columns;
    fp.schema_id = spec.columns.empty() && !data.schema_id.empty()
                       ? data.schema_id
                       : "cols/" + hex16(hash_names(fp.feature_names));
    if (spec.standardize) {
      Dataset train = data.select_rows(train_rows);
      FittedPipeline raw = fp;
      raw.spec.standardize = false;
      fp.standardizer = Standardizer::fit(raw.transform(train).x);
    }
    return fp;
  }
  if (!data.has_documents()) fail(ErrorKind::InvalidInput, "token pipeline needs documents");
  std::vector<std::vector<std::string>> docs;
  docs.reserve(train_rows.size());
  for (auto r : train_rows) docs.push_back(data.documents.at(r));
  fp.vocabulary = Vocabulary::fit(docs, spec.max_features);
  fp.feature_names = fp.vocabulary->terms();
  fp.schema_id = std::string(to_string(spec.kind)) + "/" + hex16(fnv1a64(fp.vocabulary->serialise()));
  return fp;
}

LabeledMatrix FittedPipeline::transform(const Dataset& data) const {
  std::vector<std::size_t> rows(data.rows());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return transform(data, rows);
}

LabeledMatrix FittedPipeline::transform(const Dataset& data, std::span<const std::size_t> rows) const {
  LabeledMatrix out;
  out.schema_id = schema_id;
  out.feature_names = feature_names;
  for (auto r : rows) out.y.push_back(data.labels.at(r));
  if (spec.kind == PipelineKind::Stylistic) {
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t c = 0; c < data.feature_names.size(); ++c) index.emplace(data.feature_names[c], c);
    std::vector<std::size_t> cols;
    for (const auto& n : feature_names) {
      auto it = index.find(n);
      if (it == index.end()) fail(ErrorKind::SchemaError, "dataset has no feature column '" + n + "'");
      cols.push_back(it->second);
    }
    out.x = data.features.select_rows(rows).select_cols(cols);
    if (spec.standardize) {
      if (!standardizer.fitted()) fail(ErrorKind::NotFitted, "pipeline standardizer is not fitted");
      out.x = standardizer.transform(out.x);
    }
    return out;
  }
  if (!vocabulary) fail(ErrorKind::NotFitted, "pipeline vocabulary is not fitted");
  if (!data.has_documents()) fail(ErrorKind::InvalidInput, "token pipeline needs documents");
  std::vector<SparseVector> vecs;
  vecs.reserve(rows.size());
  for (auto r : rows) {
    const auto& doc = data.documents.at(r);
    vecs.push_back(spec.kind == PipelineKind::Bow ? bow_vector(doc, *vocabulary) : tfidf_vector(doc, *vocabulary));
  }
  out.x = to_dense(vecs, vocabulary->size());
  return out;
}

std::string FittedPipeline::to_json() const {
  json j;
  j["format"] = "fnkit-pipeline";
  j["kind"] = std::string(to_string(spec.kind));
  j["standardize"] = spec.standardize;
  j["max_features"] = spec.max_features;
  j["columns"] = spec.columns;
  j["feature_names"] = feature_names;
  j["schema_id"] = schema_id;
  if (standardizer.fitted()) {
    j["standardizer"] = {{"means", standardizer.means()}, {"stds", standardizer.stds()}};
  } else {
    j["standardizer"] = nullptr;
  }
  j["vocabulary"] = vocabulary ? json(vocabulary->serialise()) : json(nullptr);
  return j.dump(1) + "\n";
}

FittedPipeline FittedPipeline::from_json(std::string_view text) {
  FittedPipeline fp;
  try {
    const json j = json::parse(text);
    if (j.value("format", std::string()) != "fnkit-pipeline") fail(ErrorKind::SchemaError, "not an fnkit pipeline file");
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "stylistic") {
      fp.spec.kind = PipelineKind::Stylistic;
    } else if (kind == "bow") {
      fp.spec.kind = PipelineKind::Bow;
    } else if (kind == "tfidf") {
      fp.spec.kind = PipelineKind::Tfidf;
    } else {
      fail(ErrorKind::SchemaError, "unknown pipeline kind '" + kind + "'");
    }
    fp.spec.standardize = j.at("standardize").get<bool>();
    fp.spec.max_features = j.at("max_features").get<std::size_t>();
    fp.spec.columns = j.at("columns").get<std::vector<std::string>>();
    fp.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    fp.schema_id = j.at("schema_id").get<std::string>();
    if (const auto& s = j.at("standardizer"); !s.is_null()) {
      fp.standardizer = Standardizer(s.at("means").get<std::vector<double>>(), s.at("stds").get<std::vector<double>>());
    }
    if (const auto& v = j.at("vocabulary"); !v.is_null()) fp.vocabulary = Vocabulary::parse(v.get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::SchemaError, std::string("bad pipeline file: ") + e.what());
  }
  return fp;
}

bool FittedPipeline::operator==(const FittedPipeline& o) const {
  return spec.kind == o.spec.kind && spec.standardize == o.spec.standardize &&
         spec.max_features == o.spec.max_features && spec.columns == o.spec.columns &&
         feature_names == o.feature_names && schema_id == o.schema_id &&
         standardizer.fitted() == o.standardizer.fitted() && standardizer.means() == o.standardizer.means() &&
         standardizer.stds() == o.standardizer.stds() && vocabulary == o.vocabulary;
}

// ---- K-fold and cross-dataset ---------------------------------------------

KFoldResult run_kfold(const Dataset& data, const PipelineSpec& pipeline, const ModelSpec& model, std::size_t k,
                      std::uint64_t seed) {
  if (k < 2) fail(ErrorKind::InvalidInput, "k must be at least 2");
  KFoldResult res;
  res.plan = kfold_plan(data.rows(), k, seed);
  res.pipeline = pipeline;
  res.model = model;
  res.folds.resize(k);
  parallel_for(k, [&](std::size_t f) {
    FoldResult& fr = res.folds[f];
    fr.fold = f;
    fr.train_rows = res.plan.train_rows(f);
    fr.test_rows = res.plan.test_rows(f);
    fr.pipeline = fit_pipeline(pipeline, data, fr.train_rows);
    const LabeledMatrix train = fr.pipeline.transform(data, fr.train_rows);
    const LabeledMatrix test = fr.pipeline.transform(data, fr.test_rows);
    fr.model = train_model(train, model);
    fr.counts = confusion(test.y, predict(fr.model, test).labels);
    fr.metrics = compute_metrics(fr.counts);
  });
  std::vector<Metrics> ms;
  for (const auto& f : res.folds) ms.push_back(f.metrics);
  res.summary = summarise(ms);
  return res;
}

ExternalResult cross_dataset_eval(const KFoldResult& kfold, const Dataset& external, std::size_t n_per_class,
                                  std::uint64_t seed) {
  if (n_per_class == 0) fail(ErrorKind::InvalidInput, "n_per_class must be positive");
  ExternalResult res;
  res.n_per_class = n_per_class;
  res.seed = seed;
  res.folds.resize(kfold.folds.size());
  parallel_for(kfold.folds.size(), [&](std::size_t f) {
    const FoldResult& fr = kfold.folds[f];
    ExternalFold& ef = res.folds[f];
    ef.fold = fr.fold;
    ef.sample = balanced_indices(external.labels, n_per_class, derive_seed(seed, 0xe7, fr.fold));
    const LabeledMatrix x = fr.pipeline.transform(external, ef.sample);
    ef.counts = confusion(x.y, predict(fr.model, x).labels);
    ef.metrics = compute_metrics(ef.counts);
  });
  std::vector<Metrics> ms;
  for (const auto& f : res.folds) ms.push_back(f.metrics);
  res.summary = summarise(ms);
  return res;
}

std::vector<double> accuracies(const KFoldResult& r) {
  std::vector<double> out;
  for (const auto& f : r.folds) out.push_back(f.metrics.accuracy);
  return out;
}

std::vector<double> accuracies(const ExternalResult& r) {
  std::vector<double> out;
  for (const auto& f : r.folds) out.push_back(f.metrics.accuracy);
  return out;
}

// ---- Mann-Whitney U -------------------------------------------------------

std::string_view to_string(MwuMethod m) { return m == MwuMethod::Exact ? "exact" : "normal_approx"; }

MwuResult mann_whitney_u(std::span<const double> a, std::span<const double> b, Sided sided) {
  if (a.empty() || b.empty()) fail(ErrorKind::InvalidInput, "Mann-Whitney U needs two non-empty samples");
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  const std::size_t total = n + m;
  std::vector<std::pair<double, int>> pooled;
  pooled.reserve(total);
  for (double v : a) pooled.emplace_back(v, 0);
  for (double v : b) pooled.emplace_back(v, 1);
  for (const auto& [v, _] : pooled) {
    if (std::isnan(v)) fail(ErrorKind::InvalidInput, "Mann-Whitney U sample contains NaN");
  }
  std::stable_sort(pooled.begin(), pooled.end(), [](const auto& x, const auto& y) { return x.first < y.first; });

  // Doubled average ranks are integers.
  std::vector<long long> rank2(total);
  double tie_term = 0.0;
  std::size_t groups = 0;
  for (std::size_t i = 0; i < total;) {
    std::size_t j = i;
    while (j + 1 < total && pooled[j + 1].first == pooled[i].first) ++j;
    const long long r2 = static_cast<long long>(i + 1 + j + 1);
    for (std::size_t t = i; t <= j; ++t) rank2[t] = r2;
    const double t = static_cast<double>(j - i + 1);
    tie_term += t * t * t - t;
    ++groups;
    i = j + 1;
  }
  long long s2 = 0;
  for (std::size_t t = 0; t < total; ++t) {
    if (pooled[t].second == 0) s2 += rank2[t];
  }
  const long long nn = static_cast<long long>(n);
  const long long mm = static_cast<long long>(m);
  const long long u2 = s2 - nn * (nn + 1);  // 2 * U
  MwuResult res;
  res.u = static_cast<double>(u2) / 2.0;
  res.ties_degenerate = groups == 1;

  if (std::max(n, m) <= kMwuExactLimit) {
    res.method = MwuMethod::Exact;
    const long long max_sum = static_cast<long long>(total) * static_cast<long long>(total + 1);
    // ways[j][s]: subsets of size j of the items seen so far with doubled rank sum s
    std::vector<std::vector<double>> ways(n + 1, std::vector<double>(static_cast<std::size_t>(max_sum) + 1, 0.0));
    ways[0][0] = 1.0;
    for (std::size_t t = 0; t < total; ++t) {
      const auto r = static_cast<std::size_t>(rank2[t]);
      for (std::size_t j = std::min(n, t + 1); j >= 1; --j) {
        auto& dst = ways[j];
        const auto& src = ways[j - 1];
        for (std::size_t s = static_cast<std::size_t>(max_sum); s >= r; --s) {
          if (src[s - r] != 0.0) dst[s] += src[s - r];
          if (s == r) break;
        }
      }
    }
    const long long centre = nn * mm;  // 2 * n*m/2
    const long long obs_dev = std::llabs(u2 - centre);
    double hits = 0.0;
    double all = 0.0;
    for (std::size_t s = 0; s < ways[n].size(); ++s) {
      const double w = ways[n][s];
      if (w == 0.0) continue;
      all += w;
      const long long u2s = static_cast<long long>(s) - nn * (nn + 1);
      bool hit = false;
      switch (sided) {
        case Sided::TwoSided: hit = std::llabs(u2s - centre) >= obs_dev; break;
        case Sided::Less: hit = u2s <= u2; break;
        case Sided::Greater: hit = u2s >= u2; break;
      }
      if (hit) hits += w;
    }
    res.p = std::min(1.0, hits / all);
    return res;
  }

  res.method = MwuMethod::NormalApprox;
  const double dn = static_cast<double>(n);
  const double dm = static_cast<double>(m);
  const double dN = static_cast<double>(total);
  const double mu = dn * dm / 2.0;
  const double var = dn * dm / 12.0 * ((dN + 1.0) - tie_term / (dN * (dN - 1.0)));
  if (!(var > 0.0)) {
    res.p = 1.0;
    res.ties_degenerate = true;
    return res;
  }
  const double sd = std::sqrt(var);
  auto upper = [](double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); };
  double p = 1.0;
  switch (sided) {
    case Sided::TwoSided: p = 2.0 * upper((std::abs(res.u - mu) - 0.5) / sd); break;
    case Sided::Less: p = 1.0 - upper((res.u - mu + 0.5) / sd); break;
    case Sided::Greater: p = upper((res.u - mu - 0.5) / sd); break;
  }
  res.p = std::clamp(p, std::numeric_limits<double>::min(), 1.0);
  return res;
}

// ---- permutation importance -----------------------------------------------

std::vector<PfiEntry> PfiReport::ranked() const {
  std::vector<PfiEntry> out = features;
  std::stable_sort(out.begin(), out.end(), [](const PfiEntry& x, const PfiEntry& y) { return x.mean > y.mean; });
  return out;
}

PfiReport permutation_importance(const TrainedModel& model, const LabeledMatrix& data, std::size_t repeats,
                                 std::uint64_t seed) {
  if (repeats == 0) fail(ErrorKind::InvalidInput, "repeats must be at least 1");
  if (data.rows() == 0) fail(ErrorKind::EmptyEvaluation, "no rows for permutation importance");
  const auto base_pred = predict(model, data);
  const std::size_t d = data.x.cols();
  const double n = static_cast<double>(data.rows());
  auto acc = [&](const std::vector<int>& labels) {
    std::size_t ok = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) ok += labels[i] == data.y[i];
    return static_cast<double>(ok) / n;
  };
  PfiReport rep;
  rep.repeats = repeats;
  rep.seed = seed;
  rep.baseline = acc(base_pred.labels);
  rep.features.resize(d);
  parallel_for(d, [&](std::size_t f) {
    Matrix x = data.x;
    const std::vector<double> original = data.x.column(f);
    std::vector<double> drops(repeats);
    for (std::size_t r = 0; r < repeats; ++r) {
      std::vector<double> col = original;
      Rng rng(derive_seed(seed, f, r));
      rng.shuffle(col);
      for (std::size_t i = 0; i < x.rows(); ++i) x(i, f) = col[i];
      drops[r] = rep.baseline - acc(predict(model, x).labels);
    }
    double mean = 0.0;
    for (double v : drops) mean += v;
    mean /= static_cast<double>(repeats);
    double ss = 0.0;
    for (double v : drops) ss += (v - mean) * (v - mean);
    auto& e = rep.features[f];
    e.name = f < data.feature_names.size() ? data.feature_names[f] : "f" + std::to_string(f);
    e.mean = mean;
    e.std = std::sqrt(ss / static_cast<double>(repeats));
  });
  return rep;
}

std::vector<std::string> select_generalisable_features(const PfiReport& internal, const PfiReport& external) {
  std::map<std::string, double> inner;
  for (const auto& e : internal.features) inner.emplace(e.name, e.mean);
  std::vector<std::string> ext_names;
  for (const auto& e : external.features) ext_names.push_back(e.name);
  std::vector<std::string> int_names;
  for (const auto& e : internal.features) int_names.push_back(e.name);
  std::sort(ext_names.begin(), ext_names.end());
  std::sort(int_names.begin(), int_names.end());
  if (ext_names != int_names) fail(ErrorKind::SchemaError, "PFI reports cover different features");
  std::vector<std::string> out;
  for (const auto& e : external.ranked()) {
    if (e.mean > 0.0 && inner.at(e.name) > 0.0) out.push_back(e.name);
  }
  return out;
}

std::string pfi_csv(const PfiReport& report) {
  std::string out = "rank,feature,importance_mean,importance_std\n";
  std::size_t rank = 0;
  for (const auto& e : report.ranked()) {
    out += csv::join_row({std::to_string(++rank), e.name, format_double(e.mean), format_double(e.std)});
    out += '\n';
  }
  return out;
}

PfiReport parse_pfi_csv(std::string_view text) {
  const auto rows = csv::parse(text);
  if (rows.empty()) fail(ErrorKind::SchemaError, "empty PFI file");
  const auto& header = rows[0];
  const auto name_col = csv::column(header, "feature");
  const auto mean_col = csv::column(header, "importance_mean");
  const auto std_col = csv::column(header, "importance_std");
  auto num = [](const std::string& s, std::size_t line) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      fail(ErrorKind::SchemaError, "line " + std::to_string(line) + ": bad number '" + s + "'");
    }
    return v;
  };
  PfiReport rep;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.size() == 1 && row[0].empty()) continue;
    if (row.size() != header.size()) {
      fail(ErrorKind::SchemaError, "line " + std::to_string(i + 1) + ": expected " + std::to_string(header.size()) +
                                       " fields");
    }
    rep.features.push_back({row[name_col], num(row[mean_col], i + 1), num(row[std_col], i + 1)});
  }
  return rep;
}

// ---- with/without comparison ----------------------------------------------

Comparison compare_with_without(const PipelineSpec& a, const PipelineSpec& b, const Dataset& data,
                                const Dataset& external, const ModelSpec& model, std::size_t k, std::uint64_t seed,
                                std::size_t n_per_class) {
  if (k < 2) fail(ErrorKind::InvalidInput, "comparison needs at least 2 folds");
  const auto ra = run_kfold(data, a, model, k, seed);
  const auto rb = run_kfold(data, b, model, k, seed);
  Comparison c;
  c.accuracy_a = accuracies(cross_dataset_eval(ra, external, n_per_class, seed));
  c.accuracy_b = accuracies(cross_dataset_eval(rb, external, n_per_class, seed));
  c.mwu = mann_whitney_u(c.accuracy_b, c.accuracy_a);
  return c;
}

// ---- reports --------------------------------------------------------------

namespace {

json metrics_json(const Metrics& m) {
  return {{"accuracy", m.accuracy},       {"precision", m.precision}, {"recall", m.recall},
          {"specificity", m.specificity}, {"f1", m.f1},               {"degenerate", m.degenerate}};
}

Metrics metrics_from(const json& j) {
  Metrics m;
  m.accuracy = j.at("accuracy").get<double>();
  m.precision = j.at("precision").get<double>();
  m.recall = j.at("recall").get<double>();
  m.specificity = j.at("specificity").get<double>();
  m.f1 = j.at("f1").get<double>();
  m.degenerate = j.value("degenerate", false);
  return m;
}

json summary_json(const MetricSummary& s) { return {{"mean", metrics_json(s.mean)}, {"std", metrics_json(s.std)}}; }

MetricSummary summary_from(const json& j) { return {metrics_from(j.at("mean")), metrics_from(j.at("std"))}; }

json folds_json(const std::vector<FoldMetrics>& folds) {
  json arr = json::array();
  for (const auto& f : folds) {
    arr.push_back({{"fold", f.fold},
                   {"n_train", f.n_train},
                   {"n_test", f.n_test},
                   {"counts", {{"tp", f.counts.tp}, {"fp", f.counts.fp}, {"tn", f.counts.tn}, {"fn", f.counts.fn}}},
                   {"metrics", metrics_json(f.metrics)}});
  }
  return arr;
}

std::vector<FoldMetrics> folds_from(const json& arr) {
  std::vector<FoldMetrics> out;
  for (const auto& j : arr) {
    FoldMetrics f;
    f.fold = j.at("fold").get<std::size_t>();
    f.n_train = j.value("n_train", std::size_t{0});
    f.n_test = j.value("n_test", std::size_t{0});
    const auto& c = j.at("counts");
    f.counts = {c.at("tp").get<std::size_t>(), c.at("fp").get<std::size_t>(), c.at("tn").get<std::size_t>(),
                c.at("fn").get<std::size_t>()};
    f.metrics = metrics_from(j.at("metrics"));
    out.push_back(f);
  }
  return out;
}

}  // namespace

std::vector<double> EvalReport::headline_accuracies() const {
  std::vector<double> out;
  for (const auto& f : external.empty() ? kfold : external) out.push_back(f.metrics.accuracy);
  return out;
}

std::string EvalReport::to_json() const {
  json j;
  j["format"] = "fnkit-eval-report";
  j["tool_version"] = tool_version;
  j["config_hash"] = config_hash;
  j["pipeline"] = pipeline;
  j["model"] = model;
  j["schema_id"] = schema_id;
  j["k"] = k;
  j["seed"] = seed;
  j["kfold"] = {{"folds", folds_json(kfold)}, {"summary", summary_json(kfold_summary)}};
  if (external_summary) {
    j["external"] = {{"n_per_class", n_per_class}, {"folds", folds_json(external)}, {"summary", summary_json(*external_summary)}};
  } else {
    j["external"] = nullptr;
  }
  json tj = json::array();
  for (const auto& [name, r] : tests) {
    tj.push_back({{"name", name},
                  {"u", r.u},
                  {"p", r.p},
                  {"method", std::string(to_string(r.method))},
                  {"ties_degenerate", r.ties_degenerate}});
  }
  j["tests"] = tj;
  json pj = json::array();
  for (const auto& [name, r] : pfi) {
    json feats = json::array();
    for (const auto& e : r.features) feats.push_back({{"name", e.name}, {"mean", e.mean}, {"std", e.std}});
    pj.push_back({{"name", name}, {"repeats", r.repeats}, {"seed", r.seed}, {"baseline", r.baseline}, {"features", feats}});
  }
  j["pfi"] = pj;
  return j.dump(2) + "\n";
}

EvalReport EvalReport::from_json(std::string_view text) {
  EvalReport r;
  try {
    const json j = json::parse(text);
    if (j.value("format", std::string()) != "fnkit-eval-report") fail(ErrorKind::SchemaError, "not an fnkit report");
    r.tool_version = j.at("tool_version").get<std::string>();
    r.config_hash = j.at("config_hash").get<std::string>();
    r.pipeline = j.at("pipeline").get<std::string>();
    r.model = j.at("model").get<std::string>();
    r.schema_id = j.at("schema_id").get<std::string>();
    r.k = j.at("k").get<std::size_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.kfold = folds_from(j.at("kfold").at("folds"));
    r.kfold_summary = summary_from(j.at("kfold").at("summary"));
    if (const auto& e = j.at("external"); !e.is_null()) {
      r.n_per_class = e.at("n_per_class").get<std::size_t>();
      r.external = folds_from(e.at("folds"));
      r.external_summary = summary_from(e.at("summary"));
    }
    for (const auto& t : j.at("tests")) {
      MwuResult m;
      m.u = t.at("u").get<double>();
      m.p = t.at("p").get<double>();
      m.method = t.at("method").get<std::string>() == "exact" ? MwuMethod::Exact : MwuMethod::NormalApprox;
      m.ties_degenerate = t.at("ties_degenerate").get<bool>();
      r.tests.emplace_back(t.at("name").get<std::string>(), m);
    }
    for (const auto& p : j.at("pfi")) {
      PfiReport rep;
      rep.repeats = p.at("repeats").get<std::size_t>();
      rep.seed = p.at("seed").get<std::uint64_t>();
      rep.baseline = p.at("baseline").get<double>();
      for (const auto& f : p.at("features")) {
        rep.features.push_back({f.at("name").get<std::string>(), f.at("mean").get<double>(), f.at("std").get<double>()});
      }
      r.pfi.emplace_back(p.at("name").get<std::string>(), rep);
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::SchemaError, std::string("bad report: ") + e.what());
  }
  return r;
}

EvalReport make_report(const KFoldResult& kfold, const ExternalResult* external, std::string tool_version,
                       std::string config_hash) {
  EvalReport r;
  r.tool_version = std::move(tool_version);
  r.config_hash = std::move(config_hash);
  r.pipeline = kfold.pipeline.describe();
  r.model = std::string(to_string(kfold.model.kind));
  r.schema_id = kfold.folds.empty() ? std::string() : kfold.folds.front().pipeline.schema_id;
  r.k = kfold.plan.k;
  r.seed = kfold.plan.seed;
  for (const auto& f : kfold.folds) r.kfold.push_back({f.fold, f.train_rows.size(), f.test_rows.size(), f.counts, f.metrics});
  r.kfold_summary = kfold.summary;
  if (external) {
    r.n_per_class = external->n_per_class;
    for (std::size_t i = 0; i < external->folds.size(); ++i) {
      const auto& f = external->folds[i];
      r.external.push_back({f.fold, kfold.folds.at(i).train_rows.size(), f.sample.size(), f.counts, f.metrics});
    }
    r.external_summary = external->summary;
    r.tests.emplace_back("kfold_vs_external_accuracy", mann_whitney_u(accuracies(kfold), accuracies(*external)));
  }
  return r;
}

}  // namespace fnkit
