#include "fnkit/cli.hpp"

#include "fnkit/corpus.hpp"
#include "fnkit/csv.hpp"
#include "fnkit/error.hpp"
#include "fnkit/evalharness.hpp"
#include "fnkit/lexicon.hpp"
#include "fnkit/monetise.hpp"
#include "fnkit/page_parse.hpp"
#include "fnkit/parallel.hpp"
#include "fnkit/resources.hpp"
#include "fnkit/rng.hpp"
#include "fnkit/stylefeat.hpp"
#include "fnkit/text_util.hpp"
#include "fnkit/tokenfeat.hpp"
#include "fnkit/url.hpp"

#include <CLI11.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>

#ifndef FNKIT_VERSION
#define FNKIT_VERSION "0.0.0"
#endif
#ifndef FNKIT_DEFAULT_DATA_DIR
#define FNKIT_DEFAULT_DATA_DIR "data"
#endif

namespace fnkit::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string_view version() { return FNKIT_VERSION; }

namespace {

std::string hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const std::string& path, const std::string& content) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write " + path);
  out << content;
}

}  // namespace

// ---- configuration --------------------------------------------------------

RunConfig RunConfig::load(const std::string& path) {
  if (!fs::exists(path)) fail(ErrorKind::Io, "config file not found: " + path);
  boost::property_tree::ptree pt;
  try {
    boost::property_tree::ini_parser::read_ini(path, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    fail(ErrorKind::InvalidInput, path + ": " + e.what());
  }
  RunConfig c;
  try {
    c.seed = pt.get<std::uint64_t>("seeds.global", c.seed);
    c.fold_seed = pt.get<std::uint64_t>("seeds.fold", c.seed);
    c.sample_seed = pt.get<std::uint64_t>("seeds.sample", c.seed);

    c.data_dir = pt.get<std::string>("paths.data_dir", c.data_dir);
    c.filter_list = pt.get<std::string>("paths.filter_list", c.filter_list);
    c.liwc_dictionary = pt.get<std::string>("paths.liwc_dictionary", c.liwc_dictionary);
    c.output_dir = pt.get<std::string>("paths.output_dir", c.output_dir);

    c.group = pt.get<std::string>("features.group", c.group);
    c.with_monetisation = pt.get<bool>("features.with_monetisation", c.with_monetisation);

    c.model.kind = parse_model_kind(pt.get<std::string>("model.kind", std::string(to_string(c.model.kind))));
    c.model.logreg.l2 = pt.get<double>("model.logreg_l2", c.model.logreg.l2);
    c.model.svm.l2 = pt.get<double>("model.svm_l2", c.model.svm.l2);
    c.model.svm.epochs = pt.get<std::size_t>("model.svm_epochs", c.model.svm.epochs);
    if (auto d = pt.get_optional<std::size_t>("model.tree_max_depth")) {
      c.model.tree.max_depth = *d;
      c.model.forest.tree.max_depth = *d;
    }
    c.model.forest.n_trees = pt.get<std::size_t>("model.forest_trees", c.model.forest.n_trees);
    c.model.gboost.n_stages = pt.get<std::size_t>("model.gboost_stages", c.model.gboost.n_stages);
    c.model.gboost.learn_rate = pt.get<double>("model.gboost_learn_rate", c.model.gboost.learn_rate);
    c.model.gboost.depth = pt.get<std::size_t>("model.gboost_depth", c.model.gboost.depth);
    c.model.ffnn.hidden = pt.get<std::size_t>("model.ffnn_hidden", c.model.ffnn.hidden);
    c.model.ffnn.max_epochs = pt.get<std::size_t>("model.ffnn_max_epochs", c.model.ffnn.max_epochs);

    c.k = pt.get<std::size_t>("eval.k", c.k);
    c.n_per_class = pt.get<std::size_t>("eval.n_per_class", c.n_per_class);
    c.pfi_repeats = pt.get<std::size_t>("eval.pfi_repeats", c.pfi_repeats);
    c.max_features = pt.get<std::size_t>("eval.max_features", c.max_features);

    c.cap_quantile = pt.get<double>("ingest.cap_quantile", c.cap_quantile);

    c.archive_endpoint = pt.get<std::string>("fetch.archive_endpoint", c.archive_endpoint);
    c.timeout_s = pt.get<std::size_t>("fetch.timeout", c.timeout_s);
    c.retries = pt.get<std::size_t>("fetch.retries", c.retries);
    c.delay_ms = pt.get<std::size_t>("fetch.delay_ms", c.delay_ms);
    c.max_in_flight = pt.get<std::size_t>("fetch.max_in_flight", c.max_in_flight);
  } catch (const boost::property_tree::ptree_error& e) {
    fail(ErrorKind::InvalidInput, path + ": " + e.what());
  }
  return c;
}

void RunConfig::validate() const {
  if (k < 2) fail(ErrorKind::InvalidInput, "k must be at least 2");
  if (n_per_class == 0) fail(ErrorKind::InvalidInput, "n_per_class must be positive");
  if (!(cap_quantile > 0.0 && cap_quantile < 1.0)) fail(ErrorKind::InvalidInput, "cap_quantile must lie in (0, 1)");
  parse_feature_group(group);
  for (const auto* p : {&data_dir, &filter_list, &liwc_dictionary}) {
    if (!p->empty() && !fs::exists(*p)) fail(ErrorKind::InvalidInput, "configured path does not exist: " + *p);
  }
}

std::string RunConfig::canonical() const {
  std::ostringstream s;
  s << "seeds.global=" << seed << "\nseeds.fold=" << fold_seed << "\nseeds.sample=" << sample_seed
    << "\nfeatures.group=" << group << "\nfeatures.with_monetisation=" << with_monetisation
    << "\nmodel.kind=" << to_string(model.kind) << "\nmodel.logreg_l2=" << format_double(model.logreg.l2)
    << "\nmodel.svm_l2=" << format_double(model.svm.l2) << "\nmodel.svm_epochs=" << model.svm.epochs
    << "\nmodel.tree_max_depth=" << (model.tree.max_depth ? std::to_string(*model.tree.max_depth) : "none")
    << "\nmodel.forest_trees=" << model.forest.n_trees << "\nmodel.gboost_stages=" << model.gboost.n_stages
    << "\nmodel.gboost_learn_rate=" << format_double(model.gboost.learn_rate)
    << "\nmodel.gboost_depth=" << model.gboost.depth << "\nmodel.ffnn_hidden=" << model.ffnn.hidden
    << "\nmodel.ffnn_max_epochs=" << model.ffnn.max_epochs << "\neval.k=" << k << "\neval.n_per_class=" << n_per_class
    << "\neval.pfi_repeats=" << pfi_repeats << "\neval.max_features=" << max_features
    << "\ningest.cap_quantile=" << format_double(cap_quantile) << "\n";
  return s.str();
}

std::string RunConfig::hash() const { return hex16(fnv1a64(canonical())); }

// ---- commands -------------------------------------------------------------

namespace {

struct Context {
  RunConfig cfg;
  std::ostream& out;
  std::ostream& err;
  bool warned = false;

  void warn(const std::string& msg) {
    err << "warning: " << msg << "\n";
    warned = true;
  }
  int status() const { return warned ? kWarnings : kOk; }
};

std::string data_dir(const RunConfig& cfg) {
  if (!cfg.data_dir.empty()) return cfg.data_dir;
  if (const char* env = std::getenv("FNKIT_DATA_DIR"); env && *env) return env;
  return FNKIT_DEFAULT_DATA_DIR;
}

PublicSuffixList suffix_list(const RunConfig& cfg) {
  return PublicSuffixList::load(fs::path(data_dir(cfg)) / "public_suffix_list.dat");
}

std::string token_sidecar_path(const std::string& csv_path) { return sidecar_path_for(csv_path); }

struct LoadedData {
  Dataset data;
  std::optional<FeatureGroup> token_group;
};

bool is_token_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + path);
  std::string first;
  std::getline(in, first);
  if (!first.empty() && first.back() == '\r') first.pop_back();
  return first == "id,label,tokens";
}

LoadedData load_dataset(const std::string& path) {
  LoadedData ld;
  if (!is_token_csv(path)) {
    ld.data = Dataset::from_table(read_feature_csv(path), fs::path(path).stem().string());
    return ld;
  }
  const auto rows = csv::read_file(path);
  std::vector<std::vector<std::string>> docs;
  std::vector<int> labels;
  std::vector<std::string> ids;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.size() == 1 && row[0].empty()) continue;
    const std::string where = path + ":" + std::to_string(i + 1);
    if (row.size() != 3) fail(ErrorKind::SchemaError, where + ": expected 3 fields");
    ids.push_back(row[0]);
    try {
      labels.push_back(label_value(parse_news_label(row[1])));
    } catch (const Error& e) {
      fail(ErrorKind::SchemaError, where + ": " + e.what());
    }
    std::vector<std::string> toks;
    for (auto& t : text::split(row[2], ' ')) {
      if (!t.empty()) toks.push_back(std::move(t));
    }
    docs.push_back(std::move(toks));
  }
  ld.data = Dataset::from_documents(std::move(docs), std::move(labels), fs::path(path).stem().string());
  ld.data.ids = std::move(ids);
  const auto side = token_sidecar_path(path);
  if (fs::exists(side)) {
    try {
      const auto j = json::parse(read_text(side));
      ld.token_group = parse_feature_group(j.at("group").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::SchemaError, side + ": " + e.what());
    }
  }
  return ld;
}

std::vector<std::string> read_columns(const std::string& path) {
  std::vector<std::string> cols;
  for (auto& line : text::split(read_text(path), '\n')) {
    auto t = text::trim(line);
    if (!t.empty()) cols.push_back(std::move(t));
  }
  if (cols.empty()) fail(ErrorKind::InvalidInput, path + ": no feature names");
  return cols;
}

PipelineSpec pipeline_spec(const Context& ctx, const LoadedData& ld, bool group_given, const std::string& columns_file) {
  PipelineSpec spec;
  spec.max_features = ctx.cfg.max_features;
  if (ld.data.has_documents()) {
    auto group = ld.token_group.value_or(FeatureGroup::TokenTfidf);
    if (group_given) {
      const auto g = parse_feature_group(ctx.cfg.group);
      if (!is_token_group(g)) fail(ErrorKind::InvalidInput, "token features need --group bow or tfidf");
      group = g;
    }
    spec.kind = pipeline_for(group);
  } else {
    if (group_given && is_token_group(parse_feature_group(ctx.cfg.group))) {
      fail(ErrorKind::InvalidInput, "a stylistic feature matrix cannot be evaluated as " + ctx.cfg.group);
    }
    spec.kind = PipelineKind::Stylistic;
    if (!columns_file.empty()) spec.columns = read_columns(columns_file);
  }
  return spec;
}

ModelSpec model_spec(const RunConfig& cfg) {
  ModelSpec m = cfg.model;
  m.seed = cfg.seed;
  return m;
}

std::string pipeline_path_for(const std::string& model_path) {
  fs::path p(model_path);
  return (p.parent_path() / (p.stem().string() + ".pipeline.json")).string();
}

int cmd_fetch(Context& ctx, const std::string& input, const std::string& out_path) {
  const auto psl = suffix_list(ctx.cfg);
  auto table = CsvTable::parse(read_text(input));
  auto has = [&](std::string_view name) {
    return std::find(table.header.begin(), table.header.end(), name) != table.header.end();
  };
  std::string url_col = "url";
  if (has("clean_url") && has("public_shares_top_country")) {
    const auto before = table.rows.size();
    table = filter_external_rows(table, psl);
    ctx.out << "external filter kept " << table.rows.size() << " of " << before << " rows\n";
    url_col = "clean_url";
  }
  const auto uc = csv::column(table.header, url_col);
  auto opt_col = [&](std::string_view name) -> std::optional<std::size_t> {
    if (!has(name)) return std::nullopt;
    return csv::column(table.header, name);
  };
  const auto idc = opt_col("id");
  const auto sc = opt_col("source");
  const auto cc = has("country") ? opt_col("country") : opt_col("public_shares_top_country");
  const auto lc = opt_col("label");

  std::vector<std::string> urls;
  for (const auto& row : table.rows) urls.push_back(text::trim(row[uc]));
  FetchOptions fo;
  fo.archive_endpoint = ctx.cfg.archive_endpoint;
  fo.timeout = std::chrono::seconds(ctx.cfg.timeout_s);
  fo.retries = ctx.cfg.retries;
  fo.delay = std::chrono::milliseconds(ctx.cfg.delay_ms);
  fo.user_agent = "fnkit/" + std::string(version());
  HttplibClient client(fo);
  const auto outcomes = fetch_all(client, urls, fo, ctx.cfg.max_in_flight);

  std::vector<ArticleRecord> records;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& row = table.rows[i];
    if (!outcomes[i].result) {
      ctx.warn(outcomes[i].error);
      continue;
    }
    ArticleRecord r;
    r.url = urls[i];
    r.id = idc ? row[*idc] : hex16(fnv1a64(r.url));
    const auto u = parse_absolute_url(r.url);
    r.source = sc ? row[*sc] : psl.site_key(u->host);
    if (cc && !text::trim(row[*cc]).empty()) r.country = text::trim(row[*cc]);
    r.label = lc ? parse_news_label(row[*lc]) : NewsLabel::Fake;
    r.fetched_via = outcomes[i].result->via;
    r.html = outcomes[i].result->html;
    r.html_size = r.html.size();
    try {
      r.body_text = parse_page(r.html, r.url).body_text;
    } catch (const Error&) {
      r.body_text.clear();
    }
    records.push_back(std::move(r));
  }
  write_records(out_path, records);
  ctx.out << "fetched " << records.size() << " of " << urls.size() << " urls into " << out_path << "\n";
  return ctx.status();
}

int cmd_ingest(Context& ctx, const std::string& labels_path, const std::string& records_path, const std::string& out_dir) {
  const auto table = SourceLabelTable::load(labels_path);
  const auto labels = resolve_source_labels(table);
  const auto records = read_records(records_path);
  std::vector<ArticleRecord> kept;
  std::size_t unlabelled = 0;
  std::size_t small = 0;
  for (const auto& r : records) {
    const auto it = labels.find(r.source);
    if (it == labels.end()) {
      ++unlabelled;
      continue;
    }
    if (!passes_size_filter(r.html)) {
      ++small;
      continue;
    }
    ArticleRecord copy = r;
    copy.label = it->second;
    kept.push_back(std::move(copy));
  }
  kept = cap_per_source(kept, ctx.cfg.cap_quantile, ctx.cfg.seed);
  const auto name = fs::path(records_path).stem().string();
  fs::create_directories(out_dir);
  const auto manifest = DatasetManifest::from_records(name, kept, ctx.cfg.seed);
  write_records((fs::path(out_dir) / "records.jsonl").string(), kept);
  write_text((fs::path(out_dir) / "manifest.json").string(), manifest.to_json());
  std::map<std::string, std::size_t> sources;
  for (const auto& r : kept) ++sources[r.source];
  ctx.out << "sources kept: " << sources.size() << "\nrecords: " << kept.size() << " (fake "
          << manifest.class_counts.at("fake") << ", true " << manifest.class_counts.at("true") << ")\n"
          << "dropped: " << unlabelled << " without a fake/true source label, " << small << " under "
          << kMinHtmlBytes << " bytes\n";
  if (kept.empty()) ctx.err << "warning: manifest is empty\n";
  return ctx.status();
}

int cmd_features(Context& ctx, const std::string& records_path, const std::string& manifest_path,
                 const std::string& out_path) {
  const auto group = parse_feature_group(ctx.cfg.group);
  if (is_token_group(group) && ctx.cfg.with_monetisation) {
    fail(ErrorKind::InvalidInput, "monetisation features apply to stylistic groups only");
  }
  std::optional<Lexicon> dictionary;
  if (group == FeatureGroup::Liwc) {
    if (ctx.cfg.liwc_dictionary.empty()) {
      fail(ErrorKind::DictionaryRequired, "the liwc group needs paths.liwc_dictionary in the config");
    }
    dictionary = load_liwc_dictionary(ctx.cfg.liwc_dictionary);
  }
  std::optional<AdMatcher> matcher;
  std::optional<PublicSuffixList> psl;
  if (ctx.cfg.with_monetisation) {
    if (ctx.cfg.filter_list.empty()) fail(ErrorKind::InvalidInput, "monetisation features need paths.filter_list");
    matcher.emplace(load_filter_list(ctx.cfg.filter_list).rules);
    psl.emplace(suffix_list(ctx.cfg));
  }
  const auto res = load_resources(data_dir(ctx.cfg));

  auto records = read_records(records_path);
  if (!manifest_path.empty()) {
    const auto manifest = DatasetManifest::from_json(read_text(manifest_path));
    std::map<std::string, std::size_t> by_id;
    for (std::size_t i = 0; i < records.size(); ++i) by_id.emplace(records[i].id, i);
    std::vector<ArticleRecord> picked;
    for (const auto& [id, label] : manifest.records) {
      const auto it = by_id.find(id);
      if (it == by_id.end()) fail(ErrorKind::SchemaError, "manifest id " + id + " not found in " + records_path);
      picked.push_back(records[it->second]);
      picked.back().label = label;
    }
    records = std::move(picked);
  }

  struct Row {
    std::vector<double> values;
    std::vector<std::string> tokens;
    std::string skipped;
  };
  std::vector<Row> rows(records.size());
  parallel_for(records.size(), [&](std::size_t i) {
    const auto& r = records[i];
    std::optional<ParsedPage> page;
    if (ctx.cfg.with_monetisation || r.body_text.empty()) {
      try {
        page = parse_page(r.html, r.url);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::EmptyDocument) throw;
      }
    }
    const std::string& body = !r.body_text.empty() ? r.body_text : page ? page->body_text : r.body_text;
    if (is_token_group(group)) {
      rows[i].tokens = preprocess_tokens(body, res->stopwords);
      return;
    }
    try {
      FeatureVector v = dictionary ? liwc_features(body, &*dictionary) : extract_features(group, body, *res);
      if (matcher) {
        const auto m = page ? compute_monetisation(*page, r.url, *matcher, *psl) : MonetisationFeatures{};
        v = append_monetisation(v, m);
      }
      rows[i].values = std::move(v.values);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::DegenerateText) throw;
      rows[i].skipped = e.what();
    }
  });

  if (is_token_group(group)) {
    std::string csv_text = "id,label,tokens\n";
    std::size_t empty = 0;
    for (std::size_t i = 0; i < records.size(); ++i) {
      std::string joined;
      for (const auto& t : rows[i].tokens) {
        if (!joined.empty()) joined += ' ';
        joined += t;
      }
      if (joined.empty()) ++empty;
      csv_text += csv::join_row({records[i].id, std::string(to_string(records[i].label)), joined}) + "\n";
    }
    write_text(out_path, csv_text);
    json side;
    side["format"] = "fnkit-tokens";
    side["group"] = std::string(to_string(group));
    write_text(token_sidecar_path(out_path), side.dump(1) + "\n");
    if (empty > 0) ctx.warn(std::to_string(empty) + " documents have no tokens after preprocessing");
    ctx.out << "wrote " << records.size() << " token rows to " << out_path << "\n";
    return ctx.status();
  }

  FeatureTable table;
  table.schema = dictionary ? *liwc_schema(*dictionary) : *schema_for(group, *res);
  if (ctx.cfg.with_monetisation) table.schema = *with_monetisation(std::make_shared<FeatureSchema>(table.schema));
  table.values = Matrix(0, table.schema.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!rows[i].skipped.empty()) {
      ctx.warn("skipped " + records[i].id + ": " + rows[i].skipped);
      continue;
    }
    table.ids.push_back(records[i].id);
    table.labels.push_back(label_value(records[i].label));
    table.values.append_row(rows[i].values);
  }
  write_feature_csv(out_path, table);
  ctx.out << "wrote " << table.ids.size() << " rows x " << table.schema.size() << " features to " << out_path << "\n";
  return ctx.status();
}

int cmd_train(Context& ctx, const std::string& features, bool group_given, const std::string& columns,
              const std::string& out_path) {
  const auto ld = load_dataset(features);
  const auto spec = pipeline_spec(ctx, ld, group_given, columns);
  std::vector<std::size_t> all(ld.data.rows());
  std::iota(all.begin(), all.end(), std::size_t{0});
  const auto pipeline = fit_pipeline(spec, ld.data, all);
  const auto model = train_model(pipeline.transform(ld.data), model_spec(ctx.cfg));
  write_text(out_path, model.to_json());
  write_text(pipeline_path_for(out_path), pipeline.to_json());
  ctx.out << "trained " << to_string(model.kind()) << " on " << ld.data.rows() << " rows x " << model.n_features
          << " features\n";
  return ctx.status();
}

int cmd_evaluate(Context& ctx, const std::string& features, const std::string& external, bool group_given,
                 const std::string& columns, const std::string& models_dir, const std::string& out_path) {
  const auto ld = load_dataset(features);
  const auto spec = pipeline_spec(ctx, ld, group_given, columns);
  const auto kf = run_kfold(ld.data, spec, model_spec(ctx.cfg), ctx.cfg.k, ctx.cfg.fold_seed);
  std::optional<ExternalResult> ext;
  if (!external.empty()) {
    const auto ed = load_dataset(external);
    if (ed.data.has_documents() != ld.data.has_documents()) {
      fail(ErrorKind::SchemaError, "training and external files hold different representations");
    }
    ext = cross_dataset_eval(kf, ed.data, ctx.cfg.n_per_class, ctx.cfg.sample_seed);
  }
  const auto report = make_report(kf, ext ? &*ext : nullptr, std::string(version()), ctx.cfg.hash());
  write_text(out_path, report.to_json());
  if (!models_dir.empty()) {
    for (const auto& f : kf.folds) {
      const auto stem = (fs::path(models_dir) / ("fold" + std::to_string(f.fold))).string();
      write_text(stem + ".model.json", f.model.to_json());
      write_text(stem + ".pipeline.json", f.pipeline.to_json());
    }
  }
  ctx.out << "k-fold accuracy " << format_double(report.kfold_summary.mean.accuracy);
  if (report.external_summary) ctx.out << ", external accuracy " << format_double(report.external_summary->mean.accuracy);
  ctx.out << "\n";
  if (report.kfold_summary.mean.degenerate || (report.external_summary && report.external_summary->mean.degenerate)) {
    ctx.warn("some folds have undefined metrics (reported as 0)");
  }
  return ctx.status();
}

int cmd_pfi(Context& ctx, const std::string& model_path, const std::string& features, std::optional<std::size_t> repeats,
            const std::string& out_path) {
  const auto model = TrainedModel::load(model_path);
  const auto pipeline = FittedPipeline::from_json(read_text(pipeline_path_for(model_path)));
  const auto ld = load_dataset(features);
  const auto data = pipeline.transform(ld.data);
  const auto rep = permutation_importance(model, data, repeats.value_or(ctx.cfg.pfi_repeats), ctx.cfg.seed);
  write_text(out_path, pfi_csv(rep));
  ctx.out << "baseline accuracy " << format_double(rep.baseline) << ", " << rep.features.size() << " features ranked\n";
  return ctx.status();
}

int cmd_compare(Context& ctx, const std::string& a_path, const std::string& b_path, const std::string& out_path) {
  const auto a = EvalReport::from_json(read_text(a_path));
  const auto b = EvalReport::from_json(read_text(b_path));
  const auto acc_a = a.headline_accuracies();
  const auto acc_b = b.headline_accuracies();
  const auto r = mann_whitney_u(acc_b, acc_a);
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
  };
  json j;
  j["format"] = "fnkit-compare";
  j["tool_version"] = std::string(version());
  j["config_hash"] = ctx.cfg.hash();
  j["a"] = a_path;
  j["b"] = b_path;
  j["mean_accuracy_a"] = mean(acc_a);
  j["mean_accuracy_b"] = mean(acc_b);
  j["u"] = r.u;
  j["p"] = r.p;
  j["method"] = std::string(to_string(r.method));
  j["ties_degenerate"] = r.ties_degenerate;
  const auto text = j.dump(2) + "\n";
  if (out_path.empty()) {
    ctx.out << text;
  } else {
    write_text(out_path, text);
  }
  if (r.ties_degenerate) ctx.warn("all accuracies tied; p reported as 1");
  return ctx.status();
}

int cmd_reduce(Context& ctx, const std::string& internal, const std::string& external, const std::string& out_path) {
  const auto a = parse_pfi_csv(read_text(internal));
  const auto b = parse_pfi_csv(read_text(external));
  const auto names = select_generalisable_features(a, b);
  std::string text;
  for (const auto& n : names) text += n + "\n";
  if (out_path.empty()) {
    ctx.out << text;
  } else {
    write_text(out_path, text);
    ctx.out << names.size() << " features selected\n";
  }
  if (names.empty()) ctx.warn("no feature is important in both reports");
  return ctx.status();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fake-news feature extraction and generalisability evaluation", "fnkit"};
  app.set_version_flag("--version", std::string(version()));
  app.require_subcommand(1);

  std::string config;
  std::string out_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> k;
  std::optional<std::string> group;
  bool with_mon = false;
  std::optional<std::string> model_kind;
  std::string input, labels, records, manifest, features, external, columns, models_dir, model_file, a, b;
  std::optional<std::size_t> repeats;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "INI run configuration");
    sub->add_option("--seed", seed, "global seed");
  };

  auto* fetch = app.add_subcommand("fetch", "fetch pages for a URL list (archive first, then live)");
  common(fetch);
  fetch->add_option("--input", input, "CSV with a url or clean_url column")->required();
  fetch->add_option("--out", out_path, "records JSONL")->required();

  auto* ingest = app.add_subcommand("ingest", "label, size-filter and cap fetched records");
  common(ingest);
  ingest->add_option("--labels", labels, "CSV source,assessor,label")->required();
  ingest->add_option("--records", records, "records JSONL")->required();
  ingest->add_option("--out", out_path, "output directory")->required();

  auto* feats = app.add_subcommand("features", "extract a feature matrix");
  common(feats);
  feats->add_option("--records", records, "records JSONL")->required();
  feats->add_option("--manifest", manifest, "restrict to a manifest");
  feats->add_option("--group", group, "fernandez|abonizio|liwc|nela|nela-mod|bow|tfidf");
  feats->add_flag("--with-monetisation", with_mon, "append ads, ext_total, fb, twit");
  feats->add_option("--out", out_path, "feature CSV")->required();

  auto* train = app.add_subcommand("train", "train one model on a whole matrix");
  common(train);
  train->add_option("--features", features, "feature or token CSV")->required();
  train->add_option("--group", group, "bow|tfidf for token files");
  train->add_option("--model", model_kind, "logreg|svm|tree|forest|gboost|ffnn");
  train->add_option("--columns", columns, "file with one feature name per line");
  train->add_option("--out", out_path, "model JSON")->required();

  auto* eval = app.add_subcommand("evaluate", "k-fold and optional cross-dataset evaluation");
  common(eval);
  eval->add_option("--features", features, "training feature or token CSV")->required();
  eval->add_option("--external", external, "external feature or token CSV");
  eval->add_option("--group", group, "bow|tfidf for token files");
  eval->add_option("--model", model_kind, "logreg|svm|tree|forest|gboost|ffnn");
  eval->add_option("--k", k, "number of folds");
  eval->add_option("--columns", columns, "file with one feature name per line");
  eval->add_option("--models-dir", models_dir, "also write per-fold models here");
  eval->add_option("--out", out_path, "report JSON")->required();

  auto* pfi = app.add_subcommand("pfi", "permutation feature importance of a trained model");
  common(pfi);
  pfi->add_option("--model-file", model_file, "model JSON written by train")->required();
  pfi->add_option("--features", features, "feature CSV to permute")->required();
  pfi->add_option("--repeats", repeats, "permutations per feature");
  pfi->add_option("--out", out_path, "PFI CSV")->required();

  auto* compare = app.add_subcommand("compare", "Mann-Whitney U over two reports' per-fold accuracies");
  common(compare);
  compare->add_option("--a", a, "baseline report")->required();
  compare->add_option("--b", b, "candidate report")->required();
  compare->add_option("--out", out_path, "JSON output (stdout if omitted)");

  auto* reduce = app.add_subcommand("reduce", "features important both internally and externally");
  common(reduce);
  reduce->add_option("--internal", a, "internal PFI CSV")->required();
  reduce->add_option("--external", b, "external PFI CSV")->required();
  reduce->add_option("--out", out_path, "feature list (stdout if omitted)");

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << version() << "\n";
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return kUsage;
  }

  try {
    Context ctx{config.empty() ? RunConfig{} : RunConfig::load(config), out, err};
    if (seed) {
      ctx.cfg.seed = *seed;
      ctx.cfg.fold_seed = *seed;
      ctx.cfg.sample_seed = *seed;
    }
    if (k) ctx.cfg.k = *k;
    if (group) ctx.cfg.group = *group;
    if (with_mon) ctx.cfg.with_monetisation = true;
    if (model_kind) ctx.cfg.model.kind = parse_model_kind(*model_kind);
    ctx.cfg.validate();

    if (*fetch) return cmd_fetch(ctx, input, out_path);
    if (*ingest) return cmd_ingest(ctx, labels, records, out_path);
    if (*feats) return cmd_features(ctx, records, manifest, out_path);
    if (*train) return cmd_train(ctx, features, group.has_value(), columns, out_path);
    if (*eval) return cmd_evaluate(ctx, features, external, group.has_value(), columns, models_dir, out_path);
    if (*pfi) return cmd_pfi(ctx, model_file, features, repeats, out_path);
    if (*compare) return cmd_compare(ctx, a, b, out_path);
    if (*reduce) return cmd_reduce(ctx, a, b, out_path);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

}  // namespace fnkit::cli
