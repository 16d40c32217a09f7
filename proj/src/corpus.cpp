#include "fnkit/corpus.hpp"

#include "fnkit/csv.hpp"
#include "fnkit/error.hpp"
#include "fnkit/parallel.hpp"
#include "fnkit/rng.hpp"
#include "fnkit/sampling.hpp"
#include "fnkit/text_util.hpp"
#include "fnkit/url.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>
#include <unordered_map>

namespace fnkit {

using json = nlohmann::ordered_json;

std::string_view to_string(NewsLabel l) { return l == NewsLabel::True ? "true" : "fake"; }

std::string_view to_string(FetchedVia v) { return v == FetchedVia::Archive ? "archive" : "live"; }

std::string_view to_string(SourceRating r) {
  switch (r) {
    case SourceRating::Unreliable: return "unreliable";
    case SourceRating::Mixed: return "mixed";
    case SourceRating::Reliable: return "reliable";
  }
  return "mixed";
}

NewsLabel parse_news_label(std::string_view s) {
  const std::string t = text::to_lower(text::trim(s));
  if (t == "fake" || t == "0") return NewsLabel::Fake;
  if (t == "true" || t == "1") return NewsLabel::True;
  fail(ErrorKind::SchemaError, "label must be fake or true, got '" + std::string(s) + "'");
}

SourceRating parse_source_rating(std::string_view s) {
  const std::string t = text::to_lower(text::trim(s));
  if (t == "unreliable") return SourceRating::Unreliable;
  if (t == "mixed") return SourceRating::Mixed;
  if (t == "reliable") return SourceRating::Reliable;
  fail(ErrorKind::SchemaError, "rating must be unreliable, mixed or reliable, got '" + std::string(s) + "'");
}

// ---- records --------------------------------------------------------------

std::string record_to_jsonl(const ArticleRecord& r) {
  json j;
  j["id"] = r.id;
  j["url"] = r.url;
  j["source"] = r.source;
  j["label"] = std::string(to_string(r.label));
  j["country"] = r.country ? json(*r.country) : json(nullptr);
  j["fetched_via"] = std::string(to_string(r.fetched_via));
  j["html"] = text::base64_encode(r.html);
  j["body_text"] = r.body_text;
  j["html_size"] = r.html.size();
  return j.dump() + "\n";
}

ArticleRecord record_from_json(std::string_view line) {
  ArticleRecord r;
  try {
    const json j = json::parse(line);
    r.id = j.at("id").get<std::string>();
    r.url = j.at("url").get<std::string>();
    r.source = j.at("source").get<std::string>();
    r.label = parse_news_label(j.at("label").get<std::string>());
    if (j.contains("country") && !j.at("country").is_null()) r.country = j.at("country").get<std::string>();
    const auto via = j.value("fetched_via", std::string("live"));
    if (via != "archive" && via != "live") fail(ErrorKind::SchemaError, "fetched_via must be archive or live");
    r.fetched_via = via == "archive" ? FetchedVia::Archive : FetchedVia::Live;
    r.html = text::base64_decode(j.value("html", std::string()));
    r.body_text = j.value("body_text", std::string());
    r.html_size = j.value("html_size", r.html.size());
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::SchemaError, std::string("bad record: ") + e.what());
  }
  if (r.id.empty()) fail(ErrorKind::SchemaError, "record without id");
  if (!parse_absolute_url(r.url)) fail(ErrorKind::SchemaError, "record " + r.id + ": url is not absolute");
  if (r.html_size != r.html.size()) fail(ErrorKind::SchemaError, "record " + r.id + ": html_size does not match html");
  return r;
}

std::vector<ArticleRecord> parse_records(std::string_view text) {
  std::vector<ArticleRecord> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const auto line = text.substr(pos, end - pos);
    ++line_no;
    pos = end + 1;
    if (text::trim(line).empty()) continue;
    try {
      out.push_back(record_from_json(line));
    } catch (const Error& e) {
      fail(e.kind(), "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

namespace {

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write " + path);
  out << content;
}

}  // namespace

void write_records(const std::string& path, std::span<const ArticleRecord> records) {
  std::string out;
  for (const auto& r : records) out += record_to_jsonl(r);
  write_text(path, out);
}

std::vector<ArticleRecord> read_records(const std::string& path) {
  try {
    return parse_records(read_text(path));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Io) throw;
    fail(e.kind(), path + ": " + e.what());
  }
}

// ---- labels ---------------------------------------------------------------

SourceLabelTable SourceLabelTable::parse_csv(std::string_view text) {
  const auto rows = csv::parse(text);
  if (rows.empty()) fail(ErrorKind::SchemaError, "label table is empty");
  const auto& header = rows[0];
  const auto sc = csv::column(header, "source");
  const auto ac = csv::column(header, "assessor");
  const auto lc = csv::column(header, "label");
  SourceLabelTable t;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.size() == 1 && row[0].empty()) continue;
    const std::string where = "line " + std::to_string(i + 1);
    if (row.size() != header.size()) fail(ErrorKind::SchemaError, where + ": wrong number of fields");
    const std::string source = text::trim(row[sc]);
    if (source.empty()) fail(ErrorKind::SchemaError, where + ": empty source");
    if (text::trim(row[ac]).empty()) fail(ErrorKind::SchemaError, where + ": empty assessor");
    SourceRating rating;
    try {
      rating = parse_source_rating(row[lc]);
    } catch (const Error& e) {
      fail(ErrorKind::SchemaError, where + ": " + e.what());
    }
    auto& list = t.ratings[source];
    if (list.size() == kMaxAssessors) fail(ErrorKind::SchemaError, where + ": more than 7 assessors for " + source);
    list.push_back(rating);
  }
  return t;
}

SourceLabelTable SourceLabelTable::load(const std::string& path) {
  try {
    return parse_csv(read_text(path));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Io) throw;
    fail(e.kind(), path + ": " + e.what());
  }
}

SourceRating aggregate_source_label(std::span<const SourceRating> ratings) {
  if (ratings.empty()) fail(ErrorKind::InvalidInput, "no assessor labels to aggregate");
  std::size_t counts[3] = {0, 0, 0};
  for (auto r : ratings) ++counts[static_cast<int>(r)];
  const std::size_t top = std::max({counts[0], counts[1], counts[2]});
  int leaders = 0;
  int leader = 1;
  for (int i = 0; i < 3; ++i) {
    if (counts[i] == top) {
      ++leaders;
      leader = i;
    }
  }
  return leaders == 1 ? static_cast<SourceRating>(leader) : SourceRating::Mixed;
}

std::map<std::string, NewsLabel> resolve_source_labels(const SourceLabelTable& table) {
  std::map<std::string, NewsLabel> out;
  for (const auto& [source, ratings] : table.ratings) {
    const auto agg = aggregate_source_label(ratings);
    if (agg == SourceRating::Unreliable) out.emplace(source, NewsLabel::Fake);
    if (agg == SourceRating::Reliable) out.emplace(source, NewsLabel::True);
  }
  return out;
}

// ---- manifests ------------------------------------------------------------

DatasetManifest DatasetManifest::from_records(std::string name, std::span<const ArticleRecord> records,
                                              std::uint64_t seed) {
  DatasetManifest m;
  m.name = std::move(name);
  m.seed = seed;
  m.class_counts = {{"fake", 0}, {"true", 0}};
  for (const auto& r : records) {
    m.records.emplace_back(r.id, r.label);
    ++m.class_counts[std::string(to_string(r.label))];
  }
  return m;
}

std::string DatasetManifest::to_json() const {
  json j;
  j["name"] = name;
  j["seed"] = seed;
  j["class_counts"] = json::object();
  for (const auto& [k, v] : class_counts) j["class_counts"][k] = v;
  json recs = json::array();
  for (const auto& [id, label] : records) recs.push_back({{"id", id}, {"label", std::string(to_string(label))}});
  j["records"] = recs;
  return j.dump(1) + "\n";
}

DatasetManifest DatasetManifest::from_json(std::string_view text) {
  DatasetManifest m;
  try {
    const json j = json::parse(text);
    m.name = j.at("name").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& [k, v] : j.at("class_counts").items()) m.class_counts[k] = v.get<std::size_t>();
    for (const auto& r : j.at("records")) {
      m.records.emplace_back(r.at("id").get<std::string>(), parse_news_label(r.at("label").get<std::string>()));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::SchemaError, std::string("bad manifest: ") + e.what());
  }
  std::size_t total = 0;
  for (const auto& [_, v] : m.class_counts) total += v;
  if (total != m.records.size()) fail(ErrorKind::SchemaError, "manifest class counts do not sum to the record count");
  return m;
}

DatasetManifest balanced_sample(const DatasetManifest& manifest, std::size_t n_per_class, std::uint64_t seed) {
  std::vector<int> labels;
  labels.reserve(manifest.records.size());
  for (const auto& [_, l] : manifest.records) labels.push_back(label_value(l));
  DatasetManifest out;
  out.name = manifest.name;
  out.seed = seed;
  out.class_counts = {{"fake", n_per_class}, {"true", n_per_class}};
  for (auto i : balanced_indices(labels, n_per_class, seed)) out.records.push_back(manifest.records[i]);
  return out;
}

// ---- capping and filters --------------------------------------------------

std::size_t source_cap_threshold(std::span<const ArticleRecord> records, double quantile) {
  if (!(quantile > 0.0 && quantile < 1.0)) fail(ErrorKind::InvalidInput, "quantile must lie in (0, 1)");
  std::map<std::string, std::size_t> per_source;
  for (const auto& r : records) ++per_source[r.source];
  if (per_source.empty()) return 0;
  std::vector<std::size_t> counts;
  for (const auto& [_, c] : per_source) counts.push_back(c);
  std::sort(counts.begin(), counts.end());
  const auto n = counts.size();
  auto rank = static_cast<std::size_t>(std::ceil(quantile * static_cast<double>(n)));
  rank = std::clamp<std::size_t>(rank, 1, n);
  return counts[rank - 1];
}

std::vector<ArticleRecord> cap_per_source(std::span<const ArticleRecord> records, double quantile, std::uint64_t seed) {
  const std::size_t cap = source_cap_threshold(records, quantile);
  std::map<std::string, std::vector<std::size_t>> by_source;
  for (std::size_t i = 0; i < records.size(); ++i) by_source[records[i].source].push_back(i);
  std::vector<char> keep(records.size(), 1);
  for (const auto& [source, idx] : by_source) {
    if (idx.size() <= cap) continue;
    for (auto i : idx) keep[i] = 0;
    Rng rng(derive_seed(seed, fnv1a64(source)));
    for (auto j : rng.sample_without_replacement(idx.size(), cap)) keep[idx[j]] = 1;
  }
  std::vector<ArticleRecord> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (keep[i]) out.push_back(records[i]);
  }
  return out;
}

bool passes_size_filter(std::string_view html) { return html.size() >= kMinHtmlBytes; }

CsvTable CsvTable::parse(std::string_view text) {
  auto rows = csv::parse(text);
  CsvTable t;
  if (rows.empty()) return t;
  t.header = std::move(rows[0]);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() == 1 && rows[i][0].empty()) continue;
    if (rows[i].size() != t.header.size()) {
      fail(ErrorKind::SchemaError, "line " + std::to_string(i + 1) + ": expected " + std::to_string(t.header.size()) +
                                       " fields, got " + std::to_string(rows[i].size()));
    }
    t.rows.push_back(std::move(rows[i]));
  }
  return t;
}

std::string CsvTable::str() const {
  std::string out = csv::join_row(header) + "\n";
  for (const auto& r : rows) out += csv::join_row(r) + "\n";
  return out;
}

bool is_excluded_media_url(std::string_view url, const PublicSuffixList& psl) {
  const auto u = parse_absolute_url(text::trim(url));
  if (!u) return true;
  const std::string site = psl.site_key(u->host);
  if (site == "twitter.com" || site == "x.com" || site == "youtube.com") return true;
  return text::to_lower(u->path).find("/video") != std::string::npos;
}

CsvTable filter_external_rows(const CsvTable& table, const PublicSuffixList& psl) {
  const auto uc = csv::column(table.header, "clean_url");
  const auto cc = csv::column(table.header, "public_shares_top_country");
  CsvTable out;
  out.header = table.header;
  for (const auto& row : table.rows) {
    const std::string country = text::to_lower(text::trim(row[cc]));
    if (country != "us" && country != "uk") continue;
    if (is_excluded_media_url(row[uc], psl)) continue;
    out.rows.push_back(row);
  }
  return out;
}

// ---- fetching -------------------------------------------------------------

std::string percent_encode(std::string_view s) {
  static const char* hex = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out += static_cast<char>(c);
    } else {
      out += '%';
      out += hex[c >> 4];
      out += hex[c & 15];
    }
  }
  return out;
}

HttplibClient::HttplibClient(FetchOptions options) : options_(std::move(options)) {}

std::optional<HttpResponse> HttplibClient::get(const std::string& url) {
  const auto u = parse_absolute_url(url);
  if (!u) return std::nullopt;
  std::string origin = u->scheme + "://" + u->host;
  if (!u->port.empty()) origin += ":" + u->port;
  std::string target = u->path;
  if (u->query) target += "?" + *u->query;
  httplib::Client cli(origin);
  cli.set_follow_location(true);
  cli.set_connection_timeout(options_.timeout);
  cli.set_read_timeout(options_.timeout);
  cli.set_default_headers({{"User-Agent", options_.user_agent}});
  auto res = cli.Get(target);
  if (!res) return std::nullopt;
  HttpResponse out;
  out.status = res->status;
  out.content_type = res->get_header_value("Content-Type");
  out.body = std::move(res->body);
  return out;
}

namespace {

std::optional<HttpResponse> get_with_retry(HttpClient& client, const std::string& url, const FetchOptions& opt) {
  std::optional<HttpResponse> res;
  for (std::size_t attempt = 0; attempt <= opt.retries; ++attempt) {
    if (opt.delay.count() > 0) std::this_thread::sleep_for(opt.delay);
    res = client.get(url);
    if (res && res->status < 500) break;
  }
  return res;
}

bool looks_like_html(const HttpResponse& r) {
  const std::string ct = text::to_lower(r.content_type);
  if (!ct.empty()) return ct.find("text/html") != std::string::npos || ct.find("xhtml") != std::string::npos;
  const std::string head = text::trim(std::string_view(r.body).substr(0, 512));
  return !head.empty() && head[0] == '<';
}

std::optional<std::string> archive_snapshot(HttpClient& client, const std::string& url, const FetchOptions& opt) {
  const auto res = get_with_retry(client, opt.archive_endpoint + percent_encode(url), opt);
  if (!res || res->status != 200) return std::nullopt;
  try {
    const json j = json::parse(res->body);
    const auto& closest = j.at("archived_snapshots").at("closest");
    if (!closest.value("available", false)) return std::nullopt;
    auto snap = closest.at("url").get<std::string>();
    if (!parse_absolute_url(snap)) return std::nullopt;
    return snap;
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;
  }
}

}  // namespace

FetchResult fetch_article(HttpClient& client, const std::string& url, const FetchOptions& options) {
  if (!parse_absolute_url(url)) fail(ErrorKind::UrlError, "not an absolute http(s) URL: " + url);
  if (const auto snap = archive_snapshot(client, url, options)) {
    const auto res = get_with_retry(client, *snap, options);
    if (res && res->status == 200) {
      if (!looks_like_html(*res)) fail(ErrorKind::NotHtml, url + " (" + res->content_type + ")");
      return {res->body, FetchedVia::Archive};
    }
  }
  const auto res = get_with_retry(client, url, options);
  if (!res) fail(ErrorKind::FetchFailed, url + ": no response");
  if (res->status != 200) fail(ErrorKind::FetchFailed, url + ": HTTP " + std::to_string(res->status));
  if (!looks_like_html(*res)) fail(ErrorKind::NotHtml, url + " (" + res->content_type + ")");
  return {res->body, FetchedVia::Live};
}

std::vector<FetchOutcome> fetch_all(HttpClient& client, std::span<const std::string> urls, const FetchOptions& options,
                                    std::size_t max_in_flight) {
  std::vector<FetchOutcome> out(urls.size());
  parallel_for(
      urls.size(),
      [&](std::size_t i) {
        try {
          out[i].result = fetch_article(client, urls[i], options);
        } catch (const Error& e) {
          out[i].error = e.what();
        }
      },
      std::max<std::size_t>(1, max_in_flight));
  return out;
}

}  // namespace fnkit
