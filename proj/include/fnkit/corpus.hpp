#pragma once

#include "fnkit/public_suffix.hpp"

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fnkit {

enum class NewsLabel { Fake, True };
enum class FetchedVia { Archive, Live };
enum class SourceRating { Unreliable, Mixed, Reliable };

std::string_view to_string(NewsLabel l);
std::string_view to_string(FetchedVia v);
std::string_view to_string(SourceRating r);
NewsLabel parse_news_label(std::string_view s);        // fake/true (also 0/1)
SourceRating parse_source_rating(std::string_view s);  // unreliable/mixed/reliable
inline int label_value(NewsLabel l) { return l == NewsLabel::True ? 1 : 0; }

struct ArticleRecord {
  std::string id;
  std::string url;
  std::string source;
  NewsLabel label = NewsLabel::Fake;
  std::optional<std::string> country;
  FetchedVia fetched_via = FetchedVia::Live;
  std::string html;  // raw bytes
  std::string body_text;
  std::size_t html_size = 0;

  bool operator==(const ArticleRecord&) const = default;
};

// One JSON object per line; html is base64. Throws SchemaError with the
// line number on malformed input.
std::string record_to_jsonl(const ArticleRecord& r);
ArticleRecord record_from_json(std::string_view line);
void write_records(const std::string& path, std::span<const ArticleRecord> records);
std::vector<ArticleRecord> read_records(const std::string& path);
std::vector<ArticleRecord> parse_records(std::string_view text);

// source -> per-assessor ratings (1..7 of them)
struct SourceLabelTable {
  std::map<std::string, std::vector<SourceRating>> ratings;

  // CSV with header source,assessor,label.
  static SourceLabelTable parse_csv(std::string_view text);
  static SourceLabelTable load(const std::string& path);
};

inline constexpr std::size_t kMaxAssessors = 7;

// Unique plurality leader; a tie for the lead gives Mixed.
SourceRating aggregate_source_label(std::span<const SourceRating> ratings);
// Aggregated label per source with Mixed sources dropped.
std::map<std::string, NewsLabel> resolve_source_labels(const SourceLabelTable& table);

struct DatasetManifest {
  std::string name;
  std::vector<std::pair<std::string, NewsLabel>> records;  // (id, label)
  std::map<std::string, std::size_t> class_counts;         // "fake"/"true" -> count
  std::uint64_t seed = 0;

  static DatasetManifest from_records(std::string name, std::span<const ArticleRecord> records, std::uint64_t seed);
  std::string to_json() const;
  static DatasetManifest from_json(std::string_view text);
  bool operator==(const DatasetManifest&) const = default;
};

// Nearest-rank quantile of the per-source counts: sorted value at index
// ceil(q*n), clamped to [1, n].
std::size_t source_cap_threshold(std::span<const ArticleRecord> records, double quantile);
// Sources above the threshold are sampled down to it; others untouched.
// Input order is preserved among kept records.
std::vector<ArticleRecord> cap_per_source(std::span<const ArticleRecord> records, double quantile, std::uint64_t seed);

inline constexpr std::size_t kMinHtmlBytes = 3072;
bool passes_size_filter(std::string_view html);

// CSV rows keyed by header name.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  static CsvTable parse(std::string_view text);
  std::string str() const;
};

// Keeps rows whose public_shares_top_country is US or UK and whose
// clean_url is not a tweet, a YouTube page or a video path.
CsvTable filter_external_rows(const CsvTable& table, const PublicSuffixList& psl);
bool is_excluded_media_url(std::string_view url, const PublicSuffixList& psl);

// Exactly n_per_class of each label; InsufficientClass otherwise.
DatasetManifest balanced_sample(const DatasetManifest& manifest, std::size_t n_per_class, std::uint64_t seed);

// ---- fetching -------------------------------------------------------------

struct HttpResponse {
  int status = 0;
  std::string content_type;
  std::string body;
};

// Thread-safe GET. nullopt on transport failure.
class HttpClient {
 public:
  virtual ~HttpClient() = default;
  virtual std::optional<HttpResponse> get(const std::string& url) = 0;
};

struct FetchOptions {
  std::string archive_endpoint = "https://archive.org/wayback/available?url=";
  std::chrono::seconds timeout{20};
  std::size_t retries = 2;
  std::chrono::milliseconds delay{0};  // pause before each request
  std::string user_agent = "fnkit/0.1";
};

// cpp-httplib backed client following redirects.
class HttplibClient : public HttpClient {
 public:
  explicit HttplibClient(FetchOptions options = {});
  std::optional<HttpResponse> get(const std::string& url) override;

 private:
  FetchOptions options_;
};

struct FetchResult {
  std::string html;
  FetchedVia via = FetchedVia::Live;
};

// Archive snapshot first, then the live URL. FetchFailed when neither
// yields a page, NotHtml for a non-HTML content type.
FetchResult fetch_article(HttpClient& client, const std::string& url, const FetchOptions& options = {});

struct FetchOutcome {
  std::optional<FetchResult> result;
  std::string error;  // empty on success
};

// At most max_in_flight concurrent fetches; outcomes in input order.
std::vector<FetchOutcome> fetch_all(HttpClient& client, std::span<const std::string> urls,
                                    const FetchOptions& options = {}, std::size_t max_in_flight = 8);

std::string percent_encode(std::string_view s);

}  // namespace fnkit
