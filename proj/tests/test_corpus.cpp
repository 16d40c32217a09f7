#include "fnkit/corpus.hpp"
#include "fnkit/error.hpp"
#include "fnkit/rng.hpp"

#include <gtest/gtest.h>
#include <httplib.h>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <map>
#include <mutex>
#include <set>
#include <thread>

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

const PublicSuffixList& psl() {
  static const auto p = PublicSuffixList::load(std::string(FNKIT_DATA_DIR) + "/public_suffix_list.dat");
  return p;
}

std::vector<SourceRating> ratings(std::size_t rel, std::size_t unrel, std::size_t mixed) {
  std::vector<SourceRating> v(rel, SourceRating::Reliable);
  v.insert(v.end(), unrel, SourceRating::Unreliable);
  v.insert(v.end(), mixed, SourceRating::Mixed);
  return v;
}

std::vector<ArticleRecord> records_for(const std::map<std::string, std::size_t>& per_source) {
  std::vector<ArticleRecord> out;
  for (const auto& [src, n] : per_source) {
    for (std::size_t i = 0; i < n; ++i) {
      ArticleRecord r;
      r.id = src + "-" + std::to_string(i);
      r.source = src;
      r.url = "https://" + src + ".com/" + std::to_string(i);
      r.label = i % 3 == 0 ? NewsLabel::True : NewsLabel::Fake;
      out.push_back(r);
    }
  }
  return out;
}

std::map<std::string, std::size_t> per_source(const std::vector<ArticleRecord>& rs) {
  std::map<std::string, std::size_t> m;
  for (const auto& r : rs) ++m[r.source];
  return m;
}

class StubClient : public HttpClient {
 public:
  std::map<std::string, HttpResponse> routes;
  std::vector<std::string> calls;
  std::mutex mu;

  std::optional<HttpResponse> get(const std::string& url) override {
    std::lock_guard lock(mu);
    calls.push_back(url);
    const auto it = routes.find(url);
    if (it == routes.end()) return std::nullopt;
    return it->second;
  }
};

const FetchOptions kOpts = [] {
  FetchOptions o;
  o.archive_endpoint = "https://archive.test/available?url=";
  o.retries = 1;
  return o;
}();

std::string archive_query(const std::string& url) { return kOpts.archive_endpoint + percent_encode(url); }

}  // namespace

TEST(Aggregate, Examples) {
  EXPECT_EQ(aggregate_source_label(ratings(3, 0, 0)), SourceRating::Reliable);
  EXPECT_EQ(aggregate_source_label(ratings(4, 3, 0)), SourceRating::Reliable);
  EXPECT_EQ(aggregate_source_label(ratings(3, 3, 1)), SourceRating::Mixed);
  EXPECT_EQ(kind_of([] { aggregate_source_label(std::vector<SourceRating>{}); }), ErrorKind::InvalidInput);
}

TEST(Aggregate, MatchesCountOracleAndPermutationInvariant) {
  for (std::size_t r = 0; r <= 7; ++r) {
    for (std::size_t u = 0; r + u <= 7; ++u) {
      for (std::size_t m = 0; r + u + m <= 7; ++m) {
        if (r + u + m == 0) continue;
        const std::size_t top = std::max({r, u, m});
        const int leaders = (r == top) + (u == top) + (m == top);
        const SourceRating expected = leaders > 1 ? SourceRating::Mixed
                                      : r == top  ? SourceRating::Reliable
                                      : u == top  ? SourceRating::Unreliable
                                                  : SourceRating::Mixed;
        auto v = ratings(r, u, m);
        EXPECT_EQ(aggregate_source_label(v), expected);
        std::reverse(v.begin(), v.end());
        EXPECT_EQ(aggregate_source_label(v), expected);
        Rng rng(r * 100 + u * 10 + m);
        rng.shuffle(v);
        EXPECT_EQ(aggregate_source_label(v), expected);
      }
    }
  }
}

TEST(LabelTable, CsvAndResolve) {
  const auto t = SourceLabelTable::parse_csv(
      "source,assessor,label\na.com,s1,reliable\na.com,s2,reliable\nb.com,s1,unreliable\nc.com,s1,mixed\n"
      "d.com,s1,reliable\nd.com,s2,unreliable\n");
  const auto labels = resolve_source_labels(t);
  EXPECT_EQ(labels, (std::map<std::string, NewsLabel>{{"a.com", NewsLabel::True}, {"b.com", NewsLabel::Fake}}));
  std::string eight = "source,assessor,label\n";
  for (int i = 0; i < 8; ++i) eight += "x.com,s" + std::to_string(i) + ",reliable\n";
  EXPECT_EQ(kind_of([&] { SourceLabelTable::parse_csv(eight); }), ErrorKind::SchemaError);
  EXPECT_EQ(kind_of([] { SourceLabelTable::parse_csv("source,label\na,reliable\n"); }), ErrorKind::SchemaError);
}

TEST(Cap, NearestRankExample) {
  const auto recs = records_for({{"A", 100}, {"B", 285}, {"C", 400}, {"D", 1000}});
  EXPECT_EQ(source_cap_threshold(recs, 0.25), 100u);
  const auto capped = cap_per_source(recs, 0.25, 42);
  EXPECT_EQ(per_source(capped), (std::map<std::string, std::size_t>{{"A", 100}, {"B", 100}, {"C", 100}, {"D", 100}}));
}

TEST(Cap, SingleSourceKept) {
  const auto recs = records_for({{"solo", 37}});
  EXPECT_EQ(cap_per_source(recs, 0.25, 1).size(), 37u);
  EXPECT_TRUE(cap_per_source(std::vector<ArticleRecord>{}, 0.25, 1).empty());
}

TEST(Cap, NeverIncreasesAndDeterministic) {
  Rng rng(5);
  std::map<std::string, std::size_t> counts;
  for (int s = 0; s < 15; ++s) counts["s" + std::to_string(s)] = 1 + rng.below(60);
  const auto recs = records_for(counts);
  for (double q : {0.1, 0.25, 0.5, 0.9}) {
    const auto th = source_cap_threshold(recs, q);
    const auto capped = cap_per_source(recs, q, 9);
    for (const auto& [src, n] : per_source(capped)) {
      EXPECT_LE(n, counts[src]);
      EXPECT_LE(n, th);
      if (counts[src] <= th) EXPECT_EQ(n, counts[src]);
    }
    std::vector<std::string> a, b;
    for (const auto& r : capped) a.push_back(r.id);
    for (const auto& r : cap_per_source(recs, q, 9)) b.push_back(r.id);
    EXPECT_EQ(a, b);
  }
}

TEST(SizeFilter, Boundary) {
  EXPECT_FALSE(passes_size_filter(std::string(2900, 'x')));
  EXPECT_FALSE(passes_size_filter(std::string(3071, 'x')));
  EXPECT_TRUE(passes_size_filter(std::string(3072, 'x')));
  EXPECT_TRUE(passes_size_filter(std::string(3073, 'x')));
  EXPECT_FALSE(passes_size_filter(""));
}

TEST(ExternalRows, Filter) {
  const auto t = CsvTable::parse(
      "clean_url,public_shares_top_country,extra\n"
      "https://news.example.com/a,US,1\n"
      "https://lemonde.fr/b,FR,2\n"
      "https://twitter.com/u/status/1,UK,3\n"
      "https://x.com/u/status/2,US,4\n"
      "https://m.youtube.com/watch?v=1,US,5\n"
      "https://site.co.uk/video/clip,UK,6\n"
      "https://bbc.co.uk/news/x,UK,7\n"
      "not a url,US,8\n");
  const auto kept = filter_external_rows(t, psl());
  ASSERT_EQ(kept.rows.size(), 2u);
  EXPECT_EQ(kept.rows[0][2], "1");
  EXPECT_EQ(kept.rows[1][2], "7");
  EXPECT_EQ(kind_of([] { filter_external_rows(CsvTable::parse("clean_url\nhttps://a.com/\n"), psl()); }),
            ErrorKind::SchemaError);
}

TEST(Manifest, BalancedSample) {
  DatasetManifest m;
  m.name = "t";
  for (int i = 0; i < 5355; ++i) m.records.emplace_back("f" + std::to_string(i), NewsLabel::Fake);
  for (int i = 0; i < 798; ++i) m.records.emplace_back("t" + std::to_string(i), NewsLabel::True);
  const auto s = balanced_sample(m, 500, 42);
  EXPECT_EQ(s.records.size(), 1000u);
  EXPECT_EQ(s.class_counts.at("fake"), 500u);
  EXPECT_EQ(s.class_counts.at("true"), 500u);
  EXPECT_EQ(s, balanced_sample(m, 500, 42));
  std::set<std::string> ids;
  for (const auto& [id, _] : s.records) ids.insert(id);
  EXPECT_EQ(ids.size(), 1000u);
  EXPECT_EQ(kind_of([&] { balanced_sample(m, 800, 42); }), ErrorKind::InsufficientClass);
}

TEST(Manifest, FullSizeIsPermutation) {
  DatasetManifest m;
  for (int i = 0; i < 20; ++i) m.records.emplace_back("r" + std::to_string(i), i % 2 ? NewsLabel::True : NewsLabel::Fake);
  const auto s = balanced_sample(m, 10, 3);
  auto a = m.records, b = s.records;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  EXPECT_EQ(a, b);
}

TEST(Manifest, JsonRoundTrip) {
  std::vector<ArticleRecord> recs = records_for({{"a", 3}, {"b", 4}});
  const auto m = DatasetManifest::from_records("toy", recs, 7);
  EXPECT_EQ(m.class_counts.at("fake") + m.class_counts.at("true"), m.records.size());
  EXPECT_EQ(DatasetManifest::from_json(m.to_json()), m);
}

TEST(Records, JsonlRoundTrip) {
  ArticleRecord r;
  r.id = "x1";
  r.url = "https://e.com/a";
  r.source = "e.com";
  r.label = NewsLabel::True;
  r.country = "US";
  r.fetched_via = FetchedVia::Archive;
  r.html = std::string("<html>\0\xff binary", 16);
  r.html_size = r.html.size();
  r.body_text = "caf\xC3\xA9";
  const auto back = record_from_json(record_to_jsonl(r));
  EXPECT_EQ(back, r);
  const auto path = (std::filesystem::temp_directory_path() / "fnkit_records.jsonl").string();
  write_records(path, std::vector<ArticleRecord>{r, r});
  EXPECT_EQ(read_records(path).size(), 2u);
  std::filesystem::remove(path);
  EXPECT_EQ(kind_of([] { parse_records("{\"id\":1}\n"); }), ErrorKind::SchemaError);
}

TEST(Fetch, ArchiveHit) {
  StubClient c;
  const std::string url = "https://news.example.com/story?id=1";
  c.routes[archive_query(url)] = {200, "application/json",
                                  R"({"archived_snapshots":{"closest":{"available":true,"url":"https://web.archive.test/2020/x","status":"200"}}})"};
  c.routes["https://web.archive.test/2020/x"] = {200, "text/html; charset=utf-8", "<html>snap</html>"};
  const auto r = fetch_article(c, url, kOpts);
  EXPECT_EQ(r.via, FetchedVia::Archive);
  EXPECT_EQ(r.html, "<html>snap</html>");
}

TEST(Fetch, LiveFallback) {
  StubClient c;
  const std::string url = "https://news.example.com/a";
  c.routes[archive_query(url)] = {200, "application/json", R"({"archived_snapshots":{}})"};
  c.routes[url] = {200, "text/html", "<html>live</html>"};
  const auto r = fetch_article(c, url, kOpts);
  EXPECT_EQ(r.via, FetchedVia::Live);
  EXPECT_EQ(r.html, "<html>live</html>");
}

TEST(Fetch, NotFoundFails) {
  StubClient c;
  const std::string url = "https://news.example.com/missing";
  c.routes[url] = {404, "text/html", "nope"};
  EXPECT_EQ(kind_of([&] { fetch_article(c, url, kOpts); }), ErrorKind::FetchFailed);
}

TEST(Fetch, NotHtml) {
  StubClient c;
  const std::string url = "https://news.example.com/file.pdf";
  c.routes[url] = {200, "application/pdf", "%PDF"};
  EXPECT_EQ(kind_of([&] { fetch_article(c, url, kOpts); }), ErrorKind::NotHtml);
}

TEST(Fetch, RetriesServerErrors) {
  StubClient c;
  const std::string url = "https://news.example.com/flaky";
  c.routes[url] = {503, "text/html", ""};
  EXPECT_EQ(kind_of([&] { fetch_article(c, url, kOpts); }), ErrorKind::FetchFailed);
  EXPECT_EQ(std::count(c.calls.begin(), c.calls.end(), url), 2);
}

TEST(Fetch, AllInOrder) {
  StubClient c;
  std::vector<std::string> urls;
  for (int i = 0; i < 20; ++i) {
    urls.push_back("https://s.com/" + std::to_string(i));
    if (i % 4 != 0) c.routes[urls.back()] = {200, "text/html", "<p>" + std::to_string(i) + "</p>"};
  }
  const auto out = fetch_all(c, urls, kOpts, 4);
  ASSERT_EQ(out.size(), 20u);
  for (int i = 0; i < 20; ++i) {
    if (i % 4 == 0) {
      EXPECT_FALSE(out[i].result);
      EXPECT_FALSE(out[i].error.empty());
    } else {
      EXPECT_EQ(out[i].result->html, "<p>" + std::to_string(i) + "</p>");
    }
  }
}

TEST(Fetch, HttplibClientAgainstLocalServer) {
  httplib::Server srv;
  srv.Get("/page", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("<html>local</html>", "text/html");
  });
  srv.Get("/moved", [](const httplib::Request&, httplib::Response& res) { res.set_redirect("/page"); });
  const int port = srv.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread th([&] { srv.listen_after_bind(); });
  srv.wait_until_ready();
  FetchOptions o;
  o.archive_endpoint = "http://127.0.0.1:" + std::to_string(port) + "/none?url=";
  o.timeout = std::chrono::seconds(5);
  HttplibClient client(o);
  const auto r = fetch_article(client, "http://127.0.0.1:" + std::to_string(port) + "/moved", o);
  EXPECT_EQ(r.via, FetchedVia::Live);
  EXPECT_EQ(r.html, "<html>local</html>");
  srv.stop();
  th.join();
}

TEST(PercentEncode, Reserved) {
  EXPECT_EQ(percent_encode("a b/c?d=e&f"), "a%20b%2Fc%3Fd%3De%26f");
  EXPECT_EQ(percent_encode("AZaz09-._~"), "AZaz09-._~");
}
