#include "fnkit/cli.hpp"
#include "fnkit/corpus.hpp"
#include "fnkit/stylefeat.hpp"
#include "support/synthetic.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace fnkit;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

class CliTest : public ::testing::Test {
 protected:
  fs::path dir;
  std::string out_text, err_text;

  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("fnkit_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    spit(dir / "ads.txt", synth::kAdFilterList);
    spit(dir / "run.ini", "[seeds]\nglobal=7\n[paths]\ndata_dir=" FNKIT_DATA_DIR "\nfilter_list=" +
                              (dir / "ads.txt").string() + "\n[eval]\nk=5\nn_per_class=20\n");
    synth::CorpusSpec spec;
    spec.per_class = 30;
    spec.seed = 3;
    auto records = synth::make_corpus(spec);
    for (auto& r : records) {
      // Pad past the minimum page size so ingest keeps them.
      r.html.insert(r.html.size() - 14, "<footer>" + std::string(3200, ' ') + "</footer>");
      r.html_size = r.html.size();
    }
    write_records((dir / "records.jsonl").string(), records);
    spec.seed = 4;
    spec.name = "other";
    write_records((dir / "external.jsonl").string(), synth::make_corpus(spec));
  }

  void TearDown() override { fs::remove_all(dir); }

  std::string p(const std::string& name) const { return (dir / name).string(); }

  int run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    out_text = out.str();
    err_text = err.str();
    return code;
  }

  int features(const std::string& records, const std::string& group, const std::string& out, bool mon = false) {
    std::vector<std::string> a = {"features", "--config", p("run.ini"), "--records", records, "--group", group,
                                  "--out", out};
    if (mon) a.push_back("--with-monetisation");
    return run(a);
  }
};

}  // namespace

TEST_F(CliTest, UsageAndVersion) {
  EXPECT_EQ(run({"--version"}), cli::kOk);
  EXPECT_EQ(out_text, std::string(cli::version()) + "\n");
  EXPECT_EQ(run({"--help"}), cli::kOk);
  EXPECT_EQ(run({}), cli::kUsage);
  EXPECT_EQ(run({"bogus"}), cli::kUsage);
  EXPECT_EQ(run({"features", "--records", p("records.jsonl")}), cli::kUsage);
}

TEST_F(CliTest, FeatureColumnCounts) {
  const std::vector<std::pair<std::string, std::size_t>> expect = {{"fernandez", 34}, {"abonizio", 21}, {"nela", 91}};
  for (const auto& [group, n] : expect) {
    ASSERT_EQ(features(p("records.jsonl"), group, p(group + ".csv")), cli::kOk) << err_text;
    EXPECT_EQ(read_feature_csv(p(group + ".csv")).schema.size(), n);
    ASSERT_EQ(features(p("records.jsonl"), group, p(group + "_mon.csv"), true), cli::kOk) << err_text;
    const auto t = read_feature_csv(p(group + "_mon.csv"));
    EXPECT_EQ(t.schema.size(), n + 4);
    EXPECT_EQ(t.ids.size(), 60u);
    EXPECT_EQ(t.schema.names.back(), "twit");
  }
}

TEST_F(CliTest, LiwcWithoutDictionary) {
  EXPECT_EQ(features(p("records.jsonl"), "liwc", p("liwc.csv")), cli::kUsage);
  EXPECT_NE(err_text.find("liwc_dictionary"), std::string::npos);
  EXPECT_FALSE(fs::exists(p("liwc.csv")));
}

TEST_F(CliTest, MonetisationOnTokensRejected) {
  EXPECT_EQ(features(p("records.jsonl"), "bow", p("bow.csv"), true), cli::kUsage);
}

TEST_F(CliTest, TrainEvaluatePfiCompareReduce) {
  ASSERT_EQ(features(p("records.jsonl"), "nela", p("a.csv"), true), cli::kOk);
  ASSERT_EQ(features(p("external.jsonl"), "nela", p("b.csv"), true), cli::kOk);
  ASSERT_EQ(run({"train", "--config", p("run.ini"), "--features", p("a.csv"), "--out", p("m.json")}), cli::kOk)
      << err_text;
  EXPECT_TRUE(fs::exists(p("m.pipeline.json")));
  ASSERT_EQ(run({"evaluate", "--config", p("run.ini"), "--features", p("a.csv"), "--external", p("b.csv"), "--out",
                 p("r.json")}),
            cli::kOk)
      << err_text;
  const auto rep = nlohmann::json::parse(slurp(p("r.json")));
  EXPECT_EQ(rep["kfold"]["folds"].size(), 5u);

  EXPECT_EQ(run({"pfi", "--config", p("run.ini"), "--model-file", p("m.json"), "--features", p("b.csv"), "--repeats",
                 "0", "--out", p("x.csv")}),
            cli::kUsage);
  ASSERT_EQ(run({"pfi", "--config", p("run.ini"), "--model-file", p("m.json"), "--features", p("a.csv"), "--repeats",
                 "3", "--out", p("pi.csv")}),
            cli::kOk);
  ASSERT_EQ(run({"pfi", "--config", p("run.ini"), "--model-file", p("m.json"), "--features", p("b.csv"), "--repeats",
                 "3", "--out", p("pe.csv")}),
            cli::kOk);
  const int rc = run({"reduce", "--internal", p("pi.csv"), "--external", p("pe.csv")});
  EXPECT_TRUE(rc == cli::kOk || rc == cli::kWarnings);

  const int cc = run({"compare", "--a", p("r.json"), "--b", p("r.json")});
  EXPECT_TRUE(cc == cli::kOk || cc == cli::kWarnings);
  const auto cmp = nlohmann::json::parse(out_text);
  EXPECT_GT(cmp["p"].get<double>(), 0.99);
}

TEST_F(CliTest, TokenPipeline) {
  ASSERT_EQ(features(p("records.jsonl"), "tfidf", p("t.csv")), cli::kOk) << err_text;
  EXPECT_TRUE(fs::exists(sidecar_path_for(p("t.csv"))));
  ASSERT_EQ(features(p("external.jsonl"), "tfidf", p("u.csv")), cli::kOk);
  // Tiny token folds can predict a single class, which only warns.
  const int rc = run({"evaluate", "--config", p("run.ini"), "--features", p("t.csv"), "--external", p("u.csv"), "--out",
                      p("r.json")});
  EXPECT_TRUE(rc == cli::kOk || rc == cli::kWarnings) << err_text;
  EXPECT_TRUE(fs::exists(p("r.json")));
  ASSERT_EQ(features(p("records.jsonl"), "nela", p("s.csv")), cli::kOk);
  EXPECT_EQ(run({"evaluate", "--config", p("run.ini"), "--features", p("t.csv"), "--external", p("s.csv"), "--out",
                 p("bad.json")}),
            cli::kUsage);
}

TEST_F(CliTest, TooManyFolds) {
  ASSERT_EQ(features(p("records.jsonl"), "abonizio", p("a.csv")), cli::kOk);
  EXPECT_EQ(run({"evaluate", "--config", p("run.ini"), "--features", p("a.csv"), "--k", "61", "--out", p("r.json")}),
            cli::kUsage);
  EXPECT_EQ(run({"evaluate", "--config", p("run.ini"), "--features", p("a.csv"), "--k", "1", "--out", p("r.json")}),
            cli::kUsage);
}

TEST_F(CliTest, IngestAllMixed) {
  std::string labels = "source,assessor,label\n";
  for (int i = 0; i < 12; ++i) labels += "pub" + std::to_string(i) + ".com,a1,mixed\n";
  spit(dir / "labels.csv", labels);
  EXPECT_EQ(run({"ingest", "--config", p("run.ini"), "--labels", p("labels.csv"), "--records", p("records.jsonl"),
                 "--out", p("ing")}),
            cli::kOk)
      << err_text;
  EXPECT_NE(err_text.find("warning"), std::string::npos);
  EXPECT_TRUE(read_records(p("ing/records.jsonl")).empty());
}

TEST_F(CliTest, IngestLabelsAndCaps) {
  std::string labels = "source,assessor,label\n";
  for (int i = 0; i < 12; ++i) {
    const auto s = "pub" + std::to_string(i) + ".com";
    labels += s + ",a1," + (i < 6 ? "unreliable" : "reliable") + "\n";
    labels += s + ",a2," + (i < 6 ? "unreliable" : "reliable") + "\n";
  }
  spit(dir / "labels.csv", labels);
  ASSERT_EQ(run({"ingest", "--config", p("run.ini"), "--labels", p("labels.csv"), "--records", p("records.jsonl"),
                 "--out", p("ing")}),
            cli::kOk)
      << err_text;
  const auto kept = read_records(p("ing/records.jsonl"));
  EXPECT_FALSE(kept.empty());
  for (const auto& r : kept) {
    const int idx = std::stoi(r.source.substr(3));
    EXPECT_EQ(r.label, idx < 6 ? NewsLabel::Fake : NewsLabel::True);
  }
  ASSERT_EQ(run({"features", "--config", p("run.ini"), "--records", p("records.jsonl"), "--manifest",
                 p("ing/manifest.json"), "--group", "fernandez", "--out", p("f.csv")}),
            cli::kOk)
      << err_text;
  EXPECT_EQ(read_feature_csv(p("f.csv")).ids.size(), kept.size());
}

TEST_F(CliTest, MissingLabelsFile) {
  EXPECT_EQ(run({"ingest", "--labels", p("nope.csv"), "--records", p("records.jsonl"), "--out", p("ing")}),
            cli::kUsage);
  EXPECT_NE(err_text.find(p("nope.csv")), std::string::npos);
}

TEST_F(CliTest, BadConfig) {
  spit(dir / "bad.ini", "[eval]\nk=1\n");
  EXPECT_EQ(run({"compare", "--config", p("bad.ini"), "--a", p("x"), "--b", p("y")}), cli::kUsage);
  spit(dir / "bad2.ini", "[paths]\nfilter_list=/does/not/exist\n");
  EXPECT_EQ(run({"compare", "--config", p("bad2.ini"), "--a", p("x"), "--b", p("y")}), cli::kUsage);
  EXPECT_EQ(run({"compare", "--config", p("absent.ini"), "--a", p("x"), "--b", p("y")}), cli::kUsage);
}

TEST_F(CliTest, ConfigHashStable) {
  const auto a = cli::RunConfig::load(p("run.ini"));
  const auto b = cli::RunConfig::load(p("run.ini"));
  EXPECT_EQ(a.hash(), b.hash());
  auto c = a;
  c.k = 6;
  EXPECT_NE(a.hash(), c.hash());
  EXPECT_EQ(a.fold_seed, 7u);
  EXPECT_EQ(a.k, 5u);
}

TEST_F(CliTest, RerunIsByteIdentical) {
  auto pipeline = [&](const std::string& tag) {
    features(p("records.jsonl"), "nela", p(tag + "a.csv"), true);
    features(p("external.jsonl"), "nela", p(tag + "b.csv"), true);
    run({"train", "--config", p("run.ini"), "--model", "forest", "--features", p(tag + "a.csv"), "--out",
         p(tag + "m.json")});
    run({"evaluate", "--config", p("run.ini"), "--model", "forest", "--features", p(tag + "a.csv"), "--external",
         p(tag + "b.csv"), "--out", p(tag + "r.json")});
  };
  pipeline("one_");
  pipeline("two_");
  for (const auto* f : {"a.csv", "b.csv", "m.json", "m.pipeline.json", "r.json"}) {
    EXPECT_EQ(slurp(p(std::string("one_") + f)), slurp(p(std::string("two_") + f))) << f;
    EXPECT_FALSE(slurp(p(std::string("one_") + f)).empty()) << f;
  }
}
