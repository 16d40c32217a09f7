#include "fnkit/error.hpp"
#include "fnkit/resources.hpp"
#include "fnkit/stylefeat.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <set>
#include <string>

using namespace fnkit;

namespace {

const LinguisticResources& res() {
  static const auto r = load_resources(FNKIT_DATA_DIR);
  return *r;
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::InvalidInput;
}

const std::vector<std::string> kTexts = {
    "Wow!! Really??",
    "I saw her.",
    "BREAKING NEWS now",
    "He said it was 'great'. The \"committee\" met on March 5, 2020 in Paris at 10:30 pm.",
    "Win $$$ now!",
    "#breaking @user",
    "no punctuation here at all",
    "The government announced (again) that taxes - yes, taxes; all of them: would rise 5% & more... Why? Nobody knows!",
    "x",
    "Don't panic. It's only 3.5 degrees below the forecast; they'll cope.",
};

}  // namespace

TEST(Schema, Sizes) {
  EXPECT_EQ(fernandez_schema()->size(), 34u);
  EXPECT_EQ(abonizio_schema()->size(), 21u);
  EXPECT_EQ(nela_schema()->size(), 91u);
  EXPECT_EQ(with_monetisation(fernandez_schema())->size(), 38u);
  EXPECT_EQ(with_monetisation(abonizio_schema())->size(), 25u);
  EXPECT_EQ(with_monetisation(nela_schema())->size(), 95u);
}

TEST(Schema, NamesUnique) {
  for (const auto& s : {fernandez_schema(), abonizio_schema(), nela_schema(), nela_modified_schema(),
                        liwc_schema(*res().liwc)}) {
    const std::set<std::string> u(s->names.begin(), s->names.end());
    EXPECT_EQ(u.size(), s->size()) << to_string(s->group);
  }
}

TEST(Schema, MonetisationTwiceIsError) {
  const auto once = with_monetisation(nela_schema());
  EXPECT_EQ(kind_of([&] { with_monetisation(once); }), ErrorKind::SchemaError);
}

TEST(Schema, IdDependsOnFlag) {
  EXPECT_NE(nela_schema()->id(), with_monetisation(nela_schema())->id());
  EXPECT_EQ(nela_schema()->id(), nela_schema()->id());
}

TEST(Fernandez, PunctuationAndCaps) {
  auto v = fernandez_features("Wow!! Really??", res());
  EXPECT_EQ(v.at("exclamation_marks_count"), 2.0);
  EXPECT_EQ(v.at("question_marks_count"), 2.0);
  v = fernandez_features("BREAKING NEWS now", res());
  EXPECT_EQ(v.at("all_caps_count"), 2.0);
}

TEST(Fernandez, PersonalPronounPercent) {
  const auto v = fernandez_features("I saw her.", res());
  EXPECT_NEAR(v.at("personal_pronouns_pct"), 100.0 * 2.0 / 3.0, 1e-9);
}

TEST(Abonizio, Examples) {
  auto v = abonizio_features("The plain sentence has no quotes.", res());
  EXPECT_EQ(v.at("quotes_count"), 0.0);
  EXPECT_EQ(v.at("quotes_ratio"), 0.0);
  v = abonizio_features("Yesterday John Smith spoke.", res());
  EXPECT_GT(v.at("entities_ratio"), 0.0);
  v = abonizio_features("all lower case words here.", res());
  EXPECT_EQ(v.at("upper_case"), 0.0);
}

TEST(Liwc, CategoryPercentages) {
  Lexicon dict("mini");
  dict.add_category("posemo");
  dict.add_category("empty");
  dict.add_pattern("happy", "posemo");
  auto v = liwc_features("happy happy sad", &dict);
  EXPECT_NEAR(v.at("posemo"), 200.0 / 3.0, 1e-9);
  EXPECT_EQ(v.at("empty"), 0.0);
  v = liwc_features("happy happy", &dict);
  EXPECT_DOUBLE_EQ(v.at("Dic"), 100.0);
  EXPECT_EQ(kind_of([] { liwc_features("text", nullptr); }), ErrorKind::DictionaryRequired);
}

TEST(Nela, Examples) {
  auto v = nela_features("He said it was 'great'.", res());
  EXPECT_GE(v.at("quotes"), 1.0);
  v = nela_features("zzz qqq", res());
  for (const auto& c : kBiasCategories) EXPECT_EQ(v.at(c), 0.0) << c;
  v = nela_features("March 5, 2020 in Paris", res());
  EXPECT_GE(v.at("num_dates"), 1.0);
}

TEST(NelaModified, PunctuationRenormalised) {
  auto v = modified_nela_features("Win $$$ now!", res());
  EXPECT_DOUBLE_EQ(v.at("dollar"), 0.75);
  v = modified_nela_features("no punctuation here", res());
  for (const char* p : {"exclamation", "question", "period", "comma", "hash", "at", "dollar", "percentage"}) {
    EXPECT_EQ(v.at(p), 0.0) << p;
  }
  v = modified_nela_features("#breaking @user", res());
  EXPECT_GT(v.at("hash"), 0.0);
  EXPECT_GT(v.at("at"), 0.0);
}

TEST(NelaModified, PunctuationSumsAtMostOne) {
  const std::vector<std::string> punct = {"exclamation", "question",   "period",      "comma",       "colon",
                                          "semicolon",   "dash",       "single_quote", "double_quote", "open_paren",
                                          "close_paren", "hash",       "at",          "pound",       "dollar",
                                          "ampersand",   "percentage"};
  for (const auto& t : kTexts) {
    const auto v = modified_nela_features(t, res());
    double s = 0.0;
    for (const auto& p : punct) s += v.at(p);
    EXPECT_LE(s, 1.0 + 1e-12) << t;
  }
}

TEST(Extractors, FiniteAndRanged) {
  for (auto g : {FeatureGroup::Fernandez, FeatureGroup::Abonizio, FeatureGroup::Liwc, FeatureGroup::Nela,
                 FeatureGroup::NelaModified}) {
    for (const auto& t : kTexts) {
      const auto v = extract_features(g, t, res());
      ASSERT_EQ(v.values.size(), v.schema->size());
      for (std::size_t i = 0; i < v.values.size(); ++i) {
        EXPECT_TRUE(std::isfinite(v.values[i])) << to_string(g) << " " << v.schema->names[i] << " " << t;
        const auto& n = v.schema->names[i];
        if (n.size() > 4 && n.ends_with("_pct")) {
          EXPECT_GE(v.values[i], 0.0);
          EXPECT_LE(v.values[i], 100.0);
        }
        if (n.ends_with("_count")) {
          EXPECT_GE(v.values[i], 0.0);
          EXPECT_EQ(v.values[i], std::floor(v.values[i])) << n;
        }
        if (n.starts_with("ratio_") || n == "ttr") {
          EXPECT_GE(v.values[i], 0.0);
          EXPECT_LE(v.values[i], 1.0);
        }
      }
    }
  }
}

TEST(Extractors, DegenerateText) {
  for (auto g : {FeatureGroup::Fernandez, FeatureGroup::Abonizio, FeatureGroup::Nela, FeatureGroup::NelaModified}) {
    EXPECT_EQ(kind_of([&] { extract_features(g, "  ... !!! ", res()); }), ErrorKind::DegenerateText);
  }
}

TEST(Monetisation, Append) {
  const auto v = fernandez_features("Some words here.", res());
  const auto w = append_monetisation(v, MonetisationFeatures{});
  ASSERT_EQ(w.values.size(), 38u);
  for (std::size_t i = 34; i < 38; ++i) EXPECT_EQ(w.values[i], 0.0);
  EXPECT_TRUE(w.schema->with_monetisation);
  const auto x = append_monetisation(v, MonetisationFeatures{3, 2, 1, 0});
  EXPECT_EQ(x.at("ads"), 3.0);
  EXPECT_EQ(x.at("twit"), 0.0);
  EXPECT_EQ(kind_of([&] { append_monetisation(w, MonetisationFeatures{}); }), ErrorKind::SchemaError);
}

TEST(Standardizer, HandComputed) {
  const auto m = Matrix::from_rows({{1, 5}, {2, 5}, {3, 5}});
  const auto s = Standardizer::fit(m);
  EXPECT_DOUBLE_EQ(s.means()[0], 2.0);
  EXPECT_NEAR(s.stds()[0], std::sqrt(2.0 / 3.0), 1e-15);
  const auto z = s.transform(m);
  EXPECT_NEAR(z(0, 0) + z(1, 0) + z(2, 0), 0.0, 1e-12);
  for (std::size_t r = 0; r < 3; ++r) EXPECT_EQ(z(r, 1), 0.0);
}

TEST(Standardizer, NotFitted) {
  Standardizer s;
  EXPECT_EQ(kind_of([&] { s.transform(Matrix(1, 1)); }), ErrorKind::NotFitted);
}

TEST(Standardizer, AffineInvariance) {
  Matrix x(20, 3);
  for (std::size_t r = 0; r < 20; ++r) {
    for (std::size_t c = 0; c < 3; ++c) x(r, c) = std::sin(double(r * 7 + c * 3)) * 10.0 + double(c);
  }
  Matrix y = x;
  for (std::size_t r = 0; r < 20; ++r) {
    for (std::size_t c = 0; c < 3; ++c) y(r, c) = 4.0 * x(r, c) - 7.0;
  }
  const auto zx = Standardizer::fit(x).transform(x);
  const auto zy = Standardizer::fit(y).transform(y);
  for (std::size_t c = 0; c < 3; ++c) {
    double mean = 0.0;
    for (std::size_t r = 0; r < 20; ++r) {
      mean += zx(r, c);
      EXPECT_NEAR(zx(r, c), zy(r, c), 1e-9);
    }
    EXPECT_NEAR(mean / 20.0, 0.0, 1e-9);
  }
}

TEST(FeatureCsv, RoundTrip) {
  FeatureTable t;
  t.schema = *with_monetisation(fernandez_schema());
  t.ids = {"a", "b,c"};
  t.labels = {0, 1};
  t.values = Matrix(2, t.schema.size());
  for (std::size_t c = 0; c < t.schema.size(); ++c) {
    t.values(0, c) = 0.1 * double(c);
    t.values(1, c) = 1.0 / 3.0 + double(c);
  }
  const auto dir = std::filesystem::temp_directory_path() / "fnkit_featcsv";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "f.csv").string();
  write_feature_csv(path, t);
  const auto back = read_feature_csv(path);
  EXPECT_EQ(back.ids, t.ids);
  EXPECT_EQ(back.labels, t.labels);
  EXPECT_EQ(back.schema.names, t.schema.names);
  EXPECT_EQ(back.schema.group, FeatureGroup::Fernandez);
  EXPECT_TRUE(back.schema.with_monetisation);
  EXPECT_EQ(back.values, t.values);
  std::filesystem::remove_all(dir);
}
