#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "collex/analytics.hpp"
#include "collex/error.hpp"
#include "oracles.hpp"

using namespace collex;
using namespace collex::analytics;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no collex::Error thrown";
  return ErrorCode::integrity;
}

curation::Dictionary small_dictionary() {
  curation::Dictionary d;
  d.adopt("C_fev", "Fever", {"fever", {"fever", "feverish"}, 1, 1.0});
  d.adopt("C_cou", "Cough", {"cough", {"cough"}, 1, 1.0});
  d.adopt("C_dry", "Dry cough", {"dry cough", {"dry cough"}, 1, 1.0});
  return d;
}

MergeMap merge_map(const std::string& rows) {
  std::istringstream in("concept_name\tmerged_name\n" + rows);
  return MergeMap::parse(in, "mem");
}

}  // namespace

TEST(Match, OncePerTweetPerConcept) {
  const DictionaryMatcher m(small_dictionary());
  EXPECT_EQ(m.match("fever and fever again"), std::vector<std::string>{"C_fev"});
  EXPECT_EQ(m.match("Feverish, with a cough"), (std::vector<std::string>{"C_cou", "C_fev"}));
  EXPECT_EQ(m.match("a dry cough"), std::vector<std::string>{"C_dry"});
  EXPECT_TRUE(m.match("coughing feverless").empty());

  const std::vector<std::string> texts{"fever and fever", "cough fever", "nothing", "dry cough"};
  const auto r = match_corpus(texts, m, 2);
  EXPECT_EQ(r.tweets, 4u);
  EXPECT_EQ(r.matched_tweets, 3u);
  EXPECT_EQ(r.concept_counts.at("C_fev"), 2u);
  EXPECT_EQ(r.concept_counts.at("C_cou"), 1u);

  const std::vector<std::string> none{"a", "b"};
  const auto empty = match_corpus(none, m, 1);
  EXPECT_EQ(empty.matched_tweets, 0u);
  EXPECT_TRUE(empty.concept_counts.empty());
  EXPECT_EQ(code_of([] { DictionaryMatcher{curation::Dictionary{}}; }), ErrorCode::configuration);
}

TEST(Match, AgreesWithBruteForceOracleAndIsOrderFree) {
  std::mt19937_64 gen(17);
  const std::vector<std::string> words{"sore", "throat", "head", "ache", "dry", "cough", "it's",
                                       "fièvre", "x"};
  auto phrase = [&](std::size_t max_words) {
    std::string s;
    const auto n = 1 + gen() % max_words;
    for (std::size_t i = 0; i < n; ++i) s += (i ? (gen() % 6 ? " " : ", ") : "") + words[gen() % words.size()];
    return s;
  };
  for (int round = 0; round < 20; ++round) {
    curation::Dictionary d;
    std::vector<std::string> surfaces;
    std::vector<std::string> surface_concept;
    for (int c = 0; c < 6; ++c) {
      const std::string id = "C" + std::to_string(c);
      std::set<std::string> forms;
      for (int k = 0; k < 2; ++k) forms.insert(text::phrase_key(phrase(2)));
      for (const auto& f : forms) {
        bool taken = false;
        for (const auto& s : surfaces) taken = taken || s == f;
        if (taken) continue;
        surfaces.push_back(f);
        surface_concept.push_back(id);
      }
      std::vector<std::string> own;
      for (std::size_t i = 0; i < surfaces.size(); ++i) {
        if (surface_concept[i] == id) own.push_back(surfaces[i]);
      }
      if (!own.empty()) d.adopt(id, "name" + id, {"lemma" + id, own, 1, 1.0});
    }
    const DictionaryMatcher m(d);
    std::vector<std::string> texts;
    for (int t = 0; t < 50; ++t) texts.push_back(phrase(10));

    MatchResult want;
    want.tweets = texts.size();
    for (const auto& t : texts) {
      std::set<std::string> concepts;
      for (const auto& h : oracle::find_all(t, surfaces)) concepts.insert(surface_concept[h.pattern]);
      ASSERT_EQ(m.match(t), std::vector<std::string>(concepts.begin(), concepts.end())) << t;
      if (!concepts.empty()) ++want.matched_tweets;
      for (const auto& c : concepts) ++want.concept_counts[c];
    }
    EXPECT_EQ(match_corpus(texts, m, 3), want);
    std::shuffle(texts.begin(), texts.end(), gen);
    EXPECT_EQ(match_corpus(texts, m, 1), want);
  }
}

TEST(Merge, TableRowsAndIdentity) {
  const auto mm = merge_map("Tired\tFatigue\nDry cough\tCough\n");
  EXPECT_EQ(merge({{"Tired", 5}, {"Fatigue", 7}}, mm), (std::map<std::string, std::uint64_t>{{"Fatigue", 12}}));
  EXPECT_EQ(merge({{"Dry cough", 2}, {"Cough", 3}}, mm), (std::map<std::string, std::uint64_t>{{"Cough", 5}}));
  const std::map<std::string, std::uint64_t> counts{{"A", 1}, {"B", 2}};
  EXPECT_EQ(merge(counts, MergeMap{}), counts);
}

TEST(Merge, ConservesMassOnFuzzedMaps) {
  std::mt19937_64 gen(23);
  for (int round = 0; round < 200; ++round) {
    MergeMap mm;
    std::map<std::string, std::uint64_t> counts;
    std::uint64_t expected = 0;
    for (int i = 0; i < 20; ++i) counts["s" + std::to_string(gen() % 30)] = gen() % 1000;
    for (int i = 0; i < 10; ++i) mm.add("s" + std::to_string(gen() % 30), "m" + std::to_string(gen() % 4));
    for (const auto& [name, n] : counts) {
      const auto k = mm.targets(name).size();
      expected += n * (k == 0 ? 1 : k);
    }
    std::uint64_t total = 0;
    for (const auto& [name, n] : merge(counts, mm)) total += n;
    EXPECT_EQ(total, expected);
    if (mm.single_valued()) {
      std::uint64_t raw = 0;
      for (const auto& [name, n] : counts) raw += n;
      EXPECT_EQ(total, raw);
    }
  }
}

TEST(Merge, BundledAssetLoads) {
  const auto mm = MergeMap::load(COLLEX_ASSET_DIR "/symptom-merge.tsv");
  EXPECT_GT(mm.size(), 10u);
  EXPECT_EQ(mm.targets("unable to breathe"), std::vector<std::string>{"Shortness of breath"});
}

TEST(Report, FormattingThresholdAndOrder) {
  EXPECT_EQ(format_percent(259323, 2761058), "9.4%");
  EXPECT_EQ(format_thousands(2761058), "2,761,058");
  EXPECT_EQ(format_thousands(999), "999");
  EXPECT_EQ(format_thousands(1000), "1,000");
  EXPECT_EQ(format_percent(1, 0), "N/A");

  const auto r = report({{"Fever", 259323}, {"Rare", 499}, {"Edge", 500}, {"Cough", 259323}}, 2761058);
  ASSERT_EQ(r.rows.size(), 3u);
  EXPECT_EQ(r.rows[0].symptom, "Cough");
  EXPECT_EQ(r.rows[1].symptom, "Fever");
  EXPECT_EQ(r.rows[2].symptom, "Edge");
  EXPECT_EQ(format_cell(r.rows[1]), "259323 (9.4%)");
  for (const auto& row : r.rows) {
    EXPECT_GE(row.count, 500u);
    EXPECT_GE(row.percent, 0.0);
    EXPECT_LE(row.percent, 100.0);
  }
  const auto zero = report({{"A", 0}}, 10);
  EXPECT_TRUE(zero.rows.empty());
  EXPECT_EQ(zero.n, 10u);
  EXPECT_EQ(code_of([] { report({{"A", 3}}, 0); }), ErrorCode::integrity);

  const auto text = render_report_text(r);
  EXPECT_NE(text.find("259323 (9.4%)"), std::string::npos);
  EXPECT_NE(text.find("N=2,761,058"), std::string::npos);
}

TEST(Report, TsvRoundTrip) {
  const auto r = report({{"Fever", 900}, {"Cough", 600}}, 5000);
  std::stringstream s;
  write_report_tsv(s, r);
  const auto back = read_report_tsv(s, "mem");
  EXPECT_EQ(back.n, r.n);
  ASSERT_EQ(back.rows.size(), 2u);
  EXPECT_EQ(back.rows[0].symptom, "Fever");
  EXPECT_EQ(back.rows[1].count, 600u);
}

TEST(Compare, NotApplicableCells) {
  const auto a = report({{"Fever", 900}, {"Anaphylaxis", 700}}, 5000);
  const auto b = report({{"Pyrexia", 800}, {"Loss of taste", 600}}, 3000);
  const auto c = compare(a, b, {{"Pyrexia", "Fever"}});
  ASSERT_EQ(c.rows.size(), 3u);
  EXPECT_EQ(c.rows[0].symptom, "Fever");
  EXPECT_TRUE(c.rows[0].b);
  EXPECT_FALSE(c.rows[1].b);
  EXPECT_FALSE(c.rows[2].a);
  std::ostringstream out;
  write_comparison_tsv(out, c, "ours", "who");
  const auto tsv = out.str();
  EXPECT_NE(tsv.find("symptom\tours\twho\n"), std::string::npos);
  EXPECT_NE(tsv.find("Anaphylaxis\t700 (14.0%)\tN/A\n"), std::string::npos);
  EXPECT_NE(tsv.find("Loss of taste\tN/A\t600 (20.0%)\n"), std::string::npos);

  const auto same = compare(a, a);
  for (const auto& row : same.rows) EXPECT_EQ(format_cell(*row.a), format_cell(*row.b));
  const auto empty_b = compare(a, FrequencyReport{});
  for (const auto& row : empty_b.rows) EXPECT_FALSE(row.b);
}
