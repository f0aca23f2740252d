#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "collex/error.hpp"
#include "collex/mapping.hpp"
#include "oracles.hpp"

using namespace collex;
using namespace collex::mapping;

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

ConceptInventory abc_inventory() {
  return ConceptInventory::from_concepts({{"C2", "Beta", {"b"}},
                                          {"C1", "Alpha", {"abdominal cramp"}},
                                          {"C3", "Gamma", {}}});
}

EmbeddingStore store_2d(const std::vector<std::pair<std::string, std::vector<double>>>& rows) {
  EmbeddingStore s(2);
  for (const auto& [t, v] : rows) s.add(t, v);
  return s;
}

}  // namespace

TEST(Levenshtein, Examples) {
  EXPECT_EQ(levenshtein("kitten", "sitting"), 3u);
  EXPECT_EQ(levenshtein("fever", "fever"), 0u);
  EXPECT_EQ(levenshtein("abdominal cramp", "abdominal cramps"), 1u);
  EXPECT_EQ(levenshtein("", "abc"), 3u);
  EXPECT_EQ(levenshtein("naïve", "naive"), 1u);
}

TEST(Levenshtein, AgreesWithDpOracleAndBoundedVariant) {
  std::mt19937_64 gen(1);
  const std::u32string alphabet = U"abcé ";
  auto rand_str = [&] {
    std::u32string s(gen() % 12, U'a');
    for (auto& c : s) c = alphabet[gen() % alphabet.size()];
    return s;
  };
  for (int i = 0; i < 2000; ++i) {
    const auto a = rand_str(), b = rand_str();
    const auto d = oracle::edit_distance(a, b);
    ASSERT_EQ(levenshtein(a, b), d);
    for (std::size_t bound = 0; bound < 6; ++bound) {
      const auto got = levenshtein_bounded(a, b, bound);
      if (d <= bound) {
        ASSERT_EQ(got, d);
      } else {
        ASSERT_GT(got, bound);
      }
    }
  }
}

TEST(FuzzySimilarity, Examples) {
  EXPECT_DOUBLE_EQ(fuzzy_similarity("abdominal cramps", "abdominal cramp"), 0.9375);
  EXPECT_DOUBLE_EQ(fuzzy_similarity("x y", "x y"), 1.0);
  EXPECT_DOUBLE_EQ(fuzzy_similarity("a", "b"), 0.0);
}

TEST(Cosine, ExamplesAndErrors) {
  const std::vector<double> x{1, 0}, y{0, 1}, d{1, 1}, z{0, 0}, three{1, 2, 3};
  EXPECT_DOUBLE_EQ(cosine(x, x), 1.0);
  EXPECT_DOUBLE_EQ(cosine(x, y), 0.0);
  EXPECT_NEAR(cosine(x, d), 0.70710678, 1e-8);
  EXPECT_EQ(code_of([&] { cosine(x, z); }), ErrorCode::degenerate_vector);
  EXPECT_EQ(code_of([&] { cosine(x, three); }), ErrorCode::invalid_argument);
}

TEST(Inventory, ParsesAndValidates) {
  std::istringstream ok(
      "concept_id\tname\tis_preferred\nC1\tFever\t1\nC1\tpyrexia\t0\nC2\tCough\t1\n");
  const auto inv = ConceptInventory::parse(ok, "mem");
  EXPECT_EQ(inv.size(), 2u);
  EXPECT_EQ(inv.find_by_name("PYREXIA")->concept_id, "C1");
  std::istringstream two_pref("concept_id\tname\tis_preferred\nC1\tA\t1\nC1\tB\t1\n");
  EXPECT_EQ(code_of([&] { ConceptInventory::parse(two_pref, "mem"); }), ErrorCode::validation);
}

TEST(EmbeddingStore, ParseNormalizesAndRejectsZero) {
  std::istringstream in("dim 2\nfever\t3 4\n");
  const auto s = EmbeddingStore::parse(in, "mem");
  EXPECT_NEAR(s.find("Fever")[0], 0.6, 1e-12);
  std::istringstream zero("dim 2\nx\t0 0\n");
  EXPECT_EQ(code_of([&] { EmbeddingStore::parse(zero, "mem"); }), ErrorCode::degenerate_vector);
}

TEST(SemanticTop1, ExactVectorAngleAndTies) {
  const auto inv = abc_inventory();
  auto store = store_2d({{"alpha", {1, 0}},
                         {"abdominal cramp", {1, 0.2}},
                         {"beta", {0, 1}},
                         {"b", {0, 1}},
                         {"gamma", {1, 1}},
                         {"exact", {0, 1}},
                         {"near_alpha", {1, 0.1}},
                         {"tie", {-1, 1}}});
  auto c = semantic_top1("exact", inv, store);
  ASSERT_TRUE(c);
  EXPECT_EQ(c->concept_id, "C2");
  EXPECT_DOUBLE_EQ(c->score, 1.0);
  EXPECT_EQ(semantic_top1("near_alpha", inv, store)->concept_id, "C1");

  // Two concepts with the same vector tie; the smaller id wins.
  auto tie_store = store_2d({{"alpha", {1, 0}}, {"abdominal cramp", {1, 0}}, {"beta", {1, 0}},
                             {"b", {1, 0}}, {"gamma", {0, 1}}, {"q", {1, 0}}});
  EXPECT_EQ(semantic_top1("q", inv, tie_store)->concept_id, "C1");
  EXPECT_EQ(semantic_top1("tie", inv, store)->score, std::clamp(semantic_top1("tie", inv, store)->score, 0.0, 1.0));
}

TEST(SemanticTop1, MissingVectorsAreListed) {
  const auto inv = abc_inventory();
  auto store = store_2d({{"alpha", {1, 0}}, {"beta", {0, 1}}});
  try {
    Mapper m(inv, &store);
    FAIL();
  } catch (const MissingEmbeddingError& e) {
    EXPECT_EQ(e.code(), ErrorCode::missing_embedding);
    EXPECT_EQ(e.terms().size(), 3u);
  }
  const TrigramHashEmbedder fallback(1);
  const Mapper m(inv, &store, &fallback);
  EXPECT_TRUE(m.semantic("unknown lemma").has_value());
}

TEST(LexicalTop1, Examples) {
  const auto inv = abc_inventory();
  auto c = lexical_top1("abdominal cramps", inv);
  ASSERT_TRUE(c);
  EXPECT_EQ(c->concept_id, "C1");
  EXPECT_DOUBLE_EQ(c->score, 0.9375);
  EXPECT_DOUBLE_EQ(lexical_top1("B", inv)->score, 1.0);
  const auto single = ConceptInventory::from_concepts({{"C9", "zzz", {}}});
  EXPECT_EQ(lexical_top1("qqqqqq", single)->concept_id, "C9");
}

TEST(Top1, AgreesWithBruteForce) {
  std::mt19937_64 gen(21);
  for (int round = 0; round < 40; ++round) {
    std::vector<Concept> concepts;
    const int nc = 1 + static_cast<int>(gen() % 30);
    for (int i = 0; i < nc; ++i) {
      Concept c{"C" + std::to_string(1000 + gen() % 9000), "", {}};
      const auto name = [&] {
        std::string s(1 + gen() % 6, 'a');
        for (auto& ch : s) ch = "abcd"[gen() % 4];
        return s;
      };
      c.preferred_name = name();
      for (int k = 0; k < static_cast<int>(gen() % 3); ++k) c.synonyms.push_back(name());
      concepts.push_back(c);
    }
    std::sort(concepts.begin(), concepts.end(),
              [](const Concept& a, const Concept& b) { return a.concept_id < b.concept_id; });
    concepts.erase(std::unique(concepts.begin(), concepts.end(),
                               [](const Concept& a, const Concept& b) {
                                 return a.concept_id == b.concept_id;
                               }),
                   concepts.end());
    const auto inv = ConceptInventory::from_concepts(concepts);
    std::vector<oracle::FlatName> flat;
    for (const auto& n : inv.names()) flat.push_back({inv.concepts()[n.concept_index].concept_id, n.text});

    EmbeddingStore store(3);
    std::map<std::string, std::vector<double>> vecs;
    auto rand_vec = [&] {
      std::vector<double> v(3);
      for (auto& x : v) x = static_cast<double>(static_cast<int>(gen() % 5) - 2);
      if (v == std::vector<double>{0, 0, 0}) v[0] = 1;
      return v;
    };
    for (const auto& n : flat) {
      if (!vecs.contains(n.text)) {
        vecs[n.text] = rand_vec();
        store.add(n.text, vecs[n.text]);
      }
    }
    for (int l = 0; l < 20; ++l) {
      const std::string lemma = "l" + std::to_string(l);
      const auto v = rand_vec();
      store.add(lemma, v);
      const auto sem = semantic_top1(lemma, inv, store);
      const auto want = oracle::semantic_top1(v, flat, vecs);
      ASSERT_EQ(sem->concept_id, want->concept_id);
      ASSERT_NEAR(sem->score, want->score, 1e-12);

      std::string word(1 + gen() % 6, 'a');
      for (auto& ch : word) ch = "abcd"[gen() % 4];
      const auto lex = lexical_top1(word, inv);
      const auto lwant = oracle::lexical_top1(word, flat);
      ASSERT_EQ(lex->concept_id, lwant->concept_id) << word;
      ASSERT_EQ(lex->score, lwant->score);
    }
  }
}

TEST(SemanticTop1, ScaleInvariant) {
  const auto inv = abc_inventory();
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 50; ++i) {
    std::vector<std::pair<std::string, std::vector<double>>> rows;
    for (const auto* t : {"alpha", "abdominal cramp", "beta", "b", "gamma", "q"}) {
      rows.push_back({t, {u(gen), u(gen)}});
    }
    auto scaled = rows;
    for (auto& [t, v] : scaled) {
      for (auto& x : v) x *= 7.5;
    }
    EXPECT_EQ(semantic_top1("q", inv, store_2d(rows))->concept_id,
              semantic_top1("q", inv, store_2d(scaled))->concept_id);
  }
}

TEST(Combine, AgreementDisagreementAndThreshold) {
  const ThresholdConfig cfg;
  const MappingCandidate a_sem{"x", "A", 0.9, Channel::semantic};
  const MappingCandidate a_lex{"x", "A", 0.85, Channel::lexical};
  const MappingCandidate b_lex{"x", "B", 0.85, Channel::lexical};
  auto both = combine(a_sem, a_lex, cfg);
  ASSERT_EQ(both.size(), 1u);
  EXPECT_EQ(both[0].channel, Channel::both);
  auto split = combine(a_sem, b_lex, cfg);
  ASSERT_EQ(split.size(), 2u);
  EXPECT_EQ(split[0].concept_id, "A");
  EXPECT_EQ(split[1].concept_id, "B");
  const MappingCandidate low_s{"x", "A", 0.5, Channel::semantic};
  const MappingCandidate low_l{"x", "A", 0.5, Channel::lexical};
  EXPECT_TRUE(combine(low_s, low_l, cfg).empty());
  EXPECT_EQ(code_of([] { ThresholdConfig{1.5, 0.8}.validate(); }), ErrorCode::configuration);
}

TEST(Sweep, BoundariesMonotoneAndSynthetic) {
  std::vector<double> sem(100, 0.95), lex;
  sem.insert(sem.end(), 100, 0.5);
  const std::vector<double> taus{0.8};
  EXPECT_EQ(sweep_from_scores(sem, lex, taus).semantic[0], 100u);

  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> s(50), l(50);
    for (auto& x : s) x = u(gen);
    for (auto& x : l) x = u(gen);
    s[0] = 1.0;
    const auto taus_all = default_taus();
    const auto sw = sweep_from_scores(s, l, taus_all);
    EXPECT_EQ(sw.semantic.front(), 50u);
    for (std::size_t k = 1; k < taus_all.size(); ++k) {
      EXPECT_LE(sw.semantic[k], sw.semantic[k - 1]);
      EXPECT_LE(sw.lexical[k], sw.lexical[k - 1]);
      const auto brute = static_cast<std::uint64_t>(
          std::count_if(s.begin(), s.end(), [&](double x) { return x >= taus_all[k] - 1e-9; }));
      EXPECT_EQ(sw.semantic[k], brute);
    }
    EXPECT_GE(sw.semantic.back(), 1u);
  }
}

TEST(Elbow, Examples) {
  const std::vector<double> taus{0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  const std::vector<std::uint64_t> counts{1000, 980, 960, 940, 300, 280};
  EXPECT_DOUBLE_EQ(elbow(taus, counts), 0.8);
  EXPECT_DOUBLE_EQ(elbow(taus, counts), oracle::elbow(taus, counts));
  const std::vector<std::uint64_t> linear{60, 50, 40, 30, 20, 10};
  EXPECT_DOUBLE_EQ(elbow(taus, linear), 0.9);
  const std::vector<double> two{0.1, 0.2};
  const std::vector<std::uint64_t> two_counts{5, 1};
  EXPECT_EQ(code_of([&] { elbow(two, two_counts); }), ErrorCode::insufficient_data);
}

TEST(Candidates, RoundTripSorted) {
  const auto inv = abc_inventory();
  std::vector<MappingCandidate> c{{"z", "C2", 0.91, Channel::semantic},
                                  {"a", "C1", 1.0, Channel::both}};
  std::stringstream s;
  write_candidates(s, c, inv, 2);
  const auto back = read_candidates(s, "mem");
  EXPECT_EQ(back.round, 2);
  ASSERT_EQ(back.candidates.size(), 2u);
  EXPECT_EQ(back.candidates[0].lemma, "a");
  EXPECT_EQ(back.candidates[1].score, 0.91);
  c.push_back({"q", "C404", 0.9, Channel::semantic});
  std::stringstream bad;
  EXPECT_EQ(code_of([&] { write_candidates(bad, c, inv, 1); }), ErrorCode::not_found);
}
