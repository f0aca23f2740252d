#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "collex/curation.hpp"
#include "collex/error.hpp"

using namespace collex;
using namespace collex::curation;
using mapping::Channel;
using mapping::Concept;
using mapping::ConceptInventory;

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

std::vector<MappingCandidate> candidates(std::size_t n) {
  std::vector<MappingCandidate> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({"l" + std::to_string(i), "C" + std::to_string(i % 4), 0.9, Channel::semantic});
  }
  return out;
}

std::set<std::string> as_set(const std::vector<std::string>& v) { return {v.begin(), v.end()}; }

ConceptInventory cramps_inventory() {
  return ConceptInventory::from_concepts({{"C_abd", "abdominal cramps", {}},
                                          {"C_fev", "fever", {"pyrexia"}},
                                          {"C_cou", "cough", {}}});
}

}  // namespace

TEST(Sample, SmallSetsReturnedWholeAndDeterministic) {
  auto c = candidates(10);
  EXPECT_EQ(sample_for_validation(c, 50, 1).size(), 10u);
  const auto big = candidates(200);
  const auto a = sample_for_validation(big, 50, 9);
  EXPECT_EQ(a.size(), 50u);
  EXPECT_EQ(a, sample_for_validation(big, 50, 9));
  auto shuffled = big;
  std::shuffle(shuffled.begin(), shuffled.end(), std::mt19937_64(2));
  EXPECT_EQ(a, sample_for_validation(shuffled, 50, 9));
  std::set<std::string> distinct;
  for (const auto& s : a) distinct.insert(s.lemma);
  EXPECT_EQ(distinct.size(), 50u);
  EXPECT_EQ(code_of([] { sample_for_validation({}, 5, 0); }), ErrorCode::empty_input);
  EXPECT_EQ(code_of([&] { sample_for_validation(c, 0, 0); }), ErrorCode::invalid_argument);
}

TEST(Sample, OneOfThreeIsUniform) {
  const auto c = candidates(3);
  std::map<std::string, int> freq;
  const int trials = 10000;
  for (int s = 0; s < trials; ++s) ++freq[sample_for_validation(c, 1, static_cast<std::uint64_t>(s))[0].lemma];
  const double expect = trials / 3.0;
  const double sigma = std::sqrt(trials * (1.0 / 3) * (2.0 / 3));
  ASSERT_EQ(freq.size(), 3u);
  for (const auto& [lemma, n] : freq) EXPECT_LT(std::abs(n - expect), 3 * sigma) << lemma;
}

TEST(Exit, Examples) {
  std::vector<int> sixteen(42, 0);
  sixteen.insert(sixteen.end(), 8, 1);
  auto e = evaluate_exit(sixteen, 0.10);
  EXPECT_EQ(e.decision, Decision::proceed);
  EXPECT_DOUBLE_EQ(e.accuracy, 0.16);

  EXPECT_EQ(evaluate_exit(std::vector<int>(50, 0), 0.01).decision, Decision::stop);

  std::vector<int> half(25, 0);
  half.insert(half.end(), 25, 1);
  e = evaluate_exit(half, 0.10);
  EXPECT_EQ(e.decision, Decision::proceed);
  EXPECT_DOUBLE_EQ(e.accuracy, 0.5);

  const std::vector<int> with_twos{1, 2, 2, 0};
  e = evaluate_exit(with_twos, 0.6);
  EXPECT_DOUBLE_EQ(e.accuracy, 0.5);
  EXPECT_EQ(e.not_symptom, 2u);
  EXPECT_EQ(e.decision, Decision::stop);

  EXPECT_EQ(code_of([] { evaluate_exit(std::vector<int>{2, 2}, 0.1); }), ErrorCode::undefined_accuracy);
  EXPECT_EQ(code_of([] { evaluate_exit(std::vector<int>{}, 0.1); }), ErrorCode::empty_input);
}

TEST(Partition, LabelsRouteToSets) {
  const std::vector<LabeledPair> r{{"ab cramp", "C_abd", 1},
                                   {"belly full", "C_abd", 0},
                                   {"lol", "C_fev", 2},
                                   {"ab cramp", "C_abd", 1}};
  const auto p = partition_annotations(r);
  EXPECT_TRUE(p.positives.at("C_abd").contains("ab cramp"));
  EXPECT_TRUE(p.negatives.at("C_abd").contains("belly full"));
  EXPECT_TRUE(p.removed.contains("lol"));
  const std::vector<LabeledPair> clash{{"x", "C1", 1}, {"x", "C1", 0}};
  EXPECT_EQ(code_of([&] { partition_annotations(clash); }), ErrorCode::adjudication_integrity);
}

TEST(Partition, PositiveAndNegativeNeverOverlap) {
  std::mt19937_64 gen(13);
  for (int round = 0; round < 200; ++round) {
    std::map<std::pair<std::string, std::string>, int> final_labels;
    for (int i = 0; i < 30; ++i) {
      final_labels[{"l" + std::to_string(gen() % 15), "C" + std::to_string(gen() % 4)}] =
          static_cast<int>(gen() % 3);
    }
    std::vector<LabeledPair> rec;
    for (const auto& [k, v] : final_labels) rec.push_back({k.first, k.second, v});
    const auto p = partition_annotations(rec);
    for (const auto& [c, pos] : p.positives) {
      if (!p.negatives.contains(c)) continue;
      for (const auto& l : pos) EXPECT_FALSE(p.negatives.at(c).contains(l));
    }
  }
}

TEST(Triplets, ReproducesTheWorkedTuple) {
  Partition p;
  p.positives["C_abd"] = {"abdominal cramping", "abdominal cramp", "ab cramp"};
  p.negatives["C_abd"] = {"abdomen hurt", "abdominal trauma", "belly full"};
  const auto r = build_triplets(p, cramps_inventory());
  ASSERT_EQ(r.triplets.size(), 1u);
  const auto& t = r.triplets[0];
  EXPECT_EQ(t.query, "abdominal cramps");
  EXPECT_EQ(as_set(t.positives),
            (std::set<std::string>{"abdominal cramping", "abdominal cramp", "ab cramp"}));
  EXPECT_EQ(as_set(t.negatives),
            (std::set<std::string>{"abdomen hurt", "abdominal trauma", "belly full"}));
}

TEST(Triplets, EmptyPositivesFallBackToTheConceptName) {
  Partition p;
  p.negatives["C_fev"] = {"x"};
  const auto r = build_triplets(p, cramps_inventory());
  ASSERT_EQ(r.triplets.size(), 1u);
  EXPECT_EQ(r.triplets[0].positives, std::vector<std::string>{"fever"});
  EXPECT_EQ(r.triplets[0].negatives, std::vector<std::string>{"x"});
}

TEST(Triplets, EmptyNegativesDrawFromOtherConcepts) {
  Partition p;
  p.positives["C_abd"] = {"ab cramp", "shared"};
  p.positives["C_fev"] = {"feverish", "hot", "burning up", "shared", "chills"};
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto r = build_triplets(p, cramps_inventory(), seed, 3);
    ASSERT_EQ(r.triplets.size(), 2u);
    const auto& abd = r.triplets[0];
    EXPECT_EQ(abd.query, "abdominal cramps");
    EXPECT_EQ(abd.negatives.size(), 3u);
    for (const auto& n : abd.negatives) {
      EXPECT_TRUE(p.positives["C_fev"].contains(n));
      EXPECT_FALSE(p.positives["C_abd"].contains(n));
    }
    for (const auto& t : r.triplets) {
      for (const auto& n : t.negatives) EXPECT_FALSE(as_set(t.positives).contains(n));
    }
    EXPECT_EQ(r.triplets, build_triplets(p, cramps_inventory(), seed, 3).triplets);
  }
}

TEST(Triplets, NoNegativeSourceIsSkipped) {
  Partition p;
  p.positives["C_abd"] = {"ab cramp"};
  const auto r = build_triplets(p, cramps_inventory());
  EXPECT_TRUE(r.triplets.empty());
  EXPECT_EQ(r.skipped, std::vector<std::string>{"C_abd"});
}

TEST(Triplets, JsonLinesRoundTrip) {
  const std::vector<TrainingTriplet> t{{"q", {"a", "b"}, {"c"}}, {"r", {"d"}, {"e", "f"}}};
  std::stringstream s;
  write_triplets(s, t);
  EXPECT_EQ(s.str().substr(0, s.str().find('\n')),
            R"({"query":"q","positives":["a","b"],"negatives":["c"]})");
  EXPECT_EQ(read_triplets(s, "mem"), t);
}

TEST(Dictionary, AdoptIsIdempotentAndConflictsAreReported) {
  Dictionary d;
  d.adopt("C1", "Fever", {"fever", {"fever", "Fevers"}, 1, 1.0});
  d.adopt("C1", "Fever", {"fever", {"fever", "Fevers"}, 1, 1.0});
  EXPECT_EQ(d.lemma_count(), 1u);
  EXPECT_EQ(code_of([&] { d.adopt("C2", "Cough", {"fever", {"fever"}, 2, 0.9}); }),
            ErrorCode::conflict);
  EXPECT_EQ(*d.concept_of("fever"), "C1");
}

TEST(Dictionary, AccumulateCarriesSurfacesAndIsIdempotent) {
  normalize::LemmaTable lemmas;
  lemmas.add("ab cramp", "ab cramps", "1");
  lemmas.add("ab cramp", "Ab Cramp", "2");
  lemmas.add("ab cramp", "ab-cramp", "3");
  lemmas.add("feverish", "feverish", "4");
  Partition p;
  p.positives["C_abd"] = {"ab cramp"};
  p.positives["C_fev"] = {"feverish"};
  const std::vector<MappingCandidate> c{{"ab cramp", "C_abd", 0.92, Channel::semantic},
                                        {"feverish", "C_fev", 0.85, Channel::lexical}};
  Dictionary d;
  accumulate(d, p, lemmas, c, cramps_inventory(), 1);
  EXPECT_EQ(d.lemma_count(), 2u);
  EXPECT_EQ(d.entries().at("C_abd").at("ab cramp").surfaces.size(), 3u);
  const auto before = d;
  accumulate(d, p, lemmas, c, cramps_inventory(), 1);
  EXPECT_EQ(d, before);

  std::stringstream s;
  write_dictionary(s, d);
  EXPECT_EQ(s.str().substr(0, s.str().find('\n')), dictionary_header);
  EXPECT_EQ(read_dictionary(s, "mem"), d);
}

TEST(Labels, RoundTripSorted) {
  std::vector<LabeledPair> l{{"b", "C2", 0}, {"a", "C1", 2}};
  std::stringstream s;
  write_labels(s, l);
  const auto back = read_labels(s, "mem");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].lemma, "a");
  std::istringstream bad(std::string(labels_header) + "\nx\tC1\t3\n");
  EXPECT_EQ(code_of([&] { read_labels(bad, "mem"); }), ErrorCode::validation);
}

namespace {

// Six lemmas: three spell a concept name exactly, three sit on another
// concept's vector but are wrong.
struct SixLemmaFixture {
  ConceptInventory inventory = ConceptInventory::from_concepts(
      {{"C1", "fever", {}}, {"C2", "cough", {}}, {"C3", "headache", {}}});
  mapping::EmbeddingStore store{2};
  normalize::LemmaTable lemmas;

  SixLemmaFixture() {
    store.add("fever", std::vector<double>{1, 0});
    store.add("cough", std::vector<double>{0, 1});
    store.add("headache", std::vector<double>{1, 1});
    for (const auto* l : {"fever", "cough", "headache"}) lemmas.add(l, l, "t", 20);
    const std::vector<std::pair<const char*, std::vector<double>>> wrong{
        {"sneeze", {0, 1}}, {"dizzy", {1, 1}}, {"rash", {1, 0}}};
    for (const auto& [l, v] : wrong) {
      store.add(l, v);
      lemmas.add(l, l, "t", 20);
    }
  }
};

}  // namespace

TEST(Loop, RoundOneAdoptsExactMatchesAndCarriesRejections) {
  SixLemmaFixture f;
  const mapping::Mapper mapper(f.inventory, &f.store);
  auto state = start_loop(f.lemmas, LoopConfig{});
  EXPECT_EQ(state.initial_count, 6u);
  open_round(state, mapper, 1);
  ASSERT_EQ(state.status, LoopStatus::awaiting_labels);
  EXPECT_EQ(state.sample.size(), state.candidates.size());

  std::vector<LabeledPair> labels;
  for (const auto& c : state.candidates) {
    labels.push_back({c.lemma, c.concept_id, f.inventory.find_by_name(c.lemma) ? 1 : 0});
  }
  const auto out = close_round(state, labels, f.lemmas, f.inventory);
  EXPECT_EQ(out.exit.decision, Decision::proceed);
  EXPECT_EQ(state.adopted, (std::set<std::string>{"cough", "fever", "headache"}));
  EXPECT_EQ(state.pending, (std::set<std::string>{"dizzy", "rash", "sneeze"}));
  EXPECT_EQ(state.round, 2);
  EXPECT_EQ(state.status, LoopStatus::awaiting_mapping);
  EXPECT_EQ(out.triplets.triplets.size(), 3u);
  state.check_conservation();
}

TEST(Loop, AllCorrectCompletesAndStopFreezesDictionary) {
  SixLemmaFixture f;
  const mapping::Mapper mapper(f.inventory, &f.store);
  auto state = start_loop(f.lemmas, LoopConfig{});
  open_round(state, mapper, 1);
  std::vector<LabeledPair> all_one;
  for (const auto& c : state.candidates) all_one.push_back({c.lemma, c.concept_id, 1});
  auto done = state;
  close_round(done, all_one, f.lemmas, f.inventory);
  EXPECT_EQ(done.status, LoopStatus::complete);
  EXPECT_TRUE(done.pending.empty());

  std::vector<LabeledPair> all_zero;
  for (const auto& c : state.candidates) all_zero.push_back({c.lemma, c.concept_id, 0});
  close_round(state, all_zero, f.lemmas, f.inventory);
  EXPECT_EQ(state.status, LoopStatus::stopped);
  EXPECT_TRUE(state.dictionary.empty());
  EXPECT_EQ(state.abandoned.size(), 6u);
  EXPECT_EQ(code_of([&] { open_round(state, mapper, 1); }), ErrorCode::conflict);
}

TEST(Loop, MissingSampleLabelsAndForeignPairsAreRejected) {
  SixLemmaFixture f;
  const mapping::Mapper mapper(f.inventory, &f.store);
  auto state = start_loop(f.lemmas, LoopConfig{});
  open_round(state, mapper, 1);
  std::vector<LabeledPair> partial{{state.sample[0].lemma, state.sample[0].concept_id, 1}};
  EXPECT_EQ(code_of([&] { close_round(state, partial, f.lemmas, f.inventory); }),
            ErrorCode::incomplete_round);
  std::vector<LabeledPair> foreign{{"nope", "C1", 1}};
  EXPECT_EQ(code_of([&] { close_round(state, foreign, f.lemmas, f.inventory); }),
            ErrorCode::validation);
}

TEST(Loop, ConservationHoldsOnFuzzedRuns) {
  std::mt19937_64 gen(77);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int run = 0; run < 30; ++run) {
    std::vector<Concept> concepts;
    mapping::EmbeddingStore store(3);
    for (int c = 0; c < 5; ++c) {
      const std::string name = "concept" + std::to_string(c);
      concepts.push_back({"C" + std::to_string(c), name, {}});
      store.add(name, std::vector<double>{u(gen), u(gen), u(gen) + 2});
    }
    const auto inv = ConceptInventory::from_concepts(concepts);
    normalize::LemmaTable lemmas;
    for (int l = 0; l < 40; ++l) {
      const std::string lemma = "lemma" + std::to_string(l);
      store.add(lemma, std::vector<double>{u(gen), u(gen), u(gen) + 2});
      lemmas.add(lemma, lemma, "t", 10);
    }
    LoopConfig cfg;
    cfg.sample_size = 1 + gen() % 20;
    cfg.max_rounds = 1 + static_cast<int>(gen() % 5);
    cfg.seed = gen();
    cfg.thresholds.tau_semantic = 0.9;
    const mapping::Mapper mapper(inv, &store);
    auto state = start_loop(lemmas, cfg);
    std::set<std::string> ever_adopted;
    while (state.status == LoopStatus::awaiting_mapping) {
      open_round(state, mapper, 1);
      if (state.status != LoopStatus::awaiting_labels) break;
      std::vector<LabeledPair> labels;
      for (const auto& c : state.candidates) {
        if (gen() % 3 == 0 && std::find(state.sample.begin(), state.sample.end(), c) == state.sample.end()) {
          continue;
        }
        labels.push_back({c.lemma, c.concept_id, static_cast<int>(gen() % 3)});
      }
      // One final label per lemma keeps adoption unambiguous.
      std::set<std::string> positive;
      for (auto& l : labels) {
        if (l.label == 1 && !positive.insert(l.lemma).second) l.label = 0;
      }
      try {
        close_round(state, labels, lemmas, inv);
      } catch (const Error& e) {
        ASSERT_EQ(e.code(), ErrorCode::undefined_accuracy);
        break;
      }
      for (const auto& a : state.adopted) ever_adopted.insert(a);
      ASSERT_EQ(state.adopted.size() + state.abandoned.size() + state.removed.size() +
                    state.pending.size(),
                state.initial_count);
      for (const auto& p : state.pending) ASSERT_EQ(state.dictionary.concept_of(p), nullptr);
    }
    EXPECT_EQ(state.dictionary.lemma_count(), state.adopted.size());
    EXPECT_EQ(ever_adopted, state.adopted);
  }
}

TEST(Loop, StateJsonRoundTrips) {
  SixLemmaFixture f;
  const mapping::Mapper mapper(f.inventory, &f.store);
  auto state = start_loop(f.lemmas, LoopConfig{});
  open_round(state, mapper, 1);
  std::vector<LabeledPair> labels;
  for (const auto& c : state.candidates) {
    labels.push_back({c.lemma, c.concept_id, f.inventory.find_by_name(c.lemma) ? 1 : 2});
  }
  close_round(state, labels, f.lemmas, f.inventory);
  const auto doc = to_json(state);
  const auto back = state_from_json(nlohmann::json::parse(doc.dump()));
  EXPECT_EQ(to_json(back).dump(), doc.dump());
  EXPECT_EQ(back.dictionary, state.dictionary);
  EXPECT_EQ(back.removed, state.removed);
}
