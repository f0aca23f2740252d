#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "collex/mapping.hpp"
#include "collex/normalize.hpp"

namespace collex::curation {

using mapping::MappingCandidate;

// 0 = wrong concept, 1 = correct concept, 2 = not a symptom.
inline constexpr int label_incorrect = 0;
inline constexpr int label_correct = 1;
inline constexpr int label_not_symptom = 2;

bool valid_label(int label) noexcept;

struct LabeledPair {
  std::string lemma;
  std::string concept_id;
  int label = 0;

  friend bool operator==(const LabeledPair&, const LabeledPair&) = default;
};

// Uniform sample without replacement. The input is put in (lemma,
// concept_id) order first, so the result depends only on the candidate set
// and the seed. Throws ErrorCode::empty_input on no candidates.
std::vector<MappingCandidate> sample_for_validation(std::vector<MappingCandidate> candidates,
                                                    std::size_t n = 50, std::uint64_t seed = 0);

enum class Decision { proceed, stop };

struct ExitEvaluation {
  Decision decision = Decision::proceed;
  double accuracy = 0;
  std::size_t correct = 0;
  std::size_t incorrect = 0;
  std::size_t not_symptom = 0;
};

// accuracy = correct / (correct + incorrect); label-2 pairs are left out.
// Throws ErrorCode::undefined_accuracy when every label is 2 and
// ErrorCode::empty_input on an empty sample.
ExitEvaluation evaluate_exit(std::span<const int> labels, double exit_accuracy);

struct Partition {
  std::map<std::string, std::set<std::string>> positives;  // concept_id -> P(u)
  std::map<std::string, std::set<std::string>> negatives;  // concept_id -> N(u)
  std::set<std::string> removed;  // lemmas labeled 2 and never labeled 1
};

// Throws ErrorCode::adjudication_integrity when one pair carries two
// different labels.
Partition partition_annotations(std::span<const LabeledPair> records);

struct TrainingTriplet {
  std::string query;
  std::vector<std::string> positives;
  std::vector<std::string> negatives;

  friend bool operator==(const TrainingTriplet&, const TrainingTriplet&) = default;
};

struct TripletResult {
  std::vector<TrainingTriplet> triplets;  // by concept_id
  std::vector<std::string> skipped;       // concepts with no negative source
};

// One triplet per concept with labeled pairs. Empty P(u) falls back to the
// concept's own name; empty N(u) to k lemmas drawn from other concepts'
// positives.
TripletResult build_triplets(const Partition& partition, const mapping::ConceptInventory& inventory,
                             std::uint64_t seed = 0, std::size_t k = 3);

nlohmann::ordered_json to_json(const TrainingTriplet& triplet);
void write_triplets(std::ostream& out, const std::vector<TrainingTriplet>& triplets);
std::vector<TrainingTriplet> read_triplets(std::istream& in, const std::string& source);

struct DictionaryEntry {
  std::string lemma;
  std::vector<std::string> surfaces;  // sorted, non-empty
  int round = 0;
  double score = 0;

  friend bool operator==(const DictionaryEntry&, const DictionaryEntry&) = default;
};

class Dictionary {
 public:
  // Adds `entry` under the concept. Re-adding a lemma to its own concept is a
  // no-op; adding it under another concept throws ErrorCode::conflict.
  void adopt(const std::string& concept_id, const std::string& concept_name,
             DictionaryEntry entry);

  const std::map<std::string, std::map<std::string, DictionaryEntry>>& entries() const noexcept {
    return entries_;
  }
  const std::string& concept_name(const std::string& concept_id) const;
  const std::string* concept_of(const std::string& lemma) const;
  std::size_t lemma_count() const noexcept { return owner_.size(); }
  std::size_t concept_count() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return owner_.empty(); }

  friend bool operator==(const Dictionary&, const Dictionary&) = default;

 private:
  std::map<std::string, std::map<std::string, DictionaryEntry>> entries_;
  std::map<std::string, std::string> names_;
  std::map<std::string, std::string> owner_;  // lemma -> concept_id
};

inline constexpr std::string_view dictionary_header =
    "concept_id\tconcept_name\tlemma\tsurfaces\tround\tscore";
void write_dictionary(std::ostream& out, const Dictionary& dictionary);
Dictionary read_dictionary(std::istream& in, const std::string& source);

// Adds every P(u) lemma under u, with its surface forms from the lemma table
// and its candidate score.
void accumulate(Dictionary& dictionary, const Partition& partition,
                const normalize::LemmaTable& lemmas, std::span<const MappingCandidate> candidates,
                const mapping::ConceptInventory& inventory, int round);

inline constexpr std::string_view labels_header = "lemma\tconcept_id\tfinal_label";
void write_labels(std::ostream& out, std::vector<LabeledPair> labels);
std::vector<LabeledPair> read_labels(std::istream& in, const std::string& source);

struct LoopConfig {
  std::size_t sample_size = 50;
  double exit_accuracy = 0.10;
  int max_rounds = 10;
  std::uint64_t seed = 0;
  std::size_t negatives_k = 3;
  mapping::ThresholdConfig thresholds;

  void validate() const;
};

enum class LoopStatus { awaiting_mapping, awaiting_labels, complete, stopped };
std::string_view to_string(LoopStatus status) noexcept;

struct RoundRecord {
  int round = 0;
  std::size_t mapped_lemmas = 0;
  std::size_t unmapped_lemmas = 0;
  std::size_t candidates = 0;
  std::size_t sampled = 0;
  std::optional<ExitEvaluation> exit;
  std::size_t adopted = 0;
  std::size_t removed = 0;
  std::size_t carried = 0;
  std::string outcome;
};

struct IterationState {
  int round = 1;
  LoopStatus status = LoopStatus::awaiting_mapping;
  LoopConfig config;
  std::size_t initial_count = 0;
  std::set<std::string> pending;
  std::set<std::string> adopted;
  std::set<std::string> removed;
  std::set<std::string> abandoned;
  std::vector<MappingCandidate> candidates;  // current round
  std::vector<MappingCandidate> sample;      // current round
  Dictionary dictionary;
  std::vector<RoundRecord> history;

  // adopted + abandoned + removed + pending == initial_count, and the sets
  // are pairwise disjoint. Throws ErrorCode::integrity otherwise.
  void check_conservation() const;
};

IterationState start_loop(const normalize::LemmaTable& filtered, const LoopConfig& config);

// Maps the pending lemmas, drops the ones no channel keeps (abandoned) and
// draws the validation sample.
void open_round(IterationState& state, const mapping::Mapper& mapper, unsigned threads = 0);

struct RoundOutcome {
  ExitEvaluation exit;
  Partition partition;
  TripletResult triplets;
};

// Applies the final labels of the current round. Labels must cover every
// sampled pair (ErrorCode::incomplete_round otherwise) and may only name
// pairs proposed this round.
RoundOutcome close_round(IterationState& state, std::span<const LabeledPair> labels,
                         const normalize::LemmaTable& lemmas,
                         const mapping::ConceptInventory& inventory);

nlohmann::ordered_json to_json(const IterationState& state);
IterationState state_from_json(const nlohmann::json& doc);

}  // namespace collex::curation
