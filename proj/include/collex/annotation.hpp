#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "collex/corpus.hpp"
#include "collex/curation.hpp"

namespace collex::annotation {

inline constexpr std::size_t annotator_count = 3;
inline constexpr std::size_t context_limit = 10;

struct PairRef {
  std::string lemma;
  std::string concept_id;
  std::string concept_name;
  std::vector<std::string> surfaces;  // raw forms used to find context tweets
};

struct AnnotationTask {
  std::string pair_id;
  std::string lemma;
  std::string concept_id;
  std::string concept_name;
  std::vector<std::string> surfaces;
  std::vector<std::string> context_tweets;
  int set_index = 0;
  std::array<std::string, 2> assigned_annotators;
  bool low_context = false;
};

// Pair ids ("r<round>-<nnnn>") follow (lemma, concept_id) order. Pairs are
// then shuffled into three sets whose sizes differ by at most one; set i goes
// to annotators i and (i + 1) mod 3. Throws ErrorCode::configuration unless
// exactly three distinct annotators are given, and ErrorCode::insufficient_data
// for fewer than three pairs.
std::vector<AnnotationTask> split_and_assign(std::vector<PairRef> pairs,
                                             const std::vector<std::string>& annotators,
                                             std::uint64_t seed, int round = 1);

// Up to ten tweets containing any raw surface of the lemma.
void attach_context(AnnotationTask& task, const corpus::ContextIndex& index, std::uint64_t seed);

struct AnnotationRecord {
  std::string pair_id;
  std::string annotator_id;
  int label = 0;
  std::string timestamp;
};

struct KappaResult {
  double kappa = 0;
  double observed_agreement = 0;
  double expected_agreement = 0;
  std::size_t n_items = 0;
  bool degenerate = false;  // expected agreement of 1
};

// Labels in {0, 1, 2}, aligned by position. Throws ErrorCode::empty_input on
// empty input and ErrorCode::invalid_argument on a length mismatch.
KappaResult cohen_kappa(std::span<const int> a, std::span<const int> b);
// Over the pairs both raters labeled.
KappaResult cohen_kappa(const std::map<std::string, int>& a, const std::map<std::string, int>& b);

struct TwoLabels {
  std::string pair_id;
  int first = 0;
  int second = 0;
};

struct Resolution {
  int label = 0;
  std::string note;  // required when the label matches neither rater
};

struct FinalLabel {
  std::string pair_id;
  int label = 0;
  bool adjudicated = false;
  std::string note;

  friend bool operator==(const FinalLabel&, const FinalLabel&) = default;
};

// Agreeing pairs finalize as is; disagreements take their resolution. Throws
// ErrorCode::incomplete_adjudication listing unresolved pair ids, and
// ErrorCode::validation for a resolution outside the two labels without a
// note.
std::vector<FinalLabel> adjudicate(std::span<const TwoLabels> pairs,
                                   const std::map<std::string, Resolution>& resolutions);

struct SanityItem {
  std::string concept_id;
  std::string concept_name;
  std::string lemma;
  std::vector<std::string> surfaces;
  std::vector<std::string> context_tweets;
};

std::vector<SanityItem> sanity_sample(const curation::Dictionary& dictionary, std::size_t n,
                                      const corpus::ContextIndex& index, std::uint64_t seed);

// "95%" style rendering of correct / total; one decimal when not whole.
std::string render_accuracy(std::size_t correct, std::size_t total);

nlohmann::ordered_json to_json(const AnnotationTask& task);
AnnotationTask task_from_json(const nlohmann::json& j);

struct Ack {
  bool overwritten = false;
  std::size_t annotator_done = 0;
  std::size_t annotator_total = 0;
};

struct Disagreement {
  std::string pair_id;
  std::string lemma;
  std::string concept_id;
  std::array<std::string, 2> annotators;
  std::array<int, 2> labels{};
  std::optional<Resolution> resolution;
};

struct RoundKappa {
  std::array<std::optional<KappaResult>, annotator_count> per_set;
  std::optional<KappaResult> weighted;  // n-weighted mean over sets
};

// Round bookkeeping behind the HTTP API. Every mutation is appended to a
// JSON Lines journal under `dir` before it is applied; a snapshot is written
// every `snapshot_every` events, and opening the directory replays snapshot
// plus journal tail. Reads take a shared lock, writes an exclusive one.
class RoundService {
 public:
  using Clock = std::function<std::string()>;

  explicit RoundService(std::filesystem::path dir, Clock clock = {},
                        std::size_t snapshot_every = 100);

  void open_round(int round, std::vector<AnnotationTask> tasks);
  bool has_round(int round) const;
  std::vector<int> rounds() const;

  std::optional<AnnotationTask> next_task(int round, const std::string& annotator) const;
  AnnotationTask task(const std::string& pair_id) const;
  std::optional<int> label_of(const std::string& pair_id, const std::string& annotator) const;

  Ack record_label(AnnotationRecord record);
  void resolve(int round, const std::string& pair_id, Resolution resolution);

  nlohmann::ordered_json progress(int round) const;
  RoundKappa kappa(int round) const;
  std::vector<Disagreement> disagreements(int round, bool unresolved_only = false) const;

  // Final labels for every pair. Throws ErrorCode::incomplete_round when a
  // pair lacks one of its two labels and ErrorCode::incomplete_adjudication
  // when a disagreement has no resolution.
  std::vector<FinalLabel> final_labels(int round) const;
  std::vector<curation::LabeledPair> export_labels(int round) const;
  void close(int round);
  bool closed(int round) const;

  // Audit trail of overwritten labels: (pair, annotator, old, new, time).
  nlohmann::ordered_json audit(int round) const;

  std::size_t events() const;

 private:
  struct PairState {
    AnnotationTask task;
    std::map<std::string, int> labels;  // annotator -> label
    std::optional<Resolution> resolution;
  };
  struct Round {
    std::vector<std::string> order;  // pair ids
    std::map<std::string, PairState> pairs;
    nlohmann::ordered_json audit = nlohmann::ordered_json::array();
    bool closed = false;
  };

  void apply(const nlohmann::json& event);
  void append(const nlohmann::ordered_json& event);
  void snapshot_locked();
  nlohmann::ordered_json snapshot_json() const;
  void load_snapshot(const nlohmann::json& doc);
  const Round& round_ref(int round) const;
  const PairState& pair_ref(const std::string& pair_id) const;
  std::vector<FinalLabel> final_labels_locked(int round) const;

  std::filesystem::path dir_;
  Clock clock_;
  std::size_t snapshot_every_;
  mutable std::shared_mutex mutex_;
  std::map<int, Round> rounds_;
  std::map<std::string, int> pair_round_;
  std::size_t events_ = 0;
  std::ofstream journal_;
};

}  // namespace collex::annotation
