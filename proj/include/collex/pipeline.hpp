#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "collex/analytics.hpp"
#include "collex/annotation.hpp"
#include "collex/corpus.hpp"
#include "collex/curation.hpp"
#include "collex/extract.hpp"
#include "collex/mapping.hpp"
#include "collex/normalize.hpp"

namespace collex::pipeline {

// File layout of a run directory.
struct RunLayout {
  std::filesystem::path dir;

  explicit RunLayout(std::filesystem::path d) : dir(std::move(d)) {}

  std::filesystem::path tweets() const { return dir / "tweets.jsonl"; }
  std::filesystem::path context() const { return dir / "context.tsv"; }
  std::filesystem::path ingest_stats() const { return dir / "ingest.json"; }
  std::filesystem::path mentions() const { return dir / "mentions.tsv"; }
  std::filesystem::path lemmas_all() const { return dir / "lemmas.all.tsv"; }
  std::filesystem::path lemmas() const { return dir / "lemmas.tsv"; }
  std::filesystem::path stats_text() const { return dir / "lemma-stats.txt"; }
  std::filesystem::path stats_tsv() const { return dir / "lemma-stats.tsv"; }
  std::filesystem::path sweep() const { return dir / "sweep.tsv"; }
  std::filesystem::path elbow() const { return dir / "elbow.json"; }
  std::filesystem::path state() const { return dir / "state.json"; }
  std::filesystem::path dictionary() const { return dir / "dictionary.tsv"; }
  std::filesystem::path triplets() const { return dir / "triplets.jsonl"; }
  std::filesystem::path matches() const { return dir / "match.json"; }
  std::filesystem::path report_tsv() const { return dir / "report.tsv"; }
  std::filesystem::path report_text() const { return dir / "report.txt"; }
  std::filesystem::path annotation() const { return dir / "annotation"; }
  std::filesystem::path journal() const { return dir / "journal.jsonl"; }
  std::filesystem::path round_dir(int round) const {
    return dir / "rounds" / std::to_string(round);
  }
  std::filesystem::path candidates(int round) const { return round_dir(round) / "candidates.tsv"; }
  std::filesystem::path sample(int round) const { return round_dir(round) / "sample.tsv"; }
  std::filesystem::path tasks(int round) const { return round_dir(round) / "tasks.jsonl"; }
  std::filesystem::path labels(int round) const { return round_dir(round) / "labels.tsv"; }
  std::filesystem::path round_triplets(int round) const {
    return round_dir(round) / "triplets.jsonl";
  }
  std::filesystem::path summary(int round) const { return round_dir(round) / "summary.json"; }
};

struct IngestStats {
  std::size_t records = 0;
  std::size_t malformed = 0;
  std::size_t admitted = 0;
  std::size_t dropped_lang = 0;
  std::size_t dropped_retweet = 0;
  std::size_t dropped_url = 0;
};

// Filters the corpus into tweets.jsonl and builds the context index.
IngestStats ingest(const std::filesystem::path& corpus, corpus::CorpusFormat format,
                   const corpus::FilterPolicy& policy, const RunLayout& run);

// Pre-cleans each ingested tweet and writes the mentions found in it. Offsets
// refer to the pre-cleaned text.
std::size_t extract_mentions(const RunLayout& run, const extract::Extractor& extractor,
                             const extract::EmojiMap& emoji, unsigned threads = 0);

struct NormalizeResult {
  normalize::LemmaTable all;
  normalize::LemmaTable filtered;
  normalize::FrequencyStats stats_all;
  std::optional<normalize::FrequencyStats> stats_filtered;
};

NormalizeResult normalize_mentions(std::span<const extract::EntityMention> mentions,
                                   const normalize::RuleSet& rules,
                                   const normalize::Lemmatizer& lemmatizer,
                                   std::uint64_t min_count, std::uint64_t seed,
                                   unsigned threads = 0);
// Reads mentions.tsv, writes both lemma tables and the frequency statistics.
NormalizeResult run_normalize(const RunLayout& run, const normalize::RuleSet& rules,
                              const normalize::Lemmatizer& lemmatizer, std::uint64_t min_count,
                              std::uint64_t seed, unsigned threads = 0);

normalize::LemmaTable load_lemmas(const std::filesystem::path& path);

struct SweepResult {
  mapping::Sweep sweep;
  std::optional<double> elbow_semantic;
  std::optional<double> elbow_lexical;
};

SweepResult run_sweep(const RunLayout& run, const mapping::Mapper& mapper, unsigned threads = 0);
// Sweep over precomputed scores (TSV columns semantic, lexical).
SweepResult sweep_scores(const std::filesystem::path& scores, const RunLayout& run);

curation::IterationState load_state(const RunLayout& run);
void save_state(const RunLayout& run, const curation::IterationState& state);

// Maps the pending lemmas of the current round. Starts the loop from
// lemmas.tsv when no state exists yet.
const curation::IterationState& map_round(curation::IterationState& state, const RunLayout& run,
                                          const mapping::Mapper& mapper,
                                          const curation::LoopConfig& config, unsigned threads = 0);

// Writes the validation sample of the current round.
std::size_t write_sample(const RunLayout& run, const curation::IterationState& state,
                         const mapping::ConceptInventory& inventory);

// Annotation tasks for every candidate of the current round.
std::vector<annotation::AnnotationTask> make_tasks(const RunLayout& run,
                                                   const curation::IterationState& state,
                                                   const mapping::ConceptInventory& inventory,
                                                   const std::vector<std::string>& annotators);

// Validates labels against the current round's candidates and stores them.
std::size_t import_labels(const RunLayout& run, const curation::IterationState& state,
                          std::vector<curation::LabeledPair> labels);

// Closes the current round from its stored labels (or, when absent, from the
// closed annotation round of the same number).
curation::RoundOutcome close_round(curation::IterationState& state, const RunLayout& run,
                                   const mapping::ConceptInventory& inventory);

curation::Dictionary load_dictionary(const std::filesystem::path& path);

// Pre-cleaned texts of a corpus file in file order.
std::vector<std::string> load_texts(const std::filesystem::path& corpus,
                                    const extract::EmojiMap& emoji);

analytics::MatchResult run_match(std::span<const std::string> texts,
                                 const curation::Dictionary& dictionary, const RunLayout& run,
                                 unsigned threads = 0);
analytics::MatchResult load_match(const std::filesystem::path& path);

analytics::FrequencyReport run_report(const analytics::MatchResult& matches,
                                      const curation::Dictionary& dictionary,
                                      const analytics::MergeMap* merge_map,
                                      std::uint64_t min_count, const RunLayout& run);

}  // namespace collex::pipeline
