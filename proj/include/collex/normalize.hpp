#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace collex::normalize {

struct RewriteRule {
  std::vector<std::string> sources;
  std::string target;  // empty target deletes the matched phrase
  int order = 0;
};

// Ordered rule table compiled to token sequences. Matching is whole-token,
// which is what padding the pattern and the text with single spaces achieves
// for plain substring replacement.
class RuleSet {
 public:
  // TSV with header "sources<TAB>target"; sources are comma-separated.
  static RuleSet load(const std::filesystem::path& path);
  static RuleSet parse(std::istream& in, const std::string& source);
  static RuleSet from_rules(std::vector<RewriteRule> rules);

  const std::vector<RewriteRule>& rules() const noexcept { return rules_; }

  // Passes over the full table before giving up with ErrorCode::rule_cycle.
  static constexpr int max_passes = 10;

 private:
  friend std::string apply_rules(std::string_view, const RuleSet&);
  friend bool rewrite_tokens(std::vector<std::string>&, const RuleSet&, std::string_view);

  struct CompiledSource {
    std::vector<std::string> tokens;
  };
  struct CompiledRule {
    std::vector<CompiledSource> sources;  // longest first, then file order
    std::vector<std::string> target;
  };

  std::vector<RewriteRule> rules_;
  std::vector<CompiledRule> compiled_;
  std::unordered_map<std::string, std::vector<std::uint32_t>> rules_by_first_token_;
};

// Splits on whitespace; each comma is a token of its own.
std::vector<std::string> tokenize(std::string_view phrase);
// Inverse of tokenize(): single spaces, no space before a comma.
std::string render(const std::vector<std::string>& tokens);

// Lowercases, drops parenthesized content, removes punctuation other than
// commas, asterisks and apostrophes, then applies the rule table to a
// fixpoint. Throws ErrorCode::rule_cycle naming the phrase if no fixpoint is
// reached within RuleSet::max_passes.
std::string apply_rules(std::string_view phrase, const RuleSet& rules);

class Lemmatizer {
 public:
  virtual ~Lemmatizer() = default;
  virtual std::string lemma(std::string_view token) const = 0;
};

// English inflection stripping: plural -s/-es/-ies, -ing/-ed with consonant
// doubling undone, plus an exceptions table that wins over the rules.
// Numeric tokens lemmatize to "number".
class SuffixLemmatizer : public Lemmatizer {
 public:
  SuffixLemmatizer() = default;
  explicit SuffixLemmatizer(std::unordered_map<std::string, std::string> exceptions)
      : exceptions_(std::move(exceptions)) {}

  // TSV lines "word<TAB>lemma".
  static SuffixLemmatizer load(const std::filesystem::path& path);

  std::string lemma(std::string_view token) const override;

 private:
  std::unordered_map<std::string, std::string> exceptions_;
};

// Lemmatizes every token, drops "number" tokens and re-applies the rules.
std::string lemmatize(std::string_view phrase, const Lemmatizer& lemmatizer, const RuleSet& rules);

// Splits a raw surface on commas that are not inside parentheses.
std::vector<std::string> split_phrases(std::string_view surface);

// Surface -> lemmas pipeline with a per-instance memo. Not thread-safe; use
// one instance per worker.
class Normalizer {
 public:
  Normalizer(const RuleSet& rules, const Lemmatizer& lemmatizer)
      : rules_(rules), lemmatizer_(lemmatizer) {}

  // One entry per comma-separated piece: (piece surface, lemma). Pieces that
  // normalize to nothing come back with an empty lemma.
  const std::vector<std::pair<std::string, std::string>>& normalize(std::string_view surface);

 private:
  const RuleSet& rules_;
  const Lemmatizer& lemmatizer_;
  std::unordered_map<std::string, std::vector<std::pair<std::string, std::string>>> memo_;
};

struct LemmaMention {
  std::string tweet_id;
  std::string surface;
  std::string lemma;
};

struct LemmaRecord {
  std::string lemma;
  std::uint64_t count = 0;
  std::map<std::string, std::uint64_t> surface_forms;
  std::vector<std::string> sample_tweet_ids;  // ascending

  friend bool operator==(const LemmaRecord&, const LemmaRecord&) = default;
};

inline constexpr std::size_t default_sample_cap = 50;

// lemma -> record. Sample ids are the `cap` ids with the smallest seeded
// hash, which makes the sample independent of insertion order and lets
// partial tables from parallel workers merge exactly.
class LemmaTable {
 public:
  explicit LemmaTable(std::size_t sample_cap = default_sample_cap, std::uint64_t seed = 0)
      : cap_(sample_cap), seed_(seed) {}

  void add(std::string_view lemma, std::string_view surface, std::string_view tweet_id,
           std::uint64_t count = 1);
  void merge(const LemmaTable& other);

  // Inserts a finished record (used when reading tables back from disk).
  void insert(LemmaRecord record);

  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }
  const LemmaRecord* find(std::string_view lemma) const;
  std::uint64_t total_count() const noexcept;

  // Records with ids materialized; ordered by lemma.
  std::vector<LemmaRecord> records() const;
  std::vector<std::uint64_t> counts() const;

  std::size_t sample_cap() const noexcept { return cap_; }
  std::uint64_t seed() const noexcept { return seed_; }

 private:
  struct Entry {
    LemmaRecord record;
    std::set<std::pair<std::uint64_t, std::string>> sample;
  };
  void offer(Entry& entry, std::string_view tweet_id);

  std::size_t cap_;
  std::uint64_t seed_;
  std::map<std::string, Entry, std::less<>> records_;
};

LemmaTable aggregate(std::span<const LemmaMention> mentions,
                     std::size_t sample_cap = default_sample_cap, std::uint64_t seed = 0);

// Keeps records with count >= min_count (min_count >= 1).
LemmaTable frequency_filter(const LemmaTable& table, std::uint64_t min_count = 10);

struct FrequencyStats {
  double mean = 0;
  double std_dev = 0;  // population
  double minimum = 0;
  double q1 = 0;
  double median = 0;
  double q3 = 0;
  double maximum = 0;
};

// Linear-interpolation quartiles over the sorted counts. Throws
// ErrorCode::empty_input on an empty table.
FrequencyStats summarize(const LemmaTable& table);
FrequencyStats summarize(std::vector<std::uint64_t> counts);

// Two-column layout: all lemmas versus lemmas with >= min_count occurrences.
// An empty `frequent` (no lemma reached min_count) renders as "-".
std::string render_stats_text(const FrequencyStats& all,
                              const std::optional<FrequencyStats>& frequent,
                              std::uint64_t min_count);
std::string render_stats_tsv(const FrequencyStats& all,
                             const std::optional<FrequencyStats>& frequent,
                             std::uint64_t min_count);

inline constexpr std::string_view lemma_table_header = "lemma\tcount\tsurfaces\tsample_ids";
// Rows ordered by count descending, then lemma.
void write_lemma_table(std::ostream& out, const LemmaTable& table);
LemmaTable read_lemma_table(std::istream& in, const std::string& source);

}  // namespace collex::normalize
