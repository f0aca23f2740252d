#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "collex/curation.hpp"
#include "collex/phrase_matcher.hpp"

namespace collex::analytics {

// Multi-pattern matcher over every surface form in a dictionary.
class DictionaryMatcher {
 public:
  // Throws ErrorCode::configuration for an empty dictionary.
  explicit DictionaryMatcher(const curation::Dictionary& dictionary);

  // Concept indices (into concept_ids()) hit by the text, ascending, each
  // once.
  void match(std::string_view text, std::vector<std::uint32_t>& hits) const;
  std::vector<std::string> match(std::string_view text) const;

  const std::vector<std::string>& concept_ids() const noexcept { return concept_ids_; }
  const std::vector<std::string>& concept_names() const noexcept { return concept_names_; }

 private:
  PhraseMatcher matcher_;
  std::vector<std::string> concept_ids_;
  std::vector<std::string> concept_names_;
  std::vector<std::vector<std::uint32_t>> pattern_concepts_;
};

struct MatchResult {
  std::uint64_t tweets = 0;
  std::uint64_t matched_tweets = 0;                       // N
  std::map<std::string, std::uint64_t> concept_counts;   // concept_id -> tweets

  friend bool operator==(const MatchResult&, const MatchResult&) = default;
};

// Counts each concept once per tweet. Texts are expected pre-cleaned.
MatchResult match_corpus(std::span<const std::string> texts, const DictionaryMatcher& matcher,
                         unsigned threads = 0);
void merge_into(MatchResult& total, const MatchResult& part);

// concept name (or id) -> merged symptom name(s). A name may map to several
// merged symptoms; unmapped names pass through unchanged.
class MergeMap {
 public:
  // TSV columns concept_name, merged_name.
  static MergeMap load(const std::filesystem::path& path);
  static MergeMap parse(std::istream& in, const std::string& source);

  void add(std::string_view name, std::string merged);
  // Empty when the name is unmapped.
  const std::vector<std::string>& targets(std::string_view name) const;
  std::size_t size() const noexcept { return map_.size(); }
  bool single_valued() const noexcept;

 private:
  std::unordered_map<std::string, std::vector<std::string>> map_;  // phrase key -> targets
};

// Sums counts under merged names. With a single-valued map the total is
// conserved; a name with k targets contributes its count k times.
std::map<std::string, std::uint64_t> merge(const std::map<std::string, std::uint64_t>& counts,
                                           const MergeMap& merge_map);

// Concept-id counts keyed by the dictionary's concept names.
std::map<std::string, std::uint64_t> counts_by_name(const MatchResult& result,
                                                    const curation::Dictionary& dictionary);

struct ReportRow {
  std::string symptom;
  std::uint64_t count = 0;
  double percent = 0;
};

struct FrequencyReport {
  std::uint64_t n = 0;
  std::vector<ReportRow> rows;  // count descending, then name
};

// Keeps rows with count >= min_count; percent is against N. Throws
// ErrorCode::integrity when N is 0 but some count is not.
FrequencyReport report(const std::map<std::string, std::uint64_t>& counts, std::uint64_t n,
                       std::uint64_t min_count = 500);

std::string format_percent(std::uint64_t count, std::uint64_t n);  // "9.4%"
std::string format_thousands(std::uint64_t value);                 // "2,761,058"
std::string format_cell(const ReportRow& row);                     // "259323 (9.4%)"

void write_report_tsv(std::ostream& out, const FrequencyReport& report);
FrequencyReport read_report_tsv(std::istream& in, const std::string& source);
std::string render_report_text(const FrequencyReport& report);

struct ComparisonRow {
  std::string symptom;
  std::optional<ReportRow> a;
  std::optional<ReportRow> b;
};

struct Comparison {
  std::uint64_t n_a = 0;
  std::uint64_t n_b = 0;
  std::vector<ComparisonRow> rows;  // a's order, then b-only rows in b's order
};

// `alignment` renames b's symptoms into a's naming before joining.
Comparison compare(const FrequencyReport& a, const FrequencyReport& b,
                   const std::map<std::string, std::string>& alignment = {});

inline constexpr std::string_view not_applicable = "N/A";
void write_comparison_tsv(std::ostream& out, const Comparison& comparison,
                          std::string_view label_a = "A", std::string_view label_b = "B");

}  // namespace collex::analytics
