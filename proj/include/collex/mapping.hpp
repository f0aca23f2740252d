#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace collex::mapping {

struct Concept {
  std::string concept_id;
  std::string preferred_name;
  std::vector<std::string> synonyms;  // excludes the preferred name
};

class ConceptInventory {
 public:
  struct Name {
    std::uint32_t concept_index = 0;
    std::string text;
    std::u32string folded;  // phrase key as code points
  };

  // TSV columns concept_id, name, is_preferred (0/1); one row per name.
  static ConceptInventory load(const std::filesystem::path& path);
  static ConceptInventory parse(std::istream& in, const std::string& source);
  static ConceptInventory from_concepts(std::vector<Concept> concepts);

  // Ascending concept_id.
  const std::vector<Concept>& concepts() const noexcept { return concepts_; }
  // Grouped by concept in concepts() order, preferred name first.
  const std::vector<Name>& names() const noexcept { return names_; }
  std::size_t size() const noexcept { return concepts_.size(); }
  bool empty() const noexcept { return concepts_.empty(); }

  const Concept* find(std::string_view concept_id) const;
  // Case- and whitespace-insensitive; a name shared by several concepts
  // resolves to the smallest concept_id.
  const Concept* find_by_name(std::string_view name) const;

 private:
  std::vector<Concept> concepts_;
  std::vector<Name> names_;
  std::unordered_map<std::string, std::uint32_t> id_index_;
  std::unordered_map<std::string, std::uint32_t> name_index_;
};

// Unit-normalized term vectors. Lookups try the exact term first, then its
// phrase key.
class EmbeddingStore {
 public:
  explicit EmbeddingStore(std::size_t dimension = 0);

  // First line "dim <d>", then "term<TAB>d space-separated floats".
  static EmbeddingStore load(const std::filesystem::path& path);
  static EmbeddingStore parse(std::istream& in, const std::string& source);

  // Normalizes `vector`; throws ErrorCode::degenerate_vector for a zero
  // vector and ErrorCode::validation on a dimension mismatch.
  void add(std::string term, std::span<const double> vector);

  std::size_t dimension() const noexcept { return dim_; }
  std::size_t size() const noexcept { return index_.size(); }
  std::span<const double> find(std::string_view term) const;
  bool contains(std::string_view term) const { return !find(term).empty(); }

 private:
  std::size_t dim_;
  std::vector<double> data_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Source of vectors for terms the store lacks.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::vector<double> embed(std::string_view term, std::size_t dimension) const = 0;
};

// Character-trigram feature hashing with random signs, unit-normalized.
// Deterministic, but only a stand-in for a trained biomedical encoder.
class TrigramHashEmbedder : public Embedder {
 public:
  explicit TrigramHashEmbedder(std::uint64_t seed = 0) : seed_(seed) {}
  std::vector<double> embed(std::string_view term, std::size_t dimension) const override;

 private:
  std::uint64_t seed_;
};

// Edit distance over code points.
std::size_t levenshtein(std::string_view a, std::string_view b);
std::size_t levenshtein(std::u32string_view a, std::u32string_view b);
// Exact distance when it is <= bound, otherwise bound + 1.
std::size_t levenshtein_bounded(std::u32string_view a, std::u32string_view b, std::size_t bound);

// 1 - d / max(|a|, |b|) over code points; 1 when both are empty.
double fuzzy_similarity(std::string_view a, std::string_view b);

// Throws ErrorCode::degenerate_vector on a zero vector and
// ErrorCode::invalid_argument on a dimension mismatch.
double cosine(std::span<const double> u, std::span<const double> v);

enum class Channel { semantic, lexical, both };
std::string_view to_string(Channel channel) noexcept;
Channel parse_channel(std::string_view text);

struct MappingCandidate {
  std::string lemma;
  std::string concept_id;
  double score = 0;
  Channel channel = Channel::semantic;

  friend bool operator==(const MappingCandidate&, const MappingCandidate&) = default;
};

struct ThresholdConfig {
  double tau_semantic = 0.8;
  double tau_lexical = 0.8;

  void validate() const;
};

// Scores within this distance of a threshold count as reaching it, so that
// 1 - 1/5 clears 0.8 regardless of rounding.
inline constexpr double threshold_slack = 1e-9;
inline bool reaches(double score, double tau) noexcept { return score >= tau - threshold_slack; }

// Batch mapper over a fixed inventory. Name vectors are resolved once at
// construction; lemma vectors per call. Missing vectors are fetched from the
// fallback embedder when one is given, otherwise reported with
// MissingEmbeddingError. All queries are const and thread-safe.
class Mapper {
 public:
  Mapper(const ConceptInventory& inventory, const EmbeddingStore* store,
         const Embedder* fallback = nullptr);

  const ConceptInventory& inventory() const noexcept { return inventory_; }
  bool has_semantic() const noexcept { return store_ != nullptr; }

  std::optional<MappingCandidate> semantic(std::string_view lemma) const;
  // Skips names that cannot reach `floor`; returns nothing when no name does.
  std::optional<MappingCandidate> lexical(std::string_view lemma, double floor = 0.0) const;
  std::vector<MappingCandidate> ensemble(std::string_view lemma, const ThresholdConfig& cfg) const;

  struct Top1 {
    std::optional<MappingCandidate> semantic;
    std::optional<MappingCandidate> lexical;
  };
  std::vector<Top1> top1_all(std::span<const std::string> lemmas, unsigned threads = 0) const;

  // Throws MissingEmbeddingError listing every lemma without a vector.
  void require_vectors(std::span<const std::string> lemmas) const;

 private:
  std::vector<double> lemma_vector(std::string_view lemma) const;

  const ConceptInventory& inventory_;
  const EmbeddingStore* store_;
  const Embedder* fallback_;
  std::vector<std::vector<double>> name_vectors_;
};

std::optional<MappingCandidate> semantic_top1(std::string_view lemma,
                                              const ConceptInventory& inventory,
                                              const EmbeddingStore& store,
                                              const Embedder* fallback = nullptr);
std::optional<MappingCandidate> lexical_top1(std::string_view lemma,
                                             const ConceptInventory& inventory);
std::vector<MappingCandidate> ensemble_map(std::string_view lemma,
                                           const ConceptInventory& inventory,
                                           const EmbeddingStore& store,
                                           const ThresholdConfig& cfg,
                                           const Embedder* fallback = nullptr);

// Merges two channel top-1 results under the thresholds.
std::vector<MappingCandidate> combine(const std::optional<MappingCandidate>& semantic,
                                      const std::optional<MappingCandidate>& lexical,
                                      const ThresholdConfig& cfg);

struct Sweep {
  std::vector<double> taus;
  std::vector<std::uint64_t> semantic;
  std::vector<std::uint64_t> lexical;
};

std::vector<double> default_taus();

// Counts of top-1 scores reaching each tau, per channel. taus ascending.
Sweep sweep_from_scores(std::span<const double> semantic_scores,
                        std::span<const double> lexical_scores, std::span<const double> taus);
Sweep threshold_sweep(std::span<const std::string> lemmas, const Mapper& mapper,
                      std::span<const double> taus, unsigned threads = 0);

// tau where the drop between consecutive counts grows the most (discrete
// second difference); ties go to the larger tau. Requires >= 3 points on a
// uniform ascending grid.
double elbow(std::span<const double> taus, std::span<const std::uint64_t> counts);

void write_sweep(std::ostream& out, const Sweep& sweep);
Sweep read_sweep(std::istream& in, const std::string& source);

inline constexpr std::string_view candidates_header =
    "lemma\tconcept_id\tconcept_name\tscore\tchannel\tround";

struct CandidateFile {
  int round = 0;
  std::vector<MappingCandidate> candidates;
};

// Rows sorted by lemma, then concept_id.
void write_candidates(std::ostream& out, std::vector<MappingCandidate> candidates,
                      const ConceptInventory& inventory, int round);
CandidateFile read_candidates(std::istream& in, const std::string& source);

std::string format_score(double score);

}  // namespace collex::mapping
