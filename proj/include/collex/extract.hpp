#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <semaphore>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "collex/phrase_matcher.hpp"

namespace collex::extract {

enum class EntityType { symptom };

std::string_view to_string(EntityType type) noexcept;

// A symptom span. Offsets are code point offsets into the pre-cleaned text,
// and surface is exactly that slice.
struct EntityMention {
  std::string tweet_id;
  std::string surface;
  std::size_t start = 0;
  std::size_t end = 0;
  EntityType type = EntityType::symptom;

  friend bool operator==(const EntityMention&, const EntityMention&) = default;
};

// Code point span [start, end) reported by an extractor.
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;

  friend bool operator==(const Span&, const Span&) = default;
};

// Emoji sequence -> textual alias (":face_with_medical_mask:").
class EmojiMap {
 public:
  // File lines: "<emoji>\t<alias>". The emoji column holds either the literal
  // character sequence or space-separated "U+XXXX" code points.
  static EmojiMap load(const std::filesystem::path& path);
  static EmojiMap parse(std::istream& in, const std::string& source);

  void add(std::u32string sequence, std::string alias);
  std::size_t size() const noexcept { return aliases_.size(); }

  // Longest sequence starting at `pos`; returns its length (0 if none).
  std::size_t match(std::u32string_view text, std::size_t pos, const std::string** alias) const;

 private:
  std::unordered_map<std::u32string, std::string> aliases_;
  std::size_t longest_ = 0;
};

// Strips "<...>" tags, replaces mapped emoji by their alias padded with
// spaces, collapses whitespace and trims. Idempotent.
std::string preclean_text(std::string_view text, const EmojiMap& emoji);

class Extractor {
 public:
  virtual ~Extractor() = default;
  virtual std::vector<Span> find_spans(std::string_view text) const = 0;
};

class Gazetteer {
 public:
  static Gazetteer load(const std::filesystem::path& path);
  static Gazetteer from_terms(const std::vector<std::string>& terms);

  const std::vector<std::string>& terms() const noexcept { return terms_; }
  const PhraseMatcher& matcher() const noexcept { return matcher_; }

 private:
  std::vector<std::string> terms_;  // phrase keys, in insertion order
  PhraseMatcher matcher_;
};

// Case-insensitive, whole-word, leftmost-longest gazetteer matching.
std::vector<EntityMention> gazetteer_extract(std::string_view text, const Gazetteer& gazetteer,
                                             std::string_view tweet_id = {});

class GazetteerExtractor : public Extractor {
 public:
  explicit GazetteerExtractor(Gazetteer gazetteer) : gazetteer_(std::move(gazetteer)) {}
  std::vector<Span> find_spans(std::string_view text) const override;

 private:
  Gazetteer gazetteer_;
};

struct RemoteConfig {
  std::string url;  // http://host:port/path
  std::chrono::milliseconds timeout{5000};
  unsigned max_in_flight = 8;
  std::string token;  // sent as X-Collex-Token when non-empty
};

// HTTP adapter for an externally served NER model. Request body
// {"text": ...}; response {"entities": [{"start", "end", "type"}]}.
class RemoteExtractor : public Extractor {
 public:
  explicit RemoteExtractor(RemoteConfig config);
  ~RemoteExtractor() override;

  std::vector<Span> find_spans(std::string_view text) const override;

 private:
  RemoteConfig config_;
  std::string scheme_host_port_;
  std::string path_;
  mutable std::unique_ptr<std::counting_semaphore<1024>> in_flight_;
};

// Runs the extractor and validates its spans. Failures surface as
// ExtractionError carrying the tweet id; an empty result means the tweet
// drops out of later stages.
std::vector<EntityMention> extract_entities(std::string_view tweet_id, std::string_view text,
                                            const Extractor& extractor);

inline constexpr std::string_view mentions_header = "tweet_id\tstart\tend\tsurface";
void write_mentions(std::ostream& out, const std::vector<EntityMention>& mentions);
std::vector<EntityMention> read_mentions(std::istream& in, const std::string& source);

}  // namespace collex::extract
