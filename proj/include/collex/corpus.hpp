#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace collex::corpus {

using Timestamp = std::chrono::sys_seconds;

struct Tweet {
  std::string id;
  std::string text;
  std::string lang;
  Timestamp created_at{};
  bool is_retweet = false;
  bool has_url = false;

  friend bool operator==(const Tweet&, const Tweet&) = default;
};

struct FilterPolicy {
  std::set<std::string> allowed_langs{"en"};
  bool drop_retweets = true;
  bool drop_url_tweets = true;

  // Throws ErrorCode::configuration when allowed_langs is empty.
  void validate() const;
};

enum class CorpusFormat { jsonl, tsv };

// "jsonl"/"json" or "tsv"; throws ErrorCode::invalid_argument otherwise.
CorpusFormat parse_format(std::string_view name);
// Guesses from the file extension (.tsv -> tsv, anything else -> jsonl).
CorpusFormat format_for_path(const std::filesystem::path& path);

// Substring scan used when a record carries no has_url field.
bool text_has_url(std::string_view text) noexcept;

std::optional<Timestamp> parse_timestamp(std::string_view iso8601);
std::string format_timestamp(Timestamp ts);

// Streaming reader. Malformed lines are counted and skipped; when the stream
// ends with more than half of its records malformed, next() throws
// ErrorCode::corpus_format because the input is probably in the wrong format.
class TweetReader {
 public:
  TweetReader(std::istream& in, CorpusFormat format, std::string source = "<stream>");

  std::optional<Tweet> next();

  std::size_t records() const noexcept { return records_; }
  std::size_t skipped() const noexcept { return skipped_; }

 private:
  std::optional<Tweet> parse_json(std::string_view line) const;
  std::optional<Tweet> parse_tsv(std::string_view line) const;
  void read_tsv_header();

  std::istream& in_;
  CorpusFormat format_;
  std::string source_;
  std::size_t records_ = 0;
  std::size_t skipped_ = 0;
  bool header_read_ = false;
  bool finished_ = false;
  std::vector<int> tsv_columns_;  // id, text, lang, created_at, is_retweet, has_url
};

struct LoadResult {
  std::vector<Tweet> tweets;
  std::size_t skipped = 0;
};

LoadResult load_tweets(std::istream& in, CorpusFormat format, std::string source = "<stream>");
LoadResult load_tweets(const std::filesystem::path& path, CorpusFormat format);

bool admit(const Tweet& tweet, const FilterPolicy& policy);

std::string to_jsonl(const Tweet& tweet);
std::string to_tsv_row(const Tweet& tweet);
inline constexpr std::string_view tsv_header = "id\ttext\tlang\tcreated_at\tis_retweet\thas_url";

// Persistent id -> text index over admitted tweets, kept sorted by id so that
// the serialized form is a pure function of the tweet set.
class ContextIndex {
 public:
  ContextIndex() = default;

  // Throws ErrorCode::corpus_integrity when two tweets share an id.
  static ContextIndex build(std::span<const Tweet> tweets);
  static ContextIndex load(const std::filesystem::path& path);

  std::string serialize() const;
  void save(const std::filesystem::path& path) const;

  std::optional<std::string_view> lookup(std::string_view id) const;
  std::size_t size() const noexcept { return entries_.size(); }
  const std::vector<std::pair<std::string, std::string>>& entries() const noexcept {
    return entries_;
  }

  // Ids (ascending) of tweets containing any of `phrases` as a whole-word,
  // case-insensitive match.
  std::vector<std::string> find_containing(std::span<const std::string> phrases) const;

  // At most `limit` ids drawn without replacement from find_containing(),
  // deterministic under `seed`, returned in ascending id order.
  std::vector<std::string> sample_containing(std::span<const std::string> phrases,
                                             std::size_t limit, std::uint64_t seed) const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

}  // namespace collex::corpus
