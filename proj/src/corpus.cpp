#include "collex/corpus.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <istream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "collex/error.hpp"
#include "collex/io.hpp"
#include "collex/phrase_matcher.hpp"
#include "collex/rng.hpp"
#include "collex/text.hpp"

namespace collex::corpus {

namespace fs = std::filesystem;
using json = nlohmann::json;

void FilterPolicy::validate() const {
  if (allowed_langs.empty()) {
    throw Error(ErrorCode::configuration, "filter policy needs at least one allowed language");
  }
}

CorpusFormat parse_format(std::string_view name) {
  if (name == "jsonl" || name == "json") return CorpusFormat::jsonl;
  if (name == "tsv") return CorpusFormat::tsv;
  throw Error(ErrorCode::invalid_argument, fmt::format("unknown corpus format '{}'", name));
}

CorpusFormat format_for_path(const fs::path& path) {
  return path.extension() == ".tsv" ? CorpusFormat::tsv : CorpusFormat::jsonl;
}

bool text_has_url(std::string_view text) noexcept {
  return text.find("http://") != std::string_view::npos ||
         text.find("https://") != std::string_view::npos ||
         text.find("www.") != std::string_view::npos;
}

namespace {

bool read_int(std::string_view s, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > s.size()) return false;
  const char* first = s.data() + pos;
  const auto [ptr, ec] = std::from_chars(first, first + len, out);
  return ec == std::errc{} && ptr == first + len;
}

}  // namespace

std::optional<Timestamp> parse_timestamp(std::string_view s) {
  using namespace std::chrono;
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
  if (!read_int(s, 0, 4, y) || s.size() < 10 || s[4] != '-' || !read_int(s, 5, 2, mo) ||
      s[7] != '-' || !read_int(s, 8, 2, d)) {
    return std::nullopt;
  }
  std::size_t pos = 10;
  if (pos < s.size()) {
    if (s[pos] != 'T' && s[pos] != ' ') return std::nullopt;
    if (!read_int(s, pos + 1, 2, h) || s.size() < pos + 9 || s[pos + 3] != ':' ||
        !read_int(s, pos + 4, 2, mi) || s[pos + 6] != ':' || !read_int(s, pos + 7, 2, sec)) {
      return std::nullopt;
    }
    pos += 9;
    if (pos < s.size() && s[pos] == '.') {
      ++pos;
      while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
    }
  }
  int offset_minutes = 0;
  if (pos < s.size()) {
    if (s[pos] == 'Z' && pos + 1 == s.size()) {
      ++pos;
    } else if (s[pos] == '+' || s[pos] == '-') {
      const int sign = s[pos] == '-' ? -1 : 1;
      int oh = 0, om = 0;
      if (!read_int(s, pos + 1, 2, oh)) return std::nullopt;
      std::size_t mpos = pos + 3;
      if (mpos < s.size() && s[mpos] == ':') ++mpos;
      if (!read_int(s, mpos, 2, om) || mpos + 2 != s.size()) return std::nullopt;
      offset_minutes = sign * (oh * 60 + om);
      pos = s.size();
    } else {
      return std::nullopt;
    }
  }
  if (pos != s.size()) return std::nullopt;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                           day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || sec > 60) return std::nullopt;
  return sys_days{ymd} + hours{h} + minutes{mi} + seconds{sec} - minutes{offset_minutes};
}

std::string format_timestamp(Timestamp ts) {
  using namespace std::chrono;
  const auto day_point = floor<days>(ts);
  const year_month_day ymd{day_point};
  const hh_mm_ss hms{ts - day_point};
  return fmt::format("{:04d}-{:02d}-{:02d}T{:02d}:{:02d}:{:02d}Z", static_cast<int>(ymd.year()),
                     static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                     hms.hours().count(), hms.minutes().count(), hms.seconds().count());
}

namespace {

std::optional<bool> parse_bool(std::string_view s) {
  const std::string v = text::fold_case(text::trim(s));
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  return std::nullopt;
}

constexpr std::string_view tsv_columns[] = {"id", "text", "lang", "created_at", "is_retweet",
                                            "has_url"};

}  // namespace

TweetReader::TweetReader(std::istream& in, CorpusFormat format, std::string source)
    : in_(in), format_(format), source_(std::move(source)) {}

void TweetReader::read_tsv_header() {
  header_read_ = true;
  std::string line;
  while (std::getline(in_, line)) {
    if (text::trim(line).empty()) continue;
    const auto names = io::split_tsv_line(line);
    tsv_columns_.assign(std::size(tsv_columns), -1);
    for (std::size_t i = 0; i < names.size(); ++i) {
      for (std::size_t c = 0; c < std::size(tsv_columns); ++c) {
        if (text::trim(names[i]) == tsv_columns[c]) tsv_columns_[c] = static_cast<int>(i);
      }
    }
    for (std::size_t c = 0; c < 4; ++c) {
      if (tsv_columns_[c] < 0) {
        throw Error(ErrorCode::corpus_format,
                    fmt::format("{}: TSV header lacks column '{}'", source_, tsv_columns[c]));
      }
    }
    return;
  }
}

std::optional<Tweet> TweetReader::parse_json(std::string_view line) const {
  const json doc = json::parse(line, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) return std::nullopt;
  Tweet t;
  const auto id = doc.find("id");
  if (id == doc.end()) return std::nullopt;
  if (id->is_string()) {
    t.id = id->get<std::string>();
  } else if (id->is_number_integer()) {
    t.id = id->dump();
  } else {
    return std::nullopt;
  }
  const auto txt = doc.find("text");
  const auto lang = doc.find("lang");
  const auto created = doc.find("created_at");
  if (txt == doc.end() || !txt->is_string() || lang == doc.end() || !lang->is_string() ||
      created == doc.end() || !created->is_string()) {
    return std::nullopt;
  }
  t.text = txt->get<std::string>();
  t.lang = lang->get<std::string>();
  const auto ts = parse_timestamp(created->get_ref<const std::string&>());
  if (!ts) return std::nullopt;
  t.created_at = *ts;
  if (const auto rt = doc.find("is_retweet"); rt != doc.end()) {
    if (!rt->is_boolean()) return std::nullopt;
    t.is_retweet = rt->get<bool>();
  }
  if (const auto url = doc.find("has_url"); url != doc.end() && !url->is_null()) {
    if (!url->is_boolean()) return std::nullopt;
    t.has_url = url->get<bool>();
  } else {
    t.has_url = text_has_url(t.text);
  }
  return t;
}

std::optional<Tweet> TweetReader::parse_tsv(std::string_view line) const {
  const auto fields = io::split_tsv_line(line);
  const auto get = [&](std::size_t c) -> const std::string* {
    const int idx = tsv_columns_[c];
    if (idx < 0 || static_cast<std::size_t>(idx) >= fields.size()) return nullptr;
    return &fields[static_cast<std::size_t>(idx)];
  };
  Tweet t;
  const std::string* id = get(0);
  const std::string* txt = get(1);
  const std::string* lang = get(2);
  const std::string* created = get(3);
  if (!id || !txt || !lang || !created) return std::nullopt;
  t.id = *id;
  t.text = *txt;
  t.lang = *lang;
  const auto ts = parse_timestamp(*created);
  if (!ts) return std::nullopt;
  t.created_at = *ts;
  if (const std::string* rt = get(4); rt && !rt->empty()) {
    const auto v = parse_bool(*rt);
    if (!v) return std::nullopt;
    t.is_retweet = *v;
  }
  if (const std::string* url = get(5); url && !url->empty()) {
    const auto v = parse_bool(*url);
    if (!v) return std::nullopt;
    t.has_url = *v;
  } else {
    t.has_url = text_has_url(t.text);
  }
  return t;
}

std::optional<Tweet> TweetReader::next() {
  if (finished_) return std::nullopt;
  if (format_ == CorpusFormat::tsv && !header_read_) read_tsv_header();
  std::string line;
  while (std::getline(in_, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;
    ++records_;
    auto tweet = format_ == CorpusFormat::jsonl ? parse_json(line) : parse_tsv(line);
    if (!tweet || tweet->id.empty() || text::trim(tweet->text).empty()) {
      ++skipped_;
      continue;
    }
    return tweet;
  }
  if (in_.bad()) throw Error(ErrorCode::io, fmt::format("{}: read failure", source_));
  finished_ = true;
  if (records_ > 0 && skipped_ * 2 > records_) {
    throw Error(ErrorCode::corpus_format,
                fmt::format("{}: {} of {} records malformed; wrong corpus format?", source_,
                            skipped_, records_));
  }
  return std::nullopt;
}

LoadResult load_tweets(std::istream& in, CorpusFormat format, std::string source) {
  TweetReader reader(in, format, std::move(source));
  LoadResult result;
  while (auto t = reader.next()) result.tweets.push_back(std::move(*t));
  result.skipped = reader.skipped();
  return result;
}

LoadResult load_tweets(const fs::path& path, CorpusFormat format) {
  auto in = io::open_input(path);
  return load_tweets(in, format, path.string());
}

bool admit(const Tweet& tweet, const FilterPolicy& policy) {
  if (!policy.allowed_langs.contains(tweet.lang)) return false;
  if (policy.drop_retweets && tweet.is_retweet) return false;
  if (policy.drop_url_tweets && tweet.has_url) return false;
  return true;
}

std::string to_jsonl(const Tweet& tweet) {
  nlohmann::ordered_json doc;
  doc["id"] = tweet.id;
  doc["text"] = tweet.text;
  doc["lang"] = tweet.lang;
  doc["created_at"] = format_timestamp(tweet.created_at);
  doc["is_retweet"] = tweet.is_retweet;
  doc["has_url"] = tweet.has_url;
  return doc.dump(-1, ' ', false, json::error_handler_t::replace);
}

std::string to_tsv_row(const Tweet& tweet) {
  return fmt::format("{}\t{}\t{}\t{}\t{}\t{}", io::escape_field(tweet.id),
                     io::escape_field(tweet.text), io::escape_field(tweet.lang),
                     format_timestamp(tweet.created_at), tweet.is_retweet ? "true" : "false",
                     tweet.has_url ? "true" : "false");
}

ContextIndex ContextIndex::build(std::span<const Tweet> tweets) {
  ContextIndex index;
  index.entries_.reserve(tweets.size());
  for (const auto& t : tweets) index.entries_.emplace_back(t.id, t.text);
  std::sort(index.entries_.begin(), index.entries_.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  const auto dup = std::adjacent_find(index.entries_.begin(), index.entries_.end(),
                                      [](const auto& a, const auto& b) { return a.first == b.first; });
  if (dup != index.entries_.end()) {
    throw Error(ErrorCode::corpus_integrity, fmt::format("duplicate tweet id '{}'", dup->first));
  }
  return index;
}

ContextIndex ContextIndex::load(const fs::path& path) {
  auto in = io::open_input(path);
  io::TsvReader reader(in, path.string());
  const auto id_col = reader.column("id");
  const auto text_col = reader.column("text");
  std::vector<Tweet> tweets;
  io::TsvRow row;
  while (reader.next(row)) {
    Tweet t;
    t.id = row.at(id_col);
    t.text = row.at(text_col);
    tweets.push_back(std::move(t));
  }
  return build(tweets);
}

std::string ContextIndex::serialize() const {
  std::ostringstream out;
  out << "id\ttext\n";
  for (const auto& [id, txt] : entries_) io::write_row(out, {id, txt});
  return std::move(out).str();
}

void ContextIndex::save(const fs::path& path) const { io::write_file_atomic(path, serialize()); }

std::optional<std::string_view> ContextIndex::lookup(std::string_view id) const {
  const auto it = std::lower_bound(entries_.begin(), entries_.end(), id,
                                   [](const auto& e, std::string_view key) { return e.first < key; });
  if (it == entries_.end() || it->first != id) return std::nullopt;
  return std::string_view(it->second);
}

std::vector<std::string> ContextIndex::find_containing(std::span<const std::string> phrases) const {
  PhraseMatcher matcher;
  for (const auto& p : phrases) {
    if (!text::phrase_key(p).empty()) matcher.add(p);
  }
  std::vector<std::string> ids;
  if (matcher.empty()) return ids;
  std::vector<PhraseMatcher::Match> matches;
  for (const auto& [id, txt] : entries_) {
    matcher.find_all(text::collapse_whitespace(txt), matches);
    if (!matches.empty()) ids.push_back(id);
  }
  return ids;
}

std::vector<std::string> ContextIndex::sample_containing(std::span<const std::string> phrases,
                                                         std::size_t limit,
                                                         std::uint64_t seed) const {
  auto ids = find_containing(phrases);
  if (ids.size() <= limit) return ids;
  Rng rng(seed);
  const auto picks = rng.sample_indices(ids.size(), limit);
  std::vector<std::string> out;
  out.reserve(picks.size());
  for (auto i : picks) out.push_back(ids[i]);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace collex::corpus
