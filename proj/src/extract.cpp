#include "collex/extract.hpp"

#include <fmt/format.h>
#include <httplib.h>

#include <algorithm>
#include <charconv>
#include <istream>
#include <nlohmann/json.hpp>
#include <ostream>

#include "collex/error.hpp"
#include "collex/io.hpp"
#include "collex/text.hpp"

namespace collex::extract {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string_view to_string(EntityType type) noexcept {
  switch (type) {
    case EntityType::symptom: return "SYMPTOM";
  }
  return "SYMPTOM";
}

namespace {

std::u32string parse_emoji_column(std::string_view col, const std::string& source,
                                  std::size_t line) {
  col = text::trim(col);
  if (col.starts_with("U+") || col.starts_with("u+")) {
    std::u32string seq;
    for (auto part : text::split(col, ' ')) {
      part = text::trim(part);
      if (part.empty()) continue;
      if (part.size() < 3 || (part[0] != 'U' && part[0] != 'u') || part[1] != '+') {
        throw Error(ErrorCode::validation,
                    fmt::format("{}:{}: bad code point '{}'", source, line, part));
      }
      unsigned value = 0;
      const auto [ptr, ec] = std::from_chars(part.data() + 2, part.data() + part.size(), value, 16);
      if (ec != std::errc{} || ptr != part.data() + part.size()) {
        throw Error(ErrorCode::validation,
                    fmt::format("{}:{}: bad code point '{}'", source, line, part));
      }
      seq.push_back(static_cast<char32_t>(value));
    }
    return seq;
  }
  return text::decode_utf8(col);
}

}  // namespace

EmojiMap EmojiMap::load(const fs::path& path) {
  auto in = io::open_input(path);
  return parse(in, path.string());
}

EmojiMap EmojiMap::parse(std::istream& in, const std::string& source) {
  EmojiMap map;
  io::TsvReader reader(in, source, false);
  io::TsvRow row;
  while (reader.next(row)) {
    if (row.fields.size() < 2) {
      throw Error(ErrorCode::validation, fmt::format("{}:{}: expected emoji<TAB>alias", source,
                                                     row.line));
    }
    auto seq = parse_emoji_column(row.fields[0], source, row.line);
    const std::string alias(text::trim(row.fields[1]));
    if (seq.empty() || alias.empty() ||
        alias.find_first_of("<> \t\n") != std::string::npos) {
      throw Error(ErrorCode::validation,
                  fmt::format("{}:{}: empty emoji or alias with markup/whitespace", source,
                              row.line));
    }
    map.add(std::move(seq), alias);
  }
  return map;
}

void EmojiMap::add(std::u32string sequence, std::string alias) {
  longest_ = std::max(longest_, sequence.size());
  aliases_[std::move(sequence)] = std::move(alias);
}

std::size_t EmojiMap::match(std::u32string_view text, std::size_t pos,
                            const std::string** alias) const {
  const std::size_t max_len = std::min(longest_, text.size() - pos);
  for (std::size_t len = max_len; len > 0; --len) {
    const auto it = aliases_.find(std::u32string(text.substr(pos, len)));
    if (it != aliases_.end()) {
      *alias = &it->second;
      return len;
    }
  }
  return 0;
}

std::string preclean_text(std::string_view input, const EmojiMap& emoji) {
  std::string stripped;
  stripped.reserve(input.size());
  for (std::size_t i = 0; i < input.size(); ++i) {
    if (input[i] == '<') {
      const std::size_t close = input.find('>', i + 1);
      if (close != std::string_view::npos) {
        i = close;
        continue;
      }
    }
    stripped.push_back(input[i]);
  }

  std::string replaced;
  if (emoji.size() == 0) {
    replaced = std::move(stripped);
  } else {
    const std::u32string cps = text::decode_utf8(stripped);
    replaced.reserve(stripped.size());
    for (std::size_t i = 0; i < cps.size();) {
      const std::string* alias = nullptr;
      const std::size_t len = cps[i] >= 0x80 ? emoji.match(cps, i, &alias) : 0;
      if (len > 0) {
        replaced.push_back(' ');
        replaced += *alias;
        replaced.push_back(' ');
        i += len;
      } else {
        text::append_utf8(replaced, cps[i]);
        ++i;
      }
    }
  }
  return text::collapse_whitespace(replaced);
}

Gazetteer Gazetteer::load(const fs::path& path) {
  auto in = io::open_input(path);
  std::vector<std::string> terms;
  std::string line;
  while (std::getline(in, line)) {
    const auto t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    terms.emplace_back(t);
  }
  if (terms.empty()) {
    throw Error(ErrorCode::validation, fmt::format("{}: gazetteer has no terms", path.string()));
  }
  return from_terms(terms);
}

Gazetteer Gazetteer::from_terms(const std::vector<std::string>& terms) {
  Gazetteer g;
  for (const auto& term : terms) {
    const auto before = g.matcher_.size();
    const auto id = g.matcher_.add(term);
    if (g.matcher_.size() > before) g.terms_.push_back(g.matcher_.pattern(id));
  }
  if (g.terms_.empty()) throw Error(ErrorCode::invalid_argument, "gazetteer has no terms");
  return g;
}

namespace {

std::vector<Span> to_codepoint_spans(std::string_view text,
                                     const std::vector<PhraseMatcher::Match>& matches) {
  std::vector<Span> spans;
  spans.reserve(matches.size());
  std::size_t byte = 0;
  std::size_t cp = 0;
  const auto advance_to = [&](std::size_t target) {
    while (byte < target) {
      text::next_codepoint(text, byte);
      ++cp;
    }
  };
  for (const auto& m : matches) {
    advance_to(m.begin);
    const std::size_t start = cp;
    advance_to(m.end);
    spans.push_back({start, cp});
  }
  return spans;
}

}  // namespace

std::vector<Span> GazetteerExtractor::find_spans(std::string_view text) const {
  return to_codepoint_spans(text, gazetteer_.matcher().find_all(text));
}

std::vector<EntityMention> gazetteer_extract(std::string_view text, const Gazetteer& gazetteer,
                                             std::string_view tweet_id) {
  const auto matches = gazetteer.matcher().find_all(text);
  const auto spans = to_codepoint_spans(text, matches);
  std::vector<EntityMention> out;
  out.reserve(matches.size());
  for (std::size_t i = 0; i < matches.size(); ++i) {
    out.push_back({std::string(tweet_id),
                   std::string(text.substr(matches[i].begin, matches[i].end - matches[i].begin)),
                   spans[i].start, spans[i].end, EntityType::symptom});
  }
  return out;
}

RemoteExtractor::RemoteExtractor(RemoteConfig config) : config_(std::move(config)) {
  constexpr std::string_view scheme = "http://";
  std::string_view url = config_.url;
  if (!url.starts_with(scheme)) {
    throw Error(ErrorCode::configuration,
                fmt::format("remote extractor url must start with http://: '{}'", config_.url));
  }
  const std::size_t slash = url.find('/', scheme.size());
  scheme_host_port_ = std::string(url.substr(0, slash));
  path_ = slash == std::string_view::npos ? "/" : std::string(url.substr(slash));
  const unsigned limit = std::clamp(config_.max_in_flight, 1u, 1024u);
  in_flight_ = std::make_unique<std::counting_semaphore<1024>>(limit);
}

RemoteExtractor::~RemoteExtractor() = default;

std::vector<Span> RemoteExtractor::find_spans(std::string_view text) const {
  in_flight_->acquire();
  struct Release {
    std::counting_semaphore<1024>& sem;
    ~Release() { sem.release(); }
  } release{*in_flight_};

  httplib::Client client(scheme_host_port_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
  const auto usecs =
      std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  httplib::Headers headers;
  if (!config_.token.empty()) headers.emplace("X-Collex-Token", config_.token);

  const json body = {{"text", std::string(text)}};
  const auto res = client.Post(path_, headers, body.dump(), "application/json");
  if (!res) {
    throw Error(ErrorCode::extraction,
                fmt::format("remote extractor request failed: {}", httplib::to_string(res.error())));
  }
  if (res->status != 200) {
    throw Error(ErrorCode::extraction, fmt::format("remote extractor returned HTTP {}", res->status));
  }
  const json doc = json::parse(res->body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object() || !doc.contains("entities") ||
      !doc["entities"].is_array()) {
    throw Error(ErrorCode::response_validation, "remote extractor response is not {\"entities\": [...]}");
  }
  const std::size_t length = text::codepoint_count(text);
  std::vector<Span> spans;
  for (const auto& e : doc["entities"]) {
    if (!e.is_object() || !e.contains("start") || !e.contains("end") ||
        !e["start"].is_number_integer() || !e["end"].is_number_integer()) {
      throw Error(ErrorCode::response_validation, "entity without integer start/end");
    }
    if (e.contains("type") && e["type"] != "SYMPTOM") continue;
    const auto start = e["start"].get<long long>();
    const auto end = e["end"].get<long long>();
    if (start < 0 || start >= end || static_cast<std::size_t>(end) > length) {
      throw Error(ErrorCode::response_validation,
                  fmt::format("span [{}, {}) outside text of length {}", start, end, length));
    }
    spans.push_back({static_cast<std::size_t>(start), static_cast<std::size_t>(end)});
  }
  return spans;
}

std::vector<EntityMention> extract_entities(std::string_view tweet_id, std::string_view text,
                                            const Extractor& extractor) {
  std::vector<Span> spans;
  try {
    spans = extractor.find_spans(text);
  } catch (const ExtractionError&) {
    throw;
  } catch (const Error& e) {
    throw ExtractionError(std::string(tweet_id), fmt::format("tweet {}: {}", tweet_id, e.what()),
                          e.code() == ErrorCode::response_validation ? ErrorCode::response_validation
                                                                     : ErrorCode::extraction);
  } catch (const std::exception& e) {
    throw ExtractionError(std::string(tweet_id), fmt::format("tweet {}: {}", tweet_id, e.what()));
  }
  if (spans.empty()) return {};

  std::sort(spans.begin(), spans.end(),
            [](const Span& a, const Span& b) { return a.start < b.start; });
  const auto offsets = text::codepoint_offsets(text);
  const std::size_t length = offsets.size() - 1;
  std::vector<EntityMention> out;
  out.reserve(spans.size());
  std::size_t last_end = 0;
  for (const auto& s : spans) {
    if (s.start >= s.end || s.end > length || s.start < last_end) {
      throw ExtractionError(std::string(tweet_id),
                            fmt::format("tweet {}: invalid or overlapping span [{}, {})", tweet_id,
                                        s.start, s.end),
                            ErrorCode::response_validation);
    }
    last_end = s.end;
    out.push_back({std::string(tweet_id),
                   std::string(text.substr(offsets[s.start], offsets[s.end] - offsets[s.start])),
                   s.start, s.end, EntityType::symptom});
  }
  return out;
}

void write_mentions(std::ostream& out, const std::vector<EntityMention>& mentions) {
  out << mentions_header << '\n';
  for (const auto& m : mentions) {
    io::write_row(out, {m.tweet_id, std::to_string(m.start), std::to_string(m.end), m.surface});
  }
}

std::vector<EntityMention> read_mentions(std::istream& in, const std::string& source) {
  io::TsvReader reader(in, source);
  const auto c_id = reader.column("tweet_id");
  const auto c_start = reader.column("start");
  const auto c_end = reader.column("end");
  const auto c_surface = reader.column("surface");
  std::vector<EntityMention> out;
  io::TsvRow row;
  const auto to_size = [&](const std::string& s) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
      throw Error(ErrorCode::validation, fmt::format("{}:{}: bad offset '{}'", source, row.line, s));
    }
    return v;
  };
  while (reader.next(row)) {
    EntityMention m;
    m.tweet_id = row.at(c_id);
    m.start = to_size(row.at(c_start));
    m.end = to_size(row.at(c_end));
    m.surface = row.at(c_surface);
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace collex::extract
