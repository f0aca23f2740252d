#include "collex/normalize.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>

#include "collex/error.hpp"
#include "collex/io.hpp"
#include "collex/rng.hpp"
#include "collex/text.hpp"

namespace collex::normalize {

namespace fs = std::filesystem;

namespace {

constexpr int max_rule_repeats = 64;

bool is_dropped_punct(char32_t cp) noexcept {
  if (cp < 0x80) {
    if (cp == ',' || cp == '*' || cp == '\'') return false;
    return (cp >= 0x21 && cp <= 0x2F) || (cp >= 0x3A && cp <= 0x40) ||
           (cp >= 0x5B && cp <= 0x60) || (cp >= 0x7B && cp <= 0x7E);
  }
  switch (cp) {
    case 0xA1: case 0xA6: case 0xA7: case 0xA8: case 0xAB: case 0xB4:
    case 0xB6: case 0xB7: case 0xB8: case 0xBB: case 0xBF:
      return true;
    default:
      break;
  }
  if (cp >= 0x2010 && cp <= 0x2027) return true;
  if (cp >= 0x2030 && cp <= 0x205E) return true;
  if (cp >= 0x3001 && cp <= 0x3003) return true;
  if (cp >= 0x3008 && cp <= 0x3011) return true;
  return false;
}

// Case folding, parenthesized content removal and punctuation stripping.
// Unbalanced parentheses are treated as plain punctuation.
std::string preprocess(std::string_view phrase) {
  std::vector<bool> balanced(phrase.size(), false);
  std::vector<std::size_t> open;
  for (std::size_t i = 0; i < phrase.size(); ++i) {
    if (phrase[i] == '(') {
      open.push_back(i);
    } else if (phrase[i] == ')' && !open.empty()) {
      balanced[open.back()] = true;
      balanced[i] = true;
      open.pop_back();
    }
  }
  std::string out;
  out.reserve(phrase.size());
  int depth = 0;
  std::size_t pos = 0;
  while (pos < phrase.size()) {
    const std::size_t at = pos;
    char32_t cp = text::next_codepoint(phrase, pos);
    if ((cp == '(' || cp == ')') && balanced[at]) {
      depth += cp == '(' ? 1 : -1;
      out.push_back(' ');
      continue;
    }
    if (depth > 0) continue;
    if (cp == 0x2018 || cp == 0x2019) cp = '\'';
    if (is_dropped_punct(cp)) {
      out.push_back(' ');
      continue;
    }
    text::append_utf8(out, text::fold_case(cp));
  }
  return out;
}

bool equal_at(const std::vector<std::string>& tokens, std::size_t i,
              const std::vector<std::string>& pattern) {
  if (i + pattern.size() > tokens.size()) return false;
  for (std::size_t k = 0; k < pattern.size(); ++k) {
    if (tokens[i + k] != pattern[k]) return false;
  }
  return true;
}

template <typename Rule>
bool apply_rule_once(std::vector<std::string>& tokens, const Rule& rule) {
  bool changed = false;
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < tokens.size()) {
    const std::vector<std::string>* hit = nullptr;
    for (const auto& src : rule.sources) {
      if (equal_at(tokens, i, src.tokens)) {
        hit = &src.tokens;
        break;
      }
    }
    if (hit == nullptr) {
      if (changed) out.push_back(std::move(tokens[i]));
      ++i;
      continue;
    }
    if (!changed) {
      out.reserve(tokens.size());
      for (std::size_t k = 0; k < i; ++k) out.push_back(std::move(tokens[k]));
      changed = true;
    }
    out.insert(out.end(), rule.target.begin(), rule.target.end());
    i += hit->size();
  }
  if (changed) tokens = std::move(out);
  return changed;
}

std::vector<std::string> split_sources(std::string_view field) {
  std::vector<std::string> out;
  for (auto part : text::split(field, ',')) {
    std::string s = text::collapse_whitespace(part);
    if (!s.empty()) out.push_back(std::move(s));
  }
  return out;
}

bool is_ascii_alpha(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
  });
}

bool is_numeric(std::string_view s) {
  bool digit = false;
  for (char c : s) {
    if (c >= '0' && c <= '9') {
      digit = true;
    } else if (c != '.' && c != ',') {
      return false;
    }
  }
  return digit;
}

bool is_vowel(char c) {
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
}

bool has_vowel(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](char c) { return is_vowel(c) || c == 'y'; });
}

// Undoes consonant doubling or restores a dropped final 'e' on a stem left by
// stripping -ing/-ed.
std::string restore_stem(std::string stem) {
  const std::size_t n = stem.size();
  if (n >= 2 && stem[n - 1] == stem[n - 2] && !is_vowel(stem[n - 1])) {
    const char c = stem[n - 1];
    if (c != 'l' && c != 's' && c != 'z' && c != 'f') stem.pop_back();
    return stem;
  }
  if (stem.ends_with('v') || stem.ends_with("dg") || stem.ends_with('z') ||
      (n >= 3 && stem[n - 1] == 'c' && is_vowel(stem[n - 2]))) {
    stem.push_back('e');
  }
  return stem;
}

bool is_clitic(std::string_view t) {
  return t == "'m" || t == "'s" || t == "'d" || t == "'ve" || t == "'re" || t == "'ll";
}

std::string format_number(double v) {
  std::string s = fmt::format("{:.2f}", v);
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  if (s == "-0") s = "0";
  return s;
}

}  // namespace

RuleSet RuleSet::load(const fs::path& path) {
  auto in = io::open_input(path);
  return parse(in, path.string());
}

RuleSet RuleSet::parse(std::istream& in, const std::string& source) {
  io::TsvReader reader(in, source);
  const auto src_col = reader.column("sources");
  const auto tgt_col = reader.column("target");
  std::vector<RewriteRule> rules;
  io::TsvRow row;
  while (reader.next(row)) {
    RewriteRule rule;
    rule.sources = split_sources(row.at(src_col));
    rule.target = tgt_col < row.fields.size() ? row.fields[tgt_col] : std::string{};
    rule.order = static_cast<int>(rules.size());
    if (rule.sources.empty()) {
      throw Error(ErrorCode::validation,
                  fmt::format("{}:{}: rule has no source phrases", source, row.line));
    }
    rules.push_back(std::move(rule));
  }
  return from_rules(std::move(rules));
}

RuleSet RuleSet::from_rules(std::vector<RewriteRule> rules) {
  RuleSet set;
  for (std::size_t r = 0; r < rules.size(); ++r) {
    auto& rule = rules[r];
    rule.order = static_cast<int>(r);
    CompiledRule compiled;
    compiled.target = tokenize(preprocess(rule.target));
    rule.target = render(compiled.target);
    std::vector<std::string> kept;
    for (const auto& raw : rule.sources) {
      std::string src = render(tokenize(preprocess(raw)));
      if (src.empty()) {
        throw Error(ErrorCode::validation,
                    fmt::format("rule {}: source '{}' is empty after cleaning", r + 1, raw));
      }
      if (src == rule.target) {
        throw Error(ErrorCode::validation,
                    fmt::format("rule {}: source '{}' equals its target", r + 1, raw));
      }
      if (std::find(kept.begin(), kept.end(), src) != kept.end()) continue;
      kept.push_back(src);
      compiled.sources.push_back({tokenize(src)});
    }
    rule.sources = kept;
    std::stable_sort(compiled.sources.begin(), compiled.sources.end(),
                     [](const CompiledSource& a, const CompiledSource& b) {
                       return a.tokens.size() > b.tokens.size();
                     });
    for (const auto& src : compiled.sources) {
      auto& ids = set.rules_by_first_token_[src.tokens.front()];
      if (ids.empty() || ids.back() != r) ids.push_back(static_cast<std::uint32_t>(r));
    }
    set.compiled_.push_back(std::move(compiled));
  }
  set.rules_ = std::move(rules);
  return set;
}

std::vector<std::string> tokenize(std::string_view phrase) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (current.empty()) return;
    // Contraction clitics become tokens of their own ("i'm" -> "i", "'m").
    const auto apos = current.rfind('\'');
    if (apos != std::string::npos && apos > 0) {
      if (is_clitic(std::string_view(current).substr(apos))) {
        tokens.push_back(current.substr(0, apos));
        tokens.push_back(current.substr(apos));
        current.clear();
        return;
      }
    }
    tokens.push_back(std::move(current));
    current.clear();
  };
  std::size_t pos = 0;
  while (pos < phrase.size()) {
    const std::size_t begin = pos;
    const char32_t cp = text::next_codepoint(phrase, pos);
    if (text::is_space(cp) || cp == ',') {
      flush();
      if (cp == ',') tokens.emplace_back(",");
      continue;
    }
    current.append(phrase.substr(begin, pos - begin));
  }
  flush();
  return tokens;
}

std::string render(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    const bool attach = t == "," || (is_clitic(t) && !out.empty() && out.back() != ',');
    if (!out.empty() && !attach) out.push_back(' ');
    out += t;
  }
  return out;
}

bool rewrite_tokens(std::vector<std::string>& tokens, const RuleSet& rules,
                    std::string_view phrase) {
  bool any = false;
  std::vector<std::uint32_t> candidates;
  auto collect = [&](std::uint32_t after, bool inclusive) {
    candidates.clear();
    for (const auto& t : tokens) {
      auto it = rules.rules_by_first_token_.find(t);
      if (it == rules.rules_by_first_token_.end()) continue;
      for (auto id : it->second) {
        if (id > after || (inclusive && id == after)) candidates.push_back(id);
      }
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  };

  for (int pass = 0; pass < RuleSet::max_passes; ++pass) {
    bool changed = false;
    collect(0, true);
    std::size_t idx = 0;
    while (idx < candidates.size()) {
      const auto id = candidates[idx];
      const auto& rule = rules.compiled_[id];
      int repeats = 0;
      bool rule_changed = false;
      while (apply_rule_once(tokens, rule)) {
        rule_changed = true;
        if (++repeats > max_rule_repeats) {
          throw Error(ErrorCode::rule_cycle,
                      fmt::format("rule {} does not settle on phrase '{}'", id + 1, phrase));
        }
      }
      if (rule_changed) {
        changed = true;
        collect(id, false);
        idx = 0;
        continue;
      }
      ++idx;
    }
    if (!changed) return any;
    any = true;
  }
  throw Error(ErrorCode::rule_cycle,
              fmt::format("rules did not reach a fixpoint within {} passes on phrase '{}'",
                          RuleSet::max_passes, phrase));
}

std::string apply_rules(std::string_view phrase, const RuleSet& rules) {
  auto tokens = tokenize(preprocess(phrase));
  rewrite_tokens(tokens, rules, phrase);
  return render(tokens);
}

SuffixLemmatizer SuffixLemmatizer::load(const fs::path& path) {
  auto in = io::open_input(path);
  io::TsvReader reader(in, path.string(), false);
  std::unordered_map<std::string, std::string> exceptions;
  io::TsvRow row;
  while (reader.next(row)) {
    if (row.fields.size() != 2) {
      throw Error(ErrorCode::validation,
                  fmt::format("{}:{}: expected word<TAB>lemma", path.string(), row.line));
    }
    exceptions[text::fold_case(text::trim(row.fields[0]))] =
        text::fold_case(text::trim(row.fields[1]));
  }
  return SuffixLemmatizer(std::move(exceptions));
}

std::string SuffixLemmatizer::lemma(std::string_view token) const {
  if (token.empty()) return {};
  if (auto it = exceptions_.find(std::string(token)); it != exceptions_.end()) return it->second;
  if (is_numeric(token)) return "number";
  std::string w(token);
  if (w.size() <= 3 || !is_ascii_alpha(w)) return w;
  const std::size_t n = w.size();

  if (w.ends_with("ies") && n > 4) return w.substr(0, n - 3) + "y";
  if (w.ends_with("sses")) return w.substr(0, n - 2);
  if (w.ends_with("aches")) return w.substr(0, n - 1);
  if (w.ends_with("ches") || w.ends_with("shes") || w.ends_with("xes") || w.ends_with("zzes")) {
    return w.substr(0, n - 2);
  }
  if (w.ends_with("ss") || w.ends_with("us") || w.ends_with("is")) return w;
  if (w.ends_with('s')) return w.substr(0, n - 1);

  if (w.ends_with("ing") && n >= 5) {
    std::string stem = w.substr(0, n - 3);
    if (has_vowel(stem)) return restore_stem(std::move(stem));
    return w;
  }
  if (w.ends_with("ied") && n > 4) return w.substr(0, n - 3) + "y";
  if (w.ends_with("eed")) return w;
  if (w.ends_with("ed") && n >= 5) {
    std::string stem = w.substr(0, n - 2);
    if (has_vowel(stem)) return restore_stem(std::move(stem));
  }
  return w;
}

std::string lemmatize(std::string_view phrase, const Lemmatizer& lemmatizer,
                      const RuleSet& rules) {
  std::vector<std::string> out;
  for (const auto& token : tokenize(phrase)) {
    if (token == ",") {
      out.push_back(token);
      continue;
    }
    std::string l = lemmatizer.lemma(token);
    if (l == "number" || l.empty()) continue;
    out.push_back(std::move(l));
  }
  return apply_rules(render(out), rules);
}

std::vector<std::string> split_phrases(std::string_view surface) {
  std::vector<std::string> pieces;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < surface.size(); ++i) {
    const char c = surface[i];
    if (c == '(') {
      ++depth;
    } else if (c == ')') {
      if (depth > 0) --depth;
    } else if (c == ',' && depth == 0) {
      pieces.emplace_back(text::trim(surface.substr(start, i - start)));
      start = i + 1;
    }
  }
  pieces.emplace_back(text::trim(surface.substr(start)));
  pieces.erase(std::remove_if(pieces.begin(), pieces.end(),
                              [](const std::string& p) { return p.empty(); }),
               pieces.end());
  return pieces;
}

const std::vector<std::pair<std::string, std::string>>& Normalizer::normalize(
    std::string_view surface) {
  const std::string key(surface);
  if (auto it = memo_.find(key); it != memo_.end()) return it->second;
  std::vector<std::pair<std::string, std::string>> result;
  for (auto& piece : split_phrases(surface)) {
    std::string lemma = lemmatize(apply_rules(piece, rules_), lemmatizer_, rules_);
    result.emplace_back(std::move(piece), std::move(lemma));
  }
  return memo_.emplace(key, std::move(result)).first->second;
}

void LemmaTable::offer(Entry& entry, std::string_view tweet_id) {
  if (cap_ == 0) return;
  const std::uint64_t h = stable_hash(tweet_id, seed_);
  if (entry.sample.size() >= cap_) {
    const auto& last = *entry.sample.rbegin();
    if (h > last.first || (h == last.first && tweet_id >= last.second)) return;
  }
  const auto [it, inserted] = entry.sample.emplace(h, std::string(tweet_id));
  (void)it;
  if (inserted && entry.sample.size() > cap_) entry.sample.erase(std::prev(entry.sample.end()));
}

void LemmaTable::add(std::string_view lemma, std::string_view surface,
                     std::string_view tweet_id, std::uint64_t count) {
  auto it = records_.find(lemma);
  if (it == records_.end()) {
    it = records_.emplace(std::string(lemma), Entry{}).first;
    it->second.record.lemma = std::string(lemma);
  }
  auto& entry = it->second;
  entry.record.count += count;
  entry.record.surface_forms[std::string(surface)] += count;
  if (!tweet_id.empty()) offer(entry, tweet_id);
}

void LemmaTable::merge(const LemmaTable& other) {
  for (const auto& [lemma, src] : other.records_) {
    auto it = records_.find(lemma);
    if (it == records_.end()) {
      it = records_.emplace(lemma, Entry{}).first;
      it->second.record.lemma = lemma;
    }
    auto& entry = it->second;
    entry.record.count += src.record.count;
    for (const auto& [surface, n] : src.record.surface_forms) entry.record.surface_forms[surface] += n;
    for (const auto& [h, id] : src.sample) offer(entry, id);
  }
}

void LemmaTable::insert(LemmaRecord record) {
  auto it = records_.find(record.lemma);
  if (it != records_.end()) {
    throw Error(ErrorCode::integrity, fmt::format("duplicate lemma '{}'", record.lemma));
  }
  Entry entry;
  for (const auto& id : record.sample_tweet_ids) offer(entry, id);
  record.sample_tweet_ids.clear();
  entry.record = std::move(record);
  const std::string key = entry.record.lemma;
  records_.emplace(key, std::move(entry));
}

const LemmaRecord* LemmaTable::find(std::string_view lemma) const {
  auto it = records_.find(lemma);
  return it == records_.end() ? nullptr : &it->second.record;
}

std::uint64_t LemmaTable::total_count() const noexcept {
  std::uint64_t total = 0;
  for (const auto& [_, e] : records_) total += e.record.count;
  return total;
}

std::vector<LemmaRecord> LemmaTable::records() const {
  std::vector<LemmaRecord> out;
  out.reserve(records_.size());
  for (const auto& [_, e] : records_) {
    LemmaRecord r = e.record;
    r.sample_tweet_ids.clear();
    for (const auto& [h, id] : e.sample) r.sample_tweet_ids.push_back(id);
    std::sort(r.sample_tweet_ids.begin(), r.sample_tweet_ids.end());
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<std::uint64_t> LemmaTable::counts() const {
  std::vector<std::uint64_t> out;
  out.reserve(records_.size());
  for (const auto& [_, e] : records_) out.push_back(e.record.count);
  return out;
}

LemmaTable aggregate(std::span<const LemmaMention> mentions, std::size_t sample_cap,
                     std::uint64_t seed) {
  LemmaTable table(sample_cap, seed);
  for (const auto& m : mentions) table.add(m.lemma, m.surface, m.tweet_id);
  return table;
}

LemmaTable frequency_filter(const LemmaTable& table, std::uint64_t min_count) {
  if (min_count == 0) throw Error(ErrorCode::invalid_argument, "min_count must be at least 1");
  LemmaTable out(table.sample_cap(), table.seed());
  for (auto& r : table.records()) {
    if (r.count >= min_count) out.insert(std::move(r));
  }
  return out;
}

FrequencyStats summarize(const LemmaTable& table) { return summarize(table.counts()); }

FrequencyStats summarize(std::vector<std::uint64_t> counts) {
  if (counts.empty()) throw Error(ErrorCode::empty_input, "no lemmas to summarize");
  std::sort(counts.begin(), counts.end());
  const auto n = counts.size();
  const double sum = std::accumulate(counts.begin(), counts.end(), 0.0,
                                     [](double acc, std::uint64_t c) { return acc + double(c); });
  FrequencyStats s;
  s.mean = sum / double(n);
  double sq = 0;
  for (auto c : counts) sq += (double(c) - s.mean) * (double(c) - s.mean);
  s.std_dev = std::sqrt(sq / double(n));
  auto quantile = [&](double p) {
    const double h = double(n - 1) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= n) return double(counts[n - 1]);
    return double(counts[lo]) + (h - double(lo)) * (double(counts[lo + 1]) - double(counts[lo]));
  };
  s.minimum = double(counts.front());
  s.maximum = double(counts.back());
  s.q1 = quantile(0.25);
  s.median = quantile(0.5);
  s.q3 = quantile(0.75);
  return s;
}

std::string render_stats_text(const FrequencyStats& all,
                              const std::optional<FrequencyStats>& frequent,
                              std::uint64_t min_count) {
  auto median_iqr = [](const FrequencyStats& s) {
    return fmt::format("{} [{}, {}]", format_number(s.median), format_number(s.q1),
                       format_number(s.q3));
  };
  auto cell = [&](auto get) -> std::string {
    return frequent ? get(*frequent) : std::string("-");
  };
  std::vector<std::array<std::string, 3>> rows = {
      {"", "All lemmatized entities", fmt::format("≥ {} occurrences", min_count)},
      {"Mean", format_number(all.mean), cell([](const auto& s) { return format_number(s.mean); })},
      {"Standard deviation", format_number(all.std_dev),
       cell([](const auto& s) { return format_number(s.std_dev); })},
      {"Minimum", format_number(all.minimum),
       cell([](const auto& s) { return format_number(s.minimum); })},
      {"Median [Interquartile Range]", median_iqr(all), cell(median_iqr)},
      {"Maximum", format_number(all.maximum),
       cell([](const auto& s) { return format_number(s.maximum); })},
  };
  std::size_t w0 = 0, w1 = 0;
  for (const auto& r : rows) {
    w0 = std::max(w0, text::codepoint_count(r[0]));
    w1 = std::max(w1, text::codepoint_count(r[1]));
  }
  std::string out;
  for (const auto& r : rows) {
    std::string line = r[0];
    line.append(w0 + 2 - text::codepoint_count(r[0]), ' ');
    line += r[1];
    line.append(w1 + 2 - text::codepoint_count(r[1]), ' ');
    line += r[2];
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line;
    out.push_back('\n');
  }
  return out;
}

std::string render_stats_tsv(const FrequencyStats& all,
                             const std::optional<FrequencyStats>& frequent,
                             std::uint64_t min_count) {
  std::string out = fmt::format("statistic\tall\tmin_count_{}\n", min_count);
  auto row = [&](std::string_view name, double FrequencyStats::*field) {
    out += fmt::format("{}\t{}\t{}\n", name, format_number(all.*field),
                       frequent ? format_number((*frequent).*field) : std::string("-"));
  };
  row("mean", &FrequencyStats::mean);
  row("std_dev", &FrequencyStats::std_dev);
  row("minimum", &FrequencyStats::minimum);
  row("q1", &FrequencyStats::q1);
  row("median", &FrequencyStats::median);
  row("q3", &FrequencyStats::q3);
  row("maximum", &FrequencyStats::maximum);
  return out;
}

void write_lemma_table(std::ostream& out, const LemmaTable& table) {
  auto records = table.records();
  std::sort(records.begin(), records.end(), [](const LemmaRecord& a, const LemmaRecord& b) {
    if (a.count != b.count) return a.count > b.count;
    return a.lemma < b.lemma;
  });
  out << lemma_table_header << '\n';
  for (const auto& r : records) {
    std::vector<std::string> surfaces;
    for (const auto& [surface, n] : r.surface_forms) {
      surfaces.push_back(fmt::format("{}:{}", surface, n));
    }
    io::write_row(out, {r.lemma, std::to_string(r.count), io::join_escaped(surfaces, ';'),
                        io::join_escaped(r.sample_tweet_ids, ',')});
  }
}

LemmaTable read_lemma_table(std::istream& in, const std::string& source) {
  io::TsvReader reader(in, source);
  const auto lemma_col = reader.column("lemma");
  const auto count_col = reader.column("count");
  const auto surf_col = reader.column("surfaces");
  const auto ids_col = reader.column("sample_ids");
  LemmaTable table;
  io::TsvRow row;
  auto parse_count = [&](std::string_view s, std::size_t line) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
      throw Error(ErrorCode::validation, fmt::format("{}:{}: bad count '{}'", source, line, s));
    }
    return v;
  };
  while (reader.next(row)) {
    LemmaRecord r;
    r.lemma = row.at(lemma_col);
    r.count = parse_count(row.at(count_col), row.line);
    const std::string empty;
    const auto& surf = surf_col < row.fields.size() ? row.fields[surf_col] : empty;
    const auto& ids = ids_col < row.fields.size() ? row.fields[ids_col] : empty;
    if (!surf.empty()) {
      for (const auto& item : io::split_escaped(surf, ';')) {
        const auto colon = item.rfind(':');
        if (colon == std::string::npos) {
          throw Error(ErrorCode::validation,
                      fmt::format("{}:{}: bad surface entry '{}'", source, row.line, item));
        }
        r.surface_forms[item.substr(0, colon)] +=
            parse_count(std::string_view(item).substr(colon + 1), row.line);
      }
    }
    if (!ids.empty()) r.sample_tweet_ids = io::split_escaped(ids, ',');
    table.insert(std::move(r));
  }
  return table;
}

}  // namespace collex::normalize
