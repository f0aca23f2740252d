#include "collex/analytics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>
#include <set>

#include "collex/error.hpp"
#include "collex/io.hpp"
#include "collex/parallel.hpp"
#include "collex/text.hpp"

namespace collex::analytics {

namespace fs = std::filesystem;

DictionaryMatcher::DictionaryMatcher(const curation::Dictionary& dictionary) {
  if (dictionary.empty()) {
    throw Error(ErrorCode::configuration, "cannot match a corpus against an empty dictionary");
  }
  for (const auto& [concept_id, lemmas] : dictionary.entries()) {
    const auto index = static_cast<std::uint32_t>(concept_ids_.size());
    concept_ids_.push_back(concept_id);
    concept_names_.push_back(dictionary.concept_name(concept_id));
    for (const auto& [lemma, entry] : lemmas) {
      for (const auto& surface : entry.surfaces) {
        if (text::phrase_key(surface).empty()) continue;
        const auto id = matcher_.add(surface);
        if (id >= pattern_concepts_.size()) pattern_concepts_.resize(id + 1);
        auto& owners = pattern_concepts_[id];
        if (std::find(owners.begin(), owners.end(), index) == owners.end()) {
          owners.push_back(index);
        }
      }
    }
  }
}

void DictionaryMatcher::match(std::string_view text, std::vector<std::uint32_t>& hits) const {
  hits.clear();
  thread_local std::vector<PhraseMatcher::Match> found;
  matcher_.find_all(text, found);
  for (const auto& m : found) {
    const auto& owners = pattern_concepts_[m.pattern];
    hits.insert(hits.end(), owners.begin(), owners.end());
  }
  std::sort(hits.begin(), hits.end());
  hits.erase(std::unique(hits.begin(), hits.end()), hits.end());
}

std::vector<std::string> DictionaryMatcher::match(std::string_view text) const {
  std::vector<std::uint32_t> hits;
  match(text, hits);
  std::vector<std::string> out;
  for (auto h : hits) out.push_back(concept_ids_[h]);
  return out;
}

MatchResult match_corpus(std::span<const std::string> texts, const DictionaryMatcher& matcher,
                         unsigned threads) {
  if (threads == 0) threads = default_threads();
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(threads, texts.size()));
  std::vector<std::vector<std::uint64_t>> counts(
      workers, std::vector<std::uint64_t>(matcher.concept_ids().size(), 0));
  std::vector<std::uint64_t> matched(workers, 0);
  parallel_chunks(texts.size(), static_cast<unsigned>(workers),
                  [&](std::size_t w, std::size_t begin, std::size_t end) {
                    std::vector<std::uint32_t> hits;
                    auto& local = counts[w];
                    for (std::size_t i = begin; i < end; ++i) {
                      matcher.match(texts[i], hits);
                      if (hits.empty()) continue;
                      ++matched[w];
                      for (auto h : hits) ++local[h];
                    }
                  });
  MatchResult result;
  result.tweets = texts.size();
  for (std::size_t w = 0; w < workers; ++w) {
    result.matched_tweets += matched[w];
    for (std::size_t c = 0; c < counts[w].size(); ++c) {
      if (counts[w][c] > 0) result.concept_counts[matcher.concept_ids()[c]] += counts[w][c];
    }
  }
  return result;
}

void merge_into(MatchResult& total, const MatchResult& part) {
  total.tweets += part.tweets;
  total.matched_tweets += part.matched_tweets;
  for (const auto& [id, n] : part.concept_counts) total.concept_counts[id] += n;
}

MergeMap MergeMap::load(const fs::path& path) {
  auto in = io::open_input(path);
  return parse(in, path.string());
}

MergeMap MergeMap::parse(std::istream& in, const std::string& source) {
  io::TsvReader reader(in, source);
  const auto from_col = reader.column("concept_name");
  const auto to_col = reader.column("merged_name");
  MergeMap map;
  io::TsvRow row;
  while (reader.next(row)) {
    const std::string to = text::collapse_whitespace(row.at(to_col));
    if (text::phrase_key(row.at(from_col)).empty() || to.empty()) {
      throw Error(ErrorCode::validation,
                  fmt::format("{}:{}: empty concept or merged name", source, row.line));
    }
    map.add(row.at(from_col), to);
  }
  return map;
}

void MergeMap::add(std::string_view name, std::string merged) {
  auto& targets = map_[text::phrase_key(name)];
  if (std::find(targets.begin(), targets.end(), merged) == targets.end()) {
    targets.push_back(std::move(merged));
  }
}

const std::vector<std::string>& MergeMap::targets(std::string_view name) const {
  static const std::vector<std::string> none;
  auto it = map_.find(text::phrase_key(name));
  return it == map_.end() ? none : it->second;
}

bool MergeMap::single_valued() const noexcept {
  return std::all_of(map_.begin(), map_.end(), [](const auto& kv) { return kv.second.size() <= 1; });
}

std::map<std::string, std::uint64_t> merge(const std::map<std::string, std::uint64_t>& counts,
                                           const MergeMap& merge_map) {
  std::map<std::string, std::uint64_t> out;
  for (const auto& [name, n] : counts) {
    const auto& targets = merge_map.targets(name);
    if (targets.empty()) {
      out[name] += n;
      continue;
    }
    for (const auto& t : targets) out[t] += n;
  }
  return out;
}

std::map<std::string, std::uint64_t> counts_by_name(const MatchResult& result,
                                                    const curation::Dictionary& dictionary) {
  std::map<std::string, std::uint64_t> out;
  for (const auto& [id, n] : result.concept_counts) {
    const auto& name = dictionary.concept_name(id);
    out[name.empty() ? id : name] += n;
  }
  return out;
}

FrequencyReport report(const std::map<std::string, std::uint64_t>& counts, std::uint64_t n,
                       std::uint64_t min_count) {
  FrequencyReport r;
  r.n = n;
  for (const auto& [name, count] : counts) {
    if (count == 0) continue;
    if (n == 0) {
      throw Error(ErrorCode::integrity,
                  fmt::format("'{}' has count {} but no tweet matched (N = 0)", name, count));
    }
    if (count > n) {
      throw Error(ErrorCode::integrity,
                  fmt::format("'{}' has count {} above N = {}", name, count, n));
    }
    if (count < min_count) continue;
    r.rows.push_back(ReportRow{name, count, 100.0 * static_cast<double>(count) /
                                                static_cast<double>(n)});
  }
  std::sort(r.rows.begin(), r.rows.end(), [](const ReportRow& a, const ReportRow& b) {
    if (a.count != b.count) return a.count > b.count;
    return a.symptom < b.symptom;
  });
  return r;
}

std::string format_percent(std::uint64_t count, std::uint64_t n) {
  if (n == 0) return std::string(not_applicable);
  return fmt::format("{:.1f}%", 100.0 * static_cast<double>(count) / static_cast<double>(n));
}

std::string format_thousands(std::uint64_t value) {
  std::string digits = std::to_string(value);
  std::string out;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (i > 0 && (digits.size() - i) % 3 == 0) out.push_back(',');
    out.push_back(digits[i]);
  }
  return out;
}

std::string format_cell(const ReportRow& row) {
  return fmt::format("{} ({:.1f}%)", row.count, row.percent);
}

void write_report_tsv(std::ostream& out, const FrequencyReport& r) {
  out << "# N=" << r.n << '\n';
  out << "symptom\tcount\tpercent\n";
  for (const auto& row : r.rows) {
    io::write_row(out, {row.symptom, std::to_string(row.count), fmt::format("{:.1f}", row.percent)});
  }
}

FrequencyReport read_report_tsv(std::istream& in, const std::string& source) {
  std::string first;
  std::getline(in, first);
  if (!first.empty() && first.back() == '\r') first.pop_back();
  FrequencyReport r;
  auto parse_u64 = [&](std::string_view s, std::size_t line) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
      throw Error(ErrorCode::validation, fmt::format("{}:{}: bad count '{}'", source, line, s));
    }
    return v;
  };
  if (!first.starts_with("# N=")) {
    throw Error(ErrorCode::validation, fmt::format("{}:1: expected '# N=<count>'", source));
  }
  r.n = parse_u64(std::string_view(first).substr(4), 1);
  io::TsvReader reader(in, source);
  const auto name_col = reader.column("symptom");
  const auto count_col = reader.column("count");
  io::TsvRow row;
  while (reader.next(row)) {
    const auto count = parse_u64(row.at(count_col), row.line + 1);
    r.rows.push_back(ReportRow{row.at(name_col), count,
                               r.n == 0 ? 0.0
                                        : 100.0 * static_cast<double>(count) /
                                              static_cast<double>(r.n)});
  }
  return r;
}

std::string render_report_text(const FrequencyReport& r) {
  std::size_t width = std::string_view("Symptom").size();
  for (const auto& row : r.rows) width = std::max(width, text::codepoint_count(row.symptom));
  std::string out = fmt::format("{}{}  {}\n", "Symptom",
                                std::string(width - std::string_view("Symptom").size(), ' '),
                                "Count (%)");
  for (const auto& row : r.rows) {
    out += row.symptom;
    out.append(width - text::codepoint_count(row.symptom) + 2, ' ');
    out += format_cell(row);
    out.push_back('\n');
  }
  out += fmt::format("N={}\n", format_thousands(r.n));
  return out;
}

Comparison compare(const FrequencyReport& a, const FrequencyReport& b,
                   const std::map<std::string, std::string>& alignment) {
  Comparison c;
  c.n_a = a.n;
  c.n_b = b.n;
  std::map<std::string, std::size_t> index;
  for (const auto& row : a.rows) {
    auto [it, fresh] = index.emplace(row.symptom, c.rows.size());
    if (fresh) {
      c.rows.push_back(ComparisonRow{row.symptom, row, std::nullopt});
    } else {
      auto& cell = *c.rows[it->second].a;
      cell.count += row.count;
      cell.percent += row.percent;
    }
  }
  for (const auto& row : b.rows) {
    auto renamed = row;
    if (auto it = alignment.find(row.symptom); it != alignment.end()) renamed.symptom = it->second;
    auto [it, fresh] = index.emplace(renamed.symptom, c.rows.size());
    if (fresh) c.rows.push_back(ComparisonRow{renamed.symptom, std::nullopt, std::nullopt});
    auto& cell = c.rows[it->second].b;
    if (cell) {
      cell->count += renamed.count;
      cell->percent += renamed.percent;
    } else {
      cell = renamed;
    }
  }
  return c;
}

void write_comparison_tsv(std::ostream& out, const Comparison& c, std::string_view label_a,
                          std::string_view label_b) {
  io::write_row(out, {"symptom", label_a, label_b});
  for (const auto& row : c.rows) {
    io::write_row(out, {row.symptom, row.a ? format_cell(*row.a) : std::string(not_applicable),
                        row.b ? format_cell(*row.b) : std::string(not_applicable)});
  }
  io::write_row(out, {"N", fmt::format("N={}", format_thousands(c.n_a)),
                      fmt::format("N={}", format_thousands(c.n_b))});
}

}  // namespace collex::analytics
