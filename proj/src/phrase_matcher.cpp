#include "collex/phrase_matcher.hpp"

#include <algorithm>

#include "collex/error.hpp"
#include "collex/text.hpp"

namespace collex {

namespace {

// Code point ending just before byte offset `pos` (pos > 0).
char32_t prev_codepoint(std::string_view s, std::size_t pos) noexcept {
  std::size_t start = pos - 1;
  int steps = 0;
  while (start > 0 && steps < 3 && (static_cast<unsigned char>(s[start]) & 0xC0) == 0x80) {
    --start;
    ++steps;
  }
  std::size_t cursor = start;
  const char32_t cp = text::next_codepoint(s, cursor);
  return cursor == pos ? cp : text::replacement_char;
}

char32_t codepoint_at(std::string_view s, std::size_t pos) noexcept {
  return text::next_codepoint(s, pos);
}

}  // namespace

PhraseMatcher::PhraseMatcher() : nodes_(1), root_children_(256, no_pattern) {}

std::uint32_t PhraseMatcher::child(std::uint32_t node, unsigned char byte) const noexcept {
  if (node == 0) return root_children_[byte];
  const auto& kids = nodes_[node].children;
  for (const auto& [b, idx] : kids) {
    if (b == byte) return idx;
    if (b > byte) break;
  }
  return no_pattern;
}

PhraseMatcher::PatternId PhraseMatcher::add(std::string_view phrase) {
  std::string key = text::phrase_key(phrase);
  if (key.empty()) throw Error(ErrorCode::invalid_argument, "empty phrase");
  std::uint32_t node = 0;
  for (unsigned char byte : key) {
    std::uint32_t next = child(node, byte);
    if (next == no_pattern) {
      next = static_cast<std::uint32_t>(nodes_.size());
      nodes_.emplace_back();
      if (node == 0) {
        root_children_[byte] = next;
      } else {
        auto& kids = nodes_[node].children;
        const auto pos = std::lower_bound(
            kids.begin(), kids.end(), byte,
            [](const auto& entry, unsigned char b) { return entry.first < b; });
        kids.insert(pos, {byte, next});
      }
    }
    node = next;
  }
  if (nodes_[node].pattern != no_pattern) return nodes_[node].pattern;
  const auto id = static_cast<PatternId>(patterns_.size());
  nodes_[node].pattern = id;
  nodes_[node].ends_in_word_char = text::is_word_char(prev_codepoint(key, key.size()));
  patterns_.push_back(std::move(key));
  return id;
}

std::vector<PhraseMatcher::Match> PhraseMatcher::find_all(std::string_view text) const {
  std::vector<Match> out;
  find_all(text, out);
  return out;
}

void PhraseMatcher::find_all(std::string_view text, std::vector<Match>& out) const {
  out.clear();
  if (patterns_.empty() || text.empty()) return;
  thread_local std::string folded;
  folded = text::fold_case(text);

  const std::size_t n = folded.size();
  bool prev_is_word = false;
  std::size_t pos = 0;
  while (pos < n) {
    std::size_t after = pos;
    const char32_t cp = text::next_codepoint(text, after);
    const bool cur_is_word = text::is_word_char(cp);
    if (!(prev_is_word && cur_is_word)) {
      std::uint32_t node = 0;
      std::size_t best_end = 0;
      std::uint32_t best_pattern = no_pattern;
      for (std::size_t i = pos; i < n; ++i) {
        node = child(node, static_cast<unsigned char>(folded[i]));
        if (node == no_pattern) break;
        const Node& nd = nodes_[node];
        if (nd.pattern == no_pattern) continue;
        const std::size_t end = i + 1;
        const bool right_ok =
            end == n || !nd.ends_in_word_char || !text::is_word_char(codepoint_at(text, end));
        if (right_ok) {
          best_end = end;
          best_pattern = nd.pattern;
        }
      }
      if (best_pattern != no_pattern) {
        out.push_back({pos, best_end, best_pattern});
        prev_is_word = text::is_word_char(prev_codepoint(text, best_end));
        pos = best_end;
        continue;
      }
    }
    prev_is_word = cur_is_word;
    pos = after;
  }
}

}  // namespace collex
