#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace collex {

// Multi-pattern matcher over case-folded UTF-8 bytes.
//
// Matches are case-insensitive, never split a word (a match may not start or
// end between two word characters), and are reported leftmost-longest without
// overlap. Patterns are stored as text::phrase_key() of the input, so callers
// should feed whitespace-collapsed text.
class PhraseMatcher {
 public:
  using PatternId = std::uint32_t;

  struct Match {
    std::size_t begin = 0;  // byte offsets into the searched text
    std::size_t end = 0;
    PatternId pattern = 0;
  };

  PhraseMatcher();

  // Adds a phrase and returns its id. Re-adding an equal key returns the
  // existing id. Empty keys are rejected with ErrorCode::invalid_argument.
  PatternId add(std::string_view phrase);

  std::size_t size() const noexcept { return patterns_.size(); }
  bool empty() const noexcept { return patterns_.empty(); }
  const std::string& pattern(PatternId id) const { return patterns_[id]; }

  void find_all(std::string_view text, std::vector<Match>& out) const;
  std::vector<Match> find_all(std::string_view text) const;

 private:
  static constexpr std::uint32_t no_pattern = 0xFFFFFFFFu;

  struct Node {
    std::vector<std::pair<unsigned char, std::uint32_t>> children;  // sorted by byte
    std::uint32_t pattern = no_pattern;
    bool ends_in_word_char = false;
  };

  std::uint32_t child(std::uint32_t node, unsigned char byte) const noexcept;

  std::vector<Node> nodes_;
  std::vector<std::uint32_t> root_children_;  // 256-way fan-out at the root
  std::vector<std::string> patterns_;
};

}  // namespace collex
