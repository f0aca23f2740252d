#pragma once

// UTF-8 helpers shared by the extraction, normalization and matching stages.
// Everything here works on std::string holding UTF-8; invalid sequences decode
// to U+FFFD rather than throwing.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace collex::text {

inline constexpr char32_t replacement_char = 0xFFFD;

// Decodes one code point starting at `pos` and advances `pos` past it.
char32_t next_codepoint(std::string_view s, std::size_t& pos) noexcept;

std::u32string decode_utf8(std::string_view s);
std::string encode_utf8(std::u32string_view s);
void append_utf8(std::string& out, char32_t cp);

std::size_t codepoint_count(std::string_view s) noexcept;

// Byte offset of every code point plus a trailing entry equal to s.size().
std::vector<std::size_t> codepoint_offsets(std::string_view s);

// Word characters: ASCII letters and digits, the apostrophe, and any
// non-ASCII letter. Non-ASCII punctuation, symbols and emoji are not letters.
bool is_word_char(char32_t cp) noexcept;

bool is_space(char32_t cp) noexcept;

// Simple lowercase mapping for ASCII and Latin-1 letters. The mapping keeps
// the UTF-8 byte length unchanged, so byte offsets survive folding.
char32_t fold_case(char32_t cp) noexcept;
std::string fold_case(std::string_view s);

// Trims and collapses every whitespace run to a single ASCII space.
std::string collapse_whitespace(std::string_view s);

std::string_view trim(std::string_view s) noexcept;

std::vector<std::string_view> split(std::string_view s, char sep);

// Lowercased and whitespace-collapsed form used as a lookup key for phrases.
std::string phrase_key(std::string_view s);

}  // namespace collex::text
