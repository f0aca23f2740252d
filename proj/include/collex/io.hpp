#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace collex::io {

std::ifstream open_input(const std::filesystem::path& path);
std::ofstream open_output(const std::filesystem::path& path);
std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// Backslash escapes for tab, newline, carriage return and backslash.
std::string escape_field(std::string_view s);
std::string unescape_field(std::string_view s);

// Joins items with `sep`, escaping occurrences of `sep` and backslash.
std::string join_escaped(const std::vector<std::string>& items, char sep);
std::vector<std::string> split_escaped(std::string_view s, char sep);

void write_row(std::ostream& out, std::initializer_list<std::string_view> fields);
void write_row(std::ostream& out, const std::vector<std::string>& fields);

struct TsvRow {
  std::size_t line = 0;
  std::vector<std::string> fields;

  const std::string& at(std::size_t column) const;
};

// Line-oriented TSV reader. Blank lines and lines starting with '#' are
// skipped. Fields are unescaped.
class TsvReader {
 public:
  TsvReader(std::istream& in, std::string source, bool has_header = true);

  const std::vector<std::string>& header() const noexcept { return header_; }
  bool has_column(std::string_view name) const;
  std::size_t column(std::string_view name) const;
  const std::string& source() const noexcept { return source_; }

  bool next(TsvRow& row);

 private:
  std::istream& in_;
  std::string source_;
  std::vector<std::string> header_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t line_ = 0;
};

std::vector<std::string> split_tsv_line(std::string_view line);

}  // namespace collex::io
