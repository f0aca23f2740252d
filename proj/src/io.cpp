#include "collex/io.hpp"

#include <fmt/format.h>

#include <istream>
#include <ostream>
#include <sstream>

#include "collex/error.hpp"

namespace collex::io {

namespace fs = std::filesystem;

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, fmt::format("cannot open {} for reading", path.string()));
  return in;
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, fmt::format("cannot open {} for writing", path.string()));
  return out;
}

std::string read_file(const fs::path& path) {
  auto in = open_input(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

void write_file_atomic(const fs::path& path, std::string_view content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    auto out = open_output(tmp);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorCode::io, fmt::format("short write to {}", tmp.string()));
  }
  fs::rename(tmp, path);
}

std::string escape_field(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string unescape_field(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\' || i + 1 == s.size()) {
      out.push_back(s[i]);
      continue;
    }
    switch (s[++i]) {
      case 't': out.push_back('\t'); break;
      case 'n': out.push_back('\n'); break;
      case 'r': out.push_back('\r'); break;
      case '\\': out.push_back('\\'); break;
      default:
        out.push_back('\\');
        out.push_back(s[i]);
    }
  }
  return out;
}

std::string join_escaped(const std::vector<std::string>& items, char sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out.push_back(sep);
    for (char c : items[i]) {
      if (c == sep || c == '\\') out.push_back('\\');
      out.push_back(c);
    }
  }
  return out;
}

std::vector<std::string> split_escaped(std::string_view s, char sep) {
  std::vector<std::string> items;
  if (s.empty()) return items;
  std::string cur;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && i + 1 < s.size()) {
      cur.push_back(s[++i]);
    } else if (s[i] == sep) {
      items.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(s[i]);
    }
  }
  items.push_back(std::move(cur));
  return items;
}

void write_row(std::ostream& out, std::initializer_list<std::string_view> fields) {
  bool first = true;
  for (auto f : fields) {
    if (!first) out.put('\t');
    first = false;
    out << escape_field(f);
  }
  out.put('\n');
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out.put('\t');
    out << escape_field(fields[i]);
  }
  out.put('\n');
}

const std::string& TsvRow::at(std::size_t column) const {
  if (column >= fields.size()) {
    throw Error(ErrorCode::validation,
                fmt::format("line {}: expected at least {} columns, got {}", line, column + 1,
                            fields.size()));
  }
  return fields[column];
}

std::vector<std::string> split_tsv_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    const auto raw = line.substr(start, tab == std::string_view::npos ? line.size() - start
                                                                       : tab - start);
    fields.push_back(unescape_field(raw));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return fields;
}

TsvReader::TsvReader(std::istream& in, std::string source, bool has_header)
    : in_(in), source_(std::move(source)) {
  if (!has_header) return;
  TsvRow row;
  if (!next(row)) throw Error(ErrorCode::validation, fmt::format("{}: missing header row", source_));
  header_ = std::move(row.fields);
  for (std::size_t i = 0; i < header_.size(); ++i) index_.emplace(header_[i], i);
}

bool TsvReader::has_column(std::string_view name) const {
  return index_.find(std::string(name)) != index_.end();
}

std::size_t TsvReader::column(std::string_view name) const {
  const auto it = index_.find(std::string(name));
  if (it == index_.end()) {
    throw Error(ErrorCode::validation, fmt::format("{}: missing column '{}'", source_, name));
  }
  return it->second;
}

bool TsvReader::next(TsvRow& row) {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_;
    if (line.empty() || line == "\r" || line.front() == '#') continue;
    row.line = line_;
    row.fields = split_tsv_line(line);
    return true;
  }
  return false;
}

}  // namespace collex::io
