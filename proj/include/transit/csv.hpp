#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "transit/core.hpp"

namespace transit {
namespace csv {

// Splits one line on `delim`, honoring double-quote escaping ("" inside a
// quoted field is a literal quote). No multi-line fields.
inline std::vector<std::string> split(std::string_view line, char delim = ',') {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"' && cur.empty()) {
      quoted = true;
    } else if (c == delim) {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

inline std::string escape(std::string_view field, char delim = ',') {
  bool need = false;
  for (char c : field)
    if (c == delim || c == '"' || c == '\n' || c == '\r') { need = true; break; }
  if (!need) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

inline std::string join(const std::vector<std::string>& fields, char delim = ',') {
  std::string out;
  for (size_t i = 0; i < fields.size(); ++i) {
    if (i) out += delim;
    out += escape(fields[i], delim);
  }
  return out;
}

inline std::string trim(std::string_view s) {
  auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  size_t b = 0, e = s.size();
  while (b < e && ws(s[b])) ++b;
  while (e > b && ws(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

// Splits text into non-empty lines (strips trailing \r for CRLF content).
inline std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t nl = text.find('\n', pos);
    std::string_view line =
        nl == std::string_view::npos ? text.substr(pos) : text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) lines.emplace_back(line);
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return lines;
}

// Reads all non-empty lines (strips trailing \r for CRLF files).
inline std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io_error, "cannot open '" + path + "' for reading");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

inline void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::io_error, "cannot open '" + path + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) fail(Errc::io_error, "short write to '" + path + "'");
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io_error, "cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Incremental CSV writer with a fixed header row.
class Writer {
 public:
  explicit Writer(std::vector<std::string> header, char delim = ',')
      : delim_(delim) {
    buf_ = join(header, delim_);
    buf_ += '\n';
  }

  void row(const std::vector<std::string>& fields) {
    buf_ += join(fields, delim_);
    buf_ += '\n';
  }

  const std::string& str() const { return buf_; }
  void save(const std::string& path) const { write_file(path, buf_); }

 private:
  char delim_;
  std::string buf_;
};

}  // namespace csv
}  // namespace transit
