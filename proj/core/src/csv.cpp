#include "lineval/csv.hpp"

#include <cstdlib>

#include "lineval/common.hpp"

namespace lineval::csv {

namespace {

std::string trim_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

}  // namespace

std::vector<std::string> split_record(const std::string& record) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < record.size(); ++i) {
    char c = record[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < record.size() && record[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  out.push_back(std::move(field));
  return out;
}

std::string escape_field(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

Reader::Reader(const std::filesystem::path& path) : path_(path), in_(path) {
  if (!in_) throw input_error("cannot open " + path.string());
  std::string head;
  if (!std::getline(in_, head)) throw input_error(path.string() + ": empty file, header row required");
  line_ = 1;
  header_ = split_record(trim_cr(head));
  for (std::size_t i = 0; i < header_.size(); ++i) index_[header_[i]] = i;
}

bool Reader::next() {
  std::string raw;
  while (std::getline(in_, raw)) {
    ++line_;
    raw = trim_cr(raw);
    if (raw.empty()) continue;  // skip blank lines
    row_ = split_record(raw);
    if (row_.size() != header_.size()) {
      throw input_error(location() + ": expected " + std::to_string(header_.size()) +
                        " fields, got " + std::to_string(row_.size()));
    }
    return true;
  }
  return false;
}

std::string Reader::location() const {
  return path_.filename().string() + ":" + std::to_string(line_);
}

bool Reader::has_column(const std::string& name) const { return index_.count(name) > 0; }

const std::string& Reader::raw(const std::string& column) const {
  auto it = index_.find(column);
  if (it == index_.end()) {
    throw input_error(path_.filename().string() + ": missing required column '" + column + "'");
  }
  return row_[it->second];
}

std::string Reader::get_string(const std::string& column) const { return raw(column); }

double Reader::get_double(const std::string& column) const {
  const std::string& s = raw(column);
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw input_error(location() + ": column '" + column + "': bad number '" + s + "'");
  }
  return v;
}

long long Reader::get_long(const std::string& column) const {
  const std::string& s = raw(column);
  char* end = nullptr;
  long long v = std::strtoll(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw input_error(location() + ": column '" + column + "': bad integer '" + s + "'");
  }
  return v;
}

std::optional<double> Reader::get_optional_double(const std::string& column) const {
  const std::string& s = raw(column);
  if (s.empty()) return std::nullopt;
  return get_double(column);
}

Writer::Writer(const std::filesystem::path& path) : out_(path, std::ios::binary), path_(path) {
  if (!out_) throw input_error("cannot write " + path.string());
}

void Writer::row(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ',';
    out_ << escape_field(fields[i]);
  }
  out_ << '\n';
  if (!out_) throw input_error("write failed: " + path_.string());
}

}  // namespace lineval::csv
