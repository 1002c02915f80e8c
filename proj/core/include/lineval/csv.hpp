#ifndef LINEVAL_CSV_HPP
#define LINEVAL_CSV_HPP

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace lineval::csv {

/// Header-indexed CSV reader. Handles quoted fields, embedded commas and
/// CRLF line endings; errors carry file, line and column name.
class Reader {
 public:
  explicit Reader(const std::filesystem::path& path);

  /// Advances to the next data row. Returns false at end of file.
  bool next();

  bool has_column(const std::string& name) const;

  /// Field accessors for the current row. Missing/malformed values throw
  /// input_error with "<file>:<line>: ..." context.
  std::string get_string(const std::string& column) const;
  double get_double(const std::string& column) const;
  long long get_long(const std::string& column) const;
  /// Empty field -> nullopt.
  std::optional<double> get_optional_double(const std::string& column) const;

  const std::vector<std::string>& header() const { return header_; }
  std::size_t line() const { return line_; }
  std::string location() const;

 private:
  const std::string& raw(const std::string& column) const;

  std::filesystem::path path_;
  std::ifstream in_;
  std::vector<std::string> header_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::string> row_;
  std::size_t line_ = 0;
};

/// Minimal CSV writer; quotes fields only when needed.
class Writer {
 public:
  explicit Writer(const std::filesystem::path& path);
  void row(const std::vector<std::string>& fields);

 private:
  std::ofstream out_;
  std::filesystem::path path_;
};

/// Splits one physical CSV record (no multi-line fields). Exposed for tests.
std::vector<std::string> split_record(const std::string& record);

std::string escape_field(const std::string& field);

}  // namespace lineval::csv

#endif  // LINEVAL_CSV_HPP
