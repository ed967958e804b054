#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace impactuq::csv {

// Minimal CSV support for the project's numeric schemas: comma-separated,
// header row required, no quoting.

std::vector<std::string> split_line(const std::string& line);

class Reader {
 public:
  // Opens `path` and checks that the header is exactly `columns`.
  Reader(const std::string& path, const std::vector<std::string>& columns);

  // Next data row, already split; empty optional at EOF. Rows with the wrong
  // field count raise DataError naming the line.
  std::optional<std::vector<std::string>> next();

  // 1-based line number of the row most recently returned.
  long line_number() const { return line_; }
  const std::string& path() const { return path_; }

  [[noreturn]] void fail(const std::string& message) const;

 private:
  std::string path_;
  std::ifstream in_;
  std::size_t n_columns_;
  long line_ = 1;
};

double parse_double(const Reader& r, const std::string& field,
                    const std::string& column);
long parse_long(const Reader& r, const std::string& field,
                const std::string& column);

// Fixed-point formatting used by all writers, e.g. format_fixed(1.5, 6) ->
// "1.500000".
std::string format_fixed(double value, int decimals);

class Writer {
 public:
  Writer(const std::string& path, const std::vector<std::string>& columns);
  void row(const std::vector<std::string>& fields);
  void close();

 private:
  std::ofstream out_;
  std::string path_;
  std::size_t n_columns_;
};

}  // namespace impactuq::csv
