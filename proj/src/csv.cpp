#include "impactuq/csv.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "impactuq/errors.hpp"

namespace impactuq::csv {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = line.find(',', pos);
    if (comma == std::string::npos) {
      out.push_back(line.substr(pos));
      return out;
    }
    out.push_back(line.substr(pos, comma - pos));
    pos = comma + 1;
  }
}

namespace {

std::string join(const std::vector<std::string>& fields) {
  std::string s;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) s += ',';
    s += fields[i];
  }
  return s;
}

// Strips one trailing '\r' so CRLF files load too.
void chomp(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

Reader::Reader(const std::string& path, const std::vector<std::string>& columns)
    : path_(path), in_(path), n_columns_(columns.size()) {
  if (!in_) throw DataError("cannot open '" + path + "'");
  std::string header;
  if (!std::getline(in_, header))
    throw DataError("'" + path + "' is empty, expected header " + join(columns));
  chomp(header);
  if (split_line(header) != columns)
    throw DataError("'" + path + "' has header '" + header + "', expected '" +
                    join(columns) + "'");
}

std::optional<std::vector<std::string>> Reader::next() {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_;
    chomp(line);
    if (line.empty()) continue;
    std::vector<std::string> fields = split_line(line);
    if (fields.size() != n_columns_)
      fail("expected " + std::to_string(n_columns_) + " fields, got " +
           std::to_string(fields.size()));
    return fields;
  }
  return std::nullopt;
}

void Reader::fail(const std::string& message) const {
  throw DataError(path_ + ":" + std::to_string(line_) + ": " + message);
}

double parse_double(const Reader& r, const std::string& field,
                    const std::string& column) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (end == field.c_str() || *end != '\0' || errno == ERANGE ||
      !std::isfinite(v))
    r.fail("field '" + column + "' is not a finite number: '" + field + "'");
  return v;
}

long parse_long(const Reader& r, const std::string& field,
                const std::string& column) {
  errno = 0;
  char* end = nullptr;
  const long v = std::strtol(field.c_str(), &end, 10);
  if (end == field.c_str() || *end != '\0' || errno == ERANGE)
    r.fail("field '" + column + "' is not an integer: '" + field + "'");
  return v;
}

std::string format_fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
  return buf;
}

Writer::Writer(const std::string& path, const std::vector<std::string>& columns)
    : out_(path, std::ios::binary), path_(path), n_columns_(columns.size()) {
  if (!out_) throw DataError("cannot write '" + path + "'");
  out_ << join(columns) << '\n';
}

void Writer::row(const std::vector<std::string>& fields) {
  if (fields.size() != n_columns_)
    throw DataError("row width mismatch writing '" + path_ + "'");
  out_ << join(fields) << '\n';
}

void Writer::close() {
  out_.close();
  if (!out_) throw DataError("failed writing '" + path_ + "'");
}

}  // namespace impactuq::csv
