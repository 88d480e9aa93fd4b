#pragma once

#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ratedev/model.hpp"

namespace ratedev {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// RFC-4180 record reader: comma separated, double-quote quoting, quoted
/// fields may span lines. Tracks the physical line a record started on.
class CsvReader {
 public:
  explicit CsvReader(std::istream& in) : in_(in) {}

  /// Reads the next record into `fields`. Returns false at end of input.
  /// Throws ParseError on an unterminated quote or stray quote.
  bool next(std::vector<std::string>& fields);
  std::size_t record_line() const noexcept { return record_line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
  std::size_t record_line_ = 0;
};

/// Quotes a field when it contains a comma, quote, or line break.
std::string csv_escape(std::string_view field);
void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

enum class InputFormat { csv, jsonl };

struct ParseOptions {
  InputFormat format = InputFormat::csv;
  bool strict = false;
  RatingScale scale = kFiveStar;
  double midpoint = 3.0;
};

struct ParseResult {
  Dataset dataset;
  std::size_t dropped = 0;  ///< records missing a required field or out of scale
  std::size_t malformed = 0;  ///< lenient mode only: unparseable records skipped
};

ParseResult parse_reviews(std::istream& source, const ParseOptions& options = {});
ParseResult parse_reviews_file(const std::string& path, const ParseOptions& options = {});

/// Writes the canonical review CSV (header `reviewer_id,product_id,rating,date,text`).
void write_reviews_csv(std::ostream& out, const Dataset& d);

/// Shortest round-trip decimal representation.
std::string format_number(double value);

}  // namespace ratedev
