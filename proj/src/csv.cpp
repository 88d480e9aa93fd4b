#include "ratedev/csv.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>

#include <json.hpp>

namespace ratedev {

bool CsvReader::next(std::vector<std::string>& fields) {
  fields.clear();
  std::string line;
  if (!std::getline(in_, line)) return false;
  ++line_;
  record_line_ = line_;

  std::string field;
  bool quoted = false;
  bool after_quote = false;
  while (true) {
    for (std::size_t i = 0; i < line.size(); ++i) {
      char c = line[i];
      if (quoted) {
        if (c == '"') {
          if (i + 1 < line.size() && line[i + 1] == '"') {
            field.push_back('"');
            ++i;
          } else {
            quoted = false;
            after_quote = true;
          }
        } else {
          field.push_back(c);
        }
      } else if (c == ',') {
        fields.push_back(std::move(field));
        field.clear();
        after_quote = false;
      } else if (c == '"') {
        if (!field.empty() || after_quote) throw ParseError("unexpected quote", line_);
        quoted = true;
      } else if (c == '\r' && i + 1 == line.size()) {
        // CRLF line ending
      } else {
        if (after_quote) throw ParseError("text after closing quote", line_);
        field.push_back(c);
      }
    }
    if (!quoted) break;
    if (!std::getline(in_, line)) throw ParseError("unterminated quoted field", record_line_);
    ++line_;
    field.push_back('\n');
  }
  fields.push_back(std::move(field));
  return true;
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out;
  out.reserve(field.size() + 2);
  out.push_back('"');
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << csv_escape(fields[i]);
  }
  out << '\n';
}

std::string format_number(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

namespace {

std::optional<double> parse_double(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

/// Raw string fields of one record, before validation.
struct RawRecord {
  std::optional<std::string> reviewer_id, product_id, rating, date, text;
};

class Collector {
 public:
  Collector(const ParseOptions& opts, std::size_t expected) : opts_(opts) { reviews_.reserve(expected); }

  void malformed(const std::string& why, std::size_t line) {
    if (opts_.strict) throw ParseError(why, line);
    ++result_malformed_;
  }

  void add(RawRecord raw, std::size_t line) {
    auto missing = [](const std::optional<std::string>& s) { return !s || s->empty(); };
    if (missing(raw.reviewer_id) || missing(raw.product_id) || missing(raw.rating)) {
      ++dropped_;
      return;
    }
    auto rating = parse_double(*raw.rating);
    if (!rating) return malformed("rating is not a number", line);
    std::optional<Day> date;
    if (!missing(raw.date)) {
      date = parse_iso_day(*raw.date);
      if (!date) return malformed("invalid date '" + *raw.date + "'", line);
    }
    if (!opts_.scale.contains(*rating)) {
      if (opts_.strict) throw ParseError("rating outside scale", line);
      ++dropped_;
      return;
    }
    Review rv{std::move(*raw.reviewer_id), std::move(*raw.product_id), *rating, date, std::nullopt};
    if (!missing(raw.text)) rv.text = std::move(*raw.text);
    reviews_.push_back(std::move(rv));
  }

  ParseResult finish() {
    ParseResult out{Dataset(std::move(reviews_), opts_.scale, opts_.midpoint), dropped_,
                    result_malformed_};
    return out;
  }

 private:
  const ParseOptions& opts_;
  std::vector<Review> reviews_;
  std::size_t dropped_ = 0;
  std::size_t result_malformed_ = 0;
};

ParseResult parse_csv(std::istream& in, const ParseOptions& opts, std::size_t expected) {
  Collector sink(opts, expected);
  CsvReader reader(in);
  std::vector<std::string> fields;
  if (!reader.next(fields)) return sink.finish();

  const std::vector<std::string> header = fields;
  auto column = [&](std::string_view name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    return std::nullopt;
  };
  auto c_reviewer = column("reviewer_id");
  auto c_product = column("product_id");
  auto c_rating = column("rating");
  auto c_date = column("date");
  auto c_text = column("text");
  if (!c_reviewer || !c_product || !c_rating)
    throw ParseError("header must name reviewer_id, product_id and rating", reader.record_line());

  while (true) {
    try {
      if (!reader.next(fields)) break;
    } catch (const ParseError& e) {
      if (opts.strict) throw;
      sink.malformed(e.what(), e.line());
      break;  // the rest of the stream cannot be resynchronised reliably
    }
    if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
    if (fields.size() != header.size()) {
      sink.malformed("expected " + std::to_string(header.size()) + " fields, got " +
                         std::to_string(fields.size()),
                     reader.record_line());
      continue;
    }
    auto take = [&](std::optional<std::size_t> c) -> std::optional<std::string> {
      if (!c) return std::nullopt;
      return std::move(fields[*c]);
    };
    RawRecord raw{take(c_reviewer), take(c_product), take(c_rating), take(c_date), take(c_text)};
    sink.add(std::move(raw), reader.record_line());
  }
  return sink.finish();
}

std::optional<std::string> json_field(const nlohmann::json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number_integer()) return std::to_string(it->get<long long>());
  if (it->is_number()) return format_number(it->get<double>());
  return it->dump();
}

ParseResult parse_jsonl(std::istream& in, const ParseOptions& opts, std::size_t expected) {
  Collector sink(opts, expected);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json obj = nlohmann::json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) {
      sink.malformed("invalid JSON object", line_no);
      continue;
    }
    RawRecord raw{json_field(obj, "reviewer_id"), json_field(obj, "product_id"),
                  json_field(obj, "rating"), json_field(obj, "date"), json_field(obj, "text")};
    sink.add(std::move(raw), line_no);
  }
  return sink.finish();
}

}  // namespace

namespace {

ParseResult parse_any(std::istream& source, const ParseOptions& options, std::size_t expected) {
  if (!source) throw IoError("unreadable review source");
  return options.format == InputFormat::csv ? parse_csv(source, options, expected)
                                            : parse_jsonl(source, options, expected);
}

// upper bound on the record count, so the review buffer is allocated once
std::size_t count_lines(std::istream& in) {
  std::array<char, 1 << 16> buf;
  std::size_t lines = 1;
  while (in.read(buf.data(), buf.size()) || in.gcount() > 0)
    lines += static_cast<std::size_t>(std::count(buf.data(), buf.data() + in.gcount(), '\n'));
  in.clear();
  in.seekg(0);
  return lines;
}

}  // namespace

ParseResult parse_reviews(std::istream& source, const ParseOptions& options) {
  return parse_any(source, options, 0);
}

ParseResult parse_reviews_file(const std::string& path, const ParseOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  const std::size_t expected = count_lines(in);
  if (!in) throw IoError("cannot read '" + path + "'");
  return parse_any(in, options, expected);
}

void write_reviews_csv(std::ostream& out, const Dataset& d) {
  out << "reviewer_id,product_id,rating,date,text\n";
  for (const Review& rv : d.reviews()) {
    write_csv_row(out, {rv.reviewer_id, rv.product_id, format_number(rv.rating),
                        rv.date ? format_iso_day(*rv.date) : std::string(),
                        rv.text.value_or(std::string())});
  }
}

}  // namespace ratedev
