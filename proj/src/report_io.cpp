#include "ratedev/report_io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string_view>
#include <unordered_map>

namespace ratedev::io {

namespace fs = std::filesystem;

std::string report_csv(const SpamicityReport& report) {
  std::ostringstream out;
  out << "reviewer_id,n,k,phi,psi,spamicity,is_candidate\n";
  const std::string phi = format_number(report.phi);
  for (const auto& s : report.reviewers)
    write_csv_row(out, {s.reviewer_id, std::to_string(s.n), std::to_string(s.k), phi,
                        format_number(s.psi), format_number(s.spamicity), s.is_candidate ? "1" : "0"});
  return out.str();
}

nlohmann::json state_json(const DetectionState& state, const DetectorConfig& cfg) {
  return {{"iteration", state.iteration},
          {"converged", state.converged},
          {"max_delta", state.max_delta},
          {"max_delta_history", state.delta_history},
          {"tau", cfg.tau},
          {"max_iterations", cfg.max_iterations}};
}

std::string candidates_csv(const SpamicityReport& report) {
  std::unordered_map<std::string_view, const ReviewerScore*> by_id;
  for (const auto& s : report.reviewers)
    if (s.is_candidate) by_id.emplace(s.reviewer_id, &s);
  std::ostringstream out;
  out << "rank,reviewer_id,n,k,ratio\n";
  std::size_t rank = 0;
  for (const auto& id : rank_candidates(report)) {
    const auto* s = by_id.at(id);
    write_csv_row(out, {std::to_string(++rank), id, std::to_string(s->n), std::to_string(s->k),
                        format_number(static_cast<double>(s->k) / static_cast<double>(s->n))});
  }
  return out.str();
}

nlohmann::json dataset_summary(const Dataset& d, std::size_t dropped, std::size_t malformed) {
  return {{"reviewers", d.reviewer_count()},
          {"products", d.product_count()},
          {"reviews", d.review_count()},
          {"dropped", dropped},
          {"malformed", malformed}};
}

std::string truth_csv(const synth::SynthGraph& g) {
  std::ostringstream out;
  out << "reviewer_id,is_spammer\n";
  for (const auto& id : g.dataset.reviewer_ids())
    write_csv_row(out, {id, g.spammer_ids.count(id) ? "1" : "0"});
  return out.str();
}

std::string reviews_csv(const Dataset& d) {
  std::ostringstream out;
  write_reviews_csv(out, d);
  return out.str();
}

std::string features_csv(const features::FeatureTable& table) {
  std::ostringstream out;
  std::vector<std::string> header{"reviewer_id"};
  if (table.has_same_day) header.push_back("same_day");
  header.push_back("extreme");
  if (table.has_similarity) header.push_back("similarity");
  write_csv_row(out, header);
  auto cell = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
  for (const auto& row : table.rows) {
    std::vector<std::string> fields{row.reviewer_id};
    if (table.has_same_day) fields.push_back(cell(row.same_day));
    fields.push_back(format_number(row.extreme));
    if (table.has_similarity) fields.push_back(cell(row.similarity));
    write_csv_row(out, fields);
  }
  return out.str();
}

std::string comparison_csv(const features::GroupComparison& cmp) {
  std::ostringstream out;
  out << "feature,z,candidate_prop,baseline_prop,p_value\n";
  for (const auto& row : cmp.rows)
    write_csv_row(out, {std::string(features::feature_name(row.feature)), format_number(row.z),
                        format_number(row.candidate_prop), format_number(row.baseline_prop),
                        format_number(row.p_value)});
  return out.str();
}

namespace {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name, const std::string& path) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw ParseError("'" + path + "' has no column '" + name + "'", 1);
  }
};

Table read_table(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  CsvReader reader(in);
  Table t;
  if (!reader.next(t.header)) throw ParseError("'" + path + "' is empty", 1);
  std::vector<std::string> fields;
  while (reader.next(fields)) {
    if (fields.size() == 1 && fields[0].empty()) continue;
    if (fields.size() != t.header.size())
      throw ParseError("'" + path + "': wrong field count", reader.record_line());
    t.rows.push_back(fields);
  }
  return t;
}

}  // namespace

std::map<std::string, double> read_score_column(const std::string& path, const std::string& column) {
  Table t = read_table(path);
  const auto id_col = t.column("reviewer_id", path);
  const auto score_col = t.column(column, path);
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& text = t.rows[i][score_col];
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != text.size())
      throw ParseError("'" + path + "': score '" + text + "' is not a number", i + 2);
    if (!out.emplace(t.rows[i][id_col], v).second)
      throw ParseError("'" + path + "': duplicate reviewer '" + t.rows[i][id_col] + "'", i + 2);
  }
  return out;
}

std::map<std::string, bool> read_truth(const std::string& path) {
  Table t = read_table(path);
  const auto id_col = t.column("reviewer_id", path);
  const auto label_col = t.column("is_spammer", path);
  std::map<std::string, bool> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& v = t.rows[i][label_col];
    bool label;
    if (v == "1" || v == "true")
      label = true;
    else if (v == "0" || v == "false")
      label = false;
    else
      throw ParseError("'" + path + "': label '" + v + "' is not 0/1", i + 2);
    out[t.rows[i][id_col]] = label;
  }
  return out;
}

std::set<std::string> read_id_list(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  CsvReader reader(in);
  std::vector<std::string> fields;
  std::set<std::string> out;
  std::optional<std::size_t> id_col;
  bool first = true;
  while (reader.next(fields)) {
    if (fields.size() == 1 && fields[0].empty()) continue;
    if (first) {
      first = false;
      for (std::size_t i = 0; i < fields.size(); ++i)
        if (fields[i] == "reviewer_id") id_col = i;
      if (id_col) continue;
    }
    const std::size_t c = id_col.value_or(0);
    if (c >= fields.size()) throw ParseError("'" + path + "': missing reviewer_id field", reader.record_line());
    out.insert(fields[c]);
  }
  return out;
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  fs::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
    if (ec) throw IoError("cannot create directory '" + target.parent_path().string() + "'");
  }
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + tmp.string() + "'");
    out << contents;
    out.flush();
    if (!out) throw IoError("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) throw IoError("cannot rename into '" + path + "'");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace ratedev::io
