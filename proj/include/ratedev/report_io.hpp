#pragma once

#include <map>
#include <set>
#include <string>

#include <json.hpp>

#include "ratedev/csv.hpp"
#include "ratedev/detector.hpp"
#include "ratedev/features.hpp"
#include "ratedev/model.hpp"
#include "ratedev/synthgen.hpp"

namespace ratedev::io {

/// `reviewer_id,n,k,phi,psi,spamicity,is_candidate`
std::string report_csv(const SpamicityReport& report);
/// iteration count, convergence flag, per-iteration max delta
nlohmann::json state_json(const DetectionState& state, const DetectorConfig& cfg);
/// `rank,reviewer_id,n,k,ratio`
std::string candidates_csv(const SpamicityReport& report);

nlohmann::json dataset_summary(const Dataset& d, std::size_t dropped, std::size_t malformed);

/// `reviewer_id,is_spammer` for every reviewer in the graph.
std::string truth_csv(const synth::SynthGraph& g);
std::string reviews_csv(const Dataset& d);

/// `reviewer_id,same_day,extreme,similarity`; absent features leave their
/// column out entirely when the dataset lacks them, or empty cells otherwise.
std::string features_csv(const features::FeatureTable& table);
/// `feature,z,candidate_prop,baseline_prop,p_value`
std::string comparison_csv(const features::GroupComparison& cmp);

/// reviewer_id -> value of `column` from any CSV with a header row.
std::map<std::string, double> read_score_column(const std::string& path, const std::string& column);
/// reviewer_id -> is_spammer from a ground-truth CSV.
std::map<std::string, bool> read_truth(const std::string& path);
/// One id per line, or the reviewer_id column of a CSV with that header.
std::set<std::string> read_id_list(const std::string& path);

/// Writes through a sibling temp file and renames it into place.
void write_file_atomic(const std::string& path, const std::string& contents);
std::string read_file(const std::string& path);

}  // namespace ratedev::io
