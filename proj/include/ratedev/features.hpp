#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ratedev/model.hpp"

namespace ratedev::features {

enum class Feature { same_day, extreme, similarity };
inline constexpr std::array<Feature, 3> kAllFeatures{Feature::same_day, Feature::extreme,
                                                      Feature::similarity};
std::string_view feature_name(Feature f);

struct ReviewerFeatures {
  std::string reviewer_id;
  std::optional<double> same_day;    ///< absent without dated reviews
  double extreme = 0.0;
  std::optional<double> similarity;  ///< absent with fewer than two texts

  std::optional<double> get(Feature f) const;
};

/// Fraction of dated reviews whose day is shared with another dated review
/// of the same reviewer. Empty input gives no value.
std::optional<double> same_day_proportion(std::span<const Day> dates);

/// Fraction of ratings at either end of the scale. Throws on empty input.
double extreme_proportion(std::span<const double> ratings, RatingScale scale);

/// Similarity of two review texts in [0, 1].
using SimilarityFn = std::function<double(std::string_view, std::string_view)>;

/// Lowercased words with punctuation removed.
std::vector<std::string> tokenize(std::string_view text);

/// Jaccard similarity of word-bigram shingles. A text of a single word
/// contributes its unigram instead.
double bigram_jaccard(std::string_view a, std::string_view b);

/// Largest pairwise similarity among non-empty texts; absent for fewer than
/// two. An empty `similarity` selects bigram_jaccard with shingles built once
/// per text.
std::optional<double> max_content_similarity(std::span<const std::string> texts,
                                             const SimilarityFn& similarity = {});

struct FeatureTable {
  std::vector<ReviewerFeatures> rows;  ///< dataset reviewer order
  bool has_same_day = false;
  bool has_similarity = false;
  std::size_t undated_reviews = 0;

  std::vector<Feature> available() const;
};

FeatureTable compute_features(const Dataset& d, const SimilarityFn& similarity = {});

/// z in {0.00, 0.05, ..., 1.00}.
std::vector<double> default_thresholds();

/// Per feature (indexed as kAllFeatures) and per threshold: share of the
/// group whose score exceeds z. Reviewers without a value never exceed.
struct ExceedanceTable {
  std::vector<double> thresholds;
  std::array<std::vector<double>, 3> proportion;
  std::size_t group_size = 0;
};

ExceedanceTable exceedance(const FeatureTable& table, std::span<const std::size_t> members,
                           std::span<const double> thresholds);

/// Mean exceedance over `repeats` uniform samples of `sample_size` reviewers
/// drawn without replacement. Repeat i draws from its own stream (seed, i).
ExceedanceTable baseline_sample(const FeatureTable& table, std::size_t sample_size, std::size_t repeats,
                                std::uint64_t seed, std::span<const double> thresholds);

struct ComparisonRow {
  Feature feature;
  double z = 0.0;
  double candidate_prop = 0.0;
  double baseline_prop = 0.0;
  double p_value = 1.0;
};

struct GroupComparison {
  std::vector<double> thresholds;
  std::vector<ComparisonRow> rows;  ///< feature-major, thresholds ascending
};

/// Candidate exceedance vs. baseline, two-proportion test per (feature, z).
/// Baseline size is its sample size. Only features present in the table
/// are compared. Throws on an empty candidate set or an unknown id.
GroupComparison compare_groups(const std::set<std::string>& candidates, const ExceedanceTable& baseline,
                               const Dataset& d, const FeatureTable& table);

}  // namespace ratedev::features
