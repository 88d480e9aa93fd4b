#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ratedev/model.hpp"

namespace ratedev {

/// Which means the global disagreement rate is measured against.
enum class PhiMode {
  initial,         ///< unweighted means (u = 1 for everyone)
  post_correction  ///< means after the correction loop
};

enum class MeanMode {
  weight_normalized,  ///< sum(rating * u) / sum(u)
  count_normalized    ///< sum(rating * u) / |R_p|
};

struct DetectorConfig {
  double lambda = 3.0;
  double alpha = 0.05;
  double tau = 1e-5;
  std::size_t max_iterations = 10;
  PhiMode phi_mode = PhiMode::initial;
  MeanMode mean_mode = MeanMode::weight_normalized;
  bool bonferroni = true;
  std::optional<std::size_t> max_candidate_reviews = 50;

  void validate() const;
};

struct DetectionState {
  std::vector<double> honesty;  ///< u per reviewer index
  std::vector<double> means;    ///< weighted mean per product index, last iteration
  std::size_t iteration = 0;
  bool converged = false;
  double max_delta = 0.0;
  std::vector<double> delta_history;  ///< max |u change| of each iteration
};

struct ReviewerScore {
  std::string reviewer_id;
  std::uint64_t n = 0;
  std::uint64_t k = 0;
  double psi = 1.0;
  double spamicity = 0.0;
  bool significant = false;   ///< psi < effective_alpha
  bool is_candidate = false;  ///< significant and within the candidate review cap
};

struct SpamicityReport {
  std::vector<ReviewerScore> reviewers;  ///< dataset reviewer order
  double phi = 0.0;
  double effective_alpha = 0.0;
};

/// Weighted means within this distance below the midpoint still count as
/// reaching it; absorbs rounding in sums that are exactly lambda.
inline constexpr double kMidpointSlack = 1e-12;

/// True iff exactly one of rating >= lambda and mean >= lambda holds.
inline bool disagrees(double rating, double mean, double lambda) noexcept {
  const bool rating_good = rating >= lambda;
  const bool mean_good = mean >= lambda - kMidpointSlack * std::max(1.0, std::abs(lambda));
  return rating_good != mean_good;
}

/// Per-product mean of ratings weighted by reviewer honesty. In weighted
/// mode a product whose total weight is below 1e-9 falls back to its
/// unweighted mean.
std::vector<double> weighted_means(const Dataset& d, std::span<const double> honesty, MeanMode mode);

/// Per-reviewer count of reviews on the other side of lambda from the mean.
std::vector<std::uint32_t> count_disagreements(const Dataset& d, std::span<const double> means,
                                               double lambda);

/// u_r = 1 - d_r / n_r.
std::vector<double> update_honesty(const Dataset& d, std::span<const double> means, double lambda);

/// Alternates weighted_means and update_honesty from u = 1 until the largest
/// change in u falls below tau or max_iterations is reached.
DetectionState run_correction(const Dataset& d, const DetectorConfig& cfg);

/// Fraction of all reviews that disagree with their product's mean.
double global_phi(const Dataset& d, std::span<const double> means, double lambda);

SpamicityReport score_reviewers(const Dataset& d, const DetectionState& state, const DetectorConfig& cfg);

/// Candidates by k/n descending, then n descending, then id.
std::vector<std::string> rank_candidates(const SpamicityReport& report);

struct Detection {
  DetectionState state;
  SpamicityReport report;
};

Detection detect(const Dataset& d, const DetectorConfig& cfg);

}  // namespace ratedev
