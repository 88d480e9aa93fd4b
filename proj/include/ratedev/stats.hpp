#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace ratedev::stats {

/// Tail probabilities smaller than this are reported as exactly zero.
inline constexpr double kPValueFloor = 1e-300;

struct BinomialTestResult {
  std::uint64_t n = 0;
  std::uint64_t k = 0;
  double phi = 0.0;
  double psi = 1.0;        ///< P(X >= k; n, phi)
  double spamicity = 0.0;  ///< 1 - psi
};

/// Upper tail P(X >= k) of Binomial(n, phi).
///
/// Sums whichever tail lies away from the mean, starting from its largest
/// term and walking outward with the term-ratio recurrence. The starting
/// term is an explicit product carried with a separate binary exponent, so
/// nothing overflows or underflows for n in the tens of thousands. Relative
/// error stays around a few hundred ulps for n <= 1000.
///
/// Throws std::domain_error when k > n or phi is outside [0, 1].
BinomialTestResult binomial_tail_geq(std::uint64_t n, std::uint64_t k, double phi);

/// alpha / m. Throws std::domain_error for m == 0 or alpha outside (0, 1).
double bonferroni_alpha(double alpha, std::uint64_t m);

/// Two-sided pooled two-proportion z-test, no continuity correction.
/// Equal sample proportions give p = 1.
double two_proportion_test(std::uint64_t k1, std::uint64_t n1, std::uint64_t k2, std::uint64_t n2);

/// Same test on proportions directly; used when one side is an average of
/// several samples and its success count is not an integer.
double two_proportion_test_props(double p1, double n1, double p2, double n2);

struct ScoredLabel {
  double score = 0.0;
  bool positive = false;
};

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  bool operator==(const RocPoint&) const = default;
};

struct RocCurve {
  std::vector<RocPoint> points;
  double auc = 0.0;
};

/// ROC over distinct score thresholds, descending. Tied scores enter as one
/// vertex. AUC by trapezoid rule. Throws std::invalid_argument when only one
/// label class is present ("degenerate labels").
RocCurve roc_curve(std::span<const ScoredLabel> scores);

std::string roc_to_csv(const RocCurve& curve);
nlohmann::json roc_to_json(const RocCurve& curve);

}  // namespace ratedev::stats
