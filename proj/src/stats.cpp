#include "ratedev/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "ratedev/csv.hpp"

namespace ratedev::stats {

namespace {

/// Positive double carried with an out-of-band binary exponent.
class ScaledDouble {
 public:
  void mul(double factor) {
    mantissa_ *= factor;
    if (mantissa_ < 0x1p-400 || mantissa_ > 0x1p400) normalize();
  }
  double value() const { return std::ldexp(mantissa_, static_cast<int>(std::clamp(exponent_, -4000L, 4000L))); }

 private:
  void normalize() {
    int e = 0;
    mantissa_ = std::frexp(mantissa_, &e);
    exponent_ += e;
  }
  double mantissa_ = 1.0;
  long exponent_ = 0;
};

/// 1 - phi as an unevaluated sum hi + lo.
struct Complement {
  double hi;
  double lo;
  explicit Complement(double phi) : hi(1.0 - phi), lo((1.0 - hi) - phi) {}
};

/// C(n, j) phi^j (1 - phi)^(n - j).
ScaledDouble binomial_term(std::uint64_t n, std::uint64_t j, double phi, const Complement& q) {
  ScaledDouble term;
  const std::uint64_t small = std::min(j, n - j);
  for (std::uint64_t t = 1; t <= small; ++t)
    term.mul(static_cast<double>(n - small + t) / static_cast<double>(t));
  for (std::uint64_t t = 0; t < j; ++t) term.mul(phi);
  const std::uint64_t m = n - j;
  for (std::uint64_t t = 0; t < m; ++t) term.mul(q.hi);
  if (q.lo != 0.0 && m > 0) term.mul(std::exp(static_cast<double>(m) * std::log1p(q.lo / q.hi)));
  return term;
}

constexpr double kNegligible = 1e-17;

}  // namespace

BinomialTestResult binomial_tail_geq(std::uint64_t n, std::uint64_t k, double phi) {
  if (k > n) throw std::domain_error("binomial_tail_geq: k > n");
  if (!(phi >= 0.0 && phi <= 1.0)) throw std::domain_error("binomial_tail_geq: phi outside [0,1]");

  BinomialTestResult out{n, k, phi, 1.0, 0.0};
  if (k == 0 || phi == 1.0) return out;
  if (phi == 0.0) {
    out.psi = 0.0;
    out.spamicity = 1.0;
    return out;
  }

  const Complement q(phi);
  // phi / (1 - phi), with 1 / (hi + lo) ~ (1 / hi) (1 - lo / hi)
  const double odds = (phi / q.hi) * (1.0 - q.lo / q.hi);
  double psi = 0.0;

  if (static_cast<double>(k) > static_cast<double>(n) * phi) {
    // Upper tail is the small one; terms decrease from k upward.
    ScaledDouble start = binomial_term(n, k, phi, q);
    double sum = 1.0, t = 1.0;
    for (std::uint64_t i = k; i < n; ++i) {
      t *= static_cast<double>(n - i) * odds / static_cast<double>(i + 1);
      sum += t;
      if (t < sum * kNegligible) break;
    }
    start.mul(sum);
    psi = start.value();
  } else {
    // Lower tail P(X <= k - 1); terms decrease from k - 1 downward.
    ScaledDouble start = binomial_term(n, k - 1, phi, q);
    double sum = 1.0, t = 1.0;
    for (std::uint64_t i = k - 1; i > 0; --i) {
      t *= static_cast<double>(i) / (static_cast<double>(n - i + 1) * odds);
      sum += t;
      if (t < sum * kNegligible) break;
    }
    start.mul(sum);
    psi = 1.0 - start.value();
  }

  psi = std::clamp(psi, 0.0, 1.0);
  if (psi < kPValueFloor) psi = 0.0;
  out.psi = psi;
  out.spamicity = 1.0 - psi;
  return out;
}

double bonferroni_alpha(double alpha, std::uint64_t m) {
  if (m == 0) throw std::domain_error("bonferroni_alpha: m must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("bonferroni_alpha: alpha outside (0,1)");
  return alpha / static_cast<double>(m);
}

double two_proportion_test_props(double p1, double n1, double p2, double n2) {
  if (!(n1 > 0.0 && n2 > 0.0)) throw std::domain_error("two_proportion_test: sample sizes must be positive");
  if (!(p1 >= 0.0 && p1 <= 1.0 && p2 >= 0.0 && p2 <= 1.0))
    throw std::domain_error("two_proportion_test: proportion outside [0,1]");
  if (p1 == p2) return 1.0;
  const double pooled = (p1 * n1 + p2 * n2) / (n1 + n2);
  const double variance = pooled * (1.0 - pooled) * (1.0 / n1 + 1.0 / n2);
  if (!(variance > 0.0)) return 1.0;
  const double z = (p1 - p2) / std::sqrt(variance);
  double p = std::erfc(std::abs(z) / std::sqrt(2.0));
  p = std::clamp(p, 0.0, 1.0);
  return p < kPValueFloor ? 0.0 : p;
}

double two_proportion_test(std::uint64_t k1, std::uint64_t n1, std::uint64_t k2, std::uint64_t n2) {
  if (n1 == 0 || n2 == 0) throw std::domain_error("two_proportion_test: n must be >= 1");
  if (k1 > n1 || k2 > n2) throw std::domain_error("two_proportion_test: k > n");
  // Exact equality check on the integers; the double ratios can disagree.
  if (k1 * n2 == k2 * n1) return 1.0;
  return two_proportion_test_props(static_cast<double>(k1) / static_cast<double>(n1),
                                   static_cast<double>(n1),
                                   static_cast<double>(k2) / static_cast<double>(n2),
                                   static_cast<double>(n2));
}

RocCurve roc_curve(std::span<const ScoredLabel> scores) {
  std::size_t positives = 0;
  for (const auto& s : scores) {
    if (std::isnan(s.score)) throw std::invalid_argument("roc_curve: NaN score");
    positives += s.positive ? 1 : 0;
  }
  const std::size_t negatives = scores.size() - positives;
  if (positives == 0 || negatives == 0) throw std::invalid_argument("degenerate labels");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a].score > scores[b].score; });

  RocCurve curve;
  curve.points.push_back({0.0, 0.0});
  std::size_t tp = 0, fp = 0;
  double area2 = 0.0;  // twice the area, in (fp, tp) count units
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]].score;
    std::size_t group_tp = 0, group_fp = 0;
    for (; i < order.size() && scores[order[i]].score == s; ++i)
      (scores[order[i]].positive ? group_tp : group_fp) += 1;
    area2 += static_cast<double>(group_fp) * static_cast<double>(2 * tp + group_tp);
    tp += group_tp;
    fp += group_fp;
    curve.points.push_back(
        {static_cast<double>(fp) / static_cast<double>(negatives),
         static_cast<double>(tp) / static_cast<double>(positives)});
  }
  curve.auc = area2 / (2.0 * static_cast<double>(positives) * static_cast<double>(negatives));
  return curve;
}

std::string roc_to_csv(const RocCurve& curve) {
  std::ostringstream out;
  out << "fpr,tpr\n";
  for (const auto& p : curve.points) out << format_number(p.fpr) << ',' << format_number(p.tpr) << '\n';
  return out.str();
}

nlohmann::json roc_to_json(const RocCurve& curve) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& p : curve.points) points.push_back({p.fpr, p.tpr});
  return {{"auc", curve.auc}, {"points", std::move(points)}};
}

}  // namespace ratedev::stats
