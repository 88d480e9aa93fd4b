#include "ratedev/detector.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ratedev/stats.hpp"

namespace ratedev {

void DetectorConfig::validate() const {
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be > 0");
  if (max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0,1)");
  if (!std::isfinite(lambda)) throw std::invalid_argument("lambda must be finite");
}

std::vector<double> weighted_means(const Dataset& d, std::span<const double> honesty, MeanMode mode) {
  if (honesty.size() != d.reviewer_count())
    throw std::invalid_argument("weighted_means: honesty weights do not cover every reviewer");
  auto ratings = d.ratings();
  auto owner = d.review_reviewers();
  std::vector<double> means(d.product_count(), 0.0);
  for (std::size_t p = 0; p < d.product_count(); ++p) {
    auto positions = d.reviews_of_product(p);
    double weighted = 0.0, weight = 0.0, plain = 0.0;
    for (auto pos : positions) {
      const double u = honesty[owner[pos]];
      weighted += ratings[pos] * u;
      weight += u;
      plain += ratings[pos];
    }
    const double count = static_cast<double>(positions.size());
    if (mode == MeanMode::count_normalized)
      means[p] = weighted / count;
    else
      means[p] = weight < 1e-9 ? plain / count : weighted / weight;
  }
  return means;
}

std::vector<std::uint32_t> count_disagreements(const Dataset& d, std::span<const double> means,
                                               double lambda) {
  if (means.size() != d.product_count())
    throw std::invalid_argument("count_disagreements: means do not cover every product");
  auto ratings = d.ratings();
  auto product = d.review_products();
  std::vector<std::uint32_t> counts(d.reviewer_count(), 0);
  for (std::size_t r = 0; r < d.reviewer_count(); ++r) {
    std::uint32_t c = 0;
    for (auto pos : d.reviews_of_reviewer(r)) c += disagrees(ratings[pos], means[product[pos]], lambda);
    counts[r] = c;
  }
  return counts;
}

std::vector<double> update_honesty(const Dataset& d, std::span<const double> means, double lambda) {
  auto counts = count_disagreements(d, means, lambda);
  std::vector<double> honesty(d.reviewer_count());
  for (std::size_t r = 0; r < d.reviewer_count(); ++r) {
    const std::size_t n_r = d.reviews_of_reviewer(r).size();
    if (n_r == 0) throw std::logic_error("update_honesty: reviewer without reviews");
    honesty[r] = 1.0 - static_cast<double>(counts[r]) / static_cast<double>(n_r);
  }
  return honesty;
}

DetectionState run_correction(const Dataset& d, const DetectorConfig& cfg) {
  cfg.validate();
  if (d.empty()) throw DatasetError("empty dataset");
  DetectionState state;
  state.honesty.assign(d.reviewer_count(), 1.0);
  for (std::size_t i = 1; i <= cfg.max_iterations; ++i) {
    state.means = weighted_means(d, state.honesty, cfg.mean_mode);
    std::vector<double> next = update_honesty(d, state.means, cfg.lambda);
    double delta = 0.0;
    for (std::size_t r = 0; r < next.size(); ++r)
      delta = std::max(delta, std::abs(next[r] - state.honesty[r]));
    state.honesty = std::move(next);
    state.iteration = i;
    state.max_delta = delta;
    state.delta_history.push_back(delta);
    if (delta < cfg.tau) {
      state.converged = true;
      break;
    }
  }
  return state;
}

double global_phi(const Dataset& d, std::span<const double> means, double lambda) {
  if (d.empty()) throw DatasetError("empty dataset");
  auto counts = count_disagreements(d, means, lambda);
  std::uint64_t disagreeing = 0;
  for (auto c : counts) disagreeing += c;
  return static_cast<double>(disagreeing) / static_cast<double>(d.review_count());
}

SpamicityReport score_reviewers(const Dataset& d, const DetectionState& state, const DetectorConfig& cfg) {
  cfg.validate();
  if (state.means.size() != d.product_count() || state.honesty.size() != d.reviewer_count())
    throw std::invalid_argument("score_reviewers: state does not belong to this dataset");

  SpamicityReport report;
  if (cfg.phi_mode == PhiMode::initial) {
    std::vector<double> ones(d.reviewer_count(), 1.0);
    report.phi = global_phi(d, weighted_means(d, ones, cfg.mean_mode), cfg.lambda);
  } else {
    report.phi = global_phi(d, state.means, cfg.lambda);
  }
  if (!(report.phi >= 0.0 && report.phi <= 1.0)) throw std::domain_error("phi outside [0,1]");
  report.effective_alpha =
      cfg.bonferroni ? stats::bonferroni_alpha(cfg.alpha, d.reviewer_count()) : cfg.alpha;

  auto counts = count_disagreements(d, state.means, cfg.lambda);
  report.reviewers.reserve(d.reviewer_count());
  for (std::size_t r = 0; r < d.reviewer_count(); ++r) {
    const std::uint64_t n = d.reviews_of_reviewer(r).size();
    const auto test = stats::binomial_tail_geq(n, counts[r], report.phi);
    ReviewerScore score{d.reviewer_id(r), n, counts[r], test.psi, test.spamicity, false, false};
    score.significant = test.psi < report.effective_alpha;
    score.is_candidate =
        score.significant && (!cfg.max_candidate_reviews || n <= *cfg.max_candidate_reviews);
    report.reviewers.push_back(std::move(score));
  }
  return report;
}

std::vector<std::string> rank_candidates(const SpamicityReport& report) {
  std::vector<const ReviewerScore*> picked;
  for (const auto& s : report.reviewers)
    if (s.is_candidate) picked.push_back(&s);
  std::sort(picked.begin(), picked.end(), [](const ReviewerScore* a, const ReviewerScore* b) {
    // k_a / n_a vs k_b / n_b without rounding
    const auto lhs = a->k * b->n, rhs = b->k * a->n;
    if (lhs != rhs) return lhs > rhs;
    if (a->n != b->n) return a->n > b->n;
    return a->reviewer_id < b->reviewer_id;
  });
  std::vector<std::string> out;
  out.reserve(picked.size());
  for (const auto* s : picked) out.push_back(s->reviewer_id);
  return out;
}

Detection detect(const Dataset& d, const DetectorConfig& cfg) {
  Detection out;
  out.state = run_correction(d, cfg);
  out.report = score_reviewers(d, out.state, cfg);
  return out;
}

}  // namespace ratedev
