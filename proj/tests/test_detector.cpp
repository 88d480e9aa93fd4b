#include <doctest.h>

#include <random>

#include "ratedev/detector.hpp"
#include "ratedev/stats.hpp"

using namespace ratedev;

namespace {

Review rv(std::string r, std::string p, double rating) { return {std::move(r), std::move(p), rating, {}, {}}; }

// Two products; s rates both badly against five honest reviewers.
Dataset worked_example() {
  return Dataset({rv("r1", "P", 5), rv("r2", "P", 5), rv("r3", "P", 5), rv("s", "P", 1), rv("r4", "Q", 5),
                  rv("r5", "Q", 5), rv("s", "Q", 1)});
}

double honesty_of(const Dataset& d, const DetectionState& st, const std::string& id) {
  return st.honesty[*d.find_reviewer(id)];
}

}  // namespace

TEST_SUITE("detector") {
  TEST_CASE("disagrees") {
    CHECK(disagrees(5, 2.9, 3));
    CHECK_FALSE(disagrees(3, 3.0, 3));
    CHECK_FALSE(disagrees(2, 2.9, 3));
    CHECK(disagrees(2, 3.0, 3));
    CHECK(disagrees(3, 3.6, 3.5));
    CHECK_FALSE(disagrees(0, 0.4, 0.5));
    CHECK(disagrees(1, 0.4999, 0.5));
  }

  TEST_CASE("weighted means") {
    Dataset d({rv("a", "p", 5), rv("b", "p", 5), rv("c", "p", 1)});
    std::vector<double> ones{1, 1, 1}, last_zero{1, 1, 0}, zeros{0, 0, 0};
    CHECK(weighted_means(d, ones, MeanMode::weight_normalized)[0] == doctest::Approx(11.0 / 3.0));
    CHECK(weighted_means(d, ones, MeanMode::count_normalized)[0] == doctest::Approx(11.0 / 3.0));
    CHECK(weighted_means(d, last_zero, MeanMode::weight_normalized)[0] == 5.0);
    CHECK(weighted_means(d, last_zero, MeanMode::count_normalized)[0] == doctest::Approx(10.0 / 3.0));
    CHECK(weighted_means(d, zeros, MeanMode::weight_normalized)[0] == doctest::Approx(11.0 / 3.0));
    std::vector<double> short_weights{1, 1};
    CHECK_THROWS(weighted_means(d, short_weights, MeanMode::weight_normalized));
  }

  TEST_CASE("honesty update") {
    Dataset d({rv("a", "p", 5), rv("a", "q", 5), rv("a", "r", 1), rv("a", "s", 1)});
    std::vector<double> all_good{5, 5, 5, 5}, all_bad{1, 1, 1, 1}, mixed{5, 1, 5, 1};
    CHECK(update_honesty(d, all_good, 3)[0] == 0.5);
    std::vector<double> agree{5, 5, 1, 1}, against{1, 1, 5, 5};
    CHECK(update_honesty(d, agree, 3)[0] == 1.0);
    CHECK(update_honesty(d, against, 3)[0] == 0.0);
    CHECK(update_honesty(d, mixed, 3)[0] == 0.5);
  }

  TEST_CASE("worked example") {
    Dataset d = worked_example();
    DetectorConfig cfg;
    std::vector<double> ones(d.reviewer_count(), 1.0);
    auto m1 = weighted_means(d, ones, cfg.mean_mode);
    CHECK(m1[*d.find_product("P")] == 4.0);
    CHECK(m1[*d.find_product("Q")] == doctest::Approx(11.0 / 3.0));
    auto u1 = update_honesty(d, m1, cfg.lambda);
    CHECK(u1[*d.find_reviewer("s")] == 0.0);

    auto st = run_correction(d, cfg);
    CHECK(st.converged);
    CHECK(honesty_of(d, st, "s") == 0.0);
    for (const char* id : {"r1", "r2", "r3", "r4", "r5"}) CHECK(honesty_of(d, st, id) == 1.0);
    CHECK(st.means[*d.find_product("P")] == 5.0);
    CHECK(st.means[*d.find_product("Q")] == 5.0);

    auto res = detect(d, cfg);
    CHECK(res.report.phi == doctest::Approx(2.0 / 7.0).epsilon(1e-15));
    const auto& s = res.report.reviewers[*d.find_reviewer("s")];
    CHECK(s.n == 2);
    CHECK(s.k == 2);
    CHECK(s.psi == doctest::Approx(4.0 / 49.0).epsilon(1e-14));
    CHECK(s.spamicity == doctest::Approx(45.0 / 49.0).epsilon(1e-14));
    const auto& h = res.report.reviewers[*d.find_reviewer("r1")];
    CHECK(h.k == 0);
    CHECK(h.psi == 1.0);
    CHECK_FALSE(h.is_candidate);
  }

  TEST_CASE("phi modes") {
    Dataset d = worked_example();
    DetectorConfig cfg;
    cfg.phi_mode = PhiMode::post_correction;
    auto res = detect(d, cfg);
    // with corrected means only s disagrees, on both of its reviews
    CHECK(res.report.phi == doctest::Approx(2.0 / 7.0));
    CHECK(global_phi(d, std::vector<double>{5, 5}, 3) == doctest::Approx(2.0 / 7.0));
    CHECK(global_phi(d, std::vector<double>{1, 5}, 3) == doctest::Approx(4.0 / 7.0));
  }

  TEST_CASE("unanimous data converges at once") {
    Dataset d({rv("a", "p", 5), rv("b", "p", 4), rv("b", "q", 3), rv("c", "q", 5)});
    auto st = run_correction(d, DetectorConfig{});
    CHECK(st.converged);
    CHECK(st.iteration <= 2);
    for (double u : st.honesty) CHECK(u == 1.0);
    CHECK(global_phi(d, st.means, 3) == 0.0);
  }

  TEST_CASE("iteration cap") {
    Dataset d = worked_example();
    DetectorConfig cfg;
    cfg.max_iterations = 1;
    auto st = run_correction(d, cfg);
    CHECK(st.iteration == 1);
    CHECK_FALSE(st.converged);
    CHECK(st.delta_history.size() == 1);
  }

  TEST_CASE("empty dataset") {
    CHECK_THROWS(run_correction(Dataset(), DetectorConfig{}));
    CHECK_THROWS(global_phi(Dataset(), std::vector<double>{}, 3));
  }

  TEST_CASE("config validation") {
    DetectorConfig cfg;
    cfg.alpha = 0;
    CHECK_THROWS(cfg.validate());
    cfg = {};
    cfg.tau = -1;
    CHECK_THROWS(cfg.validate());
    cfg = {};
    cfg.max_iterations = 0;
    CHECK_THROWS(cfg.validate());
  }

  TEST_CASE("candidate cap keeps the score") {
    std::vector<Review> reviews;
    // 60 honest reviewers on 60 products; spammer x contradicts every one
    for (int p = 0; p < 60; ++p)
      for (int r = 0; r < 60; ++r) reviews.push_back(rv("h" + std::to_string(r), "p" + std::to_string(p), 5));
    for (int p = 0; p < 51; ++p) reviews.push_back(rv("x", "p" + std::to_string(p), 1));
    for (int p = 0; p < 10; ++p) reviews.push_back(rv("y", "p" + std::to_string(p), 1));
    Dataset d(reviews);
    auto res = detect(d, DetectorConfig{});
    const auto& x = res.report.reviewers[*d.find_reviewer("x")];
    const auto& y = res.report.reviewers[*d.find_reviewer("y")];
    CHECK(x.n == 51);
    CHECK(x.significant);
    CHECK_FALSE(x.is_candidate);
    CHECK(x.spamicity > 0.99);
    CHECK(y.is_candidate);
    CHECK(rank_candidates(res.report) == std::vector<std::string>{"y"});

    DetectorConfig uncapped;
    uncapped.max_candidate_reviews.reset();
    auto all = detect(d, uncapped);
    CHECK(rank_candidates(all.report) == std::vector<std::string>{"x", "y"});
  }

  TEST_CASE("ranking order") {
    SpamicityReport rep;
    auto cand = [](std::string id, std::uint64_t n, std::uint64_t k) {
      ReviewerScore s;
      s.reviewer_id = std::move(id);
      s.n = n;
      s.k = k;
      s.is_candidate = true;
      return s;
    };
    rep.reviewers = {cand("b", 10, 5), cand("a", 10, 9)};
    CHECK(rank_candidates(rep) == std::vector<std::string>{"a", "b"});
    rep.reviewers = {cand("b", 20, 10), cand("a", 40, 20)};
    CHECK(rank_candidates(rep) == std::vector<std::string>{"a", "b"});
    rep.reviewers = {cand("b", 4, 2), cand("a", 4, 2)};
    CHECK(rank_candidates(rep) == std::vector<std::string>{"a", "b"});
    rep.reviewers.clear();
    CHECK(rank_candidates(rep).empty());
  }

  TEST_CASE("bonferroni switch") {
    Dataset d = worked_example();
    DetectorConfig cfg;
    auto with = detect(d, cfg);
    cfg.bonferroni = false;
    auto without = detect(d, cfg);
    CHECK(with.report.effective_alpha == doctest::Approx(0.05 / 6));
    CHECK(without.report.effective_alpha == 0.05);
  }

  TEST_CASE("midpoint moves the boundary") {
    Dataset d({rv("a", "p", 3), rv("b", "p", 5), rv("c", "p", 5)});
    DetectorConfig cfg;
    CHECK(detect(d, cfg).report.reviewers[0].k == 0);
    cfg.lambda = 3.5;
    auto res = detect(d, cfg);
    CHECK(res.report.reviewers[0].k == 1);
  }

  TEST_CASE("mean exactly at the midpoint survives reweighting") {
    // weights 0.1/0.3/0.6-style sums that do not land exactly on 3 in binary
    Dataset d({rv("a", "p", 1), rv("b", "p", 5), rv("a", "q", 5), rv("b", "q", 1), rv("c", "q", 3)});
    std::vector<double> u{0.1, 0.1, 1.0};
    auto m = weighted_means(d, u, MeanMode::weight_normalized);
    CHECK(m[0] == doctest::Approx(3.0));
    CHECK_FALSE(disagrees(5, m[0], 3));
  }
}
