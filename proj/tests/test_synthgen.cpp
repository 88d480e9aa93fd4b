#include <doctest.h>

#include <algorithm>
#include <map>

#include "ratedev/detector.hpp"
#include "ratedev/synthgen.hpp"

using namespace ratedev;
using namespace ratedev::synth;

namespace {

BipartiteGraph graph_with_degrees(const std::vector<int>& degrees) {
  BipartiteGraph g;
  for (std::size_t p = 0; p < degrees.size(); ++p) {
    g.products.push_back("p" + std::to_string(p + 1));
    for (int i = 0; i < degrees[p]; ++i) {
      g.reviewers.push_back("r" + std::to_string(g.reviewers.size()));
      g.edges.push_back({static_cast<std::uint32_t>(g.reviewers.size() - 1), static_cast<std::uint32_t>(p)});
    }
  }
  return g;
}

}  // namespace

TEST_SUITE("synthgen") {
  TEST_CASE("single word") {
    GeneratorParams p;
    p.words = 1;
    auto g = rtg_generate(p);
    CHECK(g.edges.size() == 1);
    CHECK(g.reviewers.size() == 1);
    CHECK(g.products.size() == 1);
    CHECK(g.reviewers[0][0] == 'r');
    CHECK(g.products[0][0] == 'p');
  }

  TEST_CASE("deterministic") {
    GeneratorParams p;
    p.seed = 99;
    auto a = rtg_generate(p), b = rtg_generate(p);
    CHECK(a.edges == b.edges);
    CHECK(a.reviewers == b.reviewers);
    p.seed = 100;
    CHECK_FALSE(rtg_generate(p).edges == a.edges);
  }

  TEST_CASE("parameter checks") {
    GeneratorParams p;
    p.q = 1.0;
    CHECK_THROWS(rtg_generate(p));
    p = {};
    p.beta = 0.0;
    CHECK_THROWS(rtg_generate(p));
    p = {};
    p.alphabet = 0;
    CHECK_THROWS(rtg_generate(p));
    p = {};
    p.alphabet = 30;
    p.words = 200;
    CHECK_NOTHROW(rtg_generate(p));
  }

  TEST_CASE("paper-parameter graphs") {
    double distinct = 0;
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      GeneratorParams p;
      p.seed = seed;
      auto g = rtg_generate(p);
      CHECK(g.edges.size() == 5000);
      distinct += static_cast<double>(g.distinct_edge_count());
      auto deg = g.product_degrees();
      std::sort(deg.begin(), deg.end());
      CHECK(deg.back() > 10 * deg[deg.size() / 2]);
    }
    distinct /= 30;
    CHECK(distinct > 1359 * 0.6);
    CHECK(distinct < 1359 * 1.4);
  }

  TEST_CASE("famous products") {
    auto g = graph_with_degrees({10, 9, 8, 7, 6, 5, 4, 2});
    auto f = mark_famous(g, 7);
    CHECK(f.size() == 7);
    CHECK_FALSE(f.count("p8"));
    CHECK(mark_famous(graph_with_degrees({1, 1, 1}), 7).size() == 3);
    CHECK(mark_famous(graph_with_degrees({2, 2, 2, 2, 2, 2, 2}), 7).size() == 7);
    // ties broken by id
    auto t = mark_famous(graph_with_degrees({1, 1, 1}), 2);
    CHECK(t == std::set<std::string>{"p1", "p2"});
  }

  TEST_CASE("model A ratings") {
    GeneratorParams p;
    p.seed = 3;
    auto g = rtg_generate(p);
    auto famous = mark_famous(g);
    auto sg = inject_model_a(g, famous, 4, p.seed);
    CHECK(sg.spammer_ids.size() == 4);
    CHECK(sg.model == SpammerModel::A);
    std::size_t spam_bad = 0;
    for (const auto& r : sg.dataset.reviews()) {
      const bool spammer = sg.spammer_ids.count(r.reviewer_id) > 0;
      const bool is_famous = famous.count(r.product_id) > 0;
      if (spammer && !is_famous) {
        CHECK(r.rating == 1.0);
        ++spam_bad;
      } else {
        CHECK(r.rating == 5.0);
      }
    }
    CHECK(spam_bad > 0);

    auto bin = inject_model_a(g, famous, 4, p.seed, BinaryEncoding::binary());
    CHECK(bin.dataset.scale() == kBinary);
    CHECK(bin.dataset.midpoint() == 0.5);
    for (const auto& r : bin.dataset.reviews()) CHECK((r.rating == 0.0 || r.rating == 1.0));
  }

  TEST_CASE("model A honest reviewers never disagree") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      BatchParams batch;
      auto sg = generate_graph(batch, seed, 0);
      std::vector<double> ones(sg.dataset.reviewer_count(), 1.0);
      auto means = weighted_means(sg.dataset, ones, MeanMode::weight_normalized);
      auto k = count_disagreements(sg.dataset, means, 3.0);
      for (std::size_t r = 0; r < sg.dataset.reviewer_count(); ++r)
        if (!sg.spammer_ids.count(sg.dataset.reviewer_id(r))) CHECK(k[r] == 0);
    }
  }

  TEST_CASE("spammer selection") {
    GeneratorParams p;
    p.seed = 5;
    auto g = rtg_generate(p);
    auto famous = mark_famous(g);
    auto sg = inject_model_a(g, famous, 4, p.seed);
    std::map<std::string, int> reviews;
    for (const auto& r : sg.dataset.reviews()) ++reviews[r.reviewer_id];
    for (const auto& id : sg.spammer_ids) CHECK(reviews[id] >= 2);

    auto any = inject_model_a(g, famous, 4, p.seed, {}, SpammerSelection::uniform());
    CHECK(any.spammer_ids.size() == 4);

    auto tiny = graph_with_degrees({1, 1, 1});
    CHECK_THROWS(inject_model_a(tiny, mark_famous(tiny), 4, 0, {}, SpammerSelection::uniform()));
    CHECK_THROWS(inject_model_a(tiny, {}, 1, 0));  // nobody has two reviews
  }

  TEST_CASE("rating sampling") {
    GeneratorParams p;
    p.seed = 8;
    auto g = rtg_generate(p);
    auto fives = sample_ratings(g, {{5, 1.0}}, 1);
    for (double r : fives.ratings) CHECK(r == 5.0);
    CHECK(sample_ratings(g, default_pmf(), 4).ratings == sample_ratings(g, default_pmf(), 4).ratings);
    CHECK_THROWS_AS(sample_ratings(g, {{5, 0.5}}, 1), std::domain_error);
    CHECK_THROWS_AS(sample_ratings(g, {{7, 1.0}}, 1), std::domain_error);
    CHECK_THROWS_AS(sample_ratings(g, {}, 1), std::domain_error);

    BipartiteGraph big;
    big.reviewers = {"r"};
    big.products = {"p"};
    big.edges.assign(100000, Edge{0, 0});
    RatingPmf uniform{{1, 0.2}, {2, 0.2}, {3, 0.2}, {4, 0.2}, {5, 0.2}};
    auto rated = sample_ratings(big, uniform, 17);
    std::map<double, int> counts;
    for (double r : rated.ratings) ++counts[r];
    for (int v = 1; v <= 5; ++v) CHECK(std::abs(counts[v] / 100000.0 - 0.2) < 0.01);
  }

  TEST_CASE("flip") {
    CHECK(flip_rating(5) == 1);
    CHECK(flip_rating(2) == 4);
    CHECK(flip_rating(3) == 3);
    for (int r = 1; r <= 5; ++r) CHECK(flip_rating(flip_rating(r)) == r);
    CHECK_THROWS_AS(flip_rating(0), std::domain_error);
    CHECK_THROWS_AS(flip_rating(6), std::domain_error);
  }

  TEST_CASE("model B flips exactly the spammers") {
    GeneratorParams p;
    p.seed = 12;
    auto g = rtg_generate(p);
    auto rated = sample_ratings(g, default_pmf(), p.seed);
    auto sg = inject_model_b(rated, 5, p.seed);
    CHECK(sg.spammer_ids.size() == 5);
    CHECK(sg.model == SpammerModel::B);
    for (std::size_t i = 0; i < rated.ratings.size(); ++i) {
      const auto& r = sg.dataset.review(i);
      if (sg.spammer_ids.count(r.reviewer_id))
        CHECK(r.rating == 6.0 - rated.ratings[i]);
      else
        CHECK(r.rating == rated.ratings[i]);
    }
  }

  TEST_CASE("batch graphs") {
    BatchParams batch;
    batch.model = SpammerModel::B;
    auto a = generate_graph(batch, 40, 2), b = generate_graph(batch, 42, 0);
    CHECK(std::equal(a.dataset.reviews().begin(), a.dataset.reviews().end(), b.dataset.reviews().begin(),
                     b.dataset.reviews().end()));
    CHECK(a.spammer_ids == b.spammer_ids);
    CHECK(a.famous_products.size() == 7);
    for (const auto& id : a.spammer_ids) CHECK(a.dataset.find_reviewer(id));
    for (const auto& id : a.famous_products) CHECK(a.dataset.find_product(id));
    batch.model = SpammerModel::A;
    CHECK(generate_graph(batch, 1, 0).spammer_ids.size() == 4);
  }
}
