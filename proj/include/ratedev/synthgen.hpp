#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ratedev/model.hpp"

namespace ratedev::synth {

struct GeneratorParams {
  std::size_t words = 5000;  ///< W, number of typed edges
  unsigned alphabet = 5;     ///< k
  double q = 0.4;            ///< word termination probability
  double beta = 0.6;         ///< character skew, w_c proportional to beta^(c-1)
  std::uint64_t seed = 0;

  void validate() const;
};

struct Edge {
  std::uint32_t reviewer = 0;
  std::uint32_t product = 0;
  bool operator==(const Edge&) const = default;
};

struct BipartiteGraph {
  std::vector<std::string> reviewers;
  std::vector<std::string> products;
  std::vector<Edge> edges;

  std::vector<std::size_t> product_degrees() const;
  std::size_t distinct_edge_count() const;
};

struct RatedGraph {
  BipartiteGraph graph;
  std::vector<double> ratings;  ///< one per edge
};

enum class SpammerModel { A, B };

/// Which reviewers may be drawn as spammers (uniformly, without replacement).
/// With `observable`, a reviewer qualifies only if at least one of their
/// reviews, once turned, sits on the other side of the midpoint from its
/// product's mean; otherwise the planted spam is indistinguishable from an
/// honest review. `min_reviews` excludes reviewers too inactive to show an
/// anomalous proportion (one review can never be significant).
struct SpammerSelection {
  bool observable = true;
  std::size_t min_reviews = 2;
  bool allow_fewer = false;  ///< take every eligible reviewer instead of failing on small graphs

  static SpammerSelection uniform() { return {false, 1}; }
};

/// How model A writes its two rating levels.
struct BinaryEncoding {
  double good = 5.0;
  double bad = 1.0;
  RatingScale scale = kFiveStar;
  double midpoint = 3.0;

  static BinaryEncoding five_star() { return {}; }
  static BinaryEncoding binary() { return {1.0, 0.0, kBinary, 0.5}; }
};

struct SynthGraph {
  Dataset dataset;
  std::set<std::string> spammer_ids;
  std::set<std::string> famous_products;
  SpammerModel model = SpammerModel::A;
};

/// Random-typing bipartite generator. Each edge types a reviewer word and a
/// product word independently: at every step the word ends with probability
/// q, otherwise character c in [0, k) is emitted with probability
/// (1 - q) w_c. Equal words are the same vertex, which gives the heavy
/// tailed degrees. Labels are "r" / "p" followed by the word, so the empty
/// word is a valid vertex too.
BipartiteGraph rtg_generate(const GeneratorParams& params);

/// The `count` highest-degree products; ties broken by id.
std::set<std::string> mark_famous(const BipartiteGraph& g, std::size_t count = 7);

/// All products good. Honest reviewers rate good; the selected spammers rate
/// bad except on famous products, where they rate good.
SynthGraph inject_model_a(const BipartiteGraph& g, const std::set<std::string>& famous,
                          std::size_t n_spammers, std::uint64_t seed,
                          const BinaryEncoding& encoding = {}, SpammerSelection selection = {});

/// rating -> probability on the five-star scale.
using RatingPmf = std::map<int, double>;

/// Arbitrary positively skewed default for model B. Not derived from data.
RatingPmf default_pmf();
void validate_pmf(const RatingPmf& pmf, const RatingScale& scale = kFiveStar);

RatedGraph sample_ratings(const BipartiteGraph& g, const RatingPmf& pmf, std::uint64_t seed);

/// 6 - r on the five-star scale.
double flip_rating(double rating);

/// Flips every rating of `n_spammers` reviewers chosen uniformly from the pool.
SynthGraph inject_model_b(const RatedGraph& g, std::size_t n_spammers, std::uint64_t seed,
                          SpammerSelection selection = {});

struct BatchParams {
  GeneratorParams generator;
  SpammerModel model = SpammerModel::A;
  std::size_t famous_count = 7;
  std::size_t spammers = 0;  ///< 0 selects the model default (A: 4, B: 5)
  bool binary = false;       ///< model A with 1/0 ratings and midpoint 0.5
  RatingPmf pmf = default_pmf();
  SpammerSelection selection = {};

  std::size_t spammer_count() const { return spammers ? spammers : (model == SpammerModel::A ? 4 : 5); }
};

/// Graph `index` of a batch seeded with `master_seed`; uses seed
/// master_seed + index, with separate streams for structure, ratings and
/// spammer choice.
SynthGraph generate_graph(const BatchParams& batch, std::uint64_t master_seed, std::size_t index);

}  // namespace ratedev::synth
