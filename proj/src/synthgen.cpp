#include "ratedev/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "ratedev/random.hpp"

namespace ratedev::synth {

namespace {

enum Stream : std::uint64_t { kStructure = 0, kRatings = 1, kSpammers = 2 };

std::string character(unsigned c, unsigned alphabet) {
  if (alphabet <= 26) return std::string(1, static_cast<char>('a' + c));
  return std::to_string(c) + ".";
}

class WordTyper {
 public:
  WordTyper(const GeneratorParams& params) : params_(params) {
    cumulative_.resize(params.alphabet);
    double w = 1.0, total = 0.0;
    std::vector<double> weights(params.alphabet);
    for (unsigned c = 0; c < params.alphabet; ++c) {
      weights[c] = w;
      total += w;
      w *= params.beta;
    }
    double acc = 0.0;
    for (unsigned c = 0; c < params.alphabet; ++c) {
      acc += weights[c] / total;
      cumulative_[c] = acc;
    }
    cumulative_.back() = 1.0;
  }

  std::string type(Rng& rng, char prefix) const {
    std::string word(1, prefix);
    while (rng.uniform() >= params_.q) {
      const double u = rng.uniform();
      auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
      unsigned c = static_cast<unsigned>(std::min<std::ptrdiff_t>(it - cumulative_.begin(),
                                                                  cumulative_.size() - 1));
      word += character(c, params_.alphabet);
    }
    return word;
  }

 private:
  const GeneratorParams& params_;
  std::vector<double> cumulative_;
};

std::uint32_t intern(std::unordered_map<std::string, std::uint32_t>& lookup,
                     std::vector<std::string>& labels, std::string word) {
  auto [it, fresh] = lookup.try_emplace(word, static_cast<std::uint32_t>(labels.size()));
  if (fresh) labels.push_back(std::move(word));
  return it->second;
}

/// `honest[i]` and `spam[i]` are edge i's rating without and with its
/// reviewer turned spammer. Observable spam is a review that ends up on the
/// other side of `midpoint` from its product's mean once that reviewer alone
/// has turned.
std::set<std::string> pick_spammers(const BipartiteGraph& g, std::size_t n_spammers, std::uint64_t seed,
                                    SpammerSelection selection, const std::vector<double>& honest,
                                    const std::vector<double>& spam, double midpoint) {
  if (g.reviewers.size() <= n_spammers && !selection.allow_fewer)
    throw std::invalid_argument("graph has too few reviewers for " + std::to_string(n_spammers) +
                                " spammers");
  std::vector<std::size_t> degree(g.reviewers.size(), 0);
  for (const auto& e : g.edges) ++degree[e.reviewer];
  std::vector<char> ok(g.reviewers.size(), 1);
  if (selection.observable) {
    std::fill(ok.begin(), ok.end(), 0);
    std::vector<double> sum(g.products.size(), 0.0);
    std::vector<std::size_t> count(g.products.size(), 0);
    // Per (reviewer, product): rating shift from turning that reviewer.
    std::map<std::pair<std::uint32_t, std::uint32_t>, double> shift;
    for (std::size_t i = 0; i < g.edges.size(); ++i) {
      const auto& e = g.edges[i];
      sum[e.product] += honest[i];
      ++count[e.product];
      shift[{e.reviewer, e.product}] += spam[i] - honest[i];
    }
    for (std::size_t i = 0; i < g.edges.size(); ++i) {
      const auto& e = g.edges[i];
      const double mean =
          (sum[e.product] + shift[{e.reviewer, e.product}]) / static_cast<double>(count[e.product]);
      if ((spam[i] >= midpoint) != (mean >= midpoint)) ok[e.reviewer] = 1;
    }
  }
  std::vector<std::uint32_t> eligible;
  for (std::uint32_t r = 0; r < ok.size(); ++r)
    if (ok[r] && degree[r] >= selection.min_reviews) eligible.push_back(r);
  if (eligible.size() < n_spammers && selection.allow_fewer) n_spammers = eligible.size();
  if (eligible.size() < n_spammers)
    throw std::invalid_argument("graph has only " + std::to_string(eligible.size()) +
                                " reviewers eligible as spammers, " + std::to_string(n_spammers) + " needed");
  Rng rng(seed, kSpammers);
  std::set<std::string> out;
  for (auto idx : rng.sample_without_replacement(eligible.size(), n_spammers))
    out.insert(g.reviewers[eligible[idx]]);
  return out;
}

Dataset to_dataset(const BipartiteGraph& g, const std::vector<double>& ratings, RatingScale scale,
                   double midpoint) {
  std::vector<Review> reviews;
  reviews.reserve(g.edges.size());
  for (std::size_t i = 0; i < g.edges.size(); ++i)
    reviews.push_back({g.reviewers[g.edges[i].reviewer], g.products[g.edges[i].product], ratings[i],
                       std::nullopt, std::nullopt});
  return Dataset(std::move(reviews), scale, midpoint);
}

}  // namespace

void GeneratorParams::validate() const {
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("q must lie in (0,1)");
  if (alphabet < 1) throw std::invalid_argument("alphabet size k must be >= 1");
  if (words < 1) throw std::invalid_argument("W must be >= 1");
  if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("beta must lie in (0,1]");
}

std::vector<std::size_t> BipartiteGraph::product_degrees() const {
  std::vector<std::size_t> degree(products.size(), 0);
  for (const auto& e : edges) ++degree[e.product];
  return degree;
}

std::size_t BipartiteGraph::distinct_edge_count() const {
  std::unordered_set<std::uint64_t> seen;
  for (const auto& e : edges) seen.insert((std::uint64_t{e.reviewer} << 32) | e.product);
  return seen.size();
}

BipartiteGraph rtg_generate(const GeneratorParams& params) {
  params.validate();
  Rng rng(params.seed, kStructure);
  WordTyper typer(params);
  BipartiteGraph g;
  std::unordered_map<std::string, std::uint32_t> reviewer_lookup, product_lookup;
  g.edges.reserve(params.words);
  for (std::size_t i = 0; i < params.words; ++i) {
    // Draw order is fixed: reviewer word first, then product word.
    std::string reviewer = typer.type(rng, 'r');
    std::string product = typer.type(rng, 'p');
    Edge e;
    e.reviewer = intern(reviewer_lookup, g.reviewers, std::move(reviewer));
    e.product = intern(product_lookup, g.products, std::move(product));
    g.edges.push_back(e);
  }
  return g;
}

std::set<std::string> mark_famous(const BipartiteGraph& g, std::size_t count) {
  if (g.edges.empty()) throw std::invalid_argument("mark_famous: empty graph");
  auto degree = g.product_degrees();
  std::vector<std::uint32_t> order(g.products.size());
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (degree[a] != degree[b]) return degree[a] > degree[b];
    return g.products[a] < g.products[b];
  });
  order.resize(std::min(count, order.size()));
  std::set<std::string> out;
  for (auto p : order) out.insert(g.products[p]);
  return out;
}

SynthGraph inject_model_a(const BipartiteGraph& g, const std::set<std::string>& famous,
                          std::size_t n_spammers, std::uint64_t seed, const BinaryEncoding& encoding,
                          SpammerSelection selection) {
  std::vector<char> is_spammer(g.reviewers.size(), 0), is_famous(g.products.size(), 0);
  for (std::size_t p = 0; p < g.products.size(); ++p) is_famous[p] = famous.count(g.products[p]);
  std::vector<double> honest(g.edges.size(), encoding.good), spam(g.edges.size());
  for (std::size_t i = 0; i < g.edges.size(); ++i)
    spam[i] = is_famous[g.edges[i].product] ? encoding.good : encoding.bad;
  auto spammers = pick_spammers(g, n_spammers, seed, selection, honest, spam, encoding.midpoint);
  for (std::size_t r = 0; r < g.reviewers.size(); ++r) is_spammer[r] = spammers.count(g.reviewers[r]);

  std::vector<double> ratings(g.edges.size());
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    const auto& e = g.edges[i];
    ratings[i] = is_spammer[e.reviewer] && !is_famous[e.product] ? encoding.bad : encoding.good;
  }
  return {to_dataset(g, ratings, encoding.scale, encoding.midpoint), std::move(spammers), famous,
          SpammerModel::A};
}

RatingPmf default_pmf() { return {{1, 0.10}, {2, 0.06}, {3, 0.09}, {4, 0.20}, {5, 0.55}}; }

void validate_pmf(const RatingPmf& pmf, const RatingScale& scale) {
  if (pmf.empty()) throw std::domain_error("rating pmf is empty");
  double total = 0.0;
  for (auto [rating, p] : pmf) {
    if (!scale.contains(rating)) throw std::domain_error("rating pmf support outside scale");
    if (!(p >= 0.0)) throw std::domain_error("rating pmf has a negative probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::domain_error("rating pmf does not sum to 1");
}

RatedGraph sample_ratings(const BipartiteGraph& g, const RatingPmf& pmf, std::uint64_t seed) {
  validate_pmf(pmf);
  std::vector<double> values, cumulative;
  double acc = 0.0;
  for (auto [rating, p] : pmf) {
    if (p == 0.0) continue;
    acc += p;
    values.push_back(rating);
    cumulative.push_back(acc);
  }
  cumulative.back() = 1.0;

  Rng rng(seed, kRatings);
  RatedGraph out{g, std::vector<double>(g.edges.size())};
  for (auto& r : out.ratings) {
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), rng.uniform());
    r = values[std::min<std::size_t>(it - cumulative.begin(), values.size() - 1)];
  }
  return out;
}

double flip_rating(double rating) {
  if (!kFiveStar.contains(rating)) throw std::domain_error("flip_rating: rating outside 1..5");
  return 6.0 - rating;
}

SynthGraph inject_model_b(const RatedGraph& g, std::size_t n_spammers, std::uint64_t seed,
                          SpammerSelection selection) {
  std::vector<double> flipped(g.ratings.size());
  for (std::size_t i = 0; i < flipped.size(); ++i) flipped[i] = flip_rating(g.ratings[i]);
  auto spammers = pick_spammers(g.graph, n_spammers, seed, selection, g.ratings, flipped, 3.0);
  std::vector<double> ratings = g.ratings;
  for (std::size_t i = 0; i < ratings.size(); ++i)
    if (spammers.count(g.graph.reviewers[g.graph.edges[i].reviewer])) ratings[i] = flip_rating(ratings[i]);
  return {to_dataset(g.graph, ratings, kFiveStar, 3.0), std::move(spammers), {}, SpammerModel::B};
}

SynthGraph generate_graph(const BatchParams& batch, std::uint64_t master_seed, std::size_t index) {
  GeneratorParams params = batch.generator;
  params.seed = master_seed + index;
  BipartiteGraph g = rtg_generate(params);
  auto famous = mark_famous(g, batch.famous_count);
  if (batch.model == SpammerModel::A) {
    return inject_model_a(g, famous, batch.spammer_count(), params.seed,
                          batch.binary ? BinaryEncoding::binary() : BinaryEncoding::five_star(), batch.selection);
  }
  SynthGraph out = inject_model_b(sample_ratings(g, batch.pmf, params.seed), batch.spammer_count(),
                                  params.seed, batch.selection);
  out.famous_products = std::move(famous);
  return out;
}

}  // namespace ratedev::synth
