#include "ratedev/model.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <limits>
#include <numeric>

namespace ratedev {

Dataset::Dataset(std::vector<Review> reviews, RatingScale scale, double midpoint)
    : reviews_(std::move(reviews)), scale_(scale), midpoint_(midpoint) {
  if (!(scale_.min < scale_.max)) throw DatasetError("rating scale min must be below max");
  if (!(midpoint_ > scale_.min && midpoint_ <= scale_.max))
    throw DatasetError("midpoint must satisfy min < midpoint <= max");
  if (reviews_.size() > std::numeric_limits<std::uint32_t>::max())
    throw DatasetError("too many reviews");

  const std::size_t n = reviews_.size();
  ratings_.resize(n);
  review_reviewer_.resize(n);
  review_product_.resize(n);

  std::vector<std::size_t> reviewer_degree;
  std::vector<std::size_t> product_degree;
  for (std::size_t i = 0; i < n; ++i) {
    const Review& rv = reviews_[i];
    if (rv.reviewer_id.empty() || rv.product_id.empty())
      throw DatasetError("review " + std::to_string(i) + " has an empty id");
    if (!scale_.contains(rv.rating))
      throw DatasetError("review " + std::to_string(i) + " rating outside scale");
    has_dates_ = has_dates_ || rv.date.has_value();
    has_text_ = has_text_ || (rv.text.has_value() && !rv.text->empty());

    auto [rit, rnew] = reviewer_lookup_.try_emplace(rv.reviewer_id,
                                                     static_cast<std::uint32_t>(reviewer_ids_.size()));
    if (rnew) {
      reviewer_ids_.push_back(rv.reviewer_id);
      reviewer_degree.push_back(0);
    }
    auto [pit, pnew] = product_lookup_.try_emplace(rv.product_id,
                                                    static_cast<std::uint32_t>(product_ids_.size()));
    if (pnew) {
      product_ids_.push_back(rv.product_id);
      product_degree.push_back(0);
    }
    ratings_[i] = rv.rating;
    review_reviewer_[i] = rit->second;
    review_product_[i] = pit->second;
    ++reviewer_degree[rit->second];
    ++product_degree[pit->second];
  }

  auto build = [n](const std::vector<std::size_t>& degree, const std::vector<std::uint32_t>& owner,
                   std::vector<std::size_t>& offsets, std::vector<std::uint32_t>& positions) {
    offsets.assign(degree.size() + 1, 0);
    std::partial_sum(degree.begin(), degree.end(), offsets.begin() + 1);
    positions.resize(n);
    std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
    for (std::size_t i = 0; i < n; ++i) positions[cursor[owner[i]]++] = static_cast<std::uint32_t>(i);
  };
  build(reviewer_degree, review_reviewer_, reviewer_offsets_, reviewer_reviews_);
  build(product_degree, review_product_, product_offsets_, product_reviews_);
}

std::optional<std::size_t> Dataset::find_reviewer(std::string_view id) const {
  auto it = reviewer_lookup_.find(std::string(id));
  if (it == reviewer_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> Dataset::find_product(std::string_view id) const {
  auto it = product_lookup_.find(std::string(id));
  if (it == product_lookup_.end()) return std::nullopt;
  return it->second;
}

Dataset Dataset::subset(std::span<const std::uint32_t> positions) const {
  std::vector<Review> picked;
  picked.reserve(positions.size());
  for (auto pos : positions) picked.push_back(reviews_.at(pos));
  return Dataset(std::move(picked), scale_, midpoint_);
}

void Dataset::validate() const {
  const std::size_t n = reviews_.size();
  std::vector<int> seen_r(n, 0), seen_p(n, 0);
  for (std::size_t r = 0; r < reviewer_count(); ++r)
    for (auto pos : reviews_of_reviewer(r)) {
      if (pos >= n || review_reviewer_[pos] != r || reviews_[pos].reviewer_id != reviewer_ids_[r])
        throw DatasetError("reviewer index inconsistent");
      ++seen_r[pos];
    }
  for (std::size_t p = 0; p < product_count(); ++p)
    for (auto pos : reviews_of_product(p)) {
      if (pos >= n || review_product_[pos] != p || reviews_[pos].product_id != product_ids_[p])
        throw DatasetError("product index inconsistent");
      ++seen_p[pos];
    }
  for (std::size_t i = 0; i < n; ++i)
    if (seen_r[i] != 1 || seen_p[i] != 1)
      throw DatasetError("review " + std::to_string(i) + " not indexed exactly once");
}

void FilterPolicy::validate() const {
  if (min_reviews_per_reviewer > max_reviews_per_reviewer)
    throw std::invalid_argument("reviewer bounds: min > max");
  if (min_reviews_per_product > max_reviews_per_product)
    throw std::invalid_argument("product bounds: min > max");
}

namespace {

struct DisjointSets {
  std::vector<std::uint32_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0u); }
  std::uint32_t find(std::uint32_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b) std::swap(a, b);
    parent[a] = b;
  }
};

}  // namespace

Dataset largest_connected_component(const Dataset& d) {
  if (d.empty()) throw DatasetError("empty dataset");
  const std::size_t nr = d.reviewer_count();
  // Vertices: reviewers [0, nr), products [nr, nr + np).
  DisjointSets sets(nr + d.product_count());
  auto reviewers = d.review_reviewers();
  auto products = d.review_products();
  for (std::size_t i = 0; i < d.review_count(); ++i)
    sets.unite(reviewers[i], static_cast<std::uint32_t>(nr + products[i]));

  struct Component {
    std::size_t size = 0;
    const std::string* smallest = nullptr;
  };
  std::vector<Component> comps(sets.parent.size());
  for (std::uint32_t v = 0; v < sets.parent.size(); ++v) {
    auto& c = comps[sets.find(v)];
    ++c.size;
    const std::string& id = v < nr ? d.reviewer_id(v) : d.product_id(v - nr);
    if (c.smallest == nullptr || id < *c.smallest) c.smallest = &id;
  }
  std::uint32_t best = 0;
  bool have = false;
  for (std::uint32_t v = 0; v < comps.size(); ++v) {
    const auto& c = comps[v];
    if (c.size == 0) continue;
    if (!have || c.size > comps[best].size ||
        (c.size == comps[best].size && *c.smallest < *comps[best].smallest)) {
      best = v;
      have = true;
    }
  }
  std::vector<std::uint32_t> keep;
  keep.reserve(d.review_count());
  for (std::uint32_t i = 0; i < d.review_count(); ++i)
    if (sets.find(reviewers[i]) == best) keep.push_back(i);
  if (keep.size() == d.review_count()) return d;
  return d.subset(keep);
}

namespace {

bool within(std::size_t v, std::size_t lo, std::size_t hi) { return v >= lo && v <= hi; }

Dataset filter_once(const Dataset& d, const FilterPolicy& policy) {
  // (1) reviewer bounds
  std::vector<std::uint32_t> keep;
  keep.reserve(d.review_count());
  for (std::uint32_t i = 0; i < d.review_count(); ++i) {
    std::size_t n_r = d.reviews_of_reviewer(d.review_reviewers()[i]).size();
    if (within(n_r, policy.min_reviews_per_reviewer, policy.max_reviews_per_reviewer))
      keep.push_back(i);
  }

  // (2) product bounds, counted on what survived (1)
  std::vector<std::size_t> product_degree(d.product_count(), 0);
  for (auto pos : keep) ++product_degree[d.review_products()[pos]];
  std::vector<std::uint32_t> kept;
  kept.reserve(keep.size());
  for (auto pos : keep)
    if (within(product_degree[d.review_products()[pos]], policy.min_reviews_per_product,
               policy.max_reviews_per_product))
      kept.push_back(pos);

  // (3) reviewers with zero reviews vanish when the index is rebuilt.
  if (kept.size() == d.review_count()) return d;
  return d.subset(kept);
}

}  // namespace

Dataset filter_dataset(const Dataset& d, const FilterPolicy& policy) {
  policy.validate();
  Dataset out = filter_once(d, policy);
  if (!policy.fixpoint) return out;
  while (true) {
    std::size_t before = out.review_count();
    out = filter_once(out, policy);
    if (out.review_count() == before) return out;
  }
}

Dataset preprocess(const Dataset& d, const FilterPolicy& policy) {
  policy.validate();
  if (d.empty()) return d;
  if (policy.take_largest_component) return filter_dataset(largest_connected_component(d), policy);
  return filter_dataset(d, policy);
}

std::optional<Day> parse_iso_day(std::string_view text) {
  if (text.size() < 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  if (text.size() > 10 && text[10] != 'T' && text[10] != ' ') return std::nullopt;
  auto number = [&](std::size_t at, std::size_t len, int& out) {
    auto res = std::from_chars(text.data() + at, text.data() + at + len, out);
    return res.ec == std::errc{} && res.ptr == text.data() + at + len;
  };
  int y = 0, m = 0, dd = 0;
  if (!number(0, 4, y) || !number(5, 2, m) || !number(8, 2, dd)) return std::nullopt;
  using namespace std::chrono;
  year_month_day ymd{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(dd)}};
  if (!ymd.ok()) return std::nullopt;
  return static_cast<Day>(sys_days{ymd}.time_since_epoch().count());
}

std::string format_iso_day(Day value) {
  using namespace std::chrono;
  year_month_day ymd{sys_days{days{value}}};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

}  // namespace ratedev
