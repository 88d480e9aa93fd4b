#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ratedev {

/// Calendar day counted from 1970-01-01.
using Day = std::int32_t;

/// Inclusive bounds of the rating scale.
struct RatingScale {
  double min = 1.0;
  double max = 5.0;

  bool contains(double value) const noexcept { return value >= min && value <= max; }
  bool is_extreme(double value) const noexcept { return value == min || value == max; }
  bool operator==(const RatingScale&) const = default;
};

inline constexpr RatingScale kFiveStar{1.0, 5.0};
inline constexpr RatingScale kBinary{0.0, 1.0};

struct Review {
  std::string reviewer_id;
  std::string product_id;
  double rating = 0.0;
  std::optional<Day> date;
  std::optional<std::string> text;

  bool operator==(const Review&) const = default;
};

class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Immutable bipartite collection of reviews with per-reviewer and
/// per-product adjacency in compressed (offset + position) form.
///
/// Reviewers and products are numbered densely in order of first
/// appearance in the review sequence. All hot-path data (ratings and the
/// reviewer/product of each review) is stored in flat arrays.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<Review> reviews, RatingScale scale = kFiveStar,
                   double midpoint = 3.0);

  std::span<const Review> reviews() const noexcept { return reviews_; }
  const Review& review(std::size_t pos) const { return reviews_.at(pos); }

  std::size_t review_count() const noexcept { return reviews_.size(); }
  std::size_t reviewer_count() const noexcept { return reviewer_ids_.size(); }
  std::size_t product_count() const noexcept { return product_ids_.size(); }
  bool empty() const noexcept { return reviews_.empty(); }

  const std::string& reviewer_id(std::size_t r) const { return reviewer_ids_.at(r); }
  const std::string& product_id(std::size_t p) const { return product_ids_.at(p); }
  std::span<const std::string> reviewer_ids() const noexcept { return reviewer_ids_; }
  std::span<const std::string> product_ids() const noexcept { return product_ids_; }

  std::optional<std::size_t> find_reviewer(std::string_view id) const;
  std::optional<std::size_t> find_product(std::string_view id) const;

  /// Review positions of reviewer `r`, in input order.
  std::span<const std::uint32_t> reviews_of_reviewer(std::size_t r) const noexcept {
    return {reviewer_reviews_.data() + reviewer_offsets_[r],
            reviewer_offsets_[r + 1] - reviewer_offsets_[r]};
  }
  std::span<const std::uint32_t> reviews_of_product(std::size_t p) const noexcept {
    return {product_reviews_.data() + product_offsets_[p],
            product_offsets_[p + 1] - product_offsets_[p]};
  }

  std::span<const double> ratings() const noexcept { return ratings_; }
  std::span<const std::uint32_t> review_reviewers() const noexcept { return review_reviewer_; }
  std::span<const std::uint32_t> review_products() const noexcept { return review_product_; }

  RatingScale scale() const noexcept { return scale_; }
  double midpoint() const noexcept { return midpoint_; }

  bool has_dates() const noexcept { return has_dates_; }
  bool has_text() const noexcept { return has_text_; }

  /// Dataset made of the reviews at `positions` (kept in the given order).
  Dataset subset(std::span<const std::uint32_t> positions) const;

  /// Checks the index invariants; throws DatasetError on violation.
  void validate() const;

 private:
  std::vector<Review> reviews_;
  RatingScale scale_ = kFiveStar;
  double midpoint_ = 3.0;

  std::vector<std::string> reviewer_ids_;
  std::vector<std::string> product_ids_;
  std::unordered_map<std::string, std::uint32_t> reviewer_lookup_;
  std::unordered_map<std::string, std::uint32_t> product_lookup_;

  std::vector<double> ratings_;
  std::vector<std::uint32_t> review_reviewer_;
  std::vector<std::uint32_t> review_product_;

  std::vector<std::size_t> reviewer_offsets_{0};
  std::vector<std::uint32_t> reviewer_reviews_;
  std::vector<std::size_t> product_offsets_{0};
  std::vector<std::uint32_t> product_reviews_;

  bool has_dates_ = false;
  bool has_text_ = false;
};

struct FilterPolicy {
  std::size_t min_reviews_per_reviewer = 3;
  std::size_t max_reviews_per_reviewer = 5000;
  std::size_t min_reviews_per_product = 2;
  std::size_t max_reviews_per_product = 1000;
  bool take_largest_component = true;
  bool fixpoint = false;

  void validate() const;
};

/// Sub-dataset induced by the largest connected component of the undirected
/// reviewer-product graph. Component size is its vertex count; ties go to
/// the component holding the lexicographically smallest member id.
Dataset largest_connected_component(const Dataset& d);

/// Reviewer bounds, then product bounds, then orphaned reviewers. One pass
/// unless `policy.fixpoint` is set. Does not apply `take_largest_component`.
Dataset filter_dataset(const Dataset& d, const FilterPolicy& policy);

/// Full preprocessing: component extraction (when enabled) then filtering.
Dataset preprocess(const Dataset& d, const FilterPolicy& policy);

/// Parses "YYYY-MM-DD", ignoring any trailing time-of-day part.
std::optional<Day> parse_iso_day(std::string_view text);
std::string format_iso_day(Day day);

}  // namespace ratedev
