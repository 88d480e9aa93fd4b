#include "ratedev/features.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>
#include <unordered_map>

#include "ratedev/random.hpp"
#include "ratedev/stats.hpp"

namespace ratedev::features {

std::string_view feature_name(Feature f) {
  switch (f) {
    case Feature::same_day: return "same_day";
    case Feature::extreme: return "extreme";
    case Feature::similarity: return "similarity";
  }
  return "unknown";
}

std::optional<double> ReviewerFeatures::get(Feature f) const {
  switch (f) {
    case Feature::same_day: return same_day;
    case Feature::extreme: return extreme;
    case Feature::similarity: return similarity;
  }
  return std::nullopt;
}

std::optional<double> same_day_proportion(std::span<const Day> dates) {
  if (dates.empty()) return std::nullopt;
  std::unordered_map<Day, std::size_t> per_day;
  for (Day d : dates) ++per_day[d];
  std::size_t shared = 0;
  for (auto [day, count] : per_day)
    if (count > 1) shared += count;
  return static_cast<double>(shared) / static_cast<double>(dates.size());
}

double extreme_proportion(std::span<const double> ratings, RatingScale scale) {
  if (ratings.empty()) throw std::invalid_argument("extreme_proportion: no ratings");
  std::size_t extreme = 0;
  for (double r : ratings) extreme += scale.is_extreme(r);
  return static_cast<double>(extreme) / static_cast<double>(ratings.size());
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> words;
  std::string current;
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      if (!current.empty()) words.push_back(std::move(current));
      current.clear();
    } else if (std::isalnum(c) || c >= 0x80) {
      current.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

namespace {

using Shingles = std::vector<std::string>;  // sorted, unique

Shingles shingles(std::string_view text) {
  auto words = tokenize(text);
  Shingles out;
  if (words.size() == 1) {
    out.push_back(words.front());
  } else {
    for (std::size_t i = 0; i + 1 < words.size(); ++i) out.push_back(words[i] + ' ' + words[i + 1]);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double jaccard(const Shingles& a, const Shingles& b) {
  if (a.empty() && b.empty()) return 0.0;
  std::size_t common = 0;
  for (auto ia = a.begin(), ib = b.begin(); ia != a.end() && ib != b.end();) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++common;
      ++ia;
      ++ib;
    }
  }
  return static_cast<double>(common) / static_cast<double>(a.size() + b.size() - common);
}

}  // namespace

double bigram_jaccard(std::string_view a, std::string_view b) { return jaccard(shingles(a), shingles(b)); }

std::optional<double> max_content_similarity(std::span<const std::string> texts,
                                             const SimilarityFn& similarity) {
  std::vector<std::string_view> present;
  for (const auto& t : texts)
    if (!t.empty()) present.push_back(t);
  if (present.size() < 2) return std::nullopt;

  double best = 0.0;
  if (!similarity) {
    std::vector<Shingles> sets;
    sets.reserve(present.size());
    for (auto t : present) sets.push_back(shingles(t));
    for (std::size_t i = 0; i < sets.size() && best < 1.0; ++i)
      for (std::size_t j = i + 1; j < sets.size(); ++j) best = std::max(best, jaccard(sets[i], sets[j]));
  } else {
    for (std::size_t i = 0; i < present.size(); ++i)
      for (std::size_t j = i + 1; j < present.size(); ++j)
        best = std::max(best, similarity(present[i], present[j]));
  }
  return best;
}

std::vector<Feature> FeatureTable::available() const {
  std::vector<Feature> out;
  if (has_same_day) out.push_back(Feature::same_day);
  out.push_back(Feature::extreme);
  if (has_similarity) out.push_back(Feature::similarity);
  return out;
}

FeatureTable compute_features(const Dataset& d, const SimilarityFn& similarity) {
  FeatureTable table;
  table.has_same_day = d.has_dates();
  table.has_similarity = d.has_text();
  table.rows.reserve(d.reviewer_count());
  std::vector<Day> dates;
  std::vector<double> ratings;
  std::vector<std::string> texts;
  for (std::size_t r = 0; r < d.reviewer_count(); ++r) {
    dates.clear();
    ratings.clear();
    texts.clear();
    for (auto pos : d.reviews_of_reviewer(r)) {
      const Review& rv = d.review(pos);
      ratings.push_back(rv.rating);
      if (rv.date)
        dates.push_back(*rv.date);
      else
        ++table.undated_reviews;
      if (rv.text) texts.push_back(*rv.text);
    }
    ReviewerFeatures row;
    row.reviewer_id = d.reviewer_id(r);
    row.same_day = same_day_proportion(dates);
    row.extreme = extreme_proportion(ratings, d.scale());
    if (table.has_similarity) row.similarity = max_content_similarity(texts, similarity);
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::vector<double> default_thresholds() {
  std::vector<double> z;
  for (int i = 0; i <= 20; ++i) z.push_back(i / 20.0);
  return z;
}

ExceedanceTable exceedance(const FeatureTable& table, std::span<const std::size_t> members,
                           std::span<const double> thresholds) {
  ExceedanceTable out;
  out.thresholds.assign(thresholds.begin(), thresholds.end());
  out.group_size = members.size();
  for (std::size_t f = 0; f < kAllFeatures.size(); ++f) {
    auto& props = out.proportion[f];
    props.assign(thresholds.size(), 0.0);
    if (members.empty()) continue;
    for (std::size_t zi = 0; zi < thresholds.size(); ++zi) {
      std::size_t above = 0;
      for (auto m : members) {
        auto v = table.rows.at(m).get(kAllFeatures[f]);
        above += v && *v > thresholds[zi];
      }
      props[zi] = static_cast<double>(above) / static_cast<double>(members.size());
    }
  }
  return out;
}

ExceedanceTable baseline_sample(const FeatureTable& table, std::size_t sample_size, std::size_t repeats,
                                std::uint64_t seed, std::span<const double> thresholds) {
  if (sample_size == 0 || repeats == 0) throw std::invalid_argument("baseline_sample: empty sampling plan");
  if (table.rows.size() < sample_size)
    throw std::invalid_argument("baseline_sample: dataset has fewer than " + std::to_string(sample_size) +
                                " reviewers");
  ExceedanceTable mean;
  mean.thresholds.assign(thresholds.begin(), thresholds.end());
  mean.group_size = sample_size;
  for (auto& p : mean.proportion) p.assign(thresholds.size(), 0.0);
  for (std::size_t rep = 0; rep < repeats; ++rep) {
    Rng rng(seed, rep);
    auto members = rng.sample_without_replacement(table.rows.size(), sample_size);
    auto one = exceedance(table, members, thresholds);
    for (std::size_t f = 0; f < kAllFeatures.size(); ++f)
      for (std::size_t zi = 0; zi < thresholds.size(); ++zi) mean.proportion[f][zi] += one.proportion[f][zi];
  }
  for (auto& p : mean.proportion)
    for (auto& v : p) v /= static_cast<double>(repeats);
  return mean;
}

GroupComparison compare_groups(const std::set<std::string>& candidates, const ExceedanceTable& baseline,
                               const Dataset& d, const FeatureTable& table) {
  if (candidates.empty()) throw std::invalid_argument("compare_groups: empty candidate set");
  std::vector<std::size_t> members;
  std::string unknown;
  for (const auto& id : candidates) {
    auto r = d.find_reviewer(id);
    if (!r) {
      unknown += (unknown.empty() ? "" : ", ") + id;
      continue;
    }
    members.push_back(*r);
  }
  if (!unknown.empty()) throw std::invalid_argument("unknown candidate ids: " + unknown);

  auto group = exceedance(table, members, baseline.thresholds);
  GroupComparison out;
  out.thresholds = baseline.thresholds;
  for (Feature f : table.available()) {
    const auto fi = static_cast<std::size_t>(f);
    for (std::size_t zi = 0; zi < out.thresholds.size(); ++zi) {
      ComparisonRow row{f, out.thresholds[zi], group.proportion[fi][zi], baseline.proportion[fi][zi], 1.0};
      row.p_value = stats::two_proportion_test_props(row.candidate_prop, static_cast<double>(members.size()),
                                                     row.baseline_prop,
                                                     static_cast<double>(baseline.group_size));
      out.rows.push_back(row);
    }
  }
  return out;
}

}  // namespace ratedev::features
