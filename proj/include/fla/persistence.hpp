#pragma once

// Rank persistence across training budgets: which share of the models in
// the top (or bottom) N% at a reference budget stay there at a later one.

#include <algorithm>
#include <cmath>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fla/error.hpp"
#include "fla/fitness.hpp"

namespace fla {

enum class Direction { Top, Bottom };

constexpr std::string_view to_string(Direction d) { return d == Direction::Top ? "TOP" : "BOTTOM"; }

inline constexpr Budget kDefaultReferenceBudget = 4;
inline constexpr double kDefaultNMax = 25.0;

struct RankSnapshot {
  std::string source;
  Budget budget = 0;
  Direction direction = Direction::Top;
  double n_percent = 0.0;
  std::size_t population = 0;
  std::vector<std::string> member_ids;  // in rank order
};

/// Models of `source` with a record at every budget in `budgets`, sorted.
inline std::vector<std::string> intersection_population(const FitnessTable& table, const std::string& source,
                                                        std::span<const Budget> budgets) {
  std::set<Budget> wanted(budgets.begin(), budgets.end());
  std::vector<std::string> candidates;
  for (const auto& r : table.records()) {
    if (r.source == source) candidates.push_back(r.model_id);
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  std::vector<std::string> out;
  for (const auto& id : candidates) {
    if (std::all_of(wanted.begin(), wanted.end(), [&](Budget b) { return table.find(id, source, b).has_value(); })) {
      out.push_back(id);
    }
  }
  return out;
}

/// ceil(n_percent / 100 * population), robust to binary rounding.
inline std::size_t rank_set_size(double n_percent, std::size_t population) {
  if (!(n_percent > 0.0 && n_percent <= 100.0)) {
    throw Error(ErrorCode::InvalidArgument, "n_percent must be in (0, 100]");
  }
  const double exact = n_percent * static_cast<double>(population) / 100.0;
  const auto k = static_cast<std::size_t>(std::ceil(exact - 1e-9));
  return std::clamp<std::size_t>(k, population ? 1 : 0, population);
}

namespace detail {

// Population ids ordered best-first (TOP) or worst-first (BOTTOM); equal
// fitness falls back to model_id ascending in both directions.
inline std::vector<std::string> rank_order(const FitnessTable& table, const std::string& source, Budget budget,
                                           Direction direction, std::vector<std::string> ids) {
  std::vector<std::pair<double, std::string>> keyed;
  keyed.reserve(ids.size());
  for (auto& id : ids) keyed.emplace_back(table.query(id, source, budget), std::move(id));
  std::sort(keyed.begin(), keyed.end(), [direction](const auto& a, const auto& b) {
    if (a.first != b.first) return direction == Direction::Top ? a.first > b.first : a.first < b.first;
    return a.second < b.second;
  });
  std::vector<std::string> out;
  out.reserve(keyed.size());
  for (auto& [f, id] : keyed) out.push_back(std::move(id));
  return out;
}

inline std::vector<Budget> population_budgets(std::span<const Budget> given, std::initializer_list<Budget> must) {
  std::vector<Budget> out(given.begin(), given.end());
  out.insert(out.end(), must.begin(), must.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace detail

/// The ceil(n% * population) best (TOP) or worst (BOTTOM) models at
/// `budget`. The population is the set of models evaluated at every budget
/// in `analyzed_budgets` (plus `budget` itself).
inline RankSnapshot rank_set(const FitnessTable& table, const std::string& source, Budget budget, double n_percent,
                             Direction direction, std::span<const Budget> analyzed_budgets = {}) {
  const auto budgets = detail::population_budgets(analyzed_budgets, {budget});
  auto pop = intersection_population(table, source, budgets);
  if (pop.empty()) {
    throw Error(ErrorCode::EmptyPopulation, "no model of " + source + " is evaluated at every analyzed budget");
  }
  RankSnapshot snap;
  snap.source = source;
  snap.budget = budget;
  snap.direction = direction;
  snap.n_percent = n_percent;
  snap.population = pop.size();
  const std::size_t k = rank_set_size(n_percent, pop.size());
  snap.member_ids = detail::rank_order(table, source, budget, direction, std::move(pop));
  snap.member_ids.resize(k);
  return snap;
}

struct PersistenceCurve {
  std::string source;
  Direction direction = Direction::Top;
  Budget b_ref = kDefaultReferenceBudget;
  Budget b = kDefaultReferenceBudget;
  std::vector<std::pair<double, double>> points;  // (n_percent, persistence_percent)
};

struct PersistenceSummary {
  std::string source;
  Direction direction = Direction::Top;
  Budget b_ref = kDefaultReferenceBudget;
  Budget b = kDefaultReferenceBudget;
  double n_max = kDefaultNMax;
  double auc = 0.0;        // in [0, 1]
  double p_at_nmax = 0.0;  // percent
};

/// Persistence curve on the grid 1, 2, ..., floor(n_max), plus n_max itself
/// when it is not an integer.
inline PersistenceCurve persistence_curve(const FitnessTable& table, const std::string& source, Budget b_ref,
                                          Budget b, Direction direction, double n_max = kDefaultNMax,
                                          std::span<const Budget> analyzed_budgets = {}) {
  if (!(n_max >= 1.0 && n_max <= 100.0)) throw Error(ErrorCode::InvalidArgument, "n_max must be in [1, 100]");
  const auto budgets = detail::population_budgets(analyzed_budgets, {b_ref, b});
  auto pop = intersection_population(table, source, budgets);
  if (pop.empty()) {
    throw Error(ErrorCode::EmptyPopulation, "no model of " + source + " is evaluated at every analyzed budget");
  }
  const std::size_t size = pop.size();
  const auto ref_order = detail::rank_order(table, source, b_ref, direction, pop);
  const auto cur_order = detail::rank_order(table, source, b, direction, std::move(pop));

  std::vector<double> grid;
  for (double n = 1.0; n <= n_max; n += 1.0) grid.push_back(n);
  if (grid.back() < n_max) grid.push_back(n_max);

  PersistenceCurve curve;
  curve.source = source;
  curve.direction = direction;
  curve.b_ref = b_ref;
  curve.b = b;
  for (double n : grid) {
    const std::size_t k = rank_set_size(n, size);
    std::set<std::string> ref(ref_order.begin(), ref_order.begin() + static_cast<std::ptrdiff_t>(k));
    std::size_t kept = 0;
    for (std::size_t i = 0; i < k; ++i) kept += ref.count(cur_order[i]);
    curve.points.emplace_back(n, 100.0 * static_cast<double>(kept) / static_cast<double>(k));
  }
  return curve;
}

/// 100 * |rank_set(b_ref) ∩ rank_set(b)| / |rank_set(b_ref)|.
inline double persistence(const FitnessTable& table, const std::string& source, double n_percent, Budget b_ref,
                          Budget b, Direction direction, std::span<const Budget> analyzed_budgets = {}) {
  const auto budgets = detail::population_budgets(analyzed_budgets, {b_ref, b});
  const auto ref = rank_set(table, source, b_ref, n_percent, direction, budgets);
  const auto cur = rank_set(table, source, b, n_percent, direction, budgets);
  const std::set<std::string> ref_ids(ref.member_ids.begin(), ref.member_ids.end());
  std::size_t kept = 0;
  for (const auto& id : cur.member_ids) kept += ref_ids.count(id);
  return 100.0 * static_cast<double>(kept) / static_cast<double>(ref.member_ids.size());
}

/// Trapezoidal area under the persistence fraction over [1, n_max],
/// divided by the interval length so that perfect persistence gives 1.
inline double curve_auc(const PersistenceCurve& curve) {
  const auto& pts = curve.points;
  if (pts.empty()) return 0.0;
  if (pts.size() == 1) return pts.front().second / 100.0;
  double area = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    area += 0.5 * (pts[i].first - pts[i - 1].first) * (pts[i].second + pts[i - 1].second) / 100.0;
  }
  return area / (pts.back().first - pts.front().first);
}

inline double persistence_auc(const FitnessTable& table, const std::string& source, Budget b_ref, Budget b,
                              Direction direction, double n_max = kDefaultNMax,
                              std::span<const Budget> analyzed_budgets = {}) {
  return curve_auc(persistence_curve(table, source, b_ref, b, direction, n_max, analyzed_budgets));
}

inline PersistenceSummary summarize(const PersistenceCurve& curve) {
  PersistenceSummary s;
  s.source = curve.source;
  s.direction = curve.direction;
  s.b_ref = curve.b_ref;
  s.b = curve.b;
  s.n_max = curve.points.empty() ? 0.0 : curve.points.back().first;
  s.auc = curve_auc(curve);
  s.p_at_nmax = curve.points.empty() ? 0.0 : curve.points.back().second;
  return s;
}

}  // namespace fla
