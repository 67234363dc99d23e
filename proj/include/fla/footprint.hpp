#pragma once

// Fitness landscape footprint: eight metrics describing one (source,
// budget) landscape, and cross-source comparison of footprints.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fla/error.hpp"
#include "fla/fitness.hpp"
#include "fla/metrics.hpp"
#include "fla/persistence.hpp"

namespace fla {

enum class Axis { Mean, Variance, Tau, LocalOptima, PosP, PosAuc, NegP, NegAuc };

inline constexpr std::size_t kAxes = 8;

inline constexpr std::array<Axis, kAxes> kAllAxes{Axis::Mean, Axis::Variance, Axis::Tau,  Axis::LocalOptima,
                                                  Axis::PosP, Axis::PosAuc,   Axis::NegP, Axis::NegAuc};

constexpr std::string_view axis_name(Axis a) {
  switch (a) {
    case Axis::Mean: return "mean";
    case Axis::Variance: return "variance";
    case Axis::Tau: return "tau";
    case Axis::LocalOptima: return "n_local_optima";
    case Axis::PosP: return "pos_p";
    case Axis::PosAuc: return "pos_auc";
    case Axis::NegP: return "neg_p";
    case Axis::NegAuc: return "neg_auc";
  }
  return "?";
}

inline std::optional<Axis> parse_axis(std::string_view s) {
  for (Axis a : kAllAxes) {
    if (axis_name(a) == s) return a;
  }
  return std::nullopt;
}

/// One footprint entry: a finite value, a flag, or both (a sampled
/// local-optima count carries ESTIMATE next to its value).
struct MetricSlot {
  std::optional<double> value;
  std::string flag;

  friend bool operator==(const MetricSlot&, const MetricSlot&) = default;
};

struct Footprint {
  std::string source;
  Budget budget = 0;
  std::array<MetricSlot, kAxes> metrics;
  std::vector<std::string> provenance;

  const MetricSlot& operator[](Axis a) const { return metrics[static_cast<std::size_t>(a)]; }
  MetricSlot& operator[](Axis a) { return metrics[static_cast<std::size_t>(a)]; }

  friend bool operator==(const Footprint&, const Footprint&) = default;
};

/// An analysis result tagged with the landscape it was computed on and an
/// id for provenance tracking.
template <class T>
struct Analysis {
  std::string source;
  Budget budget = 0;
  std::string id;
  T result;
};

inline constexpr std::string_view kUnavailable = "UNAVAILABLE";

inline RuggednessResult unavailable_ruggedness() {
  RuggednessResult r;
  r.rho1 = std::numeric_limits<double>::quiet_NaN();
  r.flag = kUnavailable;
  return r;
}

inline Footprint build_footprint(const Analysis<FitnessStats>& stats, const Analysis<RuggednessResult>& rugged,
                                 const Analysis<LocalOptimaResult>& optima, const Analysis<PersistenceSummary>& pos,
                                 const Analysis<PersistenceSummary>& neg) {
  auto check = [&](const std::string& source, Budget budget, std::string_view what) {
    if (source != stats.source) {
      throw Error(ErrorCode::SourceMismatch, std::string(what) + " is for " + source + ", stats for " + stats.source);
    }
    if (budget != stats.budget) {
      throw Error(ErrorCode::BudgetMismatch, std::string(what) + " is at budget " + std::to_string(budget) +
                                                 ", stats at " + std::to_string(stats.budget));
    }
  };
  check(rugged.source, rugged.budget, "ruggedness");
  check(optima.source, optima.budget, "local optima");
  check(pos.source, pos.budget, "positive persistence");
  check(neg.source, neg.budget, "negative persistence");
  check(pos.result.source.empty() ? pos.source : pos.result.source, pos.result.b, "positive persistence curve");
  check(neg.result.source.empty() ? neg.source : neg.result.source, neg.result.b, "negative persistence curve");
  if (pos.result.direction != Direction::Top || neg.result.direction != Direction::Bottom) {
    throw Error(ErrorCode::InvalidArgument, "positive persistence must be TOP and negative BOTTOM");
  }

  Footprint fp;
  fp.source = stats.source;
  fp.budget = stats.budget;
  fp[Axis::Mean].value = stats.result.mean;
  fp[Axis::Variance].value = stats.result.variance();
  if (rugged.result.tau) {
    fp[Axis::Tau].value = *rugged.result.tau;
  } else {
    fp[Axis::Tau].flag = rugged.result.flag.empty() ? std::string(kNonpositiveRho1) : rugged.result.flag;
  }
  fp[Axis::LocalOptima].value = static_cast<double>(optima.result.count);
  if (optima.result.mode == OptimaMode::Estimate) fp[Axis::LocalOptima].flag = to_string(OptimaMode::Estimate);
  fp[Axis::PosP].value = pos.result.p_at_nmax;
  fp[Axis::PosAuc].value = pos.result.auc;
  fp[Axis::NegP].value = neg.result.p_at_nmax;
  fp[Axis::NegAuc].value = neg.result.auc;
  fp.provenance = {stats.id, rugged.id, optima.id, pos.id, neg.id};
  return fp;
}

// ---------------------------------------------------------------------------
// Comparison

struct RadarVector {
  std::string label;
  std::array<double, kAxes> values{};
  std::array<bool, kAxes> flagged{};  // no raw value; mapped to 0
};

/// Per-axis min-max scaling across the compared footprints. Axes where all
/// values are equal map to 0.5; slots without a value map to 0 and are
/// marked. Orientation is never inverted.
inline std::vector<RadarVector> normalize_for_radar(std::span<const Footprint> footprints) {
  if (footprints.size() < 2) {
    throw Error(ErrorCode::TooFew, "need at least 2 footprints, got " + std::to_string(footprints.size()));
  }
  std::vector<RadarVector> out(footprints.size());
  for (std::size_t i = 0; i < footprints.size(); ++i) out[i].label = footprints[i].source;

  for (Axis axis : kAllAxes) {
    const auto a = static_cast<std::size_t>(axis);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& fp : footprints) {
      if (const auto& v = fp[axis].value; v && std::isfinite(*v)) {
        lo = std::min(lo, *v);
        hi = std::max(hi, *v);
      }
    }
    if (lo > hi) throw Error(ErrorCode::AllFlagged, std::string(axis_name(axis)));
    for (std::size_t i = 0; i < footprints.size(); ++i) {
      const auto& v = footprints[i][axis].value;
      if (!v || !std::isfinite(*v)) {
        out[i].values[a] = 0.0;
        out[i].flagged[a] = true;
      } else {
        out[i].values[a] = hi > lo ? (*v - lo) / (hi - lo) : 0.5;
      }
    }
  }
  return out;
}

struct AxisRanking {
  Axis axis = Axis::Mean;
  std::string status;  // RANKED, TIED (all valued entries equal)
  std::vector<std::string> order;  // labels, highest raw value first, unvalued last
  std::vector<int> ranks;          // 1-based competition ranks; 0 = no value
};

struct ComparisonReport {
  std::vector<Footprint> footprints;
  std::vector<RadarVector> normalized;
  std::vector<AxisRanking> rankings;
  std::vector<std::string> provenance;
};

/// Labels are source names, or "source@budget" when a source appears
/// more than once.
inline std::vector<std::string> comparison_labels(std::span<const Footprint> footprints) {
  std::set<std::string> seen, repeated;
  for (const auto& fp : footprints) {
    if (!seen.insert(fp.source).second) repeated.insert(fp.source);
  }
  std::vector<std::string> labels;
  for (const auto& fp : footprints) {
    labels.push_back(repeated.count(fp.source) ? fp.source + "@" + std::to_string(fp.budget) : fp.source);
  }
  return labels;
}

inline ComparisonReport compare(std::span<const Footprint> footprints) {
  ComparisonReport report;
  report.normalized = normalize_for_radar(footprints);
  report.footprints.assign(footprints.begin(), footprints.end());
  const auto labels = comparison_labels(footprints);
  {
    std::set<std::string> unique(labels.begin(), labels.end());
    if (unique.size() != labels.size()) {
      throw Error(ErrorCode::InvalidArgument, "the same (source, budget) appears twice");
    }
  }
  for (std::size_t i = 0; i < labels.size(); ++i) report.normalized[i].label = labels[i];

  for (Axis axis : kAllAxes) {
    std::vector<std::size_t> idx(footprints.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    auto value = [&](std::size_t i) { return footprints[i][axis].value; };
    std::sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) {
      const auto vx = value(x), vy = value(y);
      if (vx.has_value() != vy.has_value()) return vx.has_value();
      if (vx && vy && *vx != *vy) return *vx > *vy;
      return labels[x] < labels[y];
    });
    AxisRanking ranking;
    ranking.axis = axis;
    std::set<double> distinct;
    for (std::size_t pos = 0; pos < idx.size(); ++pos) {
      const auto v = value(idx[pos]);
      ranking.order.push_back(labels[idx[pos]]);
      if (!v) {
        ranking.ranks.push_back(0);
        continue;
      }
      distinct.insert(*v);
      const bool tie_with_prev = pos > 0 && value(idx[pos - 1]) == v;
      ranking.ranks.push_back(tie_with_prev ? ranking.ranks.back() : static_cast<int>(pos) + 1);
    }
    ranking.status = distinct.size() <= 1 ? "TIED" : "RANKED";
    report.rankings.push_back(std::move(ranking));
  }

  std::set<std::string> prov;
  for (const auto& fp : footprints) prov.insert(fp.provenance.begin(), fp.provenance.end());
  report.provenance.assign(prov.begin(), prov.end());
  return report;
}

}  // namespace fla
