#pragma once

// Landscape statistics: fitness moments, fitness-distance correlation,
// lag-1 autocorrelation / ruggedness, moving average and local optima.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fla/bits.hpp"
#include "fla/cellspace.hpp"
#include "fla/error.hpp"
#include "fla/fitness.hpp"
#include "fla/sampling.hpp"

namespace fla {

// ---------------------------------------------------------------------------
// Fitness distribution

struct FitnessStats {
  double mean = 0.0;
  double stddev = 0.0;  // population (divisor n)
  double min = 0.0;
  double max = 0.0;
  std::size_t n = 0;

  double variance() const noexcept { return stddev * stddev; }
};

inline FitnessStats fitness_stats(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::Empty, "fitness_stats of an empty list");
  FitnessStats s;
  s.n = values.size();
  s.min = *std::min_element(values.begin(), values.end());
  s.max = *std::max_element(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = std::clamp(sum / static_cast<double>(s.n), s.min, s.max);
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(ss / static_cast<double>(s.n));
  return s;
}

// ---------------------------------------------------------------------------
// Fitness-distance correlation

template <class Point>
struct FdcSample {
  std::string id;
  Point point;
  double fitness = 0.0;
};

struct FdcPoint {
  std::size_t distance = 0;
  double fitness = 0.0;
  friend auto operator<=>(const FdcPoint&, const FdcPoint&) = default;
};

struct FDCResult {
  std::vector<FdcPoint> points;  // every sample except the optimum, input order
  std::string optimum_id;
  std::optional<double> pearson_r;  // nullopt: undefined (a constant variable)
};

/// Pearson correlation; nullopt when either variable has zero variance.
inline std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 2) return std::nullopt;
  auto constant = [](std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [&](double e) { return e == v.front(); });
  };
  if (constant(x) || constant(y)) return std::nullopt;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

/// FDC against the best sampled solution (maximization). Ties on fitness
/// go to the lexicographically smallest genotype.
template <BitSequence Point>
FDCResult fdc(std::span<const FdcSample<Point>> samples) {
  if (samples.size() < 2) throw Error(ErrorCode::Empty, "fdc needs at least 2 samples");
  std::size_t best = 0;
  for (std::size_t i = 1; i < samples.size(); ++i) {
    const auto& a = samples[i];
    const auto& b = samples[best];
    if (a.fitness > b.fitness || (a.fitness == b.fitness && a.point < b.point)) best = i;
  }
  FDCResult result;
  const auto& opt = samples[best];
  result.optimum_id = opt.id.empty() ? opt.point.hex() : opt.id;
  std::vector<double> d, f;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (i == best) continue;
    const std::size_t dist = hamming(opt.point, samples[i].point);
    result.points.push_back({dist, samples[i].fitness});
    d.push_back(static_cast<double>(dist));
    f.push_back(samples[i].fitness);
  }
  result.pearson_r = pearson(d, f);
  return result;
}

template <BitSequence Point>
FDCResult fdc(const std::vector<FdcSample<Point>>& samples) {
  return fdc(std::span<const FdcSample<Point>>(samples));
}

// ---------------------------------------------------------------------------
// Autocorrelation and ruggedness

/// Lag-1 autocorrelation with the biased (divisor n) estimator:
/// sum_t (f_t - mu)(f_{t+1} - mu) / sum_t (f_t - mu)^2.
inline double rho1(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 3) throw Error(ErrorCode::TooShort, "rho1 needs at least 3 values, got " + std::to_string(n));
  // Rounding in the mean would leave a constant series a tiny variance.
  if (std::all_of(series.begin(), series.end(), [&](double v) { return v == series.front(); })) {
    throw Error(ErrorCode::ZeroVariance, "rho1 of a constant series");
  }
  double mu = 0.0;
  for (double v : series) mu += v;
  mu /= static_cast<double>(n);
  double den = 0.0, num = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const double dt = series[t] - mu;
    den += dt * dt;
    if (t + 1 < n) num += dt * (series[t + 1] - mu);
  }
  if (den == 0.0) throw Error(ErrorCode::ZeroVariance, "rho1 of a constant series");
  return num / den;
}

inline constexpr std::string_view kNonpositiveRho1 = "NONPOSITIVE_RHO1";

struct RuggednessResult {
  double rho1 = 0.0;
  std::optional<double> tau;  // 1/rho1, present iff rho1 > 0
  std::size_t walk_len = 0;
  std::string flag;  // empty or NONPOSITIVE_RHO1
};

inline RuggednessResult ruggedness_tau(std::span<const double> series) {
  RuggednessResult r;
  r.rho1 = rho1(series);
  r.walk_len = series.size();
  if (r.rho1 > 0.0) {
    r.tau = 1.0 / r.rho1;
  } else {
    r.flag = kNonpositiveRho1;
  }
  return r;
}

inline RuggednessResult ruggedness_tau(const WalkTrace& walk) { return ruggedness_tau(walk.fitness); }

/// Valid-mode moving average; output length n - window + 1.
inline std::vector<double> moving_average(std::span<const double> series, std::size_t window = 5) {
  if (window == 0) throw Error(ErrorCode::InvalidArgument, "window must be >= 1");
  if (window > series.size()) {
    throw Error(ErrorCode::WindowTooLarge, "window " + std::to_string(window) + " > length " +
                                               std::to_string(series.size()));
  }
  std::vector<double> out;
  out.reserve(series.size() - window + 1);
  for (std::size_t start = 0; start + window <= series.size(); ++start) {
    double sum = 0.0;
    for (std::size_t i = start; i < start + window; ++i) sum += series[i];
    out.push_back(sum / static_cast<double>(window));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Local optima

enum class OptimaMode { Exact, Estimate };

constexpr std::string_view to_string(OptimaMode m) { return m == OptimaMode::Exact ? "EXACT" : "ESTIMATE"; }

struct LocalOptimaResult {
  std::size_t count = 0;
  std::vector<std::string> ids;  // hex strings (exhaustive) or model ids (sampled)
  OptimaMode mode = OptimaMode::Exact;
};

inline constexpr std::size_t kMaxExhaustiveBits = 20;

/// Exhaustive enumeration over all 2^n bit strings; x is a local optimum
/// iff f(x) >= f(y) for each of its n one-bit neighbors (plateaus count).
/// `fitness` receives BitString::from_index(n, i).
template <class FitnessFn>
LocalOptimaResult local_optima_exhaustive(std::size_t n, FitnessFn&& fitness) {
  if (n == 0) throw Error(ErrorCode::Empty, "zero-length bit strings");
  if (n > kMaxExhaustiveBits) {
    throw Error(ErrorCode::SpaceTooLarge, std::to_string(n) + " bits exceeds the limit of 20");
  }
  const std::uint64_t size = std::uint64_t{1} << n;
  std::vector<double> values(size);
  for (std::uint64_t i = 0; i < size; ++i) values[i] = fitness(BitString::from_index(n, i));
  LocalOptimaResult result;
  for (std::uint64_t i = 0; i < size; ++i) {
    bool optimum = true;
    for (std::size_t b = 0; b < n && optimum; ++b) optimum = values[i] >= values[i ^ (std::uint64_t{1} << b)];
    if (optimum) result.ids.push_back(BitString::from_index(n, i).hex());
  }
  result.count = result.ids.size();
  return result;
}

inline LocalOptimaResult local_optima_exhaustive(const NKConfig& cfg) {
  cfg.check();
  if (cfg.n > kMaxExhaustiveBits) {
    throw Error(ErrorCode::SpaceTooLarge, std::to_string(cfg.n) + " bits exceeds the limit of 20");
  }
  return local_optima_exhaustive(cfg.n, [&](const BitString& x) { return nk_fitness(cfg, x); });
}

/// Empirical local optima among the records of (source, budget): x counts
/// when no evaluated one-bit neighbor is strictly fitter. Unevaluated
/// neighbors and records without a genotype impose no constraint.
inline LocalOptimaResult local_optima_sampled(const FitnessTable& table, const std::string& source,
                                              Budget budget) {
  const auto recs = table.select(source, budget);
  if (recs.empty()) {
    throw Error(ErrorCode::Empty, "no records for (" + source + ", " + std::to_string(budget) + ")");
  }
  std::unordered_map<Genotype, double> by_genotype;
  for (const auto* r : recs) {
    if (r->genotype) by_genotype.emplace(*r->genotype, r->fitness_test);
  }
  LocalOptimaResult result;
  result.mode = OptimaMode::Estimate;
  for (const auto* r : recs) {
    bool optimum = true;
    if (r->genotype) {
      for (std::size_t b = 0; b < kGenotypeBits && optimum; ++b) {
        auto it = by_genotype.find(r->genotype->flipped(b));
        if (it != by_genotype.end() && it->second > r->fitness_test) optimum = false;
      }
    }
    if (optimum) result.ids.push_back(r->model_id);
  }
  std::sort(result.ids.begin(), result.ids.end());
  result.count = result.ids.size();
  return result;
}

}  // namespace fla
