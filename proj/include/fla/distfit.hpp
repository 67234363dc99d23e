#pragma once

// Maximum-likelihood fitting of fitness distributions (Beta, Weibull,
// Log-normal) and model selection by AIC.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include "fla/error.hpp"

namespace fla {

enum class Family { Beta = 0, Weibull = 1, LogNormal = 2 };

inline constexpr std::array<Family, 3> kAllFamilies{Family::Beta, Family::Weibull, Family::LogNormal};

constexpr std::string_view to_string(Family f) {
  switch (f) {
    case Family::Beta: return "BETA";
    case Family::Weibull: return "WEIBULL";
    case Family::LogNormal: return "LOGNORMAL";
  }
  return "?";
}

inline std::optional<Family> parse_family(std::string_view s) {
  for (Family f : kAllFamilies) {
    if (s == to_string(f)) return f;
  }
  return std::nullopt;
}

/// Names of the two parameters, in storage order.
constexpr std::array<std::string_view, 2> param_names(Family f) {
  switch (f) {
    case Family::Beta: return {"alpha", "beta"};
    case Family::Weibull: return {"shape", "scale"};
    case Family::LogNormal: return {"log_mean", "log_sd"};
  }
  return {"", ""};
}

inline constexpr double kClampEpsilon = 1e-6;

/// A family together with its two parameters:
///   BETA(alpha, beta) on (0,1), WEIBULL(shape, scale) and
///   LOGNORMAL(log_mean, log_sd) on (0, inf).
struct Distribution {
  Family family = Family::Beta;
  double a = 1.0;
  double b = 1.0;

  void check() const {
    const bool ok = family == Family::LogNormal ? (std::isfinite(a) && b > 0 && std::isfinite(b))
                                                : (a > 0 && b > 0 && std::isfinite(a) && std::isfinite(b));
    if (!ok) throw Error(ErrorCode::InvalidArgument, std::string(to_string(family)) + ": invalid parameters");
  }

  double log_pdf(double x) const {
    constexpr double ninf = -std::numeric_limits<double>::infinity();
    switch (family) {
      case Family::Beta:
        if (x <= 0.0 || x >= 1.0) return ninf;
        return std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + (a - 1) * std::log(x) +
               (b - 1) * std::log1p(-x);
      case Family::Weibull:
        if (x <= 0.0) return ninf;
        return std::log(a) - std::log(b) + (a - 1) * std::log(x / b) - std::pow(x / b, a);
      case Family::LogNormal: {
        if (x <= 0.0) return ninf;
        const double z = (std::log(x) - a) / b;
        return -std::log(x) - std::log(b) - 0.5 * std::log(2 * std::numbers::pi) - 0.5 * z * z;
      }
    }
    return ninf;
  }

  double pdf(double x) const { return std::exp(log_pdf(x)); }

  double cdf(double x) const {
    switch (family) {
      case Family::Beta:
        if (x <= 0.0) return 0.0;
        if (x >= 1.0) return 1.0;
        return boost::math::ibeta(a, b, x);
      case Family::Weibull:
        if (x <= 0.0) return 0.0;
        return -std::expm1(-std::pow(x / b, a));
      case Family::LogNormal:
        if (x <= 0.0) return 0.0;
        return 0.5 * std::erfc(-(std::log(x) - a) / (b * std::numbers::sqrt2));
    }
    return 0.0;
  }

  /// Inverse cdf for p in (0,1). Beta goes through numeric inversion of
  /// the regularized incomplete beta function.
  double quantile(double p) const {
    if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::InvalidArgument, "quantile needs p in (0,1)");
    switch (family) {
      case Family::Beta: return boost::math::ibeta_inv(a, b, p);
      case Family::Weibull: return b * std::pow(-std::log1p(-p), 1.0 / a);
      case Family::LogNormal:
        return std::exp(a - b * std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p));
    }
    return 0.0;
  }

  double log_likelihood(std::span<const double> xs) const {
    double l = 0.0;
    for (double x : xs) l += log_pdf(x);
    return l;
  }
};

inline double eval_cdf(const Distribution& d, double x) {
  d.check();
  return d.cdf(x);
}

struct InformationCriteria {
  double aic;
  double bic;
};

inline InformationCriteria information_criteria(double loglik, std::size_t k, std::size_t n) {
  if (n < 1 || k < 1) throw Error(ErrorCode::InvalidArgument, "information_criteria needs n, k >= 1");
  const double kk = static_cast<double>(k);
  return {2.0 * kk - 2.0 * loglik, kk * std::log(static_cast<double>(n)) - 2.0 * loglik};
}

inline constexpr std::size_t kFamilyParams = 2;
inline constexpr std::size_t kMinFitSamples = 8;
inline constexpr int kMaxFitIterations = 500;
inline constexpr double kLoglikTolerance = 1e-9;

struct FitResult {
  Distribution dist;
  double loglik = 0.0;
  double aic = 0.0;
  double bic = 0.0;
  std::size_t n = 0;
  bool converged = false;
  int iterations = 0;
};

/// Applies the boundary clamp used before fitting: [eps, 1-eps] for Beta,
/// [eps, inf) for the positive families.
inline std::vector<double> prepare_samples(std::span<const double> xs, Family family) {
  std::vector<double> out(xs.begin(), xs.end());
  for (double& x : out) {
    if (!std::isfinite(x)) throw Error(ErrorCode::InvalidArgument, "non-finite sample");
    x = family == Family::Beta ? std::clamp(x, kClampEpsilon, 1.0 - kClampEpsilon) : std::max(x, kClampEpsilon);
  }
  return out;
}

namespace detail {

struct Objective {
  double value;
  std::array<double, 2> grad;                 // w.r.t. unconstrained coordinates
  std::array<std::array<double, 2>, 2> hess;  // idem
};

// Unconstrained coordinates: Beta (ln alpha, ln beta), Weibull (ln shape,
// ln scale), Log-normal (log_mean, ln log_sd).
inline Distribution from_coords(Family f, std::array<double, 2> t) {
  if (f == Family::LogNormal) return {f, t[0], std::exp(t[1])};
  return {f, std::exp(t[0]), std::exp(t[1])};
}

inline std::array<double, 2> to_coords(const Distribution& d) {
  if (d.family == Family::LogNormal) return {d.a, std::log(d.b)};
  return {std::log(d.a), std::log(d.b)};
}

// Log-likelihood, gradient and Hessian in natural parameters, then mapped
// to the unconstrained coordinates by the chain rule.
inline Objective evaluate(const Distribution& d, std::span<const double> xs) {
  const double n = static_cast<double>(xs.size());
  double l = 0, ga = 0, gb = 0, haa = 0, hab = 0, hbb = 0;
  switch (d.family) {
    case Family::Beta: {
      double s1 = 0, s2 = 0;
      for (double x : xs) {
        s1 += std::log(x);
        s2 += std::log1p(-x);
      }
      const double a = d.a, b = d.b;
      l = n * (std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b)) + (a - 1) * s1 + (b - 1) * s2;
      const double psi_ab = boost::math::digamma(a + b);
      const double tri_ab = boost::math::trigamma(a + b);
      ga = n * (psi_ab - boost::math::digamma(a)) + s1;
      gb = n * (psi_ab - boost::math::digamma(b)) + s2;
      haa = n * (tri_ab - boost::math::trigamma(a));
      hab = n * tri_ab;
      hbb = n * (tri_ab - boost::math::trigamma(b));
      break;
    }
    case Family::Weibull: {
      const double k = d.a, lam = d.b;
      double sum_l = 0, sum_z = 0, sum_zl = 0, sum_zl2 = 0, sum_zkl1 = 0;
      for (double x : xs) {
        const double lx = std::log(x) - std::log(lam);
        const double z = std::exp(k * lx);
        sum_l += lx;
        sum_z += z;
        sum_zl += z * lx;
        sum_zl2 += z * lx * lx;
        sum_zkl1 += z * (k * lx + 1.0);
      }
      l = n * std::log(k) - n * std::log(lam) + (k - 1) * sum_l - sum_z;
      ga = n / k + sum_l - sum_zl;
      gb = (k / lam) * (sum_z - n);
      haa = -n / (k * k) - sum_zl2;
      hab = -n / lam + sum_zkl1 / lam;
      hbb = -(k / (lam * lam)) * (sum_z - n) - (k * k / (lam * lam)) * sum_z;
      break;
    }
    case Family::LogNormal: {
      const double mu = d.a, s = d.b;
      double sum_ln = 0, sum_r = 0, sum_r2 = 0;
      for (double x : xs) {
        const double y = std::log(x);
        sum_ln += y;
        sum_r += y - mu;
        sum_r2 += (y - mu) * (y - mu);
      }
      l = -sum_ln - n * std::log(s) - 0.5 * n * std::log(2 * std::numbers::pi) - sum_r2 / (2 * s * s);
      ga = sum_r / (s * s);
      gb = -n / s + sum_r2 / (s * s * s);
      haa = -n / (s * s);
      hab = -2.0 * sum_r / (s * s * s);
      hbb = n / (s * s) - 3.0 * sum_r2 / (s * s * s * s);
      break;
    }
  }
  Objective o{l, {}, {}};
  if (d.family == Family::LogNormal) {
    const double s = d.b;
    o.grad = {ga, s * gb};
    o.hess = {{{haa, s * hab}, {s * hab, s * s * hbb + s * gb}}};
  } else {
    const double a = d.a, b = d.b;
    o.grad = {a * ga, b * gb};
    o.hess = {{{a * a * haa + a * ga, a * b * hab}, {a * b * hab, b * b * hbb + b * gb}}};
  }
  return o;
}

inline Distribution initial_guess(Family f, std::span<const double> xs) {
  const double n = static_cast<double>(xs.size());
  double m = 0, lm = 0;
  for (double x : xs) {
    m += x;
    lm += std::log(x);
  }
  m /= n;
  lm /= n;
  double v = 0, lv = 0;
  for (double x : xs) {
    v += (x - m) * (x - m);
    lv += (std::log(x) - lm) * (std::log(x) - lm);
  }
  v /= n;
  lv /= n;
  switch (f) {
    case Family::Beta: {
      const double common = m * (1 - m) / v - 1;
      if (!(common > 0) || !std::isfinite(common)) return {f, 1.0, 1.0};
      return {f, m * common, (1 - m) * common};
    }
    case Family::Weibull: {
      // Log of a Weibull variate is Gumbel with sd pi / (sqrt(6) * shape).
      const double k = std::numbers::pi / (std::sqrt(6.0 * lv));
      return {f, k, std::exp(lm + std::numbers::egamma / k)};
    }
    case Family::LogNormal: {
      // Moment matching on the raw scale; deliberately not the MLE.
      const double s2 = std::log1p(v / (m * m));
      return {f, std::log(m) - 0.5 * s2, std::sqrt(s2)};
    }
  }
  return {f, 1.0, 1.0};
}

}  // namespace detail

/// Newton ascent on the log-likelihood in unconstrained coordinates with
/// step halving. Converged when an accepted step changes the
/// log-likelihood by less than 1e-9 and the gradient has vanished.
inline FitResult fit_mle(std::span<const double> samples, Family family) {
  if (samples.size() < kMinFitSamples) {
    throw Error(ErrorCode::TooFewSamples, std::to_string(samples.size()) + " < 8 samples");
  }
  const std::vector<double> xs = prepare_samples(samples, family);
  if (std::all_of(xs.begin(), xs.end(), [&](double x) { return x == xs.front(); })) {
    throw Error(ErrorCode::Degenerate, "all samples are equal");
  }

  Distribution dist = detail::initial_guess(family, xs);
  auto theta = detail::to_coords(dist);
  auto obj = detail::evaluate(dist, xs);
  const double grad_tol = 1e-6 * std::max(1.0, static_cast<double>(xs.size()));

  FitResult result;
  result.n = xs.size();
  int it = 0;
  for (; it < kMaxFitIterations; ++it) {
    const auto& g = obj.grad;
    const auto& h = obj.hess;
    std::array<double, 2> step;
    const double det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
    if (h[0][0] < 0 && det > 0) {
      step = {-(h[1][1] * g[0] - h[0][1] * g[1]) / det, -(-h[1][0] * g[0] + h[0][0] * g[1]) / det};
    } else {
      // Not locally concave: steepest ascent scaled to a unit move.
      const double norm = std::hypot(g[0], g[1]);
      if (norm == 0.0) break;
      step = {g[0] / norm, g[1] / norm};
    }

    bool accepted = false;
    double t = 1.0;
    for (int halving = 0; halving < 60; ++halving, t *= 0.5) {
      const std::array<double, 2> cand{theta[0] + t * step[0], theta[1] + t * step[1]};
      const Distribution d = detail::from_coords(family, cand);
      if (!(d.a > 0 || family == Family::LogNormal) || !(d.b > 0) || !std::isfinite(d.a) || !std::isfinite(d.b)) {
        continue;
      }
      const auto next = detail::evaluate(d, xs);
      if (std::isfinite(next.value) && next.value >= obj.value) {
        const double delta = next.value - obj.value;
        theta = cand;
        dist = d;
        obj = next;
        accepted = true;
        if (delta < kLoglikTolerance &&
            std::max(std::abs(obj.grad[0]), std::abs(obj.grad[1])) <= grad_tol) {
          result.converged = true;
        }
        break;
      }
    }
    if (!accepted || result.converged) {
      ++it;
      break;
    }
  }
  if (!result.converged && std::max(std::abs(obj.grad[0]), std::abs(obj.grad[1])) <= grad_tol * 1e-3) {
    // Started (or stalled) exactly at a stationary point.
    result.converged = true;
  }

  result.dist = dist;
  result.iterations = it;
  result.loglik = obj.value;
  const auto ic = information_criteria(result.loglik, kFamilyParams, result.n);
  result.aic = ic.aic;
  result.bic = ic.bic;
  return result;
}

/// Closed-form Log-normal MLE: mean and population sd of ln x.
inline Distribution lognormal_closed_form(std::span<const double> samples) {
  const auto xs = prepare_samples(samples, Family::LogNormal);
  double m = 0;
  for (double x : xs) m += std::log(x);
  m /= static_cast<double>(xs.size());
  double v = 0;
  for (double x : xs) v += (std::log(x) - m) * (std::log(x) - m);
  return {Family::LogNormal, m, std::sqrt(v / static_cast<double>(xs.size()))};
}

/// Lowest AIC among converged fits; ties go to the higher log-likelihood,
/// then to the family order BETA < WEIBULL < LOGNORMAL.
inline FitResult select_best(std::span<const FitResult> fits) {
  const FitResult* best = nullptr;
  for (const auto& f : fits) {
    if (!f.converged) continue;
    if (!best || f.aic < best->aic ||
        (f.aic == best->aic && (f.loglik > best->loglik ||
                                (f.loglik == best->loglik && f.dist.family < best->dist.family)))) {
      best = &f;
    }
  }
  if (!best) throw Error(ErrorCode::NoConvergedFit, "none of the fits converged");
  return *best;
}

/// Fits all three families; failures of individual families propagate.
inline std::vector<FitResult> fit_all(std::span<const double> samples) {
  std::vector<FitResult> fits;
  for (Family f : kAllFamilies) fits.push_back(fit_mle(samples, f));
  return fits;
}

}  // namespace fla
