#pragma once

// Seeded cell samplers (Latin hypercube and uniform) over the joint
// edge/operator design, and random walks over a Hamming neighborhood.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fla/cellspace.hpp"
#include "fla/error.hpp"
#include "fla/fitness.hpp"
#include "fla/random.hpp"

namespace fla {

// ---------------------------------------------------------------------------
// Joint design: 21 edge dimensions (pairs i<j of a 7-node cell in
// lexicographic order) followed by 5 operator dimensions (positions 1..5).

inline constexpr std::size_t kEdgeDims = kMaxNodes * (kMaxNodes - 1) / 2;  // 21
inline constexpr std::size_t kOpDims = kMaxNodes - 2;                      // 5
inline constexpr std::size_t kDesignDims = kEdgeDims + kOpDims;            // 26

using DesignRow = std::array<std::uint8_t, kDesignDims>;

constexpr std::size_t design_levels(std::size_t dim) { return dim < kEdgeDims ? 2 : kNumOps; }

/// (i, j) node pair of edge dimension d.
constexpr std::pair<int, int> edge_dim_pair(std::size_t d) {
  int i = 0;
  std::size_t first = 0;
  for (; i < kMaxNodes; ++i) {
    const std::size_t row = static_cast<std::size_t>(kMaxNodes - 1 - i);
    if (d < first + row) break;
    first += row;
  }
  return {i, i + 1 + static_cast<int>(d - first)};
}

/// Removes nodes that are not on an IN->OUT path, keeping node order.
/// Returns the pruned cell, or nullopt when IN and OUT are disconnected.
inline std::optional<CellSpec> prune_cell(const CellSpec& raw) {
  const int n = raw.num_nodes;
  std::vector<bool> from_in(n, false), to_out(n, false);
  from_in[0] = true;
  for (int j = 1; j < n; ++j) {
    for (int i = 0; i < j && !from_in[j]; ++i) from_in[j] = from_in[i] && raw.adjacency[i][j];
  }
  to_out[n - 1] = true;
  for (int i = n - 2; i >= 0; --i) {
    for (int j = i + 1; j < n && !to_out[i]; ++j) to_out[i] = to_out[j] && raw.adjacency[i][j];
  }
  if (!from_in[n - 1]) return std::nullopt;

  std::vector<int> keep;
  for (int v = 0; v < n; ++v) {
    if (from_in[v] && to_out[v]) keep.push_back(v);
  }
  CellSpec cell = CellSpec::empty(static_cast<int>(keep.size()));
  for (std::size_t a = 0; a < keep.size(); ++a) {
    for (std::size_t b = a + 1; b < keep.size(); ++b) cell.adjacency[a][b] = raw.adjacency[keep[a]][keep[b]];
    if (a > 0 && a + 1 < keep.size()) cell.ops[a - 1] = raw.ops[static_cast<std::size_t>(keep[a] - 1)];
  }
  return cell;
}

/// Interprets a design row as a 7-node cell, prunes it, and checks the
/// result. nullopt when the row yields no valid cell.
inline std::optional<CellSpec> design_to_cell(const DesignRow& row) {
  CellSpec raw = CellSpec::empty(kMaxNodes);
  for (std::size_t d = 0; d < kEdgeDims; ++d) {
    const auto [i, j] = edge_dim_pair(d);
    raw.adjacency[i][j] = row[d] != 0;
  }
  for (std::size_t p = 0; p < kOpDims; ++p) raw.ops[p] = static_cast<Op>(row[kEdgeDims + p]);
  auto cell = prune_cell(raw);
  if (!cell || !validate_cell(*cell).ok()) return std::nullopt;
  return cell;
}

inline DesignRow random_design_row(Rng& rng) {
  DesignRow row{};
  for (std::size_t d = 0; d < kDesignDims; ++d) row[d] = static_cast<std::uint8_t>(rng.below(design_levels(d)));
  return row;
}

/// Discrete LHS: per dimension, n strata mapped to levels by equal-width
/// binning (stratum s -> floor(s*L/n)), then randomly permuted.
inline std::vector<DesignRow> lhs_design(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "sample size must be >= 1");
  std::vector<DesignRow> rows(n);
  std::vector<std::uint8_t> column(n);
  for (std::size_t d = 0; d < kDesignDims; ++d) {
    const std::size_t levels = design_levels(d);
    for (std::size_t s = 0; s < n; ++s) column[s] = static_cast<std::uint8_t>(s * levels / n);
    Rng rng(hash_words({seed, 0x6c6873ULL, d}));
    rng.shuffle(std::span<std::uint8_t>(column));
    for (std::size_t r = 0; r < n; ++r) rows[r][d] = column[r];
  }
  return rows;
}

struct SampleResult {
  std::vector<CellSpec> cells;
  std::vector<DesignRow> design;  // pre-rejection design (LHS only)
  std::size_t repaired_rows = 0;  // rows replaced by a re-draw
  std::size_t attempts = 0;       // re-draws performed
};

namespace detail {

inline void exhausted(const char* what, std::size_t n, std::size_t have) {
  throw Error(ErrorCode::Exhausted, std::string(what) + ": " + std::to_string(have) + " of " +
                                        std::to_string(n) + " cells after " + std::to_string(100 * n) +
                                        " re-draws");
}

}  // namespace detail

/// n valid, pairwise-distinct cells. Rows of the LHS design that do not
/// yield a fresh valid cell are re-drawn uniformly with the sub-seed
/// hash(seed, row, attempt); other rows are left untouched.
inline SampleResult lhs_sample_detailed(std::size_t n, std::uint64_t seed) {
  SampleResult result;
  result.design = lhs_design(n, seed);
  std::set<Genotype> seen;
  const std::size_t budget = 100 * n;
  for (std::size_t r = 0; r < n; ++r) {
    DesignRow row = result.design[r];
    bool repaired = false;
    for (std::uint64_t attempt = 1;; ++attempt) {
      if (auto cell = design_to_cell(row); cell && seen.insert(encode(*cell)).second) {
        result.cells.push_back(std::move(*cell));
        break;
      }
      if (result.attempts == budget) detail::exhausted("lhs_sample", n, result.cells.size());
      ++result.attempts;
      repaired = true;
      Rng rng(hash_words({seed, r, attempt}));
      row = random_design_row(rng);
    }
    if (repaired) ++result.repaired_rows;
  }
  return result;
}

inline std::vector<CellSpec> lhs_sample(std::size_t n, std::uint64_t seed) {
  return lhs_sample_detailed(n, seed).cells;
}

/// n valid cells from independent uniform draws over the joint design with
/// rejection. Duplicates are allowed.
inline std::vector<CellSpec> uniform_sample(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "sample size must be >= 1");
  Rng rng(hash_words({seed, 0x756e69ULL}));
  std::vector<CellSpec> cells;
  cells.reserve(n);
  std::size_t rejected = 0;
  while (cells.size() < n) {
    if (auto cell = design_to_cell(random_design_row(rng))) {
      cells.push_back(std::move(*cell));
    } else if (++rejected > 100 * n) {
      detail::exhausted("uniform_sample", n, cells.size());
    }
  }
  return cells;
}

// ---------------------------------------------------------------------------
// Random walks

struct WalkTrace {
  std::vector<Genotype> steps;
  std::vector<double> fitness;
  std::uint64_t seed = 0;
  std::string source_id;
  Budget budget = 0;
};

/// Plain random walk over any point type: each step moves to a neighbor
/// drawn uniformly from neighbors_of(current). Revisits are allowed. The
/// returned fitness list is aligned with the visited points (start first).
template <class Point, class NeighborFn, class FitnessFn>
std::pair<std::vector<Point>, std::vector<double>> walk(Point start, std::size_t n_steps, std::uint64_t seed,
                                                        NeighborFn&& neighbors_of, FitnessFn&& fitness_of) {
  Rng rng(hash_words({seed, 0x77616c6bULL}));
  std::vector<Point> points;
  std::vector<double> values;
  points.reserve(n_steps + 1);
  values.reserve(n_steps + 1);
  auto visit = [&](Point p) {
    const double f = fitness_of(p);
    if (!std::isfinite(f)) throw Error(ErrorCode::InvalidArgument, "non-finite fitness on walk");
    values.push_back(f);
    points.push_back(std::move(p));
  };
  visit(std::move(start));
  for (std::size_t t = 0; t < n_steps; ++t) {
    auto candidates = neighbors_of(points.back());
    if (candidates.empty()) {
      throw Error(ErrorCode::DeadEnd, "no valid neighbor at step " + std::to_string(t));
    }
    visit(std::move(candidates[static_cast<std::size_t>(rng.below(candidates.size()))]));
  }
  return {std::move(points), std::move(values)};
}

/// Random walk over decodable genotypes (Valid neighborhood), evaluating
/// every visited genotype with `source` at `budget`.
inline WalkTrace random_walk(const Genotype& start, std::size_t n_steps, std::uint64_t seed,
                             const FitnessSource& source, Budget budget) {
  if (auto r = try_decode(start); std::holds_alternative<DecodeFailure>(r)) {
    const auto& f = std::get<DecodeFailure>(r);
    throw Error(f.code, "walk start " + start.hex() + ": " + f.detail);
  }
  auto [points, values] = walk(
      start, n_steps, seed, [](const Genotype& g) { return neighbors(g, NeighborMode::Valid); },
      [&](const Genotype& g) { return source.evaluate(g, budget); });
  WalkTrace trace;
  trace.steps = std::move(points);
  trace.fitness = std::move(values);
  trace.seed = seed;
  trace.source_id = source.name();
  trace.budget = budget;
  return trace;
}

}  // namespace fla
