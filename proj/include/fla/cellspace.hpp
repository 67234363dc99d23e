#pragma once

// Cell search space: NASBench-style cells (<= 7 nodes, <= 9 edges, three
// operators) and their 289-bit genotype over the operator-expanded
// 17-node graph.
//
// Expanded node index ("slot") of cell position p with operator o:
//   p = 0      -> 0   (IN)
//   p = 1..5   -> 1 + 3*(p-1) + o,  o in {CONV1X1=0, CONV3X3=1, MAXPOOL3X3=2}
//   p = 6      -> 16  (OUT)
// Genotype bit (i, j) = 17*i + j, i.e. the row-major flattening of the
// 17x17 expanded adjacency. A cell with m nodes places its intermediate
// nodes on positions 1..m-2 and its output on position 6.

#include <algorithm>
#include <array>
#include <bitset>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "fla/bits.hpp"
#include "fla/error.hpp"

namespace fla {

inline constexpr int kMaxNodes = 7;
inline constexpr int kMaxEdges = 9;
inline constexpr int kNumOps = 3;
inline constexpr int kPositions = 7;
inline constexpr int kOutPosition = 6;
inline constexpr int kExpandedNodes = 1 + 5 * kNumOps + 1;  // 17
inline constexpr std::size_t kGenotypeBits = kExpandedNodes * kExpandedNodes;  // 289

enum class Op : std::uint8_t { Conv1x1 = 0, Conv3x3 = 1, MaxPool3x3 = 2 };

inline constexpr std::array<Op, kNumOps> kAllOps{Op::Conv1x1, Op::Conv3x3, Op::MaxPool3x3};

constexpr std::string_view op_name(Op op) {
  switch (op) {
    case Op::Conv1x1: return "CONV1X1";
    case Op::Conv3x3: return "CONV3X3";
    case Op::MaxPool3x3: return "MAXPOOL3X3";
  }
  return "?";
}

inline std::optional<Op> parse_op(std::string_view name) {
  for (Op op : kAllOps) {
    if (name == op_name(op)) return op;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Slot map

/// Expanded node index for (cell position, operator). The operator is
/// ignored for IN (position 0) and OUT (position 6).
constexpr int slot_of(int position, Op op) {
  if (position == 0) return 0;
  if (position == kOutPosition) return kExpandedNodes - 1;
  return 1 + kNumOps * (position - 1) + static_cast<int>(op);
}

struct SlotOwner {
  int position;
  Op op;  // Conv1x1 for IN/OUT, where it carries no meaning
  friend bool operator==(const SlotOwner&, const SlotOwner&) = default;
};

constexpr SlotOwner slot_owner(int slot) {
  if (slot == 0) return {0, Op::Conv1x1};
  if (slot == kExpandedNodes - 1) return {kOutPosition, Op::Conv1x1};
  const int k = slot - 1;
  return {1 + k / kNumOps, static_cast<Op>(k % kNumOps)};
}

// ---------------------------------------------------------------------------
// Genotype

class Genotype {
 public:
  Genotype() = default;

  static constexpr std::size_t bit_index(int row, int col) {
    return static_cast<std::size_t>(kExpandedNodes * row + col);
  }

  static Genotype from_hex(std::string_view hex) {
    Genotype g;
    detail::from_hex(hex, g);
    return g;
  }

  static constexpr std::size_t size() noexcept { return kGenotypeBits; }
  bool test(std::size_t i) const { return bits_.test(i); }
  bool edge(int row, int col) const { return bits_.test(bit_index(row, col)); }
  void set(std::size_t i, bool v = true) { bits_.set(i, v); }
  void flip(std::size_t i) { bits_.flip(i); }

  Genotype flipped(std::size_t i) const {
    Genotype g = *this;
    g.flip(i);
    return g;
  }

  std::size_t count() const noexcept { return bits_.count(); }
  std::string hex() const { return detail::to_hex(*this); }
  const std::bitset<kGenotypeBits>& bits() const noexcept { return bits_; }

  friend bool operator==(const Genotype&, const Genotype&) = default;

  /// Lexicographic over bit positions, 0 < 1; identical to comparing hex().
  friend std::strong_ordering operator<=>(const Genotype& a, const Genotype& b) {
    for (std::size_t i = 0; i < kGenotypeBits; ++i) {
      const bool x = a.bits_[i];
      if (x != b.bits_[i]) return x ? std::strong_ordering::greater : std::strong_ordering::less;
    }
    return std::strong_ordering::equal;
  }

 private:
  std::bitset<kGenotypeBits> bits_;
};

// ---------------------------------------------------------------------------
// CellSpec

struct CellSpec {
  int num_nodes = 0;
  std::vector<std::vector<bool>> adjacency;
  std::vector<Op> ops;  // one per intermediate node, in node order

  static CellSpec empty(int n) {
    CellSpec c;
    c.num_nodes = n;
    c.adjacency.assign(static_cast<std::size_t>(std::max(n, 0)),
                       std::vector<bool>(static_cast<std::size_t>(std::max(n, 0)), false));
    c.ops.assign(static_cast<std::size_t>(std::max(n - 2, 0)), Op::Conv1x1);
    return c;
  }

  int edge_count() const {
    int e = 0;
    for (const auto& row : adjacency) e += static_cast<int>(std::count(row.begin(), row.end(), true));
    return e;
  }

  /// Cell position occupied by node i (OUT always sits on position 6).
  int position_of(int node) const { return node == num_nodes - 1 ? kOutPosition : node; }

  int slot_of_node(int node) const {
    if (node == 0 || node == num_nodes - 1) return slot_of(position_of(node), Op::Conv1x1);
    return slot_of(node, ops[static_cast<std::size_t>(node - 1)]);
  }

  friend bool operator==(const CellSpec&, const CellSpec&) = default;
};

enum class ViolationCode {
  TooManyNodes,
  TooFewNodes,
  BadShape,
  TooManyEdges,
  NotUpperTriangular,
  DanglingNode,
  BadOpCount,
};

constexpr std::string_view to_string(ViolationCode code) {
  switch (code) {
    case ViolationCode::TooManyNodes: return "TOO_MANY_NODES";
    case ViolationCode::TooFewNodes: return "TOO_FEW_NODES";
    case ViolationCode::BadShape: return "BAD_SHAPE";
    case ViolationCode::TooManyEdges: return "TOO_MANY_EDGES";
    case ViolationCode::NotUpperTriangular: return "NOT_UPPER_TRIANGULAR";
    case ViolationCode::DanglingNode: return "DANGLING_NODE";
    case ViolationCode::BadOpCount: return "BAD_OP_COUNT";
  }
  return "?";
}

struct Violation {
  ViolationCode code;
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const noexcept { return violations.empty(); }
  bool has(ViolationCode code) const {
    return std::any_of(violations.begin(), violations.end(),
                       [code](const Violation& v) { return v.code == code; });
  }
  std::string summary() const {
    std::string s;
    for (const auto& v : violations) {
      if (!s.empty()) s += "; ";
      s += std::string(to_string(v.code)) + " (" + v.detail + ")";
    }
    return s;
  }
};

/// Checks every CellSpec invariant and lists all violations. Never throws.
///
/// A node must lie on a directed IN->OUT path. This includes intermediate
/// nodes without edges: they would vanish from the genotype, so a cell
/// carrying one cannot round-trip.
inline ValidationReport validate_cell(const CellSpec& cell) {
  ValidationReport report;
  auto add = [&](ViolationCode code, std::string detail) {
    report.violations.push_back({code, std::move(detail)});
  };
  const int n = cell.num_nodes;
  if (n > kMaxNodes) add(ViolationCode::TooManyNodes, std::to_string(n) + " > 7");
  if (n < 2) add(ViolationCode::TooFewNodes, std::to_string(n) + " < 2");
  if (n >= 2 && cell.ops.size() != static_cast<std::size_t>(n - 2)) {
    add(ViolationCode::BadOpCount, std::to_string(cell.ops.size()) + " ops for " +
                                       std::to_string(n) + " nodes");
  }

  bool square = n >= 0 && cell.adjacency.size() == static_cast<std::size_t>(n);
  for (const auto& row : cell.adjacency) square = square && row.size() == cell.adjacency.size();
  if (!square) {
    add(ViolationCode::BadShape, "adjacency is not num_nodes x num_nodes");
    return report;
  }

  const int edges = cell.edge_count();
  if (edges > kMaxEdges) add(ViolationCode::TooManyEdges, std::to_string(edges) + " > 9");

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      if (cell.adjacency[i][j]) {
        add(ViolationCode::NotUpperTriangular,
            "edge " + std::to_string(i) + "->" + std::to_string(j));
      }
    }
  }
  if (n < 2) return report;

  // Only forward edges define paths; backward ones were reported above.
  std::vector<bool> from_in(n, false), to_out(n, false);
  from_in[0] = true;
  for (int j = 1; j < n; ++j) {
    for (int i = 0; i < j && !from_in[j]; ++i) from_in[j] = from_in[i] && cell.adjacency[i][j];
  }
  to_out[n - 1] = true;
  for (int i = n - 2; i >= 0; --i) {
    for (int j = i + 1; j < n && !to_out[i]; ++j) to_out[i] = to_out[j] && cell.adjacency[i][j];
  }
  for (int v = 0; v < n; ++v) {
    if (!(from_in[v] && to_out[v])) {
      add(ViolationCode::DanglingNode, "node " + std::to_string(v) + " is not on an IN->OUT path");
    }
  }
  return report;
}

inline Genotype encode(const CellSpec& cell) {
  const auto report = validate_cell(cell);
  if (!report.ok()) throw Error(ErrorCode::InvalidCell, report.summary());
  Genotype g;
  for (int i = 0; i < cell.num_nodes; ++i) {
    for (int j = i + 1; j < cell.num_nodes; ++j) {
      if (cell.adjacency[i][j]) g.set(Genotype::bit_index(cell.slot_of_node(i), cell.slot_of_node(j)));
    }
  }
  return g;
}

struct DecodeFailure {
  ErrorCode code;  // SlotConflict, NotADag or InvalidStructure
  std::string detail;
};

/// Non-throwing decode. Checks run in a fixed order (slot conflicts, then
/// edge direction, then structure), so each genotype maps to one outcome.
inline std::variant<CellSpec, DecodeFailure> try_decode(const Genotype& g) {
  std::array<int, kPositions> active_op{};
  active_op.fill(-1);
  const auto& bits = g.bits();

  auto mark = [&](SlotOwner owner) -> bool {
    if (owner.position == 0 || owner.position == kOutPosition) return true;
    int& slot = active_op[static_cast<std::size_t>(owner.position)];
    const int op = static_cast<int>(owner.op);
    if (slot >= 0 && slot != op) return false;
    slot = op;
    return true;
  };

  struct PosEdge { int from, to; };
  std::vector<PosEdge> edges;
  for (std::size_t b = 0; b < kGenotypeBits; ++b) {
    if (!bits.test(b)) continue;
    const SlotOwner src = slot_owner(static_cast<int>(b / kExpandedNodes));
    const SlotOwner dst = slot_owner(static_cast<int>(b % kExpandedNodes));
    const bool src_ok = mark(src);
    if (!src_ok || !mark(dst)) {
      const int p = src_ok ? dst.position : src.position;
      return DecodeFailure{ErrorCode::SlotConflict,
                           "position " + std::to_string(p) + " uses more than one operator slot"};
    }
    edges.push_back({src.position, dst.position});
  }

  for (const auto& e : edges) {
    if (e.from >= e.to) {
      return DecodeFailure{ErrorCode::NotADag, "edge between positions " + std::to_string(e.from) +
                                                   " and " + std::to_string(e.to)};
    }
  }

  // Active intermediate positions must be 1..r with no gaps.
  int used = 0;
  for (int p = 1; p < kOutPosition; ++p) {
    if (active_op[static_cast<std::size_t>(p)] < 0) continue;
    if (p != used + 1) {
      return DecodeFailure{ErrorCode::InvalidStructure,
                           "intermediate positions are not contiguous from 1"};
    }
    used = p;
  }

  CellSpec cell = CellSpec::empty(used + 2);
  for (int p = 1; p <= used; ++p) cell.ops[static_cast<std::size_t>(p - 1)] = static_cast<Op>(active_op[static_cast<std::size_t>(p)]);
  auto node_of = [&](int position) { return position == kOutPosition ? cell.num_nodes - 1 : position; };
  for (const auto& e : edges) cell.adjacency[node_of(e.from)][node_of(e.to)] = true;

  const auto report = validate_cell(cell);
  if (!report.ok()) return DecodeFailure{ErrorCode::InvalidStructure, report.summary()};
  return cell;
}

inline CellSpec decode(const Genotype& g) {
  auto result = try_decode(g);
  if (auto* failure = std::get_if<DecodeFailure>(&result)) throw Error(failure->code, failure->detail);
  return std::get<CellSpec>(std::move(result));
}

inline bool decodable(const Genotype& g) { return std::holds_alternative<CellSpec>(try_decode(g)); }

enum class NeighborMode { Raw, Valid };

/// Hamming-1 neighborhood in bit-index order. Raw mode yields all 289
/// flips; Valid mode keeps the ones that decode.
inline std::vector<Genotype> neighbors(const Genotype& g, NeighborMode mode) {
  std::vector<Genotype> out;
  out.reserve(kGenotypeBits);
  for (std::size_t i = 0; i < kGenotypeBits; ++i) {
    Genotype y = g.flipped(i);
    if (mode == NeighborMode::Valid && !decodable(y)) continue;
    out.push_back(y);
  }
  return out;
}

}  // namespace fla

template <>
struct std::hash<fla::Genotype> {
  std::size_t operator()(const fla::Genotype& g) const noexcept {
    return std::hash<std::bitset<fla::kGenotypeBits>>{}(g.bits());
  }
};
