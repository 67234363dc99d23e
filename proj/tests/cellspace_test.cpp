#include <gtest/gtest.h>

#include <set>

#include "fla/cellspace.hpp"
#include "fla/random.hpp"
#include "fla/sampling.hpp"
#include "oracles.hpp"

using namespace fla;

namespace {

CellSpec chain(std::vector<Op> ops) {
  CellSpec c = CellSpec::empty(static_cast<int>(ops.size()) + 2);
  c.ops = ops;
  for (int i = 0; i + 1 < c.num_nodes; ++i) c.adjacency[i][i + 1] = true;
  return c;
}

CellSpec in_out() {
  CellSpec c = CellSpec::empty(2);
  c.adjacency[0][1] = true;
  return c;
}

Genotype random_genotype(Rng& rng, double density) {
  Genotype g;
  for (std::size_t i = 0; i < kGenotypeBits; ++i) {
    if (rng.uniform() < density) g.set(i);
  }
  return g;
}

}  // namespace

TEST(SlotMap, MatchesEnumeratedOrder) {
  std::set<int> seen;
  for (int p = 0; p < kPositions; ++p) {
    for (Op op : kAllOps) {
      const int s = slot_of(p, op);
      EXPECT_EQ(s, oracle::slot(p, static_cast<int>(op)));
      if (p == 0 || p == kOutPosition) continue;
      seen.insert(s);
      EXPECT_EQ(slot_owner(s).position, p);
      EXPECT_EQ(slot_owner(s).op, op);
    }
  }
  seen.insert(slot_of(0, Op::Conv1x1));
  seen.insert(slot_of(kOutPosition, Op::Conv1x1));
  EXPECT_EQ(seen.size(), 17u);
  EXPECT_EQ(*seen.begin(), 0);
  EXPECT_EQ(*seen.rbegin(), 16);
}

TEST(Validate, SevenNodeNineEdgesIsValid) {
  CellSpec c = CellSpec::empty(7);
  c.ops.assign(5, Op::Conv3x3);
  for (int i = 0; i < 6; ++i) c.adjacency[i][i + 1] = true;  // 6 edges
  c.adjacency[0][6] = true;
  c.adjacency[0][2] = true;
  c.adjacency[1][3] = true;
  ASSERT_EQ(c.edge_count(), 9);
  EXPECT_TRUE(validate_cell(c).ok()) << validate_cell(c).summary();
}

TEST(Validate, MinimalCellIsValid) { EXPECT_TRUE(validate_cell(in_out()).ok()); }

TEST(Validate, TenEdgesReported) {
  CellSpec c = CellSpec::empty(7);
  c.ops.assign(5, Op::Conv1x1);
  int added = 0;
  for (int i = 0; i < 7 && added < 10; ++i) {
    for (int j = i + 1; j < 7 && added < 10; ++j, ++added) c.adjacency[i][j] = true;
  }
  EXPECT_TRUE(validate_cell(c).has(ViolationCode::TooManyEdges));
}

TEST(Validate, ReportsEachViolationKind) {
  CellSpec big = CellSpec::empty(8);
  EXPECT_TRUE(validate_cell(big).has(ViolationCode::TooManyNodes));

  CellSpec lower = in_out();
  lower.adjacency[1][0] = true;
  EXPECT_TRUE(validate_cell(lower).has(ViolationCode::NotUpperTriangular));

  CellSpec dangling = chain({Op::Conv1x1});
  dangling.adjacency[1][2] = false;
  dangling.adjacency[0][2] = true;
  EXPECT_TRUE(validate_cell(dangling).has(ViolationCode::DanglingNode));

  CellSpec ops = chain({Op::Conv1x1});
  ops.ops.clear();
  EXPECT_TRUE(validate_cell(ops).has(ViolationCode::BadOpCount));

  CellSpec shape = in_out();
  shape.adjacency.pop_back();
  EXPECT_TRUE(validate_cell(shape).has(ViolationCode::BadShape));
}

TEST(Encode, InOutSetsBit16) {
  const Genotype g = encode(in_out());
  EXPECT_EQ(g.count(), 1u);
  EXPECT_TRUE(g.test(16));
}

TEST(Encode, ThreeNodeConv3x3) {
  const Genotype g = encode(chain({Op::Conv3x3}));
  EXPECT_EQ(g.count(), 2u);
  EXPECT_TRUE(g.test(17 * 0 + 2));
  EXPECT_TRUE(g.test(17 * 2 + 16));
}

TEST(Encode, RejectsInvalidCell) {
  CellSpec c = CellSpec::empty(3);
  EXPECT_THROW(
      {
        try {
          encode(c);
        } catch (const Error& e) {
          EXPECT_EQ(e.code(), ErrorCode::InvalidCell);
          throw;
        }
      },
      Error);
}

TEST(Encode, MatchesOracleOnSampledCells) {
  for (const auto& c : lhs_sample(200, 3)) {
    const Genotype g = encode(c);
    EXPECT_EQ(oracle::bits_of(g), oracle::genotype_bits(c));
    EXPECT_EQ(static_cast<int>(g.count()), c.edge_count());
    for (int i = 0; i < kExpandedNodes; ++i) EXPECT_FALSE(g.edge(i, i));
  }
}

TEST(Decode, RoundTripOnLhsCells) {
  const auto cells = lhs_sample(1000, 2024);
  ASSERT_EQ(cells.size(), 1000u);
  for (const auto& c : cells) {
    const Genotype g = encode(c);
    EXPECT_LE(g.count(), 9u);
    EXPECT_EQ(decode(g), c);
  }
}

TEST(Decode, SlotConflict) {
  Genotype g;
  g.set(Genotype::bit_index(0, 2));  // position 1, CONV3X3
  g.set(Genotype::bit_index(0, 3));  // position 1, MAXPOOL3X3
  ASSERT_EQ(oracle::owner(2).first, oracle::owner(3).first);
  try {
    decode(g);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SlotConflict);
  }
}

TEST(Decode, BackwardEdgeIsNotADag) {
  Genotype g;
  g.set(Genotype::bit_index(16, 0));
  try {
    decode(g);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotADag);
  }
}

TEST(Decode, AllZerosIsInvalidStructure) {
  try {
    decode(Genotype{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidStructure);
  }
}

TEST(Decode, GapInPositionsIsInvalidStructure) {
  Genotype g;
  g.set(Genotype::bit_index(0, slot_of(2, Op::Conv1x1)));
  g.set(Genotype::bit_index(slot_of(2, Op::Conv1x1), 16));
  const auto r = try_decode(g);
  ASSERT_TRUE(std::holds_alternative<DecodeFailure>(r));
  EXPECT_EQ(std::get<DecodeFailure>(r).code, ErrorCode::InvalidStructure);
}

TEST(Decode, FuzzIsTotalAndAgreesWithOracle) {
  Rng rng(99);
  std::size_t ok = 0;
  for (int i = 0; i < 10000; ++i) {
    // Mix dense noise with sparse vectors near the valid region.
    const Genotype g = random_genotype(rng, i % 2 ? 0.5 : 0.01);
    const auto r = try_decode(g);
    const auto expected = oracle::decode(oracle::bits_of(g));
    if (std::holds_alternative<CellSpec>(r)) {
      ++ok;
      ASSERT_TRUE(expected.has_value()) << g.hex();
      EXPECT_EQ(std::get<CellSpec>(r), *expected);
    } else {
      EXPECT_FALSE(expected.has_value()) << g.hex();
      const auto code = std::get<DecodeFailure>(r).code;
      EXPECT_TRUE(code == ErrorCode::SlotConflict || code == ErrorCode::NotADag ||
                  code == ErrorCode::InvalidStructure);
    }
  }
  SUCCEED() << ok << " decodable";
}

TEST(Hamming, Basics) {
  Genotype a, b;
  for (std::size_t i : {4u, 16u, 200u}) b.set(i);
  EXPECT_EQ(hamming(a, a), 0u);
  EXPECT_EQ(hamming(a, b), 3u);
  EXPECT_EQ(hamming(b, a), 3u);
}

TEST(Hamming, SymmetryAndTriangle) {
  Rng rng(5);
  for (int t = 0; t < 200; ++t) {
    const auto x = random_genotype(rng, 0.3), y = random_genotype(rng, 0.3), z = random_genotype(rng, 0.3);
    EXPECT_EQ(hamming(x, y), hamming(y, x));
    EXPECT_LE(hamming(x, z), hamming(x, y) + hamming(y, z));
  }
}

TEST(Hamming, LengthMismatch) {
  try {
    hamming(BitString(3), BitString(4));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::LengthMismatch);
  }
}

TEST(Neighbors, RawHas289DistinctFlips) {
  const Genotype g = encode(chain({Op::MaxPool3x3, Op::Conv1x1}));
  const auto raw = neighbors(g, NeighborMode::Raw);
  EXPECT_EQ(raw.size(), 289u);
  EXPECT_EQ(std::set<Genotype>(raw.begin(), raw.end()).size(), 289u);
  for (const auto& y : raw) {
    EXPECT_EQ(hamming(g, y), 1u);
    const auto back = neighbors(y, NeighborMode::Raw);
    EXPECT_NE(std::find(back.begin(), back.end(), g), back.end());
  }
}

TEST(Neighbors, ValidMatchesBruteForceOracle) {
  std::vector<Genotype> starts{encode(in_out())};
  for (const auto& c : lhs_sample(30, 8)) starts.push_back(encode(c));
  for (const auto& g : starts) {
    const auto valid = neighbors(g, NeighborMode::Valid);
    std::vector<oracle::Bits> got;
    for (const auto& y : valid) {
      EXPECT_EQ(hamming(g, y), 1u);
      EXPECT_TRUE(decodable(y));
      got.push_back(oracle::bits_of(y));
    }
    EXPECT_EQ(got, oracle::valid_flips(oracle::bits_of(g)));
  }
}

TEST(Neighbors, InOutCellHasNoValidNeighbor) {
  EXPECT_TRUE(neighbors(encode(in_out()), NeighborMode::Valid).empty());
}

TEST(Genotype, HexRoundTripAndPadding) {
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const auto g = random_genotype(rng, 0.2);
    const auto hex = g.hex();
    ASSERT_EQ(hex.size(), 74u);
    EXPECT_EQ(Genotype::from_hex(hex), g);
  }
  EXPECT_EQ(encode(in_out()).hex().substr(0, 6), "000080");
  std::string bad(74, '0');
  bad.back() = '1';  // padding bit
  EXPECT_THROW(Genotype::from_hex(bad), Error);
  EXPECT_THROW(Genotype::from_hex("00"), Error);
  EXPECT_THROW(Genotype::from_hex(std::string(74, 'g')), Error);
}
