#include <gtest/gtest.h>

#include <set>

#include "fla/persistence.hpp"
#include "fla/random.hpp"

using namespace fla;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::IoError;
}

std::string id(int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "m%03d", i);
  return buf;
}

// Model i has fitness f_ref(i) at budget 4 and f_b(i) at budget 36.
FitnessTable two_budget(int n, auto f_ref, auto f_b) {
  FitnessTable t;
  for (int i = 0; i < n; ++i) {
    t.insert({id(i), std::nullopt, "s", 4, f_ref(i), std::nullopt, 0});
    t.insert({id(i), std::nullopt, "s", 36, f_b(i), std::nullopt, 0});
  }
  return t;
}

// Eight models; a and b lead at 4 epochs, a and c at 36 epochs.
FitnessTable hand_fixture() {
  const std::vector<std::pair<std::string, std::pair<double, double>>> rows{
      {"a", {0.90, 0.95}}, {"b", {0.85, 0.40}}, {"c", {0.50, 0.90}}, {"d", {0.45, 0.60}},
      {"e", {0.40, 0.55}}, {"f", {0.35, 0.50}}, {"g", {0.30, 0.45}}, {"h", {0.25, 0.30}}};
  FitnessTable t;
  for (const auto& [m, f] : rows) {
    t.insert({m, std::nullopt, "s", 4, f.first, std::nullopt, 0});
    t.insert({m, std::nullopt, "s", 36, f.second, std::nullopt, 0});
  }
  return t;
}

}  // namespace

TEST(RankSet, SizeAndTieBreak) {
  const auto t = two_budget(4, [](int i) { return 0.1 * i; }, [](int) { return 0.5; });
  const auto top = rank_set(t, "s", 4, 25, Direction::Top);
  EXPECT_EQ(top.member_ids, std::vector<std::string>{id(3)});
  EXPECT_EQ(top.population, 4u);

  const auto tied = rank_set(t, "s", 36, 50, Direction::Top);
  EXPECT_EQ(tied.member_ids, (std::vector<std::string>{id(0), id(1)}));
  EXPECT_EQ(rank_set(t, "s", 36, 50, Direction::Bottom).member_ids, (std::vector<std::string>{id(0), id(1)}));
}

TEST(RankSet, MatchesSortOracle) {
  Rng rng(4);
  std::vector<double> f(100);
  for (auto& x : f) x = rng.uniform();
  const auto t = two_budget(100, [&](int i) { return f[i]; }, [&](int i) { return f[i]; });
  std::vector<int> order(100);
  for (int i = 0; i < 100; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) { return f[a] > f[b]; });
  std::set<std::string> expected;
  for (int i = 0; i < 25; ++i) expected.insert(id(order[i]));
  const auto got = rank_set(t, "s", 4, 25, Direction::Top).member_ids;
  EXPECT_EQ(got.size(), 25u);
  EXPECT_EQ(std::set<std::string>(got.begin(), got.end()), expected);
}

TEST(RankSet, SizeIsCeilingRobustToRounding) {
  EXPECT_EQ(rank_set_size(25, 4), 1u);
  EXPECT_EQ(rank_set_size(25, 100), 25u);
  EXPECT_EQ(rank_set_size(7, 100), 7u);   // 0.07 * 100 is not exact in binary
  EXPECT_EQ(rank_set_size(10, 88), 9u);
  EXPECT_EQ(rank_set_size(1, 75), 1u);
  EXPECT_EQ(rank_set_size(100, 75), 75u);
  EXPECT_EQ(code_of([] { rank_set_size(0, 10); }), ErrorCode::InvalidArgument);
}

TEST(RankSet, MonotoneContainment) {
  Rng rng(9);
  FitnessTable t;
  for (int i = 0; i < 60; ++i) t.insert({id(i), std::nullopt, "s", 4, std::floor(rng.uniform() * 10) / 10, std::nullopt, 0});
  for (Direction d : {Direction::Top, Direction::Bottom}) {
    std::set<std::string> prev;
    for (double n = 1; n <= 100; n += 3) {
      const auto ids = rank_set(t, "s", 4, n, d).member_ids;
      const std::set<std::string> cur(ids.begin(), ids.end());
      EXPECT_TRUE(std::includes(cur.begin(), cur.end(), prev.begin(), prev.end()));
      prev = cur;
    }
  }
}

TEST(RankSet, IntersectionPopulation) {
  FitnessTable t;
  t.insert({"a", std::nullopt, "s", 4, 0.1, std::nullopt, 0});
  t.insert({"a", std::nullopt, "s", 12, 0.2, std::nullopt, 0});
  t.insert({"b", std::nullopt, "s", 4, 0.9, std::nullopt, 0});
  const std::vector<Budget> budgets{4, 12};
  const auto snap = rank_set(t, "s", 4, 100, Direction::Top, budgets);
  EXPECT_EQ(snap.member_ids, std::vector<std::string>{"a"});
  EXPECT_EQ(code_of([&] { rank_set(t, "other", 4, 50, Direction::Top); }), ErrorCode::EmptyPopulation);
}

TEST(Persistence, IdenticalRankingsAreFull) {
  const auto t = two_budget(40, [](int i) { return i / 40.0; }, [](int i) { return 0.5 + i / 100.0; });
  for (Direction d : {Direction::Top, Direction::Bottom}) {
    for (double n = 1; n <= 100; n += 1) EXPECT_EQ(persistence(t, "s", n, 4, 36, d), 100.0);
    EXPECT_DOUBLE_EQ(persistence_auc(t, "s", 4, 36, d), 1.0);
  }
}

TEST(Persistence, ReversedRankingsAreEmptyAtHalf) {
  const auto t = two_budget(40, [](int i) { return i / 40.0; }, [](int i) { return 1.0 - i / 40.0; });
  EXPECT_EQ(persistence(t, "s", 50, 4, 36, Direction::Top), 0.0);
  EXPECT_EQ(persistence(t, "s", 50, 4, 36, Direction::Bottom), 0.0);
  EXPECT_EQ(persistence_auc(t, "s", 4, 36, Direction::Top), 0.0);
}

TEST(Persistence, HandFixture) {
  const auto t = hand_fixture();
  EXPECT_EQ(rank_set(t, "s", 4, 25, Direction::Top).member_ids, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(rank_set(t, "s", 36, 25, Direction::Top).member_ids, (std::vector<std::string>{"a", "c"}));
  EXPECT_EQ(persistence(t, "s", 25, 4, 36, Direction::Top), 50.0);
}

TEST(Persistence, SameBudgetIsFull) {
  const auto t = hand_fixture();
  for (double n : {1.0, 12.5, 25.0, 60.0, 100.0}) EXPECT_EQ(persistence(t, "s", n, 36, 36, Direction::Bottom), 100.0);
}

TEST(Persistence, TopOnNegatedIsBottom) {
  Rng rng(10);
  std::vector<double> a(30), b(30);
  for (int i = 0; i < 30; ++i) {
    a[i] = rng.uniform();
    b[i] = rng.uniform();
  }
  const auto t = two_budget(30, [&](int i) { return a[i]; }, [&](int i) { return b[i]; });
  const auto neg = two_budget(30, [&](int i) { return -a[i]; }, [&](int i) { return -b[i]; });
  for (double n : {5.0, 10.0, 25.0, 50.0}) {
    EXPECT_EQ(persistence(t, "s", n, 4, 36, Direction::Top), persistence(neg, "s", n, 4, 36, Direction::Bottom));
  }
}

TEST(Persistence, AucInvariantUnderRelabeling) {
  Rng rng(11);
  std::vector<double> a(50), b(50);
  for (int i = 0; i < 50; ++i) {
    a[i] = rng.uniform();
    b[i] = a[i] + 0.3 * rng.uniform();
  }
  const auto t = two_budget(50, [&](int i) { return a[i]; }, [&](int i) { return b[i]; });
  const auto r = two_budget(50, [&](int i) { return a[49 - i]; }, [&](int i) { return b[49 - i]; });
  EXPECT_DOUBLE_EQ(persistence_auc(t, "s", 4, 36, Direction::Top), persistence_auc(r, "s", 4, 36, Direction::Top));
}

TEST(Auc, TrapezoidOfConstantCurves) {
  PersistenceCurve c;
  for (int n = 1; n <= 25; ++n) c.points.emplace_back(n, 26.0);
  EXPECT_NEAR(curve_auc(c), 0.26, 1e-12);
  for (auto& p : c.points) p.second = 0.0;
  EXPECT_EQ(curve_auc(c), 0.0);
  for (auto& p : c.points) p.second = 100.0;
  EXPECT_DOUBLE_EQ(curve_auc(c), 1.0);
  const auto s = summarize(c);
  EXPECT_EQ(s.n_max, 25.0);
  EXPECT_EQ(s.p_at_nmax, 100.0);
}

TEST(Auc, CurveGrid) {
  const auto t = hand_fixture();
  const auto c = persistence_curve(t, "s", 4, 36, Direction::Top, 12.5);
  ASSERT_EQ(c.points.size(), 13u);
  EXPECT_EQ(c.points.front().first, 1.0);
  EXPECT_EQ(c.points[11].first, 12.0);
  EXPECT_EQ(c.points.back().first, 12.5);
  const auto full = persistence_curve(t, "s", 4, 36, Direction::Top, 100);
  EXPECT_EQ(full.points.back().second, 100.0);
  EXPECT_EQ(code_of([&] { persistence_curve(t, "s", 4, 36, Direction::Top, 0.5); }), ErrorCode::InvalidArgument);
}
