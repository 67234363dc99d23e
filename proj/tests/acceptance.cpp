// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <unistd.h>

#include "fla/pipeline.hpp"
#include "oracles.hpp"

using namespace fla;
namespace fs = std::filesystem;

namespace {

// Collects the first few failed checks of a criterion.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    if (failures_.size() < 5) failures_.push_back(what);
    ++count_;
  }
  bool ok() const { return count_ == 0; }
  std::string summary() const {
    std::string s = std::to_string(count_) + " failed check(s)";
    for (const auto& f : failures_) s += "; " + f;
    return s;
  }

 private:
  std::vector<std::string> failures_;
  std::size_t count_ = 0;
};

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

std::string num(double x) {
  std::ostringstream ss;
  ss.precision(10);
  ss << x;
  return ss.str();
}

template <class Fn>
ErrorCode error_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::IoError;
}

void aic_identity(Check& c) {
  const std::vector<std::pair<double, double>> reference{{53.63, -103.26}, {165.18, -326.36}, {109.72, -215.44}};
  for (const auto& [ll, aic] : reference) {
    const double got = information_criteria(ll, 2, 100).aic;
    c.expect(near(got, aic, 0.01), "loglik " + num(ll) + " gave AIC " + num(got));
  }
}

void encoding_suite(Check& c) {
  for (const auto& cell : lhs_sample(1000, 2024)) {
    const Genotype g = encode(cell);
    c.expect(g.size() == kGenotypeBits, "genotype length");
    c.expect(g.count() <= 9, "popcount " + std::to_string(g.count()));
    c.expect(decode(g) == cell, "round trip " + g.hex());
    c.expect(oracle::bits_of(g) == oracle::genotype_bits(cell), "bit layout " + g.hex());
  }
  Rng rng(77);
  for (int t = 0; t < 10000; ++t) {
    Genotype g;
    const double density = (t % 4 == 0) ? 0.5 : 0.01 + 0.03 * rng.uniform();
    for (std::size_t i = 0; i < kGenotypeBits; ++i) {
      if (rng.uniform() < density) g.set(i);
    }
    try {
      const auto r = try_decode(g);
      const auto expected = oracle::decode(oracle::bits_of(g));
      c.expect(std::holds_alternative<CellSpec>(r) == expected.has_value(), "fuzz verdict " + g.hex());
      if (expected && std::holds_alternative<CellSpec>(r)) c.expect(std::get<CellSpec>(r) == *expected, "fuzz cell");
    } catch (const std::exception& e) {
      c.expect(false, std::string("fuzz threw: ") + e.what());
    }
  }
}

void neighborhood_oracle(Check& c) {
  const auto cells = lhs_sample(50, 31);
  std::size_t total = 0;
  for (const auto& cell : cells) {
    const Genotype g = encode(cell);
    std::vector<oracle::Bits> got;
    for (const auto& y : neighbors(g, NeighborMode::Valid)) got.push_back(oracle::bits_of(y));
    auto want = oracle::valid_flips(oracle::bits_of(g));
    std::sort(got.begin(), got.end());
    std::sort(want.begin(), want.end());
    c.expect(got == want, "valid neighbors of " + g.hex());
    total += got.size();
  }
  c.expect(total > 0, "no valid neighbors anywhere");
}

void ruggedness_calibration(Check& c) {
  Rng rng(1);
  std::vector<double> iid(10000);
  for (auto& x : iid) x = rng.uniform();
  const double r = rho1(iid);
  c.expect(std::abs(r) < 0.05, "iid rho1 " + num(r));

  std::vector<double> ramp;
  for (int i = 0; i <= 100; ++i) ramp.push_back(i / 100.0);
  const auto ramp_r = ruggedness_tau(ramp);
  c.expect(ramp_r.tau && *ramp_r.tau > 1.0 && *ramp_r.tau < 1.06, "ramp tau " + num(ramp_r.tau.value_or(-1)));

  std::vector<double> alt(1000);
  for (std::size_t i = 0; i < alt.size(); ++i) alt[i] = static_cast<double>(i % 2);
  const auto alt_r = ruggedness_tau(alt);
  c.expect(!alt_r.tau && alt_r.flag == kNonpositiveRho1, "alternating series not flagged");
}

void fdc_oracle(Check& c) {
  const auto opt = BitString::from_index(6, 0b011010);
  std::vector<FdcSample<BitString>> lin;
  for (std::uint64_t i = 0; i < 64; ++i) {
    const auto y = BitString::from_index(6, i);
    lin.push_back({"", y, 1.0 - static_cast<double>(hamming(y, opt)) / 6.0});
  }
  const auto r = fdc(lin);
  c.expect(r.pearson_r && near(*r.pearson_r, -1.0, 1e-9), "linear landscape r " + num(r.pearson_r.value_or(0)));

  for (std::uint64_t seed : {5u, 6u, 7u}) {
    std::vector<FdcSample<BitString>> s;
    for (std::uint64_t i = 0; i < 1024; ++i) {
      const auto x = BitString::from_index(10, i);
      s.push_back({"", x, nk_fitness(NKConfig{10, 2, seed}, x)});
    }
    std::vector<std::pair<std::size_t, double>> pts;
    for (const auto& p : fdc(s).points) pts.emplace_back(p.distance, p.fitness);
    std::sort(pts.begin(), pts.end());
    c.expect(pts == oracle::fdc_points(oracle::NK(10, 2, seed).enumerate(), 10), "NK multiset seed " + num(seed));
  }
}

void local_optima(Check& c) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto n = local_optima_exhaustive(NKConfig{12, 0, seed}).count;
    c.expect(n == 1, "k=0 seed " + num(seed) + " has " + std::to_string(n));
  }
  for (std::uint64_t seed = 200; seed < 210; ++seed) {
    const auto got = local_optima_exhaustive(NKConfig{10, 2, seed}).count;
    const auto want = oracle::count_local_optima(oracle::NK(10, 2, seed).enumerate(), 10);
    c.expect(got == want, "k=2 seed " + num(seed) + ": " + std::to_string(got) + " vs " + std::to_string(want));
  }
}

void distribution_fitting(Check& c) {
  oracle::Draws d(101);
  std::vector<double> beta(5000), weib(5000);
  for (auto& x : beta) x = d.beta(2, 5);
  for (auto& x : weib) x = d.weibull(1.0, 1.0);
  const auto fb = fit_mle(beta, Family::Beta);
  c.expect(near(fb.dist.a, 2.0, 0.2) && near(fb.dist.b, 5.0, 0.5), "beta " + num(fb.dist.a) + "," + num(fb.dist.b));
  const auto fw = fit_mle(weib, Family::Weibull);
  c.expect(near(fw.dist.a, 1.0, 0.1) && near(fw.dist.b, 1.0, 0.1), "weibull " + num(fw.dist.a) + "," + num(fw.dist.b));

  std::vector<double> ln(1000);
  for (auto& x : ln) x = d.lognormal(-0.5, 0.25);
  const auto fl = fit_mle(ln, Family::LogNormal);
  const auto closed = lognormal_closed_form(ln);
  c.expect(near(fl.dist.a, closed.a, 1e-6) && near(fl.dist.b, closed.b, 1e-6), "lognormal vs closed form");

  int hits = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    oracle::Draws ds(5000 + seed);
    std::vector<double> v(1000);
    for (auto& x : v) x = ds.beta(2, 5);
    hits += select_best(fit_all(v)).dist.family == Family::Beta ? 1 : 0;
  }
  c.expect(hits >= 18, "select_best picked Beta in " + std::to_string(hits) + "/20");
}

FitnessTable two_budget(const std::vector<std::pair<std::string, std::pair<double, double>>>& rows) {
  FitnessTable t;
  for (const auto& [m, f] : rows) {
    t.insert({m, std::nullopt, "s", 4, f.first, std::nullopt, 0});
    t.insert({m, std::nullopt, "s", 36, f.second, std::nullopt, 0});
  }
  return t;
}

void persistence_fixtures(Check& c) {
  std::vector<std::pair<std::string, std::pair<double, double>>> same, reversed;
  for (int i = 0; i < 40; ++i) {
    const std::string id = "m" + std::to_string(100 + i);
    same.push_back({id, {i / 40.0, 0.2 + i / 80.0}});
    reversed.push_back({id, {i / 40.0, 1.0 - i / 40.0}});
  }
  const auto t_same = two_budget(same);
  const auto t_rev = two_budget(reversed);
  for (Direction dir : {Direction::Top, Direction::Bottom}) {
    for (int n = 1; n <= 100; ++n) {
      c.expect(persistence(t_same, "s", n, 4, 36, dir) == 100.0, "identical P at n=" + std::to_string(n));
    }
    const double auc = persistence_auc(t_same, "s", 4, 36, dir);
    c.expect(near(auc, 1.0, 1e-12), "identical AuC " + num(auc));
    c.expect(persistence(t_rev, "s", 25, 4, 36, dir) == 0.0, "reversed P at n=25");
    c.expect(persistence_auc(t_rev, "s", 4, 36, dir) == 0.0, "reversed AuC");
  }
  const auto hand = two_budget({{"a", {0.90, 0.95}}, {"b", {0.85, 0.40}}, {"c", {0.50, 0.90}}, {"d", {0.45, 0.60}},
                                {"e", {0.40, 0.55}}, {"f", {0.35, 0.50}}, {"g", {0.30, 0.45}}, {"h", {0.25, 0.30}}});
  const double p = persistence(hand, "s", 25, 4, 36, Direction::Top);
  c.expect(p == 50.0, "hand fixture P " + num(p));
}

void kappa(Check& c) {
  c.expect(cohen_kappa({{10, 0, 0}, {0, 7, 0}, {0, 0, 3}}) == 1.0, "diagonal");
  c.expect(cohen_kappa({{25, 25}, {25, 25}}) == 0.0, "uniform");
  c.expect(near(cohen_kappa({{20, 5}, {10, 15}}), 0.4, 1e-12), "[[20,5],[10,15]]");
  Rng rng(8);
  for (int t = 0; t < 200; ++t) {
    ConfusionMatrix m(3, std::vector<std::int64_t>(3));
    for (auto& row : m) {
      for (auto& v : row) v = 1 + static_cast<std::int64_t>(rng.below(50));
    }
    const double k = cohen_kappa(m);
    for (std::int64_t s : {2, 9, 1000003}) {
      ConfusionMatrix scaled = m;
      for (auto& row : scaled) {
        for (auto& v : row) v *= s;
      }
      c.expect(cohen_kappa(scaled) == k, "scale " + std::to_string(s));
    }
  }
  c.expect(error_of([] { cohen_kappa({{5, 0}, {0, 0}}); }) == ErrorCode::Degenerate, "degenerate matrix");
}

std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), root).generic_string()] = read_file(e.path());
  }
  return files;
}

void end_to_end(Check& c) {
  const fs::path config = fs::path(FLA_SOURCE_DIR) / "demo" / "nk_demo.json";
  const fs::path root = fs::temp_directory_path() / ("fla_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  std::vector<std::map<std::string, std::string>> runs;
  for (const char* name : {"first", "second"}) {
    const fs::path dir = root / name;
    fs::create_directories(dir);
    const std::string cli = std::string(FLA_CLI);
    const std::string cmd = "cd '" + dir.string() + "' && " + cli + " analyze --config '" + config.string() +
                            "' --output-dir out > /dev/null && " + cli + " footprint --config '" + config.string() +
                            "' --output-dir out > /dev/null && " + cli +
                            " compare out/footprints/nk_smooth_b36.json out/footprints/nk_mid_b36.json "
                            "out/footprints/nk_rugged_b36.json --out cmp > /dev/null";
    const int status = std::system(cmd.c_str());
    c.expect(status == 0, std::string(name) + " run exited with status " + std::to_string(status));
    if (status != 0) break;
    runs.push_back(snapshot(dir));
  }
  if (runs.size() == 2) {
    c.expect(runs[0].size() > 100, "only " + std::to_string(runs[0].size()) + " files written");
    c.expect(runs[0].count("cmp/comparison.json") && runs[0].count("cmp/radar.csv"), "comparison outputs missing");
    c.expect(runs[0].size() == runs[1].size(), "file sets differ");
    for (const auto& [path, bytes] : runs[0]) {
      const auto it = runs[1].find(path);
      c.expect(it != runs[1].end() && it->second == bytes, "bytes differ: " + path);
    }
  }
  fs::remove_all(root);
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria{
      {"aic-identity", aic_identity},
      {"encoding-suite", encoding_suite},
      {"neighborhood-oracle", neighborhood_oracle},
      {"ruggedness-calibration", ruggedness_calibration},
      {"fdc-oracle", fdc_oracle},
      {"local-optima", local_optima},
      {"distribution-fitting", distribution_fitting},
      {"persistence-fixtures", persistence_fixtures},
      {"kappa", kappa},
      {"end-to-end-determinism", end_to_end},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Check check;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      fn(check);
    } catch (const std::exception& e) {
      check.expect(false, std::string("threw: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %-24s %8.3fs%s%s\n", check.ok() ? "PASS" : "FAIL", name.c_str(), secs, check.ok() ? "" : "  ",
                check.ok() ? "" : check.summary().c_str());
    failed += check.ok() ? 0 : 1;
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
  return failed == 0 ? 0 : 1;
}
