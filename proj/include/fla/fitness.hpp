#pragma once

// Fitness sources: tabular evaluation records, the NK model and the
// ones-count toy landscape, plus Cohen's kappa for turning a confusion
// matrix into a fitness value.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fla/bits.hpp"
#include "fla/cellspace.hpp"
#include "fla/error.hpp"
#include "fla/numfmt.hpp"
#include "fla/random.hpp"

namespace fla {

using Budget = int;  // training epochs

inline constexpr Budget kDefaultBudgets[] = {4, 12, 36, 108};

// ---------------------------------------------------------------------------
// Cohen's kappa

using ConfusionMatrix = std::vector<std::vector<std::int64_t>>;

/// kappa = (p_o - p_e) / (1 - p_e), evaluated from integer sums so that
/// scaling the matrix by a positive integer gives the identical double.
inline double cohen_kappa(const ConfusionMatrix& confusion) {
  const std::size_t c = confusion.size();
  if (c < 2) throw Error(ErrorCode::InvalidArgument, "confusion matrix needs at least 2 classes");
  std::vector<__int128> rows(c, 0), cols(c, 0);
  __int128 total = 0, trace = 0;
  for (std::size_t i = 0; i < c; ++i) {
    if (confusion[i].size() != c) throw Error(ErrorCode::InvalidArgument, "confusion matrix is not square");
    for (std::size_t j = 0; j < c; ++j) {
      const auto v = confusion[i][j];
      if (v < 0) throw Error(ErrorCode::InvalidArgument, "negative count in confusion matrix");
      rows[i] += v;
      cols[j] += v;
      total += v;
      if (i == j) trace += v;
    }
  }
  if (total == 0) throw Error(ErrorCode::InvalidArgument, "confusion matrix is empty");
  __int128 chance = 0;
  for (std::size_t k = 0; k < c; ++k) chance += rows[k] * cols[k];
  const __int128 denom = total * total - chance;
  if (denom == 0) throw Error(ErrorCode::Degenerate, "expected agreement is 1");
  const __int128 numer = trace * total - chance;
  return static_cast<double>(static_cast<long double>(numer) / static_cast<long double>(denom));
}

// ---------------------------------------------------------------------------
// NK landscape

struct NKConfig {
  std::size_t n = 0;
  std::size_t k = 0;
  std::uint64_t seed = 0;

  void check() const {
    if (n == 0 || k >= n) {
      throw Error(ErrorCode::InvalidArgument,
                  "NK requires 0 <= k < n (n=" + std::to_string(n) + ", k=" + std::to_string(k) + ")");
    }
  }
};

/// Table entry of component `i` for local pattern `pattern`: a uniform
/// value in [0,1) derived by integer hashing alone.
inline double nk_component(const NKConfig& cfg, std::size_t i, std::uint64_t pattern) {
  return to_unit(hash_words({cfg.seed, cfg.n, cfg.k, i, pattern}));
}

/// Mean over the n components; component i reads bits i, i+1, ..., i+k
/// (circular), packed as pattern = sum_j x[(i+j) mod n] << j.
template <BitSequence B>
double nk_fitness(const NKConfig& cfg, const B& x) {
  cfg.check();
  if (x.size() != cfg.n) {
    throw Error(ErrorCode::LengthMismatch, "NK expects " + std::to_string(cfg.n) + " bits, got " +
                                               std::to_string(x.size()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < cfg.n; ++i) {
    std::uint64_t pattern = 0;
    for (std::size_t j = 0; j <= cfg.k; ++j) {
      if (x.test((i + j) % cfg.n)) pattern |= std::uint64_t{1} << j;
    }
    sum += nk_component(cfg, i, pattern);
  }
  return sum / static_cast<double>(cfg.n);
}

template <BitSequence B>
double ones_fitness(const B& x) {
  if (x.size() == 0) throw Error(ErrorCode::InvalidArgument, "empty bit string");
  std::size_t ones = 0;
  for (std::size_t i = 0; i < x.size(); ++i) ones += x.test(i) ? 1 : 0;
  return static_cast<double>(ones) / static_cast<double>(x.size());
}

// ---------------------------------------------------------------------------
// Tabular records

struct EvalRecord {
  std::string model_id;
  std::optional<Genotype> genotype;
  std::string source;
  Budget budget = 0;
  double fitness_test = 0.0;
  std::optional<double> fitness_val;
  std::size_t line = 0;  // 1-based CSV line, 0 when inserted in memory

  friend bool operator==(const EvalRecord& a, const EvalRecord& b) {
    return a.model_id == b.model_id && a.genotype == b.genotype && a.source == b.source &&
           a.budget == b.budget && a.fitness_test == b.fitness_test && a.fitness_val == b.fitness_val;
  }
};

inline constexpr std::string_view kEvalCsvHeader =
    "model_id,genotype_hex,source,budget_epochs,fitness_test,fitness_val";

/// Immutable-after-load collection of EvalRecords with lookups by model id
/// or genotype.
class FitnessTable {
 public:
  void insert(EvalRecord rec) {
    if (rec.model_id.empty() || rec.source.empty()) {
      throw Error(ErrorCode::InvalidArgument, "record needs model_id and source");
    }
    if (rec.budget <= 0) throw Error(ErrorCode::InvalidArgument, "budget must be positive");
    if (!std::isfinite(rec.fitness_test)) throw Error(ErrorCode::InvalidArgument, "fitness must be finite");
    Key key{rec.model_id, rec.source, rec.budget};
    if (auto it = index_.find(key); it != index_.end()) {
      throw Error(ErrorCode::DuplicateKey,
                  "(" + rec.model_id + ", " + rec.source + ", " + std::to_string(rec.budget) +
                      ") at lines " + std::to_string(records_[it->second].line) + " and " +
                      std::to_string(rec.line));
    }
    if (rec.genotype) {
      if (!decodable(*rec.genotype)) {
        throw Error(ErrorCode::BadGenotype, "undecodable genotype for model " + rec.model_id + line_note(rec));
      }
      if (auto it = genotype_of_.find(rec.model_id); it != genotype_of_.end() && it->second != *rec.genotype) {
        throw Error(ErrorCode::BadGenotype, "model " + rec.model_id + " has two genotypes" + line_note(rec));
      }
      if (auto it = model_of_.find(*rec.genotype); it != model_of_.end() && it->second != rec.model_id) {
        throw Error(ErrorCode::DuplicateKey, "genotype of " + rec.model_id + " already belongs to " +
                                                 it->second + line_note(rec));
      }
      genotype_of_[rec.model_id] = *rec.genotype;
      model_of_[*rec.genotype] = rec.model_id;
    }
    index_.emplace(std::move(key), records_.size());
    records_.push_back(std::move(rec));
  }

  const std::vector<EvalRecord>& records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }

  std::optional<double> find(const std::string& model_id, const std::string& source, Budget budget) const {
    auto it = index_.find(Key{model_id, source, budget});
    if (it == index_.end()) return std::nullopt;
    return records_[it->second].fitness_test;
  }

  std::optional<double> find(const Genotype& g, const std::string& source, Budget budget) const {
    auto it = model_of_.find(g);
    if (it == model_of_.end()) return std::nullopt;
    return find(it->second, source, budget);
  }

  double query(const std::string& model_id, const std::string& source, Budget budget) const {
    if (auto v = find(model_id, source, budget)) return *v;
    throw Error(ErrorCode::EvalMiss, "(" + model_id + ", " + source + ", " + std::to_string(budget) + ")");
  }

  double query(const Genotype& g, const std::string& source, Budget budget) const {
    if (auto v = find(g, source, budget)) return *v;
    throw Error(ErrorCode::EvalMiss, "(" + g.hex() + ", " + source + ", " + std::to_string(budget) + ")");
  }

  std::optional<Genotype> genotype_of(const std::string& model_id) const {
    auto it = genotype_of_.find(model_id);
    if (it == genotype_of_.end()) return std::nullopt;
    return it->second;
  }

  std::optional<std::string> model_of(const Genotype& g) const {
    auto it = model_of_.find(g);
    if (it == model_of_.end()) return std::nullopt;
    return it->second;
  }

  /// Records of one (source, budget) in insertion order.
  std::vector<const EvalRecord*> select(const std::string& source, Budget budget) const {
    std::vector<const EvalRecord*> out;
    for (const auto& r : records_) {
      if (r.source == source && r.budget == budget) out.push_back(&r);
    }
    return out;
  }

  /// Number of distinct models per source.
  std::map<std::string, std::size_t> count_by_source() const {
    std::map<std::string, std::vector<std::string>> models;
    for (const auto& r : records_) models[r.source].push_back(r.model_id);
    std::map<std::string, std::size_t> out;
    for (auto& [source, ids] : models) {
      std::sort(ids.begin(), ids.end());
      out[source] = static_cast<std::size_t>(std::unique(ids.begin(), ids.end()) - ids.begin());
    }
    return out;
  }

  std::vector<Budget> budgets(const std::string& source) const {
    std::vector<Budget> out;
    for (const auto& r : records_) {
      if (r.source == source) out.push_back(r.budget);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

 private:
  using Key = std::tuple<std::string, std::string, Budget>;

  static std::string line_note(const EvalRecord& rec) {
    return rec.line ? " (line " + std::to_string(rec.line) + ")" : std::string{};
  }

  std::vector<EvalRecord> records_;
  std::map<Key, std::size_t> index_;
  std::unordered_map<std::string, Genotype> genotype_of_;
  std::unordered_map<Genotype, std::string> model_of_;
};

namespace detail {

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

}  // namespace detail

/// Parses the evaluation CSV. Errors name the 1-based line and column.
inline FitnessTable parse_table(std::istream& in) {
  static constexpr std::string_view kColumns[] = {"model_id",      "genotype_hex", "source",
                                                  "budget_epochs", "fitness_test", "fitness_val"};
  auto fail = [](std::size_t line, std::size_t column, const std::string& reason) -> Error {
    return Error(ErrorCode::ParseError, "line " + std::to_string(line) + ", column " + std::to_string(column) +
                                            " (" + std::string(kColumns[column - 1]) + "): " + reason);
  };

  FitnessTable table;
  std::string raw;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!header_seen) {
      if (line.size() >= 3 && line.substr(0, 3) == "\xEF\xBB\xBF") line.remove_prefix(3);
      if (line != kEvalCsvHeader) {
        throw Error(ErrorCode::ParseError, "line 1: expected header '" + std::string(kEvalCsvHeader) + "'");
      }
      header_seen = true;
      continue;
    }
    if (line.empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != 6) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected 6 fields, got " +
                                             std::to_string(fields.size()));
    }
    EvalRecord rec;
    rec.line = line_no;
    rec.model_id = std::string(fields[0]);
    if (rec.model_id.empty()) throw fail(line_no, 1, "empty model id");
    if (!fields[1].empty()) {
      try {
        rec.genotype = Genotype::from_hex(fields[1]);
      } catch (const Error& e) {
        throw Error(ErrorCode::BadGenotype, "line " + std::to_string(line_no) + ": " + e.what());
      }
      if (!decodable(*rec.genotype)) {
        throw Error(ErrorCode::BadGenotype, "line " + std::to_string(line_no) + ": genotype does not decode");
      }
    }
    rec.source = std::string(fields[2]);
    if (rec.source.empty()) throw fail(line_no, 3, "empty source");
    const auto budget = parse_integer(fields[3]);
    if (!budget || *budget <= 0 || *budget > 1'000'000'000) throw fail(line_no, 4, "not a positive integer");
    rec.budget = static_cast<Budget>(*budget);
    const auto test = parse_number(fields[4]);
    if (!test) throw fail(line_no, 5, "not a number");
    if (*test < -1.0 || *test > 1.0) throw fail(line_no, 5, "outside [-1, 1]");
    rec.fitness_test = *test;
    if (!fields[5].empty()) {
      const auto val = parse_number(fields[5]);
      if (!val) throw fail(line_no, 6, "not a number");
      rec.fitness_val = *val;
    }
    table.insert(std::move(rec));
  }
  if (!header_seen) throw Error(ErrorCode::ParseError, "line 1: missing header");
  return table;
}

inline FitnessTable load_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  return parse_table(in);
}

/// Canonical CSV form: header, then records in insertion order with
/// shortest round-trip numbers.
inline std::string write_table(const FitnessTable& table) {
  std::string out(kEvalCsvHeader);
  out += '\n';
  for (const auto& r : table.records()) {
    out += r.model_id;
    out += ',';
    if (r.genotype) out += r.genotype->hex();
    out += ',';
    out += r.source;
    out += ',';
    out += std::to_string(r.budget);
    out += ',';
    out += format_number(r.fitness_test);
    out += ',';
    if (r.fitness_val) out += format_number(*r.fitness_val);
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fitness sources

enum class SourceKind { Tabular, NK, Ones };

constexpr std::string_view to_string(SourceKind kind) {
  switch (kind) {
    case SourceKind::Tabular: return "TABULAR";
    case SourceKind::NK: return "NK";
    case SourceKind::Ones: return "ONES";
  }
  return "?";
}

struct SourceId {
  std::string name;
  SourceKind kind = SourceKind::Tabular;
  friend bool operator==(const SourceId&, const SourceId&) = default;
};

/// A fitness function over genotypes, parameterized by training budget.
///
/// Synthetic NK sources emulate budget dependence by blending the base
/// landscape with a budget-specific one:
///   f_b(x) = (1 - eta_b) * NK(seed)(x) + eta_b * NK(hash(seed, b))(x),
///   eta_b  = min(1, budget_noise / sqrt(b)).
/// With budget_noise = 0 the source ignores the budget.
class FitnessSource {
 public:
  static FitnessSource tabular(std::string name, std::shared_ptr<const FitnessTable> table,
                               std::string table_source = {}) {
    FitnessSource s;
    s.id_ = {std::move(name), SourceKind::Tabular};
    s.table_source_ = table_source.empty() ? s.id_.name : std::move(table_source);
    s.table_ = std::move(table);
    return s;
  }

  static FitnessSource nk(std::string name, NKConfig cfg, double budget_noise = 0.0) {
    cfg.check();
    if (!(budget_noise >= 0.0)) throw Error(ErrorCode::InvalidArgument, "budget_noise must be >= 0");
    FitnessSource s;
    s.id_ = {std::move(name), SourceKind::NK};
    s.nk_ = cfg;
    s.budget_noise_ = budget_noise;
    return s;
  }

  static FitnessSource ones(std::string name) {
    FitnessSource s;
    s.id_ = {std::move(name), SourceKind::Ones};
    return s;
  }

  const SourceId& id() const noexcept { return id_; }
  const std::string& name() const noexcept { return id_.name; }
  SourceKind kind() const noexcept { return id_.kind; }
  const NKConfig& nk_config() const noexcept { return nk_; }
  double budget_noise() const noexcept { return budget_noise_; }
  const FitnessTable* table() const noexcept { return table_.get(); }
  const std::string& table_source() const noexcept { return table_source_; }

  /// Fitness of genotype at budget; EVAL_MISS when a table lacks it.
  double evaluate(const Genotype& g, Budget budget) const {
    if (id_.kind == SourceKind::Tabular) return table_->query(g, table_source_, budget);
    return evaluate_bits(g, budget);
  }

  /// Synthetic sources also evaluate plain bit strings.
  template <BitSequence B>
  double evaluate_bits(const B& x, Budget budget) const {
    switch (id_.kind) {
      case SourceKind::Ones: return ones_fitness(x);
      case SourceKind::NK: {
        const NKConfig cfg{x.size(), nk_.k, nk_.seed};
        const double base = nk_fitness(cfg, x);
        if (budget_noise_ == 0.0) return base;
        if (budget <= 0) throw Error(ErrorCode::InvalidArgument, "budget must be positive");
        const double eta = std::min(1.0, budget_noise_ / std::sqrt(static_cast<double>(budget)));
        const NKConfig shifted{cfg.n, cfg.k, hash_words({nk_.seed, static_cast<std::uint64_t>(budget)})};
        return (1.0 - eta) * base + eta * nk_fitness(shifted, x);
      }
      case SourceKind::Tabular: break;
    }
    throw Error(ErrorCode::InvalidArgument, "tabular source " + id_.name + " cannot evaluate raw bit strings");
  }

 private:
  FitnessSource() = default;

  SourceId id_;
  NKConfig nk_{kGenotypeBits, 0, 0};
  double budget_noise_ = 0.0;
  std::shared_ptr<const FitnessTable> table_;
  std::string table_source_;
};

}  // namespace fla
