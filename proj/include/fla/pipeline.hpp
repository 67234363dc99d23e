#pragma once

// End-to-end runs driven by a RunConfig: per (source, budget) analysis
// files, footprints assembled from them, and footprint comparison.
//
// Output layout under output_dir:
//   run.json                          resolved config + seed
//   samples.csv                       shared sample of cells (synthetic sources)
//   <source>/table.csv                evaluation table analyzed for the source
//   <source>/b<budget>/stats.json
//   <source>/b<budget>/fits.json, fits_table.csv
//   <source>/b<budget>/fdc.csv, fdc.json
//   <source>/b<budget>/walk.jsonl, walk_ma.csv, ruggedness.json
//   <source>/b<budget>/local_optima.json
//   <source>/b<budget>/persistence_top.csv, persistence_bottom.csv, persistence.json
//   footprints/<source>_b<budget>.json   (written by run_footprint)

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fla/cellspace.hpp"
#include "fla/distfit.hpp"
#include "fla/error.hpp"
#include "fla/fitness.hpp"
#include "fla/footprint.hpp"
#include "fla/io.hpp"
#include "fla/metrics.hpp"
#include "fla/persistence.hpp"
#include "fla/sampling.hpp"

namespace fla {

namespace fs = std::filesystem;

struct SourceDecl {
  std::string name;
  SourceKind kind = SourceKind::NK;
  std::string path;          // TABULAR: evaluation CSV
  std::string table_source;  // TABULAR: source column value (defaults to name)
  std::size_t k = 0;         // NK
  std::uint64_t seed = 0;    // NK
  double budget_noise = 0.0; // NK

  friend bool operator==(const SourceDecl&, const SourceDecl&) = default;
};

struct RunConfig {
  std::optional<std::uint64_t> seed;
  std::vector<Budget> budgets{4, 12, 36, 108};
  Budget b_ref = kDefaultReferenceBudget;
  std::vector<SourceDecl> sources;
  double nmax = kDefaultNMax;
  std::size_t window = 5;
  std::size_t samples = 100;
  std::string sampler = "lhs";
  std::size_t walk_steps = 100;
  std::string output_dir = "fla_out";

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

inline bool valid_source_name(const std::string& name) {
  if (name.empty() || name == "." || name == ".." || name == "footprints") return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '+' || c == '.';
  });
}

inline void check_config(const RunConfig& cfg) {
  auto bad = [](const std::string& msg) { return Error(ErrorCode::InvalidArgument, "config: " + msg); };
  if (cfg.budgets.empty()) throw bad("budgets must not be empty");
  std::set<Budget> budgets;
  for (Budget b : cfg.budgets) {
    if (b <= 0) throw bad("budgets must be positive");
    if (!budgets.insert(b).second) throw bad("duplicate budget " + std::to_string(b));
  }
  if (!budgets.count(cfg.b_ref)) throw bad("b_ref " + std::to_string(cfg.b_ref) + " is not among the budgets");
  if (cfg.sources.empty()) throw bad("no sources declared");
  std::set<std::string> names;
  for (const auto& s : cfg.sources) {
    if (!valid_source_name(s.name)) throw bad("invalid source name '" + s.name + "'");
    if (!names.insert(s.name).second) throw bad("duplicate source name '" + s.name + "'");
    if (s.kind == SourceKind::Tabular && s.path.empty()) throw bad("tabular source '" + s.name + "' needs a path");
    if (s.kind == SourceKind::NK && (s.k >= kGenotypeBits || s.budget_noise < 0)) {
      throw bad("NK source '" + s.name + "' needs 0 <= k < 289 and budget_noise >= 0");
    }
  }
  if (!(cfg.nmax >= 1.0 && cfg.nmax <= 100.0)) throw bad("nmax must be in [1, 100]");
  if (cfg.window == 0) throw bad("window must be >= 1");
  if (cfg.samples < 2) throw bad("samples must be >= 2");
  if (cfg.sampler != "lhs" && cfg.sampler != "uniform") throw bad("sampler must be lhs or uniform");
}

inline Json to_json(const SourceDecl& s) {
  Json j = Json::object();
  j["name"] = s.name;
  j["kind"] = std::string(to_string(s.kind));
  switch (s.kind) {
    case SourceKind::Tabular:
      j["path"] = s.path;
      j["table_source"] = s.table_source.empty() ? s.name : s.table_source;
      break;
    case SourceKind::NK:
      j["k"] = s.k;
      j["seed"] = s.seed;
      j["budget_noise"] = s.budget_noise;
      break;
    case SourceKind::Ones: break;
  }
  return j;
}

inline Json to_json(const RunConfig& cfg) {
  Json j = versioned();
  if (cfg.seed) j["seed"] = *cfg.seed;
  j["budgets"] = cfg.budgets;
  j["b_ref"] = cfg.b_ref;
  Json sources = Json::array();
  for (const auto& s : cfg.sources) sources.push_back(to_json(s));
  j["sources"] = std::move(sources);
  j["nmax"] = cfg.nmax;
  j["window"] = cfg.window;
  j["samples"] = cfg.samples;
  j["sampler"] = cfg.sampler;
  j["walk_steps"] = cfg.walk_steps;
  j["output_dir"] = cfg.output_dir;
  return j;
}

/// Parses a run config; keys other than "sources" are optional and fall
/// back to the RunConfig defaults.
inline RunConfig config_from_json(const Json& j) {
  constexpr std::string_view what = "config";
  require_version(j, what);
  RunConfig cfg;
  if (j.contains("seed")) cfg.seed = field<std::uint64_t>(j, "seed", what);
  if (j.contains("budgets")) cfg.budgets = field<std::vector<Budget>>(j, "budgets", what);
  if (j.contains("b_ref")) cfg.b_ref = field<Budget>(j, "b_ref", what);
  if (j.contains("nmax")) cfg.nmax = field<double>(j, "nmax", what);
  if (j.contains("window")) cfg.window = field<std::size_t>(j, "window", what);
  if (j.contains("samples")) cfg.samples = field<std::size_t>(j, "samples", what);
  if (j.contains("sampler")) cfg.sampler = field<std::string>(j, "sampler", what);
  if (j.contains("walk_steps")) cfg.walk_steps = field<std::size_t>(j, "walk_steps", what);
  if (j.contains("output_dir")) cfg.output_dir = field<std::string>(j, "output_dir", what);
  const auto sources = field<Json>(j, "sources", what);
  if (!sources.is_array()) throw Error(ErrorCode::SchemaError, "config: sources must be an array");
  for (const auto& sj : sources) {
    constexpr std::string_view swhat = "config source";
    SourceDecl s;
    s.name = field<std::string>(sj, "name", swhat);
    const auto kind = field<std::string>(sj, "kind", swhat);
    if (kind == "TABULAR") {
      s.kind = SourceKind::Tabular;
      s.path = field<std::string>(sj, "path", swhat);
      s.table_source = sj.contains("table_source") ? field<std::string>(sj, "table_source", swhat) : s.name;
    } else if (kind == "NK") {
      s.kind = SourceKind::NK;
      s.k = field<std::size_t>(sj, "k", swhat);
      s.seed = field<std::uint64_t>(sj, "seed", swhat);
      if (sj.contains("budget_noise")) s.budget_noise = field<double>(sj, "budget_noise", swhat);
    } else if (kind == "ONES") {
      s.kind = SourceKind::Ones;
    } else {
      throw Error(ErrorCode::SchemaError, "config: unknown source kind '" + kind + "'");
    }
    cfg.sources.push_back(std::move(s));
  }
  check_config(cfg);
  return cfg;
}

inline RunConfig load_config(const fs::path& path) {
  return config_from_json(parse_json(read_file(path), "config " + path.string()));
}

/// Explicit seed wins; otherwise FLA_SEED; otherwise 0.
inline std::uint64_t resolve_seed(std::optional<std::uint64_t> explicit_seed) {
  if (explicit_seed) return *explicit_seed;
  if (const char* env = std::getenv("FLA_SEED")) {
    const auto v = parse_integer(env);
    if (!v || *v < 0) throw Error(ErrorCode::InvalidArgument, "FLA_SEED is not a non-negative integer");
    return static_cast<std::uint64_t>(*v);
  }
  return 0;
}

inline fs::path resolve_path(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

inline std::string budget_dir(Budget b) { return "b" + std::to_string(b); }

// ---------------------------------------------------------------------------
// analyze

namespace detail {

struct Staged {
  std::map<fs::path, std::string> files;  // relative path -> content
  void put(const fs::path& rel, std::string content) { files[rel] = std::move(content); }
};

inline std::vector<CellSpec> draw_cells(const RunConfig& cfg, std::uint64_t seed) {
  auto cells = cfg.sampler == "lhs" ? lhs_sample(cfg.samples, seed) : uniform_sample(cfg.samples, seed);
  // The uniform sampler may repeat a cell; a genotype keeps a single model id.
  std::set<Genotype> seen;
  std::vector<CellSpec> unique;
  for (auto& c : cells) {
    if (seen.insert(encode(c)).second) unique.push_back(std::move(c));
  }
  return unique;
}

inline std::string model_id(std::size_t i) {
  char id[32];
  std::snprintf(id, sizeof id, "m%04zu", i);
  return id;
}

/// All records of one source, relabeled with the source's run name.
inline FitnessTable source_table(const SourceDecl& decl, const FitnessSource& source, const RunConfig& cfg,
                                 const std::vector<Genotype>& sample) {
  FitnessTable table;
  if (decl.kind == SourceKind::Tabular) {
    for (const auto& r : source.table()->records()) {
      if (r.source != source.table_source()) continue;
      EvalRecord copy = r;
      copy.source = decl.name;
      copy.line = 0;
      table.insert(std::move(copy));
    }
    if (table.empty()) {
      throw Error(ErrorCode::InvalidArgument, "table for '" + decl.name + "' has no records with source '" +
                                                  source.table_source() + "'");
    }
    return table;
  }
  for (std::size_t i = 0; i < sample.size(); ++i) {
    for (Budget b : cfg.budgets) {
      EvalRecord r;
      r.model_id = model_id(i);
      r.genotype = sample[i];
      r.source = decl.name;
      r.budget = b;
      r.fitness_test = source.evaluate(sample[i], b);
      table.insert(std::move(r));
    }
  }
  return table;
}

inline Json tagged(const std::string& source, Budget b) {
  Json j = versioned();
  j["source"] = source;
  j["budget"] = b;
  return j;
}

inline void merge(Json& into, const Json& from) {
  for (auto it = from.begin(); it != from.end(); ++it) into[it.key()] = it.value();
}

inline Json error_json(const Error& e) {
  Json j = Json::object();
  j["code"] = std::string(to_string(e.code()));
  j["message"] = e.what();
  return j;
}

inline void analyze_budget(const RunConfig& cfg, std::uint64_t seed, const SourceDecl& decl,
                           const FitnessSource& source, const FitnessTable& table, Budget b, Staged& out) {
  const fs::path dir = fs::path(decl.name) / budget_dir(b);
  auto recs = table.select(decl.name, b);
  std::sort(recs.begin(), recs.end(), [](auto* x, auto* y) { return x->model_id < y->model_id; });
  std::vector<double> values;
  for (const auto* r : recs) values.push_back(r->fitness_test);

  // Distribution statistics.
  {
    Json j = tagged(decl.name, b);
    if (values.empty()) {
      throw Error(ErrorCode::Empty, "no records for (" + decl.name + ", " + std::to_string(b) + ")");
    }
    merge(j, to_json(fitness_stats(values)));
    out.put(dir / "stats.json", dump(j));
  }

  // Distribution fits. Negative kappa values are clamped before fitting.
  {
    Json j = tagged(decl.name, b);
    const auto clamped = std::count_if(values.begin(), values.end(), [](double v) { return v <= 0.0; });
    j["clamped_nonpositive"] = clamped;
    try {
      const auto fits = fit_all(values);
      Json arr = Json::array();
      for (const auto& f : fits) arr.push_back(to_json(f));
      j["fits"] = std::move(arr);
      j["best"] = std::string(to_string(select_best(fits).dist.family));
      out.put(dir / "fits_table.csv", fit_table_csv(fits));
    } catch (const Error& e) {
      j["fits"] = Json::array();
      j["best"] = nullptr;
      j["error"] = error_json(e);
    }
    out.put(dir / "fits.json", dump(j));
  }

  // Fitness-distance correlation over records that carry a genotype.
  {
    std::vector<FdcSample<Genotype>> samples;
    for (const auto* r : recs) {
      if (r->genotype) samples.push_back({r->model_id, *r->genotype, r->fitness_test});
    }
    Json j = tagged(decl.name, b);
    try {
      const auto res = fdc(samples);
      merge(j, fdc_sidecar(res));
      out.put(dir / "fdc.csv", fdc_csv(res));
    } catch (const Error& e) {
      j["optimum_id"] = nullptr;
      j["pearson_r"] = "UNDEFINED";
      j["n_points"] = 0;
      j["error"] = error_json(e);
    }
    out.put(dir / "fdc.json", dump(j));
  }

  // Random walk and ruggedness. The walk path depends only on the seed and
  // the start, so every source and budget walks the same route.
  {
    Json j = tagged(decl.name, b);
    RuggednessResult rugged = unavailable_ruggedness();
    std::optional<Error> failure;
    std::optional<Genotype> start;
    std::vector<const EvalRecord*> ordered = table.select(decl.name, cfg.b_ref);
    std::sort(ordered.begin(), ordered.end(), [](auto* x, auto* y) { return x->model_id < y->model_id; });
    // Start from the record with the most valid neighbors (first id wins):
    // valid moves never change the node set, so a sparse start can trap the
    // walk between two cells.
    std::size_t best_degree = 0;
    for (const auto* r : ordered) {
      if (!r->genotype) continue;
      const std::size_t degree = neighbors(*r->genotype, NeighborMode::Valid).size();
      if (degree > best_degree) {
        best_degree = degree;
        start = r->genotype;
      }
    }
    try {
      if (!start) throw Error(ErrorCode::DeadEnd, "no record has a valid neighbor to start a walk from");
      const WalkTrace walk = random_walk(*start, cfg.walk_steps, hash_words({seed, 0x77616c6bULL}), source, b);
      out.put(dir / "walk.jsonl", walk_jsonl(walk));
      if (walk.fitness.size() >= cfg.window) {
        const auto ma = moving_average(walk.fitness, cfg.window);
        std::string csv = "t,fitness_ma\n";
        for (std::size_t i = 0; i < ma.size(); ++i) {
          csv += std::to_string(i + cfg.window - 1) + "," + format_number(ma[i]) + "\n";
        }
        out.put(dir / "walk_ma.csv", csv);
      }
      try {
        rugged = ruggedness_tau(walk);
      } catch (const Error& e) {
        rugged.walk_len = walk.fitness.size();
        rugged.flag = to_string(e.code());
      }
    } catch (const Error& e) {
      failure = e;
    }
    merge(j, to_json(rugged));
    j["walk_start"] = start ? Json(start->hex()) : Json(nullptr);
    j["window"] = cfg.window;
    if (failure) j["error"] = error_json(*failure);
    out.put(dir / "ruggedness.json", dump(j));
  }

  // Empirical local optima among the evaluated records.
  {
    Json j = tagged(decl.name, b);
    merge(j, to_json(local_optima_sampled(table, decl.name, b)));
    out.put(dir / "local_optima.json", dump(j));
  }

  // Positive (TOP) and negative (BOTTOM) persistence from b_ref to b.
  {
    Json j = tagged(decl.name, b);
    for (Direction d : {Direction::Top, Direction::Bottom}) {
      const auto curve = persistence_curve(table, decl.name, cfg.b_ref, b, d, cfg.nmax, cfg.budgets);
      const std::string key = d == Direction::Top ? "top" : "bottom";
      out.put(dir / ("persistence_" + key + ".csv"), persistence_curve_csv(curve));
      j[key] = to_json(summarize(curve));
    }
    out.put(dir / "persistence.json", dump(j));
  }
}

inline void commit(const fs::path& out_dir, const Staged& staged) {
  fs::path staging = out_dir;
  staging += ".staging";
  fs::remove_all(staging);
  try {
    for (const auto& [rel, content] : staged.files) write_file_atomic(staging / rel, content);
    fs::remove_all(out_dir);
    if (out_dir.has_parent_path()) fs::create_directories(out_dir.parent_path());
    fs::rename(staging, out_dir);
  } catch (...) {
    std::error_code ec;
    fs::remove_all(staging, ec);
    throw;
  }
}

}  // namespace detail

struct LoadedSource {
  SourceDecl decl;
  FitnessSource source;
};

/// Builds fitness sources; tables are loaded here so that input errors
/// surface before any output is produced.
inline std::vector<LoadedSource> load_sources(const RunConfig& cfg, const fs::path& base) {
  std::vector<LoadedSource> out;
  std::map<fs::path, std::shared_ptr<const FitnessTable>> tables;
  for (const auto& decl : cfg.sources) {
    switch (decl.kind) {
      case SourceKind::Tabular: {
        const fs::path path = resolve_path(base, decl.path);
        auto& table = tables[path];
        if (!table) table = std::make_shared<const FitnessTable>(load_table(path.string()));
        out.push_back({decl, FitnessSource::tabular(decl.name, table, decl.table_source)});
        break;
      }
      case SourceKind::NK:
        out.push_back({decl, FitnessSource::nk(decl.name, NKConfig{kGenotypeBits, decl.k, decl.seed},
                                                decl.budget_noise)});
        break;
      case SourceKind::Ones: out.push_back({decl, FitnessSource::ones(decl.name)}); break;
    }
  }
  return out;
}

/// Runs every analysis for every (source, budget) and replaces output_dir
/// in one step; on failure nothing is left behind.
inline void run_analyze(const RunConfig& cfg, const fs::path& base = {}) {
  check_config(cfg);
  const std::uint64_t seed = resolve_seed(cfg.seed);
  const auto sources = load_sources(cfg, base);

  detail::Staged staged;
  RunConfig resolved = cfg;
  resolved.seed = seed;
  // The destination is left out so that a run is reproducible byte for byte wherever it lands.
  Json run = to_json(resolved);
  run.erase("output_dir");
  staged.put("run.json", dump(run));

  std::vector<Genotype> sample;
  const bool synthetic = std::any_of(sources.begin(), sources.end(),
                                     [](const LoadedSource& s) { return s.decl.kind != SourceKind::Tabular; });
  if (synthetic) {
    const auto cells = detail::draw_cells(cfg, seed);
    for (const auto& c : cells) sample.push_back(encode(c));
    staged.put("samples.csv", samples_csv(cells));
  }

  for (const auto& [decl, source] : sources) {
    const FitnessTable table = detail::source_table(decl, source, cfg, sample);
    staged.put(fs::path(decl.name) / "table.csv", write_table(table));
    for (Budget b : cfg.budgets) detail::analyze_budget(cfg, seed, decl, source, table, b, staged);
  }
  detail::commit(resolve_path(base, cfg.output_dir), staged);
}

// ---------------------------------------------------------------------------
// footprint

inline fs::path footprint_path(const fs::path& out_dir, const std::string& source, Budget b) {
  return out_dir / "footprints" / (source + "_" + budget_dir(b) + ".json");
}

/// Assembles one footprint from the analysis files of (source, b).
inline Footprint footprint_from_analysis(const fs::path& out_dir, const std::string& source, Budget b) {
  const fs::path rel_dir = fs::path(source) / budget_dir(b);
  auto load = [&](const char* name, std::string& id) {
    const fs::path rel = rel_dir / name;
    const std::string text = read_file(out_dir / rel);
    id = rel.generic_string() + "@" + content_hash(text);
    Json j = parse_json(text, rel.generic_string());
    require_version(j, rel.generic_string());
    if (field<std::string>(j, "source", rel.generic_string()) != source ||
        field<Budget>(j, "budget", rel.generic_string()) != b) {
      throw Error(ErrorCode::SchemaError, rel.generic_string() + ": source/budget do not match its location");
    }
    return j;
  };
  Analysis<FitnessStats> stats{source, b, {}, {}};
  stats.result = stats_from_json(load("stats.json", stats.id));
  Analysis<RuggednessResult> rugged{source, b, {}, {}};
  rugged.result = ruggedness_from_json(load("ruggedness.json", rugged.id));
  Analysis<LocalOptimaResult> optima{source, b, {}, {}};
  optima.result = local_optima_from_json(load("local_optima.json", optima.id));
  std::string pid;
  const Json pj = load("persistence.json", pid);
  Analysis<PersistenceSummary> pos{source, b, pid + "#top", persistence_summary_from_json(field<Json>(pj, "top", "persistence"))};
  Analysis<PersistenceSummary> neg{source, b, pid + "#bottom",
                                   persistence_summary_from_json(field<Json>(pj, "bottom", "persistence"))};
  pos.result.source = neg.result.source = source;
  return build_footprint(stats, rugged, optima, pos, neg);
}

/// Writes footprints/<source>_b<budget>.json for every (source, budget) of
/// the config. Returns the written paths.
inline std::vector<fs::path> run_footprint(const RunConfig& cfg, const fs::path& base = {}) {
  check_config(cfg);
  const fs::path out_dir = resolve_path(base, cfg.output_dir);
  std::vector<std::pair<fs::path, std::string>> files;
  for (const auto& decl : cfg.sources) {
    for (Budget b : cfg.budgets) {
      files.emplace_back(footprint_path(out_dir, decl.name, b), dump(to_json(footprint_from_analysis(out_dir, decl.name, b))));
    }
  }
  std::vector<fs::path> written;
  for (const auto& [path, content] : files) {
    write_file_atomic(path, content);
    written.push_back(path);
  }
  return written;
}

// ---------------------------------------------------------------------------
// compare

inline Footprint load_footprint(const fs::path& path) {
  return footprint_from_json(parse_json(read_file(path), path.string()));
}

/// Writes comparison.json and radar.csv into out_dir.
inline ComparisonReport run_compare(const std::vector<fs::path>& footprint_files, const fs::path& out_dir) {
  if (footprint_files.size() < 2) {
    throw Error(ErrorCode::TooFew, "need at least 2 footprints, got " + std::to_string(footprint_files.size()));
  }
  std::vector<Footprint> fps;
  for (const auto& p : footprint_files) fps.push_back(load_footprint(p));
  const auto report = compare(fps);
  const std::string json = dump(to_json(report));
  const std::string radar = radar_csv(report);
  write_file_atomic(out_dir / "comparison.json", json);
  write_file_atomic(out_dir / "radar.csv", radar);
  return report;
}

}  // namespace fla
