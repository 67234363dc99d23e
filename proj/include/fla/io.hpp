#pragma once

// JSON / CSV / JSON-lines forms of every artifact the toolkit reads or
// writes. JSON objects carry "schema_version" and are checked on read.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "fla/cellspace.hpp"
#include "fla/distfit.hpp"
#include "fla/error.hpp"
#include "fla/fitness.hpp"
#include "fla/footprint.hpp"
#include "fla/metrics.hpp"
#include "fla/numfmt.hpp"
#include "fla/persistence.hpp"
#include "fla/sampling.hpp"

namespace fla {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

// ---------------------------------------------------------------------------
// Helpers

inline Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json versioned() {
  Json j = Json::object();
  j["schema_version"] = kSchemaVersion;
  return j;
}

inline void require_version(const Json& j, std::string_view what) {
  if (!j.is_object() || !j.contains("schema_version") || !j["schema_version"].is_number_integer()) {
    throw Error(ErrorCode::SchemaError, std::string(what) + ": missing schema_version");
  }
  if (j["schema_version"].get<int>() != kSchemaVersion) {
    throw Error(ErrorCode::SchemaError, std::string(what) + ": unsupported schema_version " +
                                            j["schema_version"].dump());
  }
}

template <class T>
T field(const Json& j, const char* key, std::string_view what) {
  if (!j.is_object() || !j.contains(key)) {
    throw Error(ErrorCode::SchemaError, std::string(what) + ": missing field '" + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::SchemaError, std::string(what) + ": field '" + key + "' has the wrong type");
  }
}

inline Json parse_json(const std::string& text, std::string_view what) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::SchemaError, std::string(what) + ": " + e.what());
  }
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Writes via a sibling temporary file and a rename, so readers never see
/// a partially written file.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw Error(ErrorCode::IoError, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

/// FNV-1a 64, used to pin provenance ids to exact file contents.
inline std::string content_hash(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = detail::hex_digit(static_cast<unsigned>(h));
  return out;
}

// ---------------------------------------------------------------------------
// Cells and genotypes

inline Json to_json(const CellSpec& cell) {
  Json j = Json::object();
  j["num_nodes"] = cell.num_nodes;
  Json adj = Json::array();
  for (const auto& row : cell.adjacency) {
    Json r = Json::array();
    for (bool b : row) r.push_back(b);
    adj.push_back(std::move(r));
  }
  j["adjacency"] = std::move(adj);
  Json ops = Json::array();
  for (Op op : cell.ops) ops.push_back(std::string(op_name(op)));
  j["ops"] = std::move(ops);
  return j;
}

inline CellSpec cell_from_json(const Json& j) {
  constexpr std::string_view what = "cell";
  CellSpec cell;
  cell.num_nodes = field<int>(j, "num_nodes", what);
  const auto adj = field<std::vector<std::vector<bool>>>(j, "adjacency", what);
  cell.adjacency = adj;
  for (const auto& name : field<std::vector<std::string>>(j, "ops", what)) {
    const auto op = parse_op(name);
    if (!op) throw Error(ErrorCode::SchemaError, "cell: unknown operator '" + name + "'");
    cell.ops.push_back(*op);
  }
  return cell;
}

// ---------------------------------------------------------------------------
// Samples and walks

/// Sampler output: model_id,genotype_hex.
inline std::string samples_csv(const std::vector<CellSpec>& cells) {
  std::string out = "model_id,genotype_hex\n";
  for (std::size_t i = 0; i < cells.size(); ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "m%04zu", i);
    out += id;
    out += ',';
    out += encode(cells[i]).hex();
    out += '\n';
  }
  return out;
}

/// One {"t", "genotype", "fitness"} object per line.
inline std::string walk_jsonl(const WalkTrace& walk) {
  std::string out;
  for (std::size_t t = 0; t < walk.steps.size(); ++t) {
    Json j = Json::object();
    j["t"] = t;
    j["genotype"] = walk.steps[t].hex();
    j["fitness"] = walk.fitness[t];
    out += j.dump();
    out += '\n';
  }
  return out;
}

inline WalkTrace parse_walk_jsonl(const std::string& text) {
  WalkTrace walk;
  std::istringstream in(text);
  std::string line;
  std::size_t expected_t = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const Json j = parse_json(line, "walk line");
    if (field<std::size_t>(j, "t", "walk line") != expected_t++) {
      throw Error(ErrorCode::SchemaError, "walk: step indices are not consecutive");
    }
    walk.steps.push_back(Genotype::from_hex(field<std::string>(j, "genotype", "walk line")));
    walk.fitness.push_back(field<double>(j, "fitness", "walk line"));
  }
  return walk;
}

// ---------------------------------------------------------------------------
// Metrics

inline Json to_json(const FitnessStats& s) {
  Json j = Json::object();
  j["mean"] = s.mean;
  j["std"] = s.stddev;
  j["variance"] = s.variance();
  j["min"] = s.min;
  j["max"] = s.max;
  j["n"] = s.n;
  return j;
}

inline FitnessStats stats_from_json(const Json& j) {
  constexpr std::string_view what = "stats";
  FitnessStats s;
  s.mean = field<double>(j, "mean", what);
  s.stddev = field<double>(j, "std", what);
  s.min = field<double>(j, "min", what);
  s.max = field<double>(j, "max", what);
  s.n = field<std::size_t>(j, "n", what);
  return s;
}

/// distance,fitness rows.
inline std::string fdc_csv(const FDCResult& r) {
  std::string out = "distance,fitness\n";
  for (const auto& p : r.points) out += std::to_string(p.distance) + "," + format_number(p.fitness) + "\n";
  return out;
}

inline Json fdc_sidecar(const FDCResult& r) {
  Json j = versioned();
  j["optimum_id"] = r.optimum_id;
  j["pearson_r"] = r.pearson_r ? Json(*r.pearson_r) : Json("UNDEFINED");
  j["n_points"] = r.points.size();
  return j;
}

inline Json to_json(const RuggednessResult& r) {
  Json j = Json::object();
  j["rho1"] = number_or_null(r.rho1);
  j["tau"] = r.tau ? Json(*r.tau) : Json(nullptr);
  j["walk_len"] = r.walk_len;
  j["flag"] = r.flag.empty() ? Json(nullptr) : Json(r.flag);
  return j;
}

inline RuggednessResult ruggedness_from_json(const Json& j) {
  constexpr std::string_view what = "ruggedness";
  RuggednessResult r;
  if (!j.contains("rho1") || !j.contains("tau") || !j.contains("flag")) {
    throw Error(ErrorCode::SchemaError, "ruggedness: missing rho1/tau/flag");
  }
  r.rho1 = j["rho1"].is_null() ? std::numeric_limits<double>::quiet_NaN() : field<double>(j, "rho1", what);
  if (!j["tau"].is_null()) r.tau = field<double>(j, "tau", what);
  r.walk_len = field<std::size_t>(j, "walk_len", what);
  if (!j["flag"].is_null()) r.flag = field<std::string>(j, "flag", what);
  if (!r.tau && r.flag.empty()) throw Error(ErrorCode::SchemaError, "ruggedness: tau is null without a flag");
  return r;
}

inline Json to_json(const LocalOptimaResult& r) {
  Json j = Json::object();
  j["count"] = r.count;
  j["mode"] = std::string(to_string(r.mode));
  j["ids"] = r.ids;
  return j;
}

inline LocalOptimaResult local_optima_from_json(const Json& j) {
  constexpr std::string_view what = "local_optima";
  LocalOptimaResult r;
  r.count = field<std::size_t>(j, "count", what);
  const auto mode = field<std::string>(j, "mode", what);
  if (mode == "EXACT") {
    r.mode = OptimaMode::Exact;
  } else if (mode == "ESTIMATE") {
    r.mode = OptimaMode::Estimate;
  } else {
    throw Error(ErrorCode::SchemaError, "local_optima: unknown mode '" + mode + "'");
  }
  r.ids = field<std::vector<std::string>>(j, "ids", what);
  return r;
}

// ---------------------------------------------------------------------------
// Distribution fits

/// {family, params:{...}, loglik, aic, bic, n, converged}
inline Json to_json(const FitResult& f) {
  Json j = Json::object();
  j["family"] = std::string(to_string(f.dist.family));
  const auto names = param_names(f.dist.family);
  Json params = Json::object();
  params[std::string(names[0])] = f.dist.a;
  params[std::string(names[1])] = f.dist.b;
  j["params"] = std::move(params);
  j["loglik"] = f.loglik;
  j["aic"] = f.aic;
  j["bic"] = f.bic;
  j["n"] = f.n;
  j["converged"] = f.converged;
  j["iterations"] = f.iterations;
  return j;
}

inline FitResult fit_from_json(const Json& j) {
  constexpr std::string_view what = "fit";
  FitResult f;
  const auto family = parse_family(field<std::string>(j, "family", what));
  if (!family) throw Error(ErrorCode::SchemaError, "fit: unknown family");
  f.dist.family = *family;
  const auto names = param_names(*family);
  const Json& params = j.at("params");
  f.dist.a = field<double>(params, std::string(names[0]).c_str(), what);
  f.dist.b = field<double>(params, std::string(names[1]).c_str(), what);
  f.loglik = field<double>(j, "loglik", what);
  f.aic = field<double>(j, "aic", what);
  f.bic = field<double>(j, "bic", what);
  f.n = field<std::size_t>(j, "n", what);
  f.converged = field<bool>(j, "converged", what);
  if (j.contains("iterations")) f.iterations = field<int>(j, "iterations", what);
  return f;
}

/// The 3x3 layout: one row per criterion, one column per family.
inline std::string fit_table_csv(const std::vector<FitResult>& fits) {
  std::string out = "metric";
  for (const auto& f : fits) out += "," + std::string(to_string(f.dist.family));
  out += '\n';
  const char* rows[] = {"Likelihood", "AIC", "BIC"};
  for (int r = 0; r < 3; ++r) {
    out += rows[r];
    for (const auto& f : fits) {
      const double v = r == 0 ? f.loglik : (r == 1 ? f.aic : f.bic);
      out += "," + format_number(v);
    }
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Persistence

inline std::string persistence_curve_csv(const PersistenceCurve& c) {
  std::string out = "n_percent,persistence_percent\n";
  for (const auto& [n, p] : c.points) out += format_number(n) + "," + format_number(p) + "\n";
  return out;
}

/// {direction, b_ref, b, auc, p_at_nmax}
inline Json to_json(const PersistenceSummary& s) {
  Json j = Json::object();
  j["direction"] = std::string(to_string(s.direction));
  j["b_ref"] = s.b_ref;
  j["b"] = s.b;
  j["n_max"] = s.n_max;
  j["auc"] = s.auc;
  j["p_at_nmax"] = s.p_at_nmax;
  return j;
}

inline PersistenceSummary persistence_summary_from_json(const Json& j) {
  constexpr std::string_view what = "persistence summary";
  PersistenceSummary s;
  const auto dir = field<std::string>(j, "direction", what);
  if (dir == "TOP") {
    s.direction = Direction::Top;
  } else if (dir == "BOTTOM") {
    s.direction = Direction::Bottom;
  } else {
    throw Error(ErrorCode::SchemaError, "persistence summary: unknown direction '" + dir + "'");
  }
  s.b_ref = field<Budget>(j, "b_ref", what);
  s.b = field<Budget>(j, "b", what);
  if (j.contains("n_max")) s.n_max = field<double>(j, "n_max", what);
  s.auc = field<double>(j, "auc", what);
  s.p_at_nmax = field<double>(j, "p_at_nmax", what);
  return s;
}

// ---------------------------------------------------------------------------
// Footprints and comparison reports

/// {schema_version, source, budget, metrics:{...}, flags:{...}, provenance:[...]}
inline Json to_json(const Footprint& fp) {
  Json j = versioned();
  j["source"] = fp.source;
  j["budget"] = fp.budget;
  Json metrics = Json::object();
  Json flags = Json::object();
  for (Axis a : kAllAxes) {
    const auto& slot = fp[a];
    const std::string name(axis_name(a));
    metrics[name] = slot.value ? number_or_null(*slot.value) : Json(nullptr);
    if (!slot.flag.empty()) flags[name] = slot.flag;
  }
  j["metrics"] = std::move(metrics);
  j["flags"] = std::move(flags);
  j["provenance"] = fp.provenance;
  return j;
}

inline Footprint footprint_from_json(const Json& j) {
  constexpr std::string_view what = "footprint";
  require_version(j, what);
  Footprint fp;
  fp.source = field<std::string>(j, "source", what);
  fp.budget = field<Budget>(j, "budget", what);
  const Json& metrics = j.contains("metrics") ? j["metrics"] : Json();
  const Json& flags = j.contains("flags") ? j["flags"] : Json();
  if (!metrics.is_object() || !flags.is_object()) {
    throw Error(ErrorCode::SchemaError, "footprint: metrics and flags must be objects");
  }
  if (metrics.size() != kAxes) throw Error(ErrorCode::SchemaError, "footprint: expected exactly 8 metrics");
  for (auto it = flags.begin(); it != flags.end(); ++it) {
    if (!parse_axis(it.key())) throw Error(ErrorCode::SchemaError, "footprint: unknown flag axis " + it.key());
  }
  for (Axis a : kAllAxes) {
    const std::string name(axis_name(a));
    if (!metrics.contains(name)) throw Error(ErrorCode::SchemaError, "footprint: missing metric " + name);
    auto& slot = fp[a];
    if (!metrics[name].is_null()) slot.value = field<double>(metrics, name.c_str(), what);
    if (flags.contains(name)) slot.flag = field<std::string>(flags, name.c_str(), what);
    if (!slot.value && slot.flag.empty()) {
      throw Error(ErrorCode::SchemaError, "footprint: metric " + name + " has neither value nor flag");
    }
  }
  fp.provenance = field<std::vector<std::string>>(j, "provenance", what);
  return fp;
}

inline Json to_json(const ComparisonReport& r) {
  Json j = versioned();
  Json fps = Json::array();
  for (const auto& fp : r.footprints) fps.push_back(to_json(fp));
  j["footprints"] = std::move(fps);
  Json axes = Json::array();
  for (Axis a : kAllAxes) axes.push_back(std::string(axis_name(a)));
  j["axes"] = std::move(axes);
  j["legend"] = "min-max scaled per axis across the compared footprints; equal values map to 0.5; "
                "axes keep their raw orientation (no lower-is-better inversion); unvalued slots map to 0";
  Json norm = Json::array();
  for (const auto& v : r.normalized) {
    Json e = Json::object();
    e["label"] = v.label;
    e["values"] = v.values;
    Json flagged = Json::array();
    for (std::size_t a = 0; a < kAxes; ++a) {
      if (v.flagged[a]) flagged.push_back(std::string(axis_name(kAllAxes[a])));
    }
    e["flagged"] = std::move(flagged);
    norm.push_back(std::move(e));
  }
  j["normalized"] = std::move(norm);
  Json ranks = Json::array();
  for (const auto& rk : r.rankings) {
    Json e = Json::object();
    e["axis"] = std::string(axis_name(rk.axis));
    e["status"] = rk.status;
    e["order"] = rk.order;
    e["ranks"] = rk.ranks;
    ranks.push_back(std::move(e));
  }
  j["rankings"] = std::move(ranks);
  j["provenance"] = r.provenance;
  return j;
}

/// axis,source,raw,normalized; raw is empty for unvalued slots.
inline std::string radar_csv(const ComparisonReport& r) {
  std::string out = "axis,source,raw,normalized\n";
  for (Axis a : kAllAxes) {
    const auto idx = static_cast<std::size_t>(a);
    for (std::size_t i = 0; i < r.footprints.size(); ++i) {
      const auto& slot = r.footprints[i][a];
      out += std::string(axis_name(a)) + "," + r.normalized[i].label + ",";
      if (slot.value && std::isfinite(*slot.value)) out += format_number(*slot.value);
      out += "," + format_number(r.normalized[i].values[idx]) + "\n";
    }
  }
  return out;
}

}  // namespace fla
