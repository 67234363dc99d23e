// fla: command-line front end for the landscape analysis toolkit.
//
// Exit codes: 0 ok, 2 usage, 3 input/config, 4 data miss, 5 internal.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fla/cellspace.hpp"
#include "fla/distfit.hpp"
#include "fla/error.hpp"
#include "fla/fitness.hpp"
#include "fla/io.hpp"
#include "fla/pipeline.hpp"
#include "fla/sampling.hpp"

namespace {

namespace fs = std::filesystem;

enum Exit : int { kOk = 0, kUsage = 2, kInput = 3, kDataMiss = 4, kInternal = 5 };

int exit_code_for(fla::ErrorCode code) {
  using fla::ErrorCode;
  switch (code) {
    case ErrorCode::EvalMiss:
    case ErrorCode::DeadEnd: return kDataMiss;
    case ErrorCode::TooFew: return kUsage;
    case ErrorCode::InvalidCell:
    case ErrorCode::SlotConflict:
    case ErrorCode::NotADag:
    case ErrorCode::InvalidStructure:
    case ErrorCode::BadGenotype:
    case ErrorCode::Exhausted:
    case ErrorCode::ParseError:
    case ErrorCode::DuplicateKey:
    case ErrorCode::InvalidArgument:
    case ErrorCode::SchemaError:
    case ErrorCode::IoError:
    case ErrorCode::LengthMismatch:
    case ErrorCode::TooFewSamples:
    case ErrorCode::Degenerate:
    case ErrorCode::Empty:
    case ErrorCode::EmptyPopulation:
    case ErrorCode::SourceMismatch:
    case ErrorCode::BudgetMismatch:
    case ErrorCode::AllFlagged: return kInput;
    default: return kInternal;
  }
}

void emit(const std::optional<std::string>& out, const std::string& content) {
  if (out && !out->empty() && *out != "-") {
    fla::write_file_atomic(*out, content);
  } else {
    std::cout << content;
  }
}

struct ConfigOverrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output_dir;
  std::optional<std::size_t> samples;
  std::optional<std::size_t> walk_steps;
  std::optional<double> nmax;
  std::optional<std::size_t> window;
  std::optional<fla::Budget> b_ref;
  std::vector<fla::Budget> budgets;

  void add_to(CLI::App* cmd, bool analysis_flags) {
    cmd->add_option("--config", config, "Run config (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--output-dir", output_dir, "Override output_dir");
    if (!analysis_flags) return;
    cmd->add_option("--seed", seed, "Override seed (else config, else FLA_SEED)");
    cmd->add_option("--samples", samples, "Override sample count");
    cmd->add_option("--walk-steps", walk_steps, "Override walk length");
    cmd->add_option("--nmax", nmax, "Override persistence grid bound");
    cmd->add_option("--window", window, "Override moving-average window");
    cmd->add_option("--b-ref", b_ref, "Override reference budget");
    cmd->add_option("--budgets", budgets, "Override budgets");
  }

  /// Loads the config; command-line paths stay relative to the working
  /// directory while config paths are relative to the config file.
  std::pair<fla::RunConfig, fs::path> load() const {
    fla::RunConfig cfg = fla::load_config(config);
    fs::path base = fs::path(config).parent_path();
    if (seed) cfg.seed = seed;
    if (samples) cfg.samples = *samples;
    if (walk_steps) cfg.walk_steps = *walk_steps;
    if (nmax) cfg.nmax = *nmax;
    if (window) cfg.window = *window;
    if (b_ref) cfg.b_ref = *b_ref;
    if (!budgets.empty()) cfg.budgets = budgets;
    if (output_dir) cfg.output_dir = fs::absolute(*output_dir).string();
    fla::check_config(cfg);
    return {cfg, base};
  }
};

int cmd_sample(std::size_t n, std::optional<std::uint64_t> seed, const std::string& method,
               const std::optional<std::string>& out) {
  if (n == 0) {
    std::cerr << "sample: --n must be >= 1\n";
    return kUsage;
  }
  const std::uint64_t s = fla::resolve_seed(seed);
  const auto cells = method == "lhs" ? fla::lhs_sample(n, s) : fla::uniform_sample(n, s);
  emit(out, fla::samples_csv(cells));
  return kOk;
}

fla::Genotype random_start(std::uint64_t seed) {
  for (std::uint64_t attempt = 0; attempt < 10'000; ++attempt) {
    const auto cell = fla::uniform_sample(1, fla::hash_words({seed, 0x7374617274ULL, attempt})).front();
    const auto g = fla::encode(cell);
    if (!fla::neighbors(g, fla::NeighborMode::Valid).empty()) return g;
  }
  throw fla::Error(fla::ErrorCode::Exhausted, "no start cell with a valid neighbor");
}

struct WalkArgs {
  std::string start = "random";
  std::size_t steps = 100;
  std::optional<std::uint64_t> seed;
  std::string source;
  std::optional<fla::Budget> budget;
  std::string config;
  std::string table;
  std::optional<std::string> out;
};

int cmd_walk(const WalkArgs& a) {
  std::optional<fla::FitnessSource> source;
  fla::Budget budget = a.budget.value_or(fla::kDefaultReferenceBudget);
  std::optional<std::uint64_t> seed = a.seed;
  if (!a.config.empty()) {
    const auto cfg = fla::load_config(a.config);
    if (!seed) seed = cfg.seed;
    if (!a.budget) budget = cfg.b_ref;
    for (auto& loaded : fla::load_sources(cfg, fs::path(a.config).parent_path())) {
      if (loaded.decl.name == a.source) source = loaded.source;
    }
    if (!source) throw fla::Error(fla::ErrorCode::InvalidArgument, "no source named '" + a.source + "' in config");
  } else if (!a.table.empty()) {
    auto table = std::make_shared<const fla::FitnessTable>(fla::load_table(a.table));
    source = fla::FitnessSource::tabular(a.source, table);
  } else {
    std::cerr << "walk: need --config or --table\n";
    return kUsage;
  }
  const std::uint64_t s = fla::resolve_seed(seed);
  const fla::Genotype start = a.start == "random" ? random_start(s) : fla::Genotype::from_hex(a.start);
  const auto trace = fla::random_walk(start, a.steps, s, *source, budget);
  emit(a.out, fla::walk_jsonl(trace));
  return kOk;
}

struct FitArgs {
  std::string table;
  std::string source;
  fla::Budget budget = fla::kDefaultReferenceBudget;
  bool table_mode = false;
  std::optional<std::string> out;
};

int cmd_fit(const FitArgs& a) {
  const auto table = fla::load_table(a.table);
  std::vector<double> values;
  for (const auto* r : table.select(a.source, a.budget)) values.push_back(r->fitness_test);
  const auto fits = fla::fit_all(values);
  if (a.table_mode) {
    emit(a.out, fla::fit_table_csv(fits));
    return kOk;
  }
  fla::Json j = fla::versioned();
  j["source"] = a.source;
  j["budget"] = a.budget;
  fla::Json arr = fla::Json::array();
  for (const auto& f : fits) arr.push_back(fla::to_json(f));
  j["fits"] = std::move(arr);
  j["best"] = std::string(fla::to_string(fla::select_best(fits).dist.family));
  emit(a.out, fla::dump(j));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fitness landscape analysis for cell-based architecture search spaces"};
  app.require_subcommand(1);

  // sample
  std::size_t sample_n = 100;
  std::optional<std::uint64_t> sample_seed;
  std::string sample_method = "lhs";
  std::optional<std::string> sample_out;
  auto* sample = app.add_subcommand("sample", "Sample valid cells; writes model_id,genotype_hex CSV");
  sample->add_option("--n", sample_n, "Number of cells")->capture_default_str();
  sample->add_option("--seed", sample_seed, "Seed (default: FLA_SEED, else 0)");
  sample->add_option("--method", sample_method, "lhs or uniform")
      ->check(CLI::IsMember({"lhs", "uniform"}))
      ->capture_default_str();
  sample->add_option("--out", sample_out, "Output file (default stdout)");

  // walk
  WalkArgs walk_args;
  auto* walk = app.add_subcommand("walk", "Random walk over valid Hamming-1 neighbors; writes JSON lines");
  walk->add_option("--start", walk_args.start, "Start genotype hex, or 'random'")->capture_default_str();
  walk->add_option("--steps", walk_args.steps, "Number of steps")->capture_default_str();
  walk->add_option("--seed", walk_args.seed, "Seed (default: config, FLA_SEED, else 0)");
  walk->add_option("--source", walk_args.source, "Source name")->required();
  walk->add_option("--budget", walk_args.budget, "Budget in epochs (default: config b_ref, else 4)");
  auto* walk_cfg = walk->add_option("--config", walk_args.config, "Run config declaring the source");
  auto* walk_table = walk->add_option("--table", walk_args.table, "Evaluation CSV for a tabular source");
  walk_cfg->excludes(walk_table);
  walk->add_option("--out", walk_args.out, "Output file (default stdout)");

  // analyze / footprint
  ConfigOverrides analyze_opts;
  auto* analyze = app.add_subcommand("analyze", "Run every analysis for every (source, budget) of a config");
  analyze_opts.add_to(analyze, true);
  ConfigOverrides footprint_opts;
  auto* footprint = app.add_subcommand("footprint", "Assemble footprints from analysis outputs");
  footprint_opts.add_to(footprint, false);

  // compare
  std::vector<std::string> compare_inputs;
  std::string compare_out = ".";
  auto* compare = app.add_subcommand("compare", "Compare footprints; writes comparison.json and radar.csv");
  compare->add_option("footprints", compare_inputs, "Footprint JSON files")->required();
  compare->add_option("--out", compare_out, "Output directory")->capture_default_str();

  // fit
  FitArgs fit_args;
  auto* fit = app.add_subcommand("fit", "Fit Beta, Weibull and Log-normal to one (source, budget) column");
  fit->add_option("--table", fit_args.table, "Evaluation CSV")->required()->check(CLI::ExistingFile);
  fit->add_option("--source", fit_args.source, "Source name")->required();
  fit->add_option("--budget", fit_args.budget, "Budget in epochs")->capture_default_str();
  fit->add_flag("--table-mode", fit_args.table_mode, "Emit the families x {Likelihood, AIC, BIC} CSV");
  fit->add_option("--out", fit_args.out, "Output file (default stdout)");

  // encode / decode
  std::string encode_cell;
  auto* encode = app.add_subcommand("encode", "Encode a cell JSON file into a genotype hex string");
  encode->add_option("cell", encode_cell, "Cell JSON file")->required()->check(CLI::ExistingFile);
  std::string decode_hex;
  auto* decode = app.add_subcommand("decode", "Decode a genotype hex string into cell JSON");
  decode->add_option("genotype", decode_hex, "74-character hex genotype")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*sample) return cmd_sample(sample_n, sample_seed, sample_method, sample_out);
    if (*walk) return cmd_walk(walk_args);
    if (*analyze) {
      const auto [cfg, base] = analyze_opts.load();
      fla::run_analyze(cfg, base);
      return kOk;
    }
    if (*footprint) {
      const auto [cfg, base] = footprint_opts.load();
      for (const auto& p : fla::run_footprint(cfg, base)) std::cout << p.string() << "\n";
      return kOk;
    }
    if (*compare) {
      std::vector<fs::path> files(compare_inputs.begin(), compare_inputs.end());
      fla::run_compare(files, compare_out);
      return kOk;
    }
    if (*fit) return cmd_fit(fit_args);
    if (*encode) {
      const auto cell = fla::cell_from_json(fla::parse_json(fla::read_file(encode_cell), encode_cell));
      std::cout << fla::encode(cell).hex() << "\n";
      return kOk;
    }
    if (*decode) {
      std::cout << fla::to_json(fla::decode(fla::Genotype::from_hex(decode_hex))).dump() << "\n";
      return kOk;
    }
  } catch (const fla::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: IO_ERROR: " << e.what() << "\n";
    return kInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kUsage;
}
