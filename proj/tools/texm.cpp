// texm: synthesize texture corpora, compare clips, run the consistency and
// sensitivity experiments, and compute stand-in embeddings.
//
// Exit codes: 0 ok, 1 internal error, 2 bad arguments, 3 I/O or file format,
// 4 degenerate input, 5 manifest validation.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "texm/dist/distribution.h"
#include "texm/dist/embedding.h"
#include "texm/error.h"
#include "texm/harness/experiment.h"
#include "texm/harness/metrics.h"
#include "texm/signal/wav.h"
#include "texm/syntex/corpus.h"

namespace fs = std::filesystem;
using namespace texm;

namespace {

enum Exit { kOk = 0, kInternal = 1, kBadArgs = 2, kIoError = 3, kDegenerate = 4, kManifestError = 5 };

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput:
    case ErrorCode::kShapeMismatch:
    case ErrorCode::kParse: return kBadArgs;
    case ErrorCode::kIo:
    case ErrorCode::kTruncatedFile:
    case ErrorCode::kUnsupportedFormat: return kIoError;
    case ErrorCode::kDegenerateInput: return kDegenerate;
    case ErrorCode::kManifest: return kManifestError;
  }
  return kInternal;
}

// Nine significant digits in positional notation, so 0 prints as
// 0.000000000 and 1234.5 as 1234.50000.
std::string nine_digits(double v) {
  if (!std::isfinite(v)) return fmt::format("{}", v);
  const int magnitude = v == 0 ? -1 : static_cast<int>(std::floor(std::log10(std::abs(v))));
  const int decimals = std::max(0, 8 - magnitude);
  auto s = fmt::format("{:.{}f}", v, decimals);
  // Rounding can carry into a new leading digit (9.999999999 -> 10.00000000).
  if (v != 0 && std::floor(std::log10(std::abs(std::stod(s)))) > magnitude && decimals > 0)
    s = fmt::format("{:.{}f}", v, decimals - 1);
  return s;
}

std::optional<fs::path> env_cache_dir() {
  if (const char* dir = std::getenv("TEXM_CACHE_DIR"); dir && *dir) return fs::path(dir);
  return std::nullopt;
}

bool is_embedding_set(const fs::path& p) {
  return p.extension() == ".csv" || p.extension() == ".txt" || p.extension() == ".json";
}

dist::EmbeddingSet embedding_set(const fs::path& p, std::uint64_t seed, int jobs) {
  if (p.extension() != ".json") return dist::load_embeddings(p);
  const auto m = syntex::load_manifest(p);
  syntex::validate_manifest(m);
  std::vector<fs::path> wavs;
  for (const auto& e : m.files) wavs.push_back(m.resolve(e));
  return dist::stub_embed_files(wavs, seed, jobs);
}

struct SynthArgs {
  std::string texture, param;
  int n_values = 11, n_versions = 10, sample_rate = kDefaultSampleRate, jobs = 1;
  std::uint64_t seed = 0;
  double duration = 2.0;
  std::string out, config;
};

int cmd_synth(const SynthArgs& a) {
  const auto texture = syntex::require_texture(a.texture);
  syntex::CorpusOptions o;
  o.n_values = a.n_values;
  o.n_versions = a.n_versions;
  o.base_seed = a.seed;
  o.duration = a.duration;
  o.sample_rate = a.sample_rate;
  o.jobs = a.jobs;
  if (!a.config.empty()) o.config = syntex::load_synth_config(a.config);
  spdlog::info("synth config: {}", nlohmann::json{{"texture", a.texture}, {"param", a.param},
                                                  {"n_values", a.n_values}, {"n_versions", a.n_versions},
                                                  {"seed", a.seed}, {"duration", a.duration},
                                                  {"sample_rate", a.sample_rate}, {"out", a.out},
                                                  {"synth", o.config}}
                                       .dump());
  const auto m = syntex::render_corpus(texture, a.param, a.out, o);
  fmt::print("{}\n", (m.root / syntex::kManifestFile).string());
  return kOk;
}

struct MetricArgs {
  std::string metric, a, b;
  std::uint64_t seed = 0;
  int jobs = 1;
};

int cmd_metric(const MetricArgs& a) {
  const auto id = harness::parse_metric(a.metric);
  spdlog::info("metric config: {}", nlohmann::json{{"metric", a.metric}, {"a", a.a}, {"b", a.b}, {"seed", a.seed}}.dump());
  if (id == harness::MetricId::kFad) {
    require(is_embedding_set(a.a) && is_embedding_set(a.b), ErrorCode::kInvalidInput,
            "fad requires corpora: pass two manifests or two embedding sets (.csv or .txt)");
    const auto ea = embedding_set(a.a, a.seed, a.jobs);
    const auto eb = embedding_set(a.b, a.seed, a.jobs);
    const double d = dist::frechet_distance(dist::fit_gaussian(ea.vectors), dist::fit_gaussian(eb.vectors));
    fmt::print("{}\n", nine_digits(d));
    return kOk;
  }
  harness::MetricSettings s;
  s.ensemble_seed = a.seed;
  harness::MetricEngine engine(s);
  const harness::MetricId one[] = {id};
  const auto fa = engine.features(a.a, one);
  const auto fb = engine.features(a.b, one);
  fmt::print("{}\n", nine_digits(engine.distance(id, *fa, *fb)));
  return kOk;
}

struct ExperimentArgs {
  std::string config, metrics, json_out, csv_out, cache_dir;
  int jobs = 0;
};

int cmd_experiment(const ExperimentArgs& a) {
  std::ifstream in(a.config);
  require(in.good(), ErrorCode::kIo, "cannot open " + a.config);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::kParse, fmt::format("{}: {}", a.config, e.what()));
  }
  // Flags override the file; paths given on the command line stay relative
  // to the working directory.
  if (!a.metrics.empty()) j["metrics"] = a.metrics;
  if (a.jobs > 0) j["jobs"] = a.jobs;
  const auto cwd = fs::current_path();
  if (!a.json_out.empty()) j["output"]["json"] = (cwd / a.json_out).string();
  if (!a.csv_out.empty()) j["output"]["csv"] = (cwd / a.csv_out).string();
  if (!a.cache_dir.empty()) j["cache_dir"] = (cwd / a.cache_dir).string();
  else if (!j.contains("cache_dir"))
    if (auto dir = env_cache_dir()) j["cache_dir"] = dir->string();
  const auto cfg = harness::parse_experiment_config(j, fs::path(a.config).parent_path());
  spdlog::info("experiment config: {}", j.dump());
  const auto report = harness::run_experiment(cfg);
  if (!cfg.json_out.empty()) fmt::print("{}\n", cfg.json_out.string());
  if (!cfg.csv_out.empty()) fmt::print("{}\n", cfg.csv_out.string());
  if (cfg.json_out.empty() && cfg.csv_out.empty())
    std::cout << harness::report_json(report).dump(2) << '\n';
  return kOk;
}

struct EmbedArgs {
  std::vector<std::string> inputs;
  std::string out, ingest;
  std::uint64_t seed = 0;
  int jobs = 1;
  long dim = 0;
};

int cmd_embed(const EmbedArgs& a) {
  spdlog::info("embed config: {}", nlohmann::json{{"inputs", a.inputs}, {"out", a.out}, {"ingest", a.ingest},
                                                  {"seed", a.seed}, {"dim", a.dim}}
                                       .dump());
  if (!a.ingest.empty()) {
    const auto e = dist::load_embeddings(a.ingest, a.dim > 0 ? std::optional<Eigen::Index>(a.dim) : std::nullopt);
    fmt::print("{} {}\n", e.size(), e.dim());
    return kOk;
  }
  require(!a.inputs.empty(), ErrorCode::kInvalidInput, "embed needs WAV files, a manifest, or --ingest");
  require(!a.out.empty(), ErrorCode::kInvalidInput, "embed needs --out <file.csv>");
  std::vector<fs::path> wavs;
  for (const auto& in : a.inputs) {
    if (fs::path(in).extension() == ".json") {
      const auto m = syntex::load_manifest(in);
      syntex::validate_manifest(m);
      for (const auto& e : m.files) wavs.push_back(m.resolve(e));
    } else {
      wavs.emplace_back(in);
    }
  }
  const auto e = dist::stub_embed_files(wavs, a.seed, a.jobs);
  dist::save_embeddings_csv(e, a.out);
  fmt::print("{}\n", a.out);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  auto logger = spdlog::stderr_color_mt("texm");
  spdlog::set_default_logger(logger);

  CLI::App app{"Audio texture synthesis and texture-metric evaluation"};
  app.require_subcommand(1);
  bool verbose = false, quiet = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");
  app.add_flag("-q,--quiet", quiet, "Warnings and errors only");

  SynthArgs sa;
  auto* synth = app.add_subcommand("synth", "Render a parameter-sweep corpus and its manifest");
  synth->add_option("--texture", sa.texture, "Texture id")->required();
  synth->add_option("--param", sa.param, "Swept parameter (name or label)")->required();
  synth->add_option("--out", sa.out, "Output directory")->required();
  synth->add_option("--n-values", sa.n_values, "Parameter values")->capture_default_str();
  synth->add_option("--n-versions", sa.n_versions, "Versions per value")->capture_default_str();
  synth->add_option("--seed", sa.seed, "Base seed")->capture_default_str();
  synth->add_option("--duration", sa.duration, "Clip length in seconds")->capture_default_str();
  synth->add_option("--sample-rate", sa.sample_rate, "Sample rate")->capture_default_str();
  synth->add_option("--config", sa.config, "Synthesis constants (JSON)");
  synth->add_option("--jobs", sa.jobs, "Worker threads")->capture_default_str();

  MetricArgs ma;
  auto* metric = app.add_subcommand("metric", "Distance between two clips (l2, gm, gmcos, agm, cpm; fad between corpora)");
  metric->add_option("metric", ma.metric, "Metric id")->required();
  metric->add_option("a", ma.a, "First WAV (or manifest/embedding set for fad)")->required();
  metric->add_option("b", ma.b, "Second WAV (or manifest/embedding set for fad)")->required();
  metric->add_option("--seed", ma.seed, "Gram ensemble / embedding seed")->capture_default_str();
  metric->add_option("--jobs", ma.jobs, "Worker threads")->capture_default_str();

  ExperimentArgs ea;
  auto* experiment = app.add_subcommand("experiment", "Run consistency and sensitivity experiments from a config");
  experiment->add_option("config", ea.config, "Experiment config (JSON)")->required();
  experiment->add_option("--metrics", ea.metrics, "Comma-separated metric ids, overrides the config");
  experiment->add_option("--jobs", ea.jobs, "Worker threads, overrides the config");
  experiment->add_option("--json", ea.json_out, "JSON report path, overrides the config");
  experiment->add_option("--csv", ea.csv_out, "CSV report path, overrides the config");
  experiment->add_option("--cache-dir", ea.cache_dir, "Feature cache (default $TEXM_CACHE_DIR)");

  EmbedArgs ba;
  auto* embed = app.add_subcommand("embed", "Stand-in embeddings of WAVs or manifests, or validate an embedding file");
  embed->add_option("inputs", ba.inputs, "WAV files or manifest.json");
  embed->add_option("--out", ba.out, "CSV to write (a files.txt sidecar goes next to it)");
  embed->add_option("--ingest", ba.ingest, "Load an embedding CSV/list and print rows and dimension");
  embed->add_option("--dim", ba.dim, "Expected dimension for --ingest");
  embed->add_option("--seed", ba.seed, "Projection seed")->capture_default_str();
  embed->add_option("--jobs", ba.jobs, "Worker threads")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kBadArgs;
  }
  spdlog::set_level(verbose ? spdlog::level::debug : quiet ? spdlog::level::warn : spdlog::level::info);

  try {
    if (*synth) return cmd_synth(sa);
    if (*metric) return cmd_metric(ma);
    if (*experiment) return cmd_experiment(ea);
    if (*embed) return cmd_embed(ba);
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return exit_code(e.code());
  } catch (const std::exception& e) {
    spdlog::error("internal error: {}", e.what());
    return kInternal;
  }
  return kInternal;
}
