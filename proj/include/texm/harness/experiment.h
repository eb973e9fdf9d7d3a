#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "texm/harness/metrics.h"
#include "texm/syntex/corpus.h"

namespace texm::harness {

inline constexpr int kDefaultPairs = 100;

struct ConsistencyReport {
  std::string texture;
  std::string param;
  std::string metric;
  double same_param_mean = 0;
  // Largest anchor-curve value of the same corpus and metric.
  double max_cross_param_mean = 0;
  // 100 * same / max; absent when the normalizer is zero.
  std::optional<double> relative_mean_pct;
  int n_pairs = 0;
  std::uint64_t pair_seed = 0;
  // Set when the normalizer is below the same-parameter mean.
  bool normalizer_below_same = false;

  bool operator==(const ConsistencyReport&) const = default;
};

struct SensitivityReport {
  std::string texture;
  std::string param;
  std::string metric;
  // Mean distance from the anchor (index 0) for value indices 1..n_values-2.
  std::vector<double> curve;
  // Population sd over versions per point; zeros for FAD (one value each).
  std::vector<double> spread;
  std::vector<int> comparisons;
  // Pearson r of curve against the value index; absent when degenerate.
  std::optional<double> pearson_vs_param;
  std::optional<double> pearson_vs_ranks;
  bool degenerate = false;

  bool operator==(const SensitivityReport&) const = default;
};

struct RankData {
  std::string texture;
  std::string param;
  std::vector<double> avg_ranks;
};

struct RunInfo {
  std::string software_version;
  std::uint64_t ensemble_seed = 0;
  std::uint64_t pair_seed = 0;
  std::uint64_t embedding_seed = 0;
  std::string cpm_pair_strategy;
  std::string embedding_provenance;
  std::string fad_regularization;
  std::string config_fingerprint;
  std::string timestamp;

  bool operator==(const RunInfo&) const = default;
};

struct ExperimentReport {
  RunInfo info;
  std::vector<ConsistencyReport> consistency;
  std::vector<SensitivityReport> sensitivity;

  bool operator==(const ExperimentReport&) const = default;
};

// Anchor protocol over every requested metric at once, so each clip's
// features are computed a single time.
std::vector<SensitivityReport> run_sensitivity(const syntex::SweepManifest& manifest,
                                               std::span<const MetricId> metrics,
                                               MetricEngine& engine);
SensitivityReport run_sensitivity(const syntex::SweepManifest& manifest, MetricId metric,
                                  MetricEngine& engine);

// Same-parameter pairs, normalized by the maximum of the matching anchor
// curve. `curves` may carry precomputed sensitivity reports; missing ones
// are computed.
std::vector<ConsistencyReport> run_consistency(const syntex::SweepManifest& manifest,
                                               std::span<const MetricId> metrics,
                                               MetricEngine& engine, std::uint64_t pair_seed = 0,
                                               int n_pairs = kDefaultPairs,
                                               std::span<const SensitivityReport> curves = {});
ConsistencyReport run_consistency(const syntex::SweepManifest& manifest, MetricId metric,
                                  MetricEngine& engine, std::uint64_t pair_seed = 0,
                                  int n_pairs = kDefaultPairs);

// (value_index, version_a, version_b) triples drawn without replacement.
struct SamePair {
  int value_index;
  int version_a;
  int version_b;
  auto operator<=>(const SamePair&) const = default;
};
std::vector<SamePair> sample_same_pairs(int n_values, int n_versions, int n_pairs,
                                        std::uint64_t seed);

// Stores and returns Pearson r between the curve and the ranks.
double correlate_with_ranks(SensitivityReport& report, const RankData& ranks);
// CSV with header texture,param,rank_1,...,rank_n.
std::vector<RankData> load_rank_file(const std::filesystem::path& path);

enum class ReportFormat { kJson, kCsv };
nlohmann::ordered_json report_json(const ExperimentReport& r);
ExperimentReport report_from_json(const nlohmann::json& j);
void emit_report(const ExperimentReport& r, const std::filesystem::path& path, ReportFormat format);
ExperimentReport load_report(const std::filesystem::path& path);

struct SynthSource {
  std::string texture;
  std::string param;
  syntex::CorpusOptions options;
};

struct CorpusSource {
  // Manifest to read, or the directory a synth source renders into.
  std::filesystem::path manifest;
  std::optional<SynthSource> synth;
};

struct ExperimentConfig {
  std::vector<CorpusSource> corpora;
  std::vector<MetricId> metrics;
  bool consistency = true;
  bool sensitivity = true;
  int n_pairs = kDefaultPairs;
  std::uint64_t ensemble_seed = 0;
  std::uint64_t pair_seed = 0;
  std::uint64_t embedding_seed = 0;
  std::filesystem::path ranks;
  std::filesystem::path json_out;
  std::filesystem::path csv_out;
  // Runtime knobs; they never change results.
  int jobs = 1;
  std::size_t memory_budget_mb = 1024;
  std::filesystem::path cache_dir;

  // The document as written (relative paths kept), for logging and the
  // fingerprint.
  nlohmann::ordered_json source;
};

// Relative paths resolve against the config file's directory.
ExperimentConfig parse_experiment_config(const nlohmann::json& j,
                                         const std::filesystem::path& base_dir);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
std::string config_fingerprint(const ExperimentConfig& cfg);

// Renders synth corpora that are missing or stale, validates manifests,
// runs the requested protocols and writes the configured outputs.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

std::string_view software_version();

}  // namespace texm::harness
