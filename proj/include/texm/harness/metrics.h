#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "texm/cochlear/cochlear.h"
#include "texm/gram/gram.h"
#include "texm/signal/stft.h"

namespace texm::harness {

enum class MetricId { kL2, kGm, kGmcos, kAgm, kCpm, kFad };

std::string_view metric_name(MetricId m);
// Throws kInvalidInput listing the valid ids.
MetricId parse_metric(std::string_view id);
// Comma-separated ids; duplicates dropped, order kept.
std::vector<MetricId> parse_metric_list(std::string_view ids);
std::span<const MetricId> all_metrics();
// FAD compares distributions, every other metric compares two clips.
inline bool is_pairwise(MetricId m) { return m != MetricId::kFad; }

// Whatever a clip needs for a set of metrics. Gram sets are large (about
// 12 MB at 512 filters) and are only kept when GM or GMcos asks for them.
struct ClipFeatures {
  std::optional<Spectrogram> spectrogram;
  std::optional<gram::GramSet> grams;
  std::optional<gram::GramVector> gram_vector;
  std::optional<cochlear::CochlearStats> cochlear;
  std::optional<Eigen::VectorXd> embedding;

  bool covers(std::span<const MetricId> metrics) const;
  std::size_t bytes() const;
};

struct MetricSettings {
  std::uint64_t ensemble_seed = 0;
  std::uint64_t embedding_seed = 0;
  cochlear::CochlearConfig cochlear;
  // Persists gram vectors, cochlear stats and embeddings; empty disables.
  std::filesystem::path cache_dir;
  std::size_t memory_budget = std::size_t{1} << 30;
  int jobs = 1;
};

// Computes and caches per-clip features and evaluates pairwise distances.
// Features are keyed by a hash of the WAV bytes, so renamed or copied files
// share entries. Safe to call from several threads.
class MetricEngine {
 public:
  explicit MetricEngine(MetricSettings settings = {});

  const MetricSettings& settings() const { return settings_; }
  // Built on first use; identical for every engine with the same seed.
  const gram::ConvEnsemble& ensemble();

  std::shared_ptr<const ClipFeatures> features(const std::filesystem::path& wav,
                                               std::span<const MetricId> metrics);
  // Uncached variant for in-memory clips.
  ClipFeatures features(const AudioClip& clip, std::span<const MetricId> metrics);

  // Throws kInvalidInput for FAD, which needs two sets of clips.
  double distance(MetricId m, const ClipFeatures& a, const ClipFeatures& b) const;

  std::size_t cached_bytes() const;

 private:
  void fill(ClipFeatures& f, const AudioClip& clip, std::span<const MetricId> metrics,
            const std::string& key);
  void insert(const std::string& key, std::shared_ptr<const ClipFeatures> f);
  std::filesystem::path disk_path(const std::string& key, std::string_view kind) const;

  MetricSettings settings_;
  std::once_flag ensemble_once_;
  std::unique_ptr<gram::ConvEnsemble> ensemble_;

  mutable std::mutex mutex_;
  std::list<std::string> lru_;  // front = most recent
  struct Entry {
    std::shared_ptr<const ClipFeatures> features;
    std::list<std::string>::iterator position;
    std::size_t bytes = 0;
  };
  std::unordered_map<std::string, Entry> entries_;
  std::size_t bytes_ = 0;
};

// FNV-1a of a file's bytes, as 16 hex digits.
std::string file_digest(const std::filesystem::path& path);

}  // namespace texm::harness
