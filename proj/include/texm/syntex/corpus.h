#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "texm/syntex/synth_config.h"
#include "texm/syntex/texture.h"

namespace texm::syntex {

struct ManifestEntry {
  std::string path;  // relative to the manifest's directory
  int value_index = 0;
  int version = 0;
  std::uint64_t seed = 0;
};

// Description of a parameter sweep corpus. Written by render_corpus or
// authored by hand for recorded corpora.
struct SweepManifest {
  std::string texture_id;
  std::string swept_param;
  double param_min = 0;
  double param_max = 0;
  int n_values = 0;
  int n_versions = 0;
  int sample_rate = 0;
  double duration_s = 0;
  std::uint64_t base_seed = 0;
  std::vector<ManifestEntry> files;

  // Directory the relative paths resolve against; not serialized.
  std::filesystem::path root;

  std::filesystem::path resolve(const ManifestEntry& e) const { return root / e.path; }
  // Entry for (value_index, version); throws kManifest if absent.
  const ManifestEntry& at(int value_index, int version) const;
  double param_value(int value_index) const;
};

// Fields in their documented order.
nlohmann::ordered_json manifest_json(const SweepManifest& m);
void from_json(const nlohmann::json& j, SweepManifest& m);

void save_manifest(const SweepManifest& m, const std::filesystem::path& path);
// Throws kManifest when the document is malformed.
SweepManifest load_manifest(const std::filesystem::path& path);
// Checks dense value indices, every (value, version) pair, and that every
// referenced file exists. Throws kManifest naming the first problem.
void validate_manifest(const SweepManifest& m);

struct CorpusOptions {
  int n_values = 11;
  int n_versions = 10;
  std::uint64_t base_seed = 0;
  double duration = 2.0;
  int sample_rate = kDefaultSampleRate;
  int jobs = 1;
  SynthConfig config;
};

inline constexpr const char* kManifestFile = "manifest.json";

std::string corpus_dir_name(TextureId texture, const ParamInfo& param);

// Writes <out_dir>/<texture>-<label>/v<version>/p<value_index>.wav plus
// manifest.json in the same directory. All clips of one version share that
// version's seed; only the swept parameter changes along a version.
SweepManifest render_corpus(TextureId texture, std::string_view swept_param,
                            const std::filesystem::path& out_dir,
                            const CorpusOptions& options = {});

std::uint64_t version_seed(std::uint64_t base_seed, TextureId texture,
                           const ParamInfo& param, int version);

}  // namespace texm::syntex
