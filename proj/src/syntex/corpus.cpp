#include "texm/syntex/corpus.h"

#include <fstream>
#include <set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "texm/error.h"
#include "texm/parallel.h"
#include "texm/signal/rng.h"
#include "texm/signal/wav.h"
#include "texm/syntex/synth.h"

namespace texm::syntex {

namespace fs = std::filesystem;

const ManifestEntry& SweepManifest::at(int value_index, int version) const {
  for (const auto& e : files)
    if (e.value_index == value_index && e.version == version) return e;
  fail(ErrorCode::kManifest,
       fmt::format("manifest has no file for value {} version {}", value_index, version));
}

double SweepManifest::param_value(int value_index) const {
  if (n_values < 2) return param_min;
  return param_min + (param_max - param_min) * value_index / (n_values - 1);
}

nlohmann::ordered_json manifest_json(const SweepManifest& m) {
  nlohmann::ordered_json files = nlohmann::ordered_json::array();
  for (const auto& e : m.files)
    files.push_back({{"path", e.path},
                     {"value_index", e.value_index},
                     {"version", e.version},
                     {"seed", e.seed}});
  return {{"texture_id", m.texture_id},
          {"swept_param", m.swept_param},
          {"param_min", m.param_min},
          {"param_max", m.param_max},
          {"n_values", m.n_values},
          {"n_versions", m.n_versions},
          {"sample_rate", m.sample_rate},
          {"duration_s", m.duration_s},
          {"base_seed", m.base_seed},
          {"files", files}};
}

void from_json(const nlohmann::json& j, SweepManifest& m) {
  try {
    m.texture_id = j.at("texture_id").get<std::string>();
    m.swept_param = j.at("swept_param").get<std::string>();
    m.param_min = j.at("param_min").get<double>();
    m.param_max = j.at("param_max").get<double>();
    m.n_values = j.at("n_values").get<int>();
    m.n_versions = j.at("n_versions").get<int>();
    m.sample_rate = j.value("sample_rate", 0);
    m.duration_s = j.value("duration_s", 0.0);
    m.base_seed = j.value("base_seed", std::uint64_t{0});
    m.files.clear();
    for (const auto& f : j.at("files")) {
      ManifestEntry e;
      e.path = f.at("path").get<std::string>();
      e.value_index = f.at("value_index").get<int>();
      e.version = f.at("version").get<int>();
      e.seed = f.value("seed", std::uint64_t{0});
      m.files.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kManifest, std::string("malformed manifest: ") + e.what());
  }
}

void save_manifest(const SweepManifest& m, const fs::path& path) {
  std::ofstream out(path);
  require(out.good(), ErrorCode::kIo, "cannot write manifest " + path.string());
  out << manifest_json(m).dump(2) << '\n';
  require(out.good(), ErrorCode::kIo, "failed writing manifest " + path.string());
}

SweepManifest load_manifest(const fs::path& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::kIo, "cannot open manifest " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kManifest, path.string() + ": " + e.what());
  }
  SweepManifest m = j.get<SweepManifest>();
  m.root = path.parent_path();
  return m;
}

void validate_manifest(const SweepManifest& m) {
  auto check = [](bool ok, const std::string& what) {
    require(ok, ErrorCode::kManifest, "invalid manifest: " + what);
  };
  check(m.n_values >= 2, "n_values must be >= 2");
  check(m.n_versions >= 1, "n_versions must be >= 1");
  std::set<std::pair<int, int>> seen;
  for (const auto& e : m.files) {
    check(e.value_index >= 0 && e.value_index < m.n_values,
          fmt::format("{}: value_index {} outside 0..{}", e.path, e.value_index, m.n_values - 1));
    check(e.version >= 0 && e.version < m.n_versions,
          fmt::format("{}: version {} outside 0..{}", e.path, e.version, m.n_versions - 1));
    check(seen.emplace(e.value_index, e.version).second,
          fmt::format("duplicate entry for value {} version {}", e.value_index, e.version));
    check(fs::is_regular_file(m.resolve(e)), "missing file " + m.resolve(e).string());
  }
  for (int v = 0; v < m.n_values; ++v)
    for (int r = 0; r < m.n_versions; ++r)
      check(seen.count({v, r}) == 1,
            fmt::format("no file for value {} version {}", v, r));
}

std::string corpus_dir_name(TextureId texture, const ParamInfo& param) {
  return fmt::format("{}-{}", texture_name(texture), param.label);
}

std::uint64_t version_seed(std::uint64_t base_seed, TextureId texture, const ParamInfo& param,
                           int version) {
  const auto texture_seed = derive_seed(base_seed, corpus_dir_name(texture, param));
  return derive_seed(texture_seed, static_cast<std::uint64_t>(version));
}

SweepManifest render_corpus(TextureId texture, std::string_view swept_param,
                            const fs::path& out_dir, const CorpusOptions& options) {
  const ParamInfo* param = find_param(texture, swept_param);
  require(param != nullptr, ErrorCode::kInvalidInput,
          fmt::format("texture {} has no parameter '{}'", texture_name(texture), swept_param));
  require(options.n_versions >= 1, ErrorCode::kInvalidInput, "n_versions must be >= 1");
  const auto values = sweep_values(*param, options.n_values);

  SweepManifest m;
  m.texture_id = std::string(texture_name(texture));
  m.swept_param = param->name;
  m.param_min = values.front();
  m.param_max = values.back();
  m.n_values = options.n_values;
  m.n_versions = options.n_versions;
  m.sample_rate = options.sample_rate;
  m.duration_s = options.duration;
  m.base_seed = options.base_seed;
  m.root = out_dir / corpus_dir_name(texture, *param);

  std::error_code ec;
  for (int r = 0; r < options.n_versions; ++r) {
    fs::create_directories(m.root / fmt::format("v{}", r), ec);
    require(!ec, ErrorCode::kIo, "cannot create " + (m.root / fmt::format("v{}", r)).string() +
                                     ": " + ec.message());
  }
  for (int r = 0; r < options.n_versions; ++r)
    for (int v = 0; v < options.n_values; ++v)
      m.files.push_back({fmt::format("v{}/p{}.wav", r, v), v, r,
                         version_seed(options.base_seed, texture, *param, r)});

  parallel_for(m.files.size(), options.jobs, [&](std::size_t i) {
    const auto& e = m.files[i];
    TextureSpec spec;
    spec.texture = texture;
    spec.params[param->name] = values[e.value_index];
    spec.duration = options.duration;
    spec.sample_rate = options.sample_rate;
    spec.seed = e.seed;
    save_wav(synthesize(spec, options.config), m.resolve(e));
  });
  save_manifest(m, m.root / kManifestFile);
  spdlog::info("rendered {} clips into {}", m.files.size(), m.root.string());
  return m;
}

}  // namespace texm::syntex
