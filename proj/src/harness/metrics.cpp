#include "texm/harness/metrics.h"

#include <algorithm>
#include <array>
#include <fstream>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "texm/dist/distribution.h"
#include "texm/dist/embedding.h"
#include "texm/error.h"
#include "texm/signal/rng.h"
#include "texm/signal/wav.h"

namespace texm::harness {
namespace {

constexpr std::array<MetricId, 6> kAll{MetricId::kL2,  MetricId::kGm,  MetricId::kGmcos,
                                       MetricId::kAgm, MetricId::kCpm, MetricId::kFad};

bool wants(std::span<const MetricId> metrics, std::initializer_list<MetricId> any) {
  return std::any_of(metrics.begin(), metrics.end(), [&](MetricId m) {
    return std::find(any.begin(), any.end(), m) != any.end();
  });
}

std::size_t matrix_bytes(const Eigen::MatrixXd& m) {
  return static_cast<std::size_t>(m.size()) * sizeof(double);
}

// Loads a cached artifact, treating any unreadable file as a miss.
template <typename Load>
auto try_load(const std::filesystem::path& p, Load&& load) -> std::optional<decltype(load(p))> {
  if (p.empty() || !std::filesystem::exists(p)) return std::nullopt;
  try {
    return load(p);
  } catch (const Error& e) {
    spdlog::warn("ignoring unreadable cache entry {}: {}", p.string(), e.what());
    return std::nullopt;
  }
}

}  // namespace

std::string_view metric_name(MetricId m) {
  switch (m) {
    case MetricId::kL2: return "l2";
    case MetricId::kGm: return "gm";
    case MetricId::kGmcos: return "gmcos";
    case MetricId::kAgm: return "agm";
    case MetricId::kCpm: return "cpm";
    case MetricId::kFad: return "fad";
  }
  return "?";
}

MetricId parse_metric(std::string_view id) {
  for (MetricId m : kAll)
    if (metric_name(m) == id) return m;
  fail(ErrorCode::kInvalidInput,
       fmt::format("unknown metric '{}' (valid: l2, gm, gmcos, agm, cpm, fad)", id));
}

std::vector<MetricId> parse_metric_list(std::string_view ids) {
  std::vector<MetricId> out;
  while (!ids.empty()) {
    const auto comma = ids.find(',');
    const auto id = ids.substr(0, comma);
    if (!id.empty()) {
      const MetricId m = parse_metric(id);
      if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
    }
    if (comma == std::string_view::npos) break;
    ids.remove_prefix(comma + 1);
  }
  require(!out.empty(), ErrorCode::kInvalidInput, "no metrics given");
  return out;
}

std::span<const MetricId> all_metrics() { return kAll; }

bool ClipFeatures::covers(std::span<const MetricId> metrics) const {
  for (MetricId m : metrics) {
    switch (m) {
      case MetricId::kL2: if (!spectrogram) return false; break;
      case MetricId::kGm:
      case MetricId::kGmcos: if (!grams) return false; break;
      case MetricId::kAgm: if (!gram_vector) return false; break;
      case MetricId::kCpm: if (!cochlear) return false; break;
      case MetricId::kFad: if (!embedding) return false; break;
    }
  }
  return true;
}

std::size_t ClipFeatures::bytes() const {
  std::size_t n = sizeof(ClipFeatures);
  if (spectrogram) n += matrix_bytes(spectrogram->magnitudes);
  if (grams)
    for (const auto& g : grams->grams) n += matrix_bytes(g);
  if (gram_vector) n += static_cast<std::size_t>(gram_vector->size()) * sizeof(double);
  if (cochlear) n += cochlear::kStatCount * sizeof(double);
  if (embedding) n += static_cast<std::size_t>(embedding->size()) * sizeof(double);
  return n;
}

MetricEngine::MetricEngine(MetricSettings settings) : settings_(std::move(settings)) {
  if (!settings_.cache_dir.empty()) std::filesystem::create_directories(settings_.cache_dir);
}

const gram::ConvEnsemble& MetricEngine::ensemble() {
  std::call_once(ensemble_once_, [this] {
    ensemble_ = std::make_unique<gram::ConvEnsemble>(
        gram::init_ensemble(kDefaultFftSize / 2 + 1, settings_.ensemble_seed));
  });
  return *ensemble_;
}

std::filesystem::path MetricEngine::disk_path(const std::string& key, std::string_view kind) const {
  if (settings_.cache_dir.empty()) return {};
  std::uint64_t config = 0;
  if (kind == "agm") config = settings_.ensemble_seed;
  if (kind == "emb") config = settings_.embedding_seed;
  if (kind == "cpm") config = fnv1a(cochlear::kPairStrategy);
  return settings_.cache_dir / fmt::format("{}-{}-{:016x}.bin", key, kind, config);
}

void MetricEngine::fill(ClipFeatures& f, const AudioClip& clip, std::span<const MetricId> metrics,
                        const std::string& key) {
  if (wants(metrics, {MetricId::kL2}) && !f.spectrogram) f.spectrogram = stft_magnitude(clip);

  const bool need_grams = wants(metrics, {MetricId::kGm, MetricId::kGmcos}) && !f.grams;
  const bool need_vector = wants(metrics, {MetricId::kAgm}) && !f.gram_vector;
  if (need_vector && !need_grams && !f.grams)
    f.gram_vector = try_load(disk_path(key, "agm"), gram::load_gram_vector);
  if (need_grams || (need_vector && !f.gram_vector && !f.grams)) {
    const auto spec = f.spectrogram ? *f.spectrogram : stft_magnitude(clip);
    auto gs = gram::compute_gram_set(spec, ensemble());
    if (need_grams) f.grams = std::move(gs);
    else f.gram_vector = gram::accumulate_gram_vector(gs);
  }
  if (need_vector && !f.gram_vector) f.gram_vector = gram::accumulate_gram_vector(*f.grams);

  if (wants(metrics, {MetricId::kCpm}) && !f.cochlear) {
    f.cochlear = try_load(disk_path(key, "cpm"), cochlear::load_stats);
    if (!f.cochlear) f.cochlear = cochlear::compute_stats(clip, settings_.cochlear);
  }
  if (wants(metrics, {MetricId::kFad}) && !f.embedding) {
    f.embedding = try_load(disk_path(key, "emb"), gram::load_gram_vector);
    if (!f.embedding) f.embedding = dist::stub_embed(clip, settings_.embedding_seed);
  }

  if (!key.empty() && !settings_.cache_dir.empty()) {
    auto persist = [&](std::string_view kind, auto&& save) {
      const auto p = disk_path(key, kind);
      if (std::filesystem::exists(p)) return;
      const auto tmp = p.string() + fmt::format(".tmp{}", fnv1a(key) ^ std::hash<std::thread::id>{}(std::this_thread::get_id()));
      save(tmp);
      std::filesystem::rename(tmp, p);
    };
    if (f.gram_vector) persist("agm", [&](const std::string& p) { gram::save_gram_vector(*f.gram_vector, p); });
    if (f.cochlear) persist("cpm", [&](const std::string& p) { cochlear::save_stats(*f.cochlear, p); });
    if (f.embedding) persist("emb", [&](const std::string& p) { gram::save_gram_vector(*f.embedding, p); });
  }
}

std::shared_ptr<const ClipFeatures> MetricEngine::features(const std::filesystem::path& wav,
                                                           std::span<const MetricId> metrics) {
  const std::string key = file_digest(wav);
  std::shared_ptr<const ClipFeatures> have;
  {
    std::lock_guard lock(mutex_);
    if (auto it = entries_.find(key); it != entries_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second.position);
      have = it->second.features;
    }
  }
  if (have && have->covers(metrics)) return have;
  auto f = have ? std::make_shared<ClipFeatures>(*have) : std::make_shared<ClipFeatures>();
  fill(*f, load_wav(wav), metrics, key);
  insert(key, f);
  return f;
}

ClipFeatures MetricEngine::features(const AudioClip& clip, std::span<const MetricId> metrics) {
  ClipFeatures f;
  fill(f, clip, metrics, {});
  return f;
}

void MetricEngine::insert(const std::string& key, std::shared_ptr<const ClipFeatures> f) {
  const std::size_t size = f->bytes();
  std::lock_guard lock(mutex_);
  if (auto it = entries_.find(key); it != entries_.end()) {
    bytes_ -= it->second.bytes;
    lru_.erase(it->second.position);
    entries_.erase(it);
  }
  // Oversized entries are handed back to the caller but not retained.
  if (size > settings_.memory_budget) return;
  lru_.push_front(key);
  entries_[key] = Entry{std::move(f), lru_.begin(), size};
  bytes_ += size;
  while (bytes_ > settings_.memory_budget) {
    const auto victim = entries_.find(lru_.back());
    bytes_ -= victim->second.bytes;
    entries_.erase(victim);
    lru_.pop_back();
  }
}

std::size_t MetricEngine::cached_bytes() const {
  std::lock_guard lock(mutex_);
  return bytes_;
}

double MetricEngine::distance(MetricId m, const ClipFeatures& a, const ClipFeatures& b) const {
  require(is_pairwise(m), ErrorCode::kInvalidInput,
          "fad requires corpora: it compares Gaussian fits of two sets of clips");
  const MetricId one[] = {m};
  require(a.covers(one) && b.covers(one), ErrorCode::kInvalidInput,
          fmt::format("features for {} were not computed", metric_name(m)));
  switch (m) {
    case MetricId::kL2: return dist::l2_spec_distance(*a.spectrogram, *b.spectrogram);
    case MetricId::kGm: return gram::gm(*a.grams, *b.grams);
    case MetricId::kGmcos: return gram::gmcos(*a.grams, *b.grams);
    case MetricId::kAgm: return gram::agm(*a.gram_vector, *b.gram_vector);
    case MetricId::kCpm: return cochlear::cpm(*a.cochlear, *b.cochlear);
    case MetricId::kFad: break;
  }
  fail(ErrorCode::kInvalidInput, "unreachable");
}

std::string file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::kIo, "cannot open " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    h = fnv1a(std::string_view(buf.data(), static_cast<std::size_t>(in.gcount())), h);
  }
  return fmt::format("{:016x}", h);
}

}  // namespace texm::harness
