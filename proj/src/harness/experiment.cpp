#include "texm/harness/experiment.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "texm/dist/distribution.h"
#include "texm/dist/embedding.h"
#include "texm/error.h"
#include "texm/parallel.h"
#include "texm/signal/rng.h"
#include "texm/signal/stats.h"
#include "texm/syntex/texture.h"

#ifndef TEXM_VERSION
#define TEXM_VERSION "0.0.0"
#endif

namespace texm::harness {
namespace {

using Features = std::shared_ptr<const ClipFeatures>;
using nlohmann::json;
using nlohmann::ordered_json;

std::vector<Features> batch_features(MetricEngine& engine, const std::vector<std::filesystem::path>& paths,
                                     std::span<const MetricId> metrics) {
  std::vector<Features> out(paths.size());
  parallel_for(paths.size(), engine.settings().jobs,
               [&](std::size_t i) { out[i] = engine.features(paths[i], metrics); });
  return out;
}

std::vector<MetricId> pairwise_of(std::span<const MetricId> metrics) {
  std::vector<MetricId> out;
  for (MetricId m : metrics)
    if (is_pairwise(m)) out.push_back(m);
  return out;
}

bool has_fad(std::span<const MetricId> metrics) {
  return std::find(metrics.begin(), metrics.end(), MetricId::kFad) != metrics.end();
}

Eigen::MatrixXd stack_embeddings(const std::vector<Features>& fs) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(fs.size()), fs.front()->embedding->size());
  for (std::size_t i = 0; i < fs.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = fs[i]->embedding->transpose();
  return m;
}

double population_sd(std::span<const double> xs) {
  return xs.size() < 2 ? 0.0 : std::sqrt(variance(xs));
}

void check_protocol_shape(const syntex::SweepManifest& m, std::span<const MetricId> metrics) {
  require(!metrics.empty(), ErrorCode::kInvalidInput, "no metrics requested");
  require(m.n_values >= 3, ErrorCode::kInvalidInput,
          fmt::format("the anchor protocol needs at least 3 parameter values, manifest has {}",
                      m.n_values));
  require(m.n_versions >= 1, ErrorCode::kInvalidInput, "manifest has no versions");
}

std::string num(double v) { return fmt::format("{:.9g}", v); }
std::string num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> cells;
  for (;;) {
    const auto comma = line.find(',');
    auto cell = line.substr(0, comma);
    while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\r')) cell.remove_suffix(1);
    while (!cell.empty() && cell.front() == ' ') cell.remove_prefix(1);
    cells.push_back(cell);
    if (comma == std::string_view::npos) return cells;
    line.remove_prefix(comma + 1);
  }
}

template <typename T>
std::optional<T> opt(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

bool param_matches(const std::string& texture, const std::string& param, const RankData& r) {
  if (r.texture != texture) return false;
  if (r.param == param) return true;
  try {
    const auto* a = syntex::find_param(syntex::require_texture(texture), param);
    const auto* b = syntex::find_param(syntex::require_texture(texture), r.param);
    return a && a == b;
  } catch (const Error&) {
    return false;
  }
}

}  // namespace

std::string_view software_version() { return TEXM_VERSION; }

std::vector<SamePair> sample_same_pairs(int n_values, int n_versions, int n_pairs,
                                        std::uint64_t seed) {
  require(n_versions >= 2, ErrorCode::kInvalidInput,
          fmt::format("same-parameter pairs need at least 2 versions, manifest has {}", n_versions));
  require(n_values >= 1 && n_pairs >= 1, ErrorCode::kInvalidInput, "need at least one pair");
  std::vector<SamePair> all;
  for (int v = 0; v < n_values; ++v)
    for (int a = 0; a < n_versions; ++a)
      for (int b = a + 1; b < n_versions; ++b) all.push_back({v, a, b});
  const auto take = std::min(all.size(), static_cast<std::size_t>(n_pairs));
  SeededRng rng(derive_seed(seed, "consistency-pairs"));
  for (std::size_t i = 0; i < take; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(all.size() - i));
    std::swap(all[i], all[j]);
  }
  all.resize(take);
  std::sort(all.begin(), all.end());
  return all;
}

std::vector<SensitivityReport> run_sensitivity(const syntex::SweepManifest& manifest,
                                               std::span<const MetricId> metrics,
                                               MetricEngine& engine) {
  check_protocol_shape(manifest, metrics);
  const int last = manifest.n_values - 2;
  const int versions = manifest.n_versions;
  const auto pairwise = pairwise_of(metrics);

  // dist[m][v - 1][k]: metric m, test index v, version k.
  std::vector<std::vector<std::vector<double>>> dist(
      pairwise.size(), std::vector<std::vector<double>>(last, std::vector<double>(versions)));
  if (!pairwise.empty()) {
    for (int k = 0; k < versions; ++k) {
      std::vector<std::filesystem::path> paths;
      for (int v = 0; v <= last; ++v) paths.push_back(manifest.resolve(manifest.at(v, k)));
      const auto fs = batch_features(engine, paths, pairwise);
      for (std::size_t m = 0; m < pairwise.size(); ++m)
        for (int v = 1; v <= last; ++v)
          dist[m][v - 1][k] = engine.distance(pairwise[m], *fs[0], *fs[v]);
    }
  }

  std::vector<double> fad_curve;
  if (has_fad(metrics)) {
    require(versions >= 10, ErrorCode::kInvalidInput,
            fmt::format("fad sensitivity needs at least 10 versions per value, manifest has {}",
                        versions));
    const MetricId fad[] = {MetricId::kFad};
    std::vector<dist::GaussianStats> fits;
    for (int v = 0; v <= last; ++v) {
      std::vector<std::filesystem::path> paths;
      for (int k = 0; k < versions; ++k) paths.push_back(manifest.resolve(manifest.at(v, k)));
      fits.push_back(dist::fit_gaussian(stack_embeddings(batch_features(engine, paths, fad))));
    }
    for (int v = 1; v <= last; ++v) fad_curve.push_back(dist::frechet_distance(fits[0], fits[v]));
  }

  std::vector<double> index(last);
  std::iota(index.begin(), index.end(), 1.0);
  std::vector<SensitivityReport> out;
  std::size_t next_pairwise = 0;
  for (MetricId m : metrics) {
    SensitivityReport r;
    r.texture = manifest.texture_id;
    r.param = manifest.swept_param;
    r.metric = metric_name(m);
    if (is_pairwise(m)) {
      for (const auto& per_version : dist[next_pairwise]) {
        r.curve.push_back(mean(per_version));
        r.spread.push_back(population_sd(per_version));
        r.comparisons.push_back(versions);
      }
      ++next_pairwise;
    } else {
      r.curve = fad_curve;
      r.spread.assign(fad_curve.size(), 0.0);
      r.comparisons.assign(fad_curve.size(), 1);
    }
    // Fewer than three points or a flat curve leave r undefined.
    if (r.curve.size() < 3) {
      r.degenerate = true;
    } else {
      try {
        r.pearson_vs_param = pearson_correlation(r.curve, index);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kDegenerateInput) throw;
        r.degenerate = true;
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

SensitivityReport run_sensitivity(const syntex::SweepManifest& manifest, MetricId metric,
                                  MetricEngine& engine) {
  const MetricId one[] = {metric};
  return run_sensitivity(manifest, one, engine).front();
}

std::vector<ConsistencyReport> run_consistency(const syntex::SweepManifest& manifest,
                                               std::span<const MetricId> metrics,
                                               MetricEngine& engine, std::uint64_t pair_seed,
                                               int n_pairs,
                                               std::span<const SensitivityReport> curves) {
  check_protocol_shape(manifest, metrics);
  require(manifest.n_versions >= 2, ErrorCode::kInvalidInput,
          fmt::format("consistency needs at least 2 versions, manifest has {}", manifest.n_versions));

  // Normalizers: maxima of the anchor curves.
  std::vector<MetricId> missing;
  std::map<std::string, double, std::less<>> normalizer;
  for (MetricId m : metrics) {
    const auto it = std::find_if(curves.begin(), curves.end(), [&](const SensitivityReport& s) {
      return s.metric == metric_name(m) && s.texture == manifest.texture_id &&
             s.param == manifest.swept_param;
    });
    if (it != curves.end()) normalizer[std::string(metric_name(m))] = *std::max_element(it->curve.begin(), it->curve.end());
    else missing.push_back(m);
  }
  if (!missing.empty())
    for (const auto& s : run_sensitivity(manifest, missing, engine))
      normalizer[s.metric] = *std::max_element(s.curve.begin(), s.curve.end());

  const auto pairwise = pairwise_of(metrics);
  std::vector<double> sums(pairwise.size(), 0.0);
  int drawn = 0;
  if (!pairwise.empty()) {
    const auto pairs = sample_same_pairs(manifest.n_values, manifest.n_versions, n_pairs, pair_seed);
    drawn = static_cast<int>(pairs.size());
    for (auto first = pairs.begin(); first != pairs.end();) {
      const int v = first->value_index;
      const auto end = std::find_if(first, pairs.end(), [&](const SamePair& p) { return p.value_index != v; });
      std::vector<int> versions;
      for (auto p = first; p != end; ++p) {
        versions.push_back(p->version_a);
        versions.push_back(p->version_b);
      }
      std::sort(versions.begin(), versions.end());
      versions.erase(std::unique(versions.begin(), versions.end()), versions.end());
      std::vector<std::filesystem::path> paths;
      for (int k : versions) paths.push_back(manifest.resolve(manifest.at(v, k)));
      const auto fs = batch_features(engine, paths, pairwise);
      auto slot = [&](int k) {
        return static_cast<std::size_t>(std::lower_bound(versions.begin(), versions.end(), k) - versions.begin());
      };
      for (auto p = first; p != end; ++p)
        for (std::size_t m = 0; m < pairwise.size(); ++m)
          sums[m] += engine.distance(pairwise[m], *fs[slot(p->version_a)], *fs[slot(p->version_b)]);
      first = end;
    }
  }

  double fad_mean = 0;
  if (has_fad(metrics)) {
    const int half = manifest.n_versions / 2;
    require(half >= 2, ErrorCode::kInvalidInput,
            fmt::format("fad consistency splits versions into halves of at least 2, manifest has {} versions",
                        manifest.n_versions));
    const MetricId fad[] = {MetricId::kFad};
    for (int v = 0; v < manifest.n_values; ++v) {
      std::vector<std::filesystem::path> a, b;
      for (int k = 0; k < half; ++k) {
        a.push_back(manifest.resolve(manifest.at(v, k)));
        b.push_back(manifest.resolve(manifest.at(v, half + k)));
      }
      fad_mean += dist::frechet_distance(dist::fit_gaussian(stack_embeddings(batch_features(engine, a, fad))),
                                         dist::fit_gaussian(stack_embeddings(batch_features(engine, b, fad))));
    }
    fad_mean /= manifest.n_values;
  }

  std::vector<ConsistencyReport> out;
  std::size_t next_pairwise = 0;
  for (MetricId m : metrics) {
    ConsistencyReport r;
    r.texture = manifest.texture_id;
    r.param = manifest.swept_param;
    r.metric = metric_name(m);
    if (is_pairwise(m)) {
      r.same_param_mean = sums[next_pairwise++] / drawn;
      r.n_pairs = drawn;
    } else {
      r.same_param_mean = fad_mean;
      r.n_pairs = manifest.n_values;
    }
    r.max_cross_param_mean = normalizer.at(r.metric);
    if (r.max_cross_param_mean > 0) r.relative_mean_pct = 100.0 * r.same_param_mean / r.max_cross_param_mean;
    r.normalizer_below_same = r.max_cross_param_mean < r.same_param_mean;
    if (r.normalizer_below_same)
      spdlog::warn("{}-{} {}: same-parameter mean {:.6g} exceeds the cross-parameter maximum {:.6g}",
                   r.texture, r.param, r.metric, r.same_param_mean, r.max_cross_param_mean);
    r.pair_seed = pair_seed;
    out.push_back(std::move(r));
  }
  return out;
}

ConsistencyReport run_consistency(const syntex::SweepManifest& manifest, MetricId metric,
                                  MetricEngine& engine, std::uint64_t pair_seed, int n_pairs) {
  const MetricId one[] = {metric};
  return run_consistency(manifest, one, engine, pair_seed, n_pairs).front();
}

double correlate_with_ranks(SensitivityReport& report, const RankData& ranks) {
  require(report.curve.size() == ranks.avg_ranks.size(), ErrorCode::kShapeMismatch,
          fmt::format("curve has {} points but {} ranks were given", report.curve.size(),
                      ranks.avg_ranks.size()));
  const double r = pearson_correlation(report.curve, ranks.avg_ranks);
  report.pearson_vs_ranks = r;
  return r;
}

std::vector<RankData> load_rank_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::kIo, "cannot open " + path.string());
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::kParse, path.string() + " is empty");
  const auto header = split_csv(line);
  require(header.size() >= 3 && header[0] == "texture" && header[1] == "param", ErrorCode::kParse,
          path.string() + ":1: expected header texture,param,rank_1,...");
  for (std::size_t j = 2; j < header.size(); ++j)
    require(header[j] == fmt::format("rank_{}", j - 1), ErrorCode::kParse,
            fmt::format("{}:1: expected column 'rank_{}', found '{}'", path.string(), j - 1, header[j]));
  std::vector<RankData> out;
  for (int n = 2; std::getline(in, line); ++n) {
    if (split_csv(line) == std::vector<std::string_view>{""}) continue;
    const auto cells = split_csv(line);
    require(cells.size() == header.size(), ErrorCode::kParse,
            fmt::format("{}:{}: expected {} columns, found {}", path.string(), n, header.size(), cells.size()));
    RankData r{std::string(cells[0]), std::string(cells[1]), {}};
    for (std::size_t j = 2; j < cells.size(); ++j) {
      try {
        std::size_t used = 0;
        const std::string cell(cells[j]);
        r.avg_ranks.push_back(std::stod(cell, &used));
        require(used == cell.size(), ErrorCode::kParse, "");
      } catch (const std::exception&) {
        fail(ErrorCode::kParse, fmt::format("{}:{}: '{}' is not a number", path.string(), n, cells[j]));
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

ordered_json report_json(const ExperimentReport& r) {
  ordered_json j;
  j["info"] = {{"software_version", r.info.software_version},
               {"ensemble_seed", r.info.ensemble_seed},
               {"pair_seed", r.info.pair_seed},
               {"embedding_seed", r.info.embedding_seed},
               {"cpm_pair_strategy", r.info.cpm_pair_strategy},
               {"embedding_provenance", r.info.embedding_provenance},
               {"fad_regularization", r.info.fad_regularization},
               {"config_fingerprint", r.info.config_fingerprint},
               {"timestamp", r.info.timestamp}};
  auto nullable = [](const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); };
  j["consistency"] = ordered_json::array();
  for (const auto& c : r.consistency)
    j["consistency"].push_back({{"texture", c.texture},
                                {"param", c.param},
                                {"metric", c.metric},
                                {"same_param_mean", c.same_param_mean},
                                {"max_cross_param_mean", c.max_cross_param_mean},
                                {"relative_mean_pct", nullable(c.relative_mean_pct)},
                                {"n_pairs", c.n_pairs},
                                {"pair_seed", c.pair_seed},
                                {"normalizer_below_same", c.normalizer_below_same}});
  j["sensitivity"] = ordered_json::array();
  for (const auto& s : r.sensitivity)
    j["sensitivity"].push_back({{"texture", s.texture},
                                {"param", s.param},
                                {"metric", s.metric},
                                {"curve", s.curve},
                                {"spread", s.spread},
                                {"comparisons", s.comparisons},
                                {"pearson_vs_param", nullable(s.pearson_vs_param)},
                                {"pearson_vs_ranks", nullable(s.pearson_vs_ranks)},
                                {"degenerate", s.degenerate}});
  return j;
}

ExperimentReport report_from_json(const json& j) {
  try {
    ExperimentReport r;
    const auto& i = j.at("info");
    r.info = {i.at("software_version"), i.at("ensemble_seed"), i.at("pair_seed"),
              i.at("embedding_seed"),   i.at("cpm_pair_strategy"), i.at("embedding_provenance"),
              i.at("fad_regularization"), i.at("config_fingerprint"), i.at("timestamp")};
    for (const auto& c : j.at("consistency"))
      r.consistency.push_back({c.at("texture"), c.at("param"), c.at("metric"), c.at("same_param_mean"),
                               c.at("max_cross_param_mean"), opt<double>(c, "relative_mean_pct"),
                               c.at("n_pairs"), c.at("pair_seed"), c.at("normalizer_below_same")});
    for (const auto& s : j.at("sensitivity"))
      r.sensitivity.push_back({s.at("texture"), s.at("param"), s.at("metric"), s.at("curve"),
                               s.at("spread"), s.at("comparisons"), opt<double>(s, "pearson_vs_param"),
                               opt<double>(s, "pearson_vs_ranks"), s.at("degenerate")});
    return r;
  } catch (const json::exception& e) {
    fail(ErrorCode::kParse, fmt::format("malformed report: {}", e.what()));
  }
}

void emit_report(const ExperimentReport& r, const std::filesystem::path& path, ReportFormat format) {
  require(!r.consistency.empty() || !r.sensitivity.empty(), ErrorCode::kInvalidInput,
          "nothing to report");
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorCode::kIo, "cannot write " + path.string());
  if (format == ReportFormat::kJson) {
    out << report_json(r).dump(2) << '\n';
  } else {
    // One row per (texture, param, metric), in order of first appearance.
    struct Row {
      const ConsistencyReport* c = nullptr;
      const SensitivityReport* s = nullptr;
    };
    std::vector<std::tuple<std::string, std::string, std::string>> keys;
    std::map<std::tuple<std::string, std::string, std::string>, Row> rows;
    auto row = [&](const std::string& t, const std::string& p, const std::string& m) -> Row& {
      auto key = std::make_tuple(t, p, m);
      if (!rows.count(key)) keys.push_back(key);
      return rows[key];
    };
    for (const auto& c : r.consistency) row(c.texture, c.param, c.metric).c = &c;
    for (const auto& s : r.sensitivity) row(s.texture, s.param, s.metric).s = &s;
    std::size_t points = 0;
    for (const auto& s : r.sensitivity) points = std::max(points, s.curve.size());
    out << "texture,param,metric,same_param_mean,max_cross_param_mean,relative_mean_pct,n_pairs,"
           "pearson_vs_param,pearson_vs_ranks";
    for (std::size_t v = 1; v <= points; ++v) out << ",curve_" << v;
    out << '\n';
    for (const auto& key : keys) {
      const Row& x = rows[key];
      out << std::get<0>(key) << ',' << std::get<1>(key) << ',' << std::get<2>(key) << ',';
      if (x.c)
        out << num(x.c->same_param_mean) << ',' << num(x.c->max_cross_param_mean) << ','
            << num(x.c->relative_mean_pct) << ',' << x.c->n_pairs << ',';
      else
        out << ",,,,";
      if (x.s) out << num(x.s->pearson_vs_param) << ',' << num(x.s->pearson_vs_ranks);
      else out << ',';
      for (std::size_t v = 0; v < points; ++v)
        out << ',' << (x.s && v < x.s->curve.size() ? num(x.s->curve[v]) : std::string());
      out << '\n';
    }
  }
  require(out.good(), ErrorCode::kIo, "failed writing " + path.string());
}

ExperimentReport load_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::kIo, "cannot open " + path.string());
  try {
    return report_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    fail(ErrorCode::kParse, fmt::format("{}: {}", path.string(), e.what()));
  }
}

ExperimentConfig parse_experiment_config(const json& j, const std::filesystem::path& base_dir) {
  auto at_base = [&](const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  };
  auto check_keys = [](const json& obj, std::initializer_list<std::string_view> keys, const char* where) {
    require(obj.is_object(), ErrorCode::kParse, fmt::format("{} must be an object", where));
    for (const auto& [k, v] : obj.items())
      require(std::find(keys.begin(), keys.end(), k) != keys.end(), ErrorCode::kParse,
              fmt::format("unknown key '{}' in {}", k, where));
  };
  try {
    ExperimentConfig cfg;
    cfg.source = ordered_json(j);
    check_keys(j, {"corpora", "metrics", "experiments", "n_pairs", "seeds", "ranks", "output", "jobs",
                   "memory_budget_mb", "cache_dir"},
               "experiment config");
    require(j.contains("corpora") && j.at("corpora").is_array() && !j.at("corpora").empty(),
            ErrorCode::kParse, "experiment config needs a non-empty 'corpora' list");
    for (const auto& c : j.at("corpora")) {
      check_keys(c, {"manifest", "synth", "out"}, "corpus entry");
      CorpusSource src;
      if (c.contains("manifest")) {
        require(!c.contains("synth"), ErrorCode::kParse, "corpus entry has both 'manifest' and 'synth'");
        src.manifest = at_base(c.at("manifest").get<std::string>());
      } else {
        require(c.contains("synth"), ErrorCode::kParse, "corpus entry needs 'manifest' or 'synth'");
        const auto& s = c.at("synth");
        check_keys(s, {"texture", "param", "n_values", "n_versions", "duration", "sample_rate",
                       "base_seed", "synth_config"},
                   "synth entry");
        SynthSource synth{s.at("texture").get<std::string>(), s.at("param").get<std::string>(), {}};
        auto& o = synth.options;
        o.n_values = s.value("n_values", o.n_values);
        o.n_versions = s.value("n_versions", o.n_versions);
        o.duration = s.value("duration", o.duration);
        o.sample_rate = s.value("sample_rate", o.sample_rate);
        o.base_seed = s.value("base_seed", o.base_seed);
        if (s.contains("synth_config"))
          o.config = syntex::load_synth_config(at_base(s.at("synth_config").get<std::string>()));
        const auto texture = syntex::require_texture(synth.texture);
        const auto* param = syntex::find_param(texture, synth.param);
        require(param != nullptr, ErrorCode::kInvalidInput,
                fmt::format("texture '{}' has no parameter '{}'", synth.texture, synth.param));
        src.manifest = at_base(c.value("out", std::string("corpora"))) /
                       syntex::corpus_dir_name(texture, *param) / syntex::kManifestFile;
        src.synth = std::move(synth);
      }
      cfg.corpora.push_back(std::move(src));
    }
    require(j.contains("metrics"), ErrorCode::kParse, "experiment config needs 'metrics'");
    if (j.at("metrics").is_string()) {
      cfg.metrics = parse_metric_list(j.at("metrics").get<std::string>());
    } else {
      std::string ids;
      for (const auto& m : j.at("metrics")) ids += m.get<std::string>() + ",";
      cfg.metrics = parse_metric_list(ids);
    }
    if (j.contains("experiments")) {
      cfg.consistency = cfg.sensitivity = false;
      for (const auto& e : j.at("experiments")) {
        const auto name = e.get<std::string>();
        if (name == "consistency") cfg.consistency = true;
        else if (name == "sensitivity") cfg.sensitivity = true;
        else fail(ErrorCode::kParse, fmt::format("unknown experiment '{}' (consistency, sensitivity)", name));
      }
      require(cfg.consistency || cfg.sensitivity, ErrorCode::kParse, "'experiments' is empty");
    }
    cfg.n_pairs = j.value("n_pairs", cfg.n_pairs);
    require(cfg.n_pairs >= 1, ErrorCode::kInvalidInput, "n_pairs must be >= 1");
    if (j.contains("seeds")) {
      const auto& s = j.at("seeds");
      check_keys(s, {"ensemble", "pairs", "embedding"}, "seeds");
      cfg.ensemble_seed = s.value("ensemble", cfg.ensemble_seed);
      cfg.pair_seed = s.value("pairs", cfg.pair_seed);
      cfg.embedding_seed = s.value("embedding", cfg.embedding_seed);
    }
    if (j.contains("ranks")) cfg.ranks = at_base(j.at("ranks").get<std::string>());
    if (j.contains("output")) {
      const auto& o = j.at("output");
      check_keys(o, {"json", "csv"}, "output");
      if (o.contains("json")) cfg.json_out = at_base(o.at("json").get<std::string>());
      if (o.contains("csv")) cfg.csv_out = at_base(o.at("csv").get<std::string>());
    }
    cfg.jobs = j.value("jobs", cfg.jobs);
    cfg.memory_budget_mb = j.value("memory_budget_mb", cfg.memory_budget_mb);
    if (j.contains("cache_dir")) cfg.cache_dir = at_base(j.at("cache_dir").get<std::string>());
    return cfg;
  } catch (const json::exception& e) {
    fail(ErrorCode::kParse, fmt::format("experiment config: {}", e.what()));
  }
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::kIo, "cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::kParse, fmt::format("{}: {}", path.string(), e.what()));
  }
  return parse_experiment_config(j, path.parent_path());
}

std::string config_fingerprint(const ExperimentConfig& cfg) {
  ordered_json j = cfg.source;
  for (const char* runtime : {"jobs", "memory_budget_mb", "cache_dir", "output"}) j.erase(runtime);
  return fmt::format("{:016x}", fnv1a(j.dump()));
}

namespace {

syntex::SweepManifest prepare_corpus(const CorpusSource& src, int jobs) {
  if (src.synth) {
    const auto& s = *src.synth;
    const auto& o = s.options;
    bool fresh = false;
    if (std::filesystem::exists(src.manifest) && o.config == syntex::SynthConfig{}) {
      try {
        auto m = syntex::load_manifest(src.manifest);
        syntex::validate_manifest(m);
        const auto* p = syntex::find_param(syntex::require_texture(s.texture), s.param);
        fresh = m.texture_id == s.texture && m.swept_param == p->name && m.n_values == o.n_values &&
                m.n_versions == o.n_versions && m.duration_s == o.duration &&
                m.sample_rate == o.sample_rate && m.base_seed == o.base_seed;
        if (fresh) {
          spdlog::info("reusing corpus {}", src.manifest.parent_path().string());
          return m;
        }
      } catch (const Error& e) {
        spdlog::info("re-rendering {}: {}", src.manifest.parent_path().string(), e.what());
      }
    }
    auto options = o;
    options.jobs = jobs;
    spdlog::info("rendering {}-{} ({} values x {} versions)", s.texture, s.param, o.n_values, o.n_versions);
    return syntex::render_corpus(syntex::require_texture(s.texture), s.param,
                                 src.manifest.parent_path().parent_path(), options);
  }
  auto m = syntex::load_manifest(src.manifest);
  syntex::validate_manifest(m);
  return m;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  MetricSettings settings;
  settings.ensemble_seed = cfg.ensemble_seed;
  settings.embedding_seed = cfg.embedding_seed;
  settings.cache_dir = cfg.cache_dir;
  settings.memory_budget = cfg.memory_budget_mb << 20;
  settings.jobs = cfg.jobs;
  MetricEngine engine(settings);

  std::vector<RankData> ranks;
  if (!cfg.ranks.empty()) ranks = load_rank_file(cfg.ranks);

  ExperimentReport report;
  report.info.software_version = std::string(software_version());
  report.info.ensemble_seed = cfg.ensemble_seed;
  report.info.pair_seed = cfg.pair_seed;
  report.info.embedding_seed = cfg.embedding_seed;
  report.info.cpm_pair_strategy = cochlear::kPairStrategy;
  report.info.embedding_provenance = has_fad(cfg.metrics) ? dist::to_string(dist::Provenance::kStub) : "none";
  report.info.fad_regularization = "eps*I when n_clips <= d, eps = 1e-6 * mean(diag)";
  report.info.config_fingerprint = config_fingerprint(cfg);

  for (const auto& src : cfg.corpora) {
    const auto manifest = prepare_corpus(src, cfg.jobs);
    spdlog::info("{}-{}: {} clips", manifest.texture_id, manifest.swept_param, manifest.files.size());
    auto curves = run_sensitivity(manifest, cfg.metrics, engine);
    for (auto& s : curves) {
      const auto match = std::find_if(ranks.begin(), ranks.end(),
                                      [&](const RankData& r) { return param_matches(s.texture, s.param, r); });
      if (match == ranks.end()) continue;
      try {
        correlate_with_ranks(s, *match);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kDegenerateInput) throw;
        spdlog::warn("{}-{} {}: rank correlation undefined: {}", s.texture, s.param, s.metric, e.what());
      }
    }
    if (cfg.consistency)
      for (auto& c : run_consistency(manifest, cfg.metrics, engine, cfg.pair_seed, cfg.n_pairs, curves))
        report.consistency.push_back(std::move(c));
    if (cfg.sensitivity)
      for (auto& s : curves) report.sensitivity.push_back(std::move(s));
  }

  report.info.timestamp = fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::time(nullptr)));
  if (!cfg.json_out.empty()) emit_report(report, cfg.json_out, ReportFormat::kJson);
  if (!cfg.csv_out.empty()) emit_report(report, cfg.csv_out, ReportFormat::kCsv);
  return report;
}

}  // namespace texm::harness
