#include "texm/gram/gram.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include <fmt/format.h>

#include "texm/error.h"
#include "texm/signal/rng.h"
#include "texm/signal/stats.h"

namespace texm::gram {
namespace {

static_assert(std::endian::native == std::endian::little,
              "binary dumps assume a little-endian host");

constexpr char kSetMagic[8] = {'T', 'X', 'M', 'G', 'R', 'A', 'M', '1'};
constexpr char kVectorMagic[8] = {'T', 'X', 'M', 'G', 'V', 'E', 'C', '1'};

void check_compatible(const GramSet& a, const GramSet& b) {
  require(!a.grams.empty() && a.grams.size() == b.grams.size(), ErrorCode::kShapeMismatch,
          fmt::format("gram sets hold {} and {} matrices", a.grams.size(), b.grams.size()));
  for (std::size_t n = 0; n < a.grams.size(); ++n)
    require(a.grams[n].rows() == b.grams[n].rows() && a.grams[n].cols() == b.grams[n].cols(),
            ErrorCode::kShapeMismatch, fmt::format("gram {} shapes differ", n));
}

void write_u64(std::ofstream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint64_t read_u64(std::ifstream& in, const std::filesystem::path& path) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  require(in.good(), ErrorCode::kTruncatedFile, "truncated dump " + path.string());
  return v;
}

std::ofstream open_out(const std::filesystem::path& path, const char (&magic)[8]) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorCode::kIo, "cannot write " + path.string());
  out.write(magic, 8);
  return out;
}

std::ifstream open_in(const std::filesystem::path& path, const char (&magic)[8]) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::kIo, "cannot open " + path.string());
  char got[8] = {};
  in.read(got, 8);
  require(in.gcount() == 8, ErrorCode::kTruncatedFile, "truncated dump " + path.string());
  require(std::memcmp(got, magic, 8) == 0, ErrorCode::kUnsupportedFormat,
          "unrecognized dump header in " + path.string());
  return in;
}

void read_doubles(std::ifstream& in, double* dst, std::size_t n,
                  const std::filesystem::path& path) {
  in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n * sizeof(double)));
  require(in.gcount() == static_cast<std::streamsize>(n * sizeof(double)),
          ErrorCode::kTruncatedFile, "truncated dump " + path.string());
}

}  // namespace

ConvEnsemble::ConvEnsemble(int n_bins, std::vector<ConvBank> banks, std::uint64_t seed)
    : n_bins_(n_bins), banks_(std::move(banks)), seed_(seed) {
  require(n_bins >= 1, ErrorCode::kInvalidInput, "n_bins must be >= 1");
  require(!banks_.empty(), ErrorCode::kInvalidInput, "ensemble needs at least one bank");
  for (const auto& b : banks_) {
    require(b.kernel_width >= 1 && b.weights.rows() >= 1, ErrorCode::kInvalidInput,
            "bank needs a positive width and at least one filter");
    require(b.weights.cols() == static_cast<Eigen::Index>(n_bins) * b.kernel_width,
            ErrorCode::kShapeMismatch,
            fmt::format("bank of width {} has {} weight columns, expected {}", b.kernel_width,
                        b.weights.cols(), n_bins * b.kernel_width));
  }
}

int ConvEnsemble::max_kernel_width() const {
  int w = 0;
  for (const auto& b : banks_) w = std::max(w, b.kernel_width);
  return w;
}

ConvEnsemble init_ensemble(int n_bins, std::uint64_t seed, int filters,
                           std::span<const int> widths) {
  require(n_bins >= 1 && filters >= 1, ErrorCode::kInvalidInput,
          "n_bins and filters must be >= 1");
  std::vector<ConvBank> banks;
  for (std::size_t n = 0; n < widths.size(); ++n) {
    const int k = widths[n];
    require(k >= 1, ErrorCode::kInvalidInput, "kernel width must be >= 1");
    SeededRng rng(derive_seed(seed, static_cast<std::uint64_t>(n)));
    const double sd = 1.0 / std::sqrt(static_cast<double>(n_bins) * k);
    ConvBank bank{k, Eigen::MatrixXd(filters, static_cast<Eigen::Index>(n_bins) * k)};
    for (int f = 0; f < filters; ++f)
      for (int c = 0; c < n_bins; ++c)
        for (int j = 0; j < k; ++j) bank.weights(f, j * n_bins + c) = sd * rng.normal();
    banks.push_back(std::move(bank));
  }
  return ConvEnsemble(n_bins, std::move(banks), seed);
}

Eigen::MatrixXd feature_maps(const Eigen::MatrixXd& magnitudes, const ConvBank& bank) {
  const Eigen::Index n_bins = magnitudes.rows();
  const Eigen::Index k = bank.kernel_width;
  const Eigen::Index m = magnitudes.cols() - k + 1;
  require(m >= 1, ErrorCode::kInvalidInput,
          fmt::format("{} frames is too short for a kernel of width {}", magnitudes.cols(), k));
  require(bank.weights.cols() == n_bins * k, ErrorCode::kShapeMismatch,
          "spectrogram bins do not match the ensemble");
  // Column t of `windows` is frames t..t+k-1 stacked; zero-copy thanks to the
  // column-major layout (consecutive windows overlap by n_bins*(k-1) values).
  const Eigen::Map<const Eigen::MatrixXd, 0, Eigen::OuterStride<>> windows(
      magnitudes.data(), n_bins * k, m, Eigen::OuterStride<>(n_bins));
  Eigen::MatrixXd y = bank.weights * windows;
  return y.cwiseMax(0.0);
}

GramSet compute_gram_set(const Eigen::MatrixXd& magnitudes, const ConvEnsemble& ens) {
  require(magnitudes.rows() == ens.n_bins(), ErrorCode::kShapeMismatch,
          fmt::format("spectrogram has {} bins, ensemble expects {}", magnitudes.rows(),
                      ens.n_bins()));
  require(magnitudes.cols() >= ens.max_kernel_width(), ErrorCode::kInvalidInput,
          fmt::format("spectrogram has {} frames, the widest kernel needs {}", magnitudes.cols(),
                      ens.max_kernel_width()));
  require(magnitudes.allFinite(), ErrorCode::kInvalidInput, "spectrogram has non-finite values");
  GramSet gs;
  for (const auto& bank : ens.banks()) {
    const Eigen::MatrixXd f = feature_maps(magnitudes, bank);
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(f.rows(), f.rows());
    g.selfadjointView<Eigen::Lower>().rankUpdate(f);
    g.triangularView<Eigen::StrictlyUpper>() = g.transpose();
    gs.grams.push_back(std::move(g));
  }
  return gs;
}

GramSet compute_gram_set(const Spectrogram& spec, const ConvEnsemble& ens) {
  return compute_gram_set(spec.magnitudes, ens);
}

double gm(const GramSet& a, const GramSet& b) {
  check_compatible(a, b);
  double total = 0;
  for (std::size_t n = 0; n < a.grams.size(); ++n)
    total += (a.grams[n] - b.grams[n]).squaredNorm() / static_cast<double>(a.grams[n].size());
  return total / static_cast<double>(a.grams.size());
}

double gmcos(const GramSet& a, const GramSet& b) {
  check_compatible(a, b);
  double total = 0;
  for (std::size_t n = 0; n < a.grams.size(); ++n) {
    const auto& ga = a.grams[n];
    const auto& gb = b.grams[n];
    try {
      total += cosine_distance({ga.data(), static_cast<std::size_t>(ga.size())},
                               {gb.data(), static_cast<std::size_t>(gb.size())});
    } catch (const Error& e) {
      fail(e.code(), fmt::format("gram {}: {}", n, e.what()));
    }
  }
  return total / static_cast<double>(a.grams.size());
}

GramVector accumulate_gram_vector(const GramSet& gs, int s) {
  require(!gs.grams.empty(), ErrorCode::kInvalidInput, "empty gram set");
  require(s >= 1, ErrorCode::kInvalidInput, "segment length must be >= 1");
  GramVector out = GramVector::Zero(s);
  for (const auto& g : gs.grams) {
    const Eigen::Index f = g.rows();
    require(g.cols() == f && f % s == 0, ErrorCode::kShapeMismatch,
            fmt::format("{}x{} gram cannot be split into segments of {}", g.rows(), g.cols(), s));
    const Eigen::Index segments = f / s;
    const Eigen::RowVectorXd col_sums = g.colwise().sum();
    GramVector v = GramVector::Zero(s);
    for (Eigen::Index seg = 0; seg < segments; ++seg) v += col_sums.segment(seg * s, s).transpose();
    out += v / (static_cast<double>(segments) * static_cast<double>(f));
  }
  return out / static_cast<double>(gs.grams.size());
}

double agm(const GramVector& a, const GramVector& b) {
  require(a.size() == b.size(), ErrorCode::kShapeMismatch,
          fmt::format("gram vectors of length {} and {}", a.size(), b.size()));
  return (a - b).squaredNorm();
}

void save_gram_set(const GramSet& gs, const std::filesystem::path& path) {
  auto out = open_out(path, kSetMagic);
  write_u64(out, gs.grams.size());
  for (const auto& g : gs.grams) {
    write_u64(out, static_cast<std::uint64_t>(g.rows()));
    write_u64(out, static_cast<std::uint64_t>(g.cols()));
    out.write(reinterpret_cast<const char*>(g.data()),
              static_cast<std::streamsize>(g.size() * sizeof(double)));
  }
  require(out.good(), ErrorCode::kIo, "failed writing " + path.string());
}

GramSet load_gram_set(const std::filesystem::path& path) {
  auto in = open_in(path, kSetMagic);
  GramSet gs;
  const auto count = read_u64(in, path);
  require(count <= 64, ErrorCode::kUnsupportedFormat, "implausible gram count in " + path.string());
  for (std::uint64_t n = 0; n < count; ++n) {
    const auto rows = read_u64(in, path);
    const auto cols = read_u64(in, path);
    require(rows <= 1 << 16 && cols <= 1 << 16, ErrorCode::kUnsupportedFormat,
            "implausible gram shape in " + path.string());
    Eigen::MatrixXd g(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    read_doubles(in, g.data(), static_cast<std::size_t>(g.size()), path);
    gs.grams.push_back(std::move(g));
  }
  gs.source = path.string();
  return gs;
}

void save_gram_vector(const GramVector& g, const std::filesystem::path& path) {
  auto out = open_out(path, kVectorMagic);
  write_u64(out, static_cast<std::uint64_t>(g.size()));
  out.write(reinterpret_cast<const char*>(g.data()),
            static_cast<std::streamsize>(g.size() * sizeof(double)));
  require(out.good(), ErrorCode::kIo, "failed writing " + path.string());
}

GramVector load_gram_vector(const std::filesystem::path& path) {
  auto in = open_in(path, kVectorMagic);
  const auto n = read_u64(in, path);
  require(n <= 1 << 20, ErrorCode::kUnsupportedFormat, "implausible length in " + path.string());
  GramVector g(static_cast<Eigen::Index>(n));
  read_doubles(in, g.data(), static_cast<std::size_t>(n), path);
  return g;
}

}  // namespace texm::gram
