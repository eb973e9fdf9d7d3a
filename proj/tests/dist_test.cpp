#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include "test_util.h"
#include "texm/dist/distribution.h"
#include "texm/dist/embedding.h"
#include "texm/error.h"
#include "texm/gram/gram.h"
#include "texm/signal/rng.h"
#include "texm/signal/stft.h"
#include "texm/syntex/synth.h"

namespace texm::dist {
namespace {

constexpr int kSr = 16000;

ErrorCode code_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::kIo;
}

Eigen::MatrixXd random_matrix(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
  SeededRng rng(seed);
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rng.normal();
  return m;
}

GaussianStats random_gaussian(int d, std::uint64_t seed) {
  const Eigen::MatrixXd a = random_matrix(d, d, seed);
  GaussianStats g;
  g.mu = random_matrix(d, 1, seed + 1);
  g.sigma = a * a.transpose() + 0.1 * Eigen::MatrixXd::Identity(d, d);
  return g;
}

// --- L2 -------------------------------------------------------------------

TEST(L2Spec, IdentityAndSymmetry) {
  const AudioClip a(test::white_noise(kSr, 1), kSr);
  const AudioClip b(test::sine(300, 1.0, kSr), kSr);
  EXPECT_EQ(l2_spec_distance(a, a), 0.0);
  EXPECT_EQ(l2_spec_distance(a, b), l2_spec_distance(b, a));
}

TEST(L2Spec, SineVersusSilenceIsTheSineSpectrogramNorm) {
  const AudioClip tone(test::sine(440, 1.0, kSr, 0.7), kSr);
  const AudioClip silence(std::vector<double>(tone.size(), 0.0), kSr);
  const auto spec = stft_magnitude(tone);
  double sum = 0;
  for (Eigen::Index f = 0; f < spec.n_frames(); ++f)
    for (Eigen::Index k = 0; k < spec.n_bins(); ++k) sum += spec.magnitudes(k, f) * spec.magnitudes(k, f);
  EXPECT_NEAR(l2_spec_distance(tone, silence), std::sqrt(sum), 1e-9);
}

TEST(L2Spec, TrimsToCommonFramesAndRejectsMismatches) {
  const auto x = test::white_noise(kSr, 2);
  std::vector<double> longer = x;
  longer.insert(longer.end(), 100, 0.3);
  EXPECT_EQ(l2_spec_distance(AudioClip(x, kSr), AudioClip(longer, kSr)), 0.0);
  longer.insert(longer.end(), 100, 0.3);
  EXPECT_EQ(code_of([&] { l2_spec_distance(AudioClip(x, kSr), AudioClip(longer, kSr)); }),
            ErrorCode::kShapeMismatch);
  EXPECT_EQ(code_of([&] { l2_spec_distance(AudioClip(x, kSr), AudioClip(x, 8000)); }),
            ErrorCode::kInvalidInput);
}

TEST(L2Spec, TriangleInequality) {
  for (std::uint64_t t = 0; t < 10; ++t) {
    const AudioClip a(test::white_noise(8000, 10 * t + 1), kSr);
    const AudioClip b(test::white_noise(8000, 10 * t + 2, 0.2), kSr);
    const AudioClip c(test::sine(200 + 50.0 * t, 0.5, kSr), kSr);
    EXPECT_LE(l2_spec_distance(a, c), l2_spec_distance(a, b) + l2_spec_distance(b, c) + 1e-9);
    EXPECT_LE(l2_spec_distance(a, b), l2_spec_distance(a, c) + l2_spec_distance(c, b) + 1e-9);
  }
}

// --- Gaussian fit ---------------------------------------------------------

TEST(FitGaussian, HandArithmetic) {
  Eigen::MatrixXd x(2, 1);
  x << 0, 2;
  const auto g = fit_gaussian(x);
  EXPECT_DOUBLE_EQ(g.mu(0), 1.0);
  // n = 2 > d = 1, so no shrinkage and the unbiased variance is 2.
  EXPECT_DOUBLE_EQ(g.sigma(0, 0), 2.0);
  EXPECT_EQ(g.shrinkage, 0.0);
}

TEST(FitGaussian, IdenticalVectorsGiveZeroCovariance) {
  Eigen::MatrixXd x(2, 3);
  x << 1, -2, 5, 1, -2, 5;
  const auto g = fit_gaussian(x);
  EXPECT_EQ(g.mu, Eigen::Vector3d(1, -2, 5));
  EXPECT_EQ(g.sigma, Eigen::MatrixXd::Zero(3, 3));
}

TEST(FitGaussian, ShrinkageOnlyWhenUnderdetermined) {
  const Eigen::MatrixXd few = random_matrix(10, 16, 3);
  const auto g = fit_gaussian(few);
  Eigen::MatrixXd centred = few.rowwise() - few.colwise().mean();
  const Eigen::MatrixXd raw = centred.transpose() * centred / 9.0;
  EXPECT_NEAR(g.shrinkage, 1e-6 * raw.diagonal().mean(), 1e-18);
  EXPECT_NEAR((g.sigma - raw - g.shrinkage * Eigen::MatrixXd::Identity(16, 16)).norm(), 0.0, 1e-12);
  // The shrunk covariance is full rank even though 10 samples span 9 dims.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g.sigma);
  EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0);

  EXPECT_EQ(fit_gaussian(random_matrix(17, 16, 4)).shrinkage, 0.0);
}

TEST(FitGaussian, SymmetricAndValidated) {
  const auto g = fit_gaussian(random_matrix(50, 8, 5));
  EXPECT_LE((g.sigma - g.sigma.transpose()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(code_of([] { fit_gaussian(Eigen::MatrixXd::Ones(1, 4)); }), ErrorCode::kInvalidInput);
}

// --- Frechet --------------------------------------------------------------

TEST(Frechet, ScalarClosedForm) {
  GaussianStats a{Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Ones(1, 1)};
  GaussianStats b{Eigen::VectorXd::Ones(1), Eigen::MatrixXd::Ones(1, 1)};
  EXPECT_NEAR(frechet_distance(a, b), 1.0, 1e-9);
  EXPECT_NEAR(frechet_distance(a, a), 0.0, 1e-9);
}

TEST(Frechet, DiagonalMatchesPerDimensionOracle) {
  SeededRng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 1 + trial % 7;
    GaussianStats a{Eigen::VectorXd(d), Eigen::MatrixXd::Zero(d, d)};
    GaussianStats b{Eigen::VectorXd(d), Eigen::MatrixXd::Zero(d, d)};
    double oracle = 0;
    for (int j = 0; j < d; ++j) {
      a.mu(j) = rng.normal();
      b.mu(j) = rng.normal();
      a.sigma(j, j) = rng.uniform(0.01, 4.0);
      b.sigma(j, j) = rng.uniform(0.01, 4.0);
      oracle += (a.mu(j) - b.mu(j)) * (a.mu(j) - b.mu(j)) + a.sigma(j, j) + b.sigma(j, j) -
                2.0 * std::sqrt(a.sigma(j, j) * b.sigma(j, j));
    }
    EXPECT_NEAR(frechet_distance(a, b), oracle, 1e-9) << trial;
  }
}

TEST(Frechet, SymmetricAndRotationInvariant) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto a = random_gaussian(12, 100 + s);
    const auto b = random_gaussian(12, 200 + s);
    const double d = frechet_distance(a, b);
    EXPECT_NEAR(d, frechet_distance(b, a), 1e-9);
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(random_matrix(12, 12, 300 + s))
                                  .householderQ();
    GaussianStats ra{q * a.mu, q * a.sigma * q.transpose()};
    GaussianStats rb{q * b.mu, q * b.sigma * q.transpose()};
    EXPECT_NEAR(frechet_distance(ra, rb), d, 1e-8);
  }
}

TEST(Frechet, EqualCovariancesLeaveTheMeanTerm) {
  const auto a = random_gaussian(6, 7);
  GaussianStats b = a;
  b.mu = a.mu + Eigen::VectorXd::LinSpaced(6, 1, 6);
  EXPECT_NEAR(frechet_distance(a, b), 91.0, 1e-9);
  EXPECT_NEAR(frechet_distance(a, a), 0.0, 1e-9);
}

TEST(Frechet, RejectsBadInputs) {
  const auto a = random_gaussian(3, 1);
  const auto b = random_gaussian(4, 2);
  EXPECT_EQ(code_of([&] { frechet_distance(a, b); }), ErrorCode::kShapeMismatch);
  GaussianStats neg = a;
  neg.sigma = -neg.sigma;
  EXPECT_EQ(code_of([&] { frechet_distance(a, neg); }), ErrorCode::kInvalidInput);
}

TEST(PsdSqrt, SquaresBack) {
  const auto g = random_gaussian(10, 9);
  const Eigen::MatrixXd r = psd_sqrt(g.sigma);
  EXPECT_LE((r * r - g.sigma).cwiseAbs().maxCoeff(), 1e-9);
}

// --- Stub embedding -------------------------------------------------------

TEST(StubEmbed, DeterministicAndSeeded) {
  const AudioClip clip(test::white_noise(kSr, 21), kSr);
  const auto e = stub_embed(clip, 4);
  EXPECT_EQ(e.size(), kEmbeddingDim);
  EXPECT_EQ(e, stub_embed(clip, 4));
  EXPECT_NE(e, stub_embed(clip, 5));
}

TEST(StubEmbed, ProjectionIsOrthonormal) {
  const Eigen::MatrixXd q = stub_projection(3);
  EXPECT_LE((q.transpose() * q - Eigen::MatrixXd::Identity(kEmbeddingDim, kEmbeddingDim))
                .cwiseAbs()
                .maxCoeff(),
            1e-12);
}

TEST(StubEmbed, SilenceProjectsTheLogFloor) {
  const AudioClip silence(std::vector<double>(kSr, 0.0), kSr);
  Eigen::VectorXd floor = Eigen::VectorXd::Zero(kEmbeddingDim);
  floor.head(kMelBands).setConstant(std::log(kLogOffset));
  EXPECT_LE((stub_embed(silence, 2) - stub_projection(2) * floor).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(StubEmbed, MelFilterbankCoversItsRange) {
  const auto fb = mel_filterbank(512, kSr);
  ASSERT_EQ(fb.rows(), kMelBands);
  ASSERT_EQ(fb.cols(), 257);
  for (Eigen::Index m = 0; m < fb.rows(); ++m) EXPECT_GT(fb.row(m).sum(), 0.0) << m;
  EXPECT_EQ(fb.col(0).sum(), 0.0);     // DC is below 125 Hz
  EXPECT_EQ(fb.col(250).sum(), 0.0);   // 7812 Hz is above 7500 Hz
  EXPECT_GE(fb.minCoeff(), 0.0);
  EXPECT_LE(fb.maxCoeff(), 1.0);
}

TEST(StubEmbed, SameParameterCloserThanExtremes) {
  using syntex::TextureId;
  int wins = 0;
  for (std::uint64_t t = 0; t < 50; ++t) {
    auto spec = [&](double p, std::uint64_t seed) {
      syntex::TextureSpec s;
      s.texture = TextureId::kFbnoise;
      s.params["pitchedness"] = p;
      s.duration = 1.0;
      s.seed = seed;
      return syntex::synthesize(s);
    };
    const auto a = stub_embed(spec(0.0, 2 * t));
    const auto b = stub_embed(spec(0.0, 2 * t + 1));
    const auto c = stub_embed(spec(0.9, 2 * t + 1));
    if ((a - b).norm() < (a - c).norm()) ++wins;
  }
  EXPECT_GE(wins, 40);
}

// --- Ingestion ------------------------------------------------------------

TEST(LoadEmbeddings, CsvRoundTripWithSidecar) {
  test::TempDir dir("emb");
  EmbeddingSet e;
  e.vectors.resize(3, 4);
  e.vectors << 1, 2, 3, 4, 0.1, -0.2, 1e-9, 7, -1, 0, 0.333333333333333, 5e3;
  e.files = {"a.wav", "b.wav", "c.wav"};
  save_embeddings_csv(e, dir.path() / "e.csv");
  const auto back = load_embeddings(dir.path() / "e.csv", 4);
  EXPECT_EQ(back.vectors, e.vectors);
  EXPECT_EQ(back.files, e.files);
  EXPECT_EQ(back.provenance, Provenance::kIngested);
  EXPECT_EQ(code_of([&] { load_embeddings(dir.path() / "e.csv", 128); }), ErrorCode::kShapeMismatch);
}

TEST(LoadEmbeddings, MalformedCsvNamesTheLine) {
  test::TempDir dir("emb_bad");
  auto write = [&](const char* name, const char* body) {
    std::ofstream(dir.path() / name) << body;
    return dir.path() / name;
  };
  const auto ragged = write("r.csv", "dim_0,dim_1\n1,2\n3\n");
  try {
    load_embeddings(ragged);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParse);
    EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos) << e.what();
  }
  EXPECT_EQ(code_of([&] { load_embeddings(write("n.csv", "dim_0\nabc\n")); }), ErrorCode::kParse);
  EXPECT_EQ(code_of([&] { load_embeddings(write("e.csv", "")); }), ErrorCode::kParse);
  EXPECT_EQ(code_of([&] { load_embeddings(write("h.csv", "x,y\n1,2\n")); }), ErrorCode::kParse);
  EXPECT_EQ(code_of([&] { load_embeddings(dir.path() / "missing.csv"); }), ErrorCode::kIo);
}

TEST(LoadEmbeddings, BinaryVectorList) {
  test::TempDir dir("emb_bin");
  const Eigen::VectorXd v0 = Eigen::VectorXd::LinSpaced(5, 0, 1);
  const Eigen::VectorXd v1 = Eigen::VectorXd::Constant(5, -2.5);
  gram::save_gram_vector(v0, dir.path() / "a.bin");
  gram::save_gram_vector(v1, dir.path() / "b.bin");
  std::ofstream(dir.path() / "list.txt") << "a.bin\nb.bin\n";
  const auto e = load_embeddings(dir.path() / "list.txt");
  ASSERT_EQ(e.size(), 2);
  EXPECT_EQ(e.vectors.row(0).transpose(), v0);
  EXPECT_EQ(e.vectors.row(1).transpose(), v1);
  EXPECT_EQ(load_embeddings(dir.path() / "b.bin").vectors.row(0).transpose(), v1);
}

}  // namespace
}  // namespace texm::dist
