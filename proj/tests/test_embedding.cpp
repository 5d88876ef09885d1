#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <filesystem>

#include "deepcausal/dataset.hpp"
#include "deepcausal/embedding.hpp"
#include "deepcausal/linalg.hpp"

using namespace deepcausal;

namespace {

Matrix uniform_matrix(Eigen::Index r, Eigen::Index c, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  Rng rng(seed);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = lo + (hi - lo) * uniform01(rng);
  }
  return m;
}

// Points on the plane spanned by two fixed directions through an offset.
Matrix plane_points(Eigen::Index n, std::uint64_t seed) {
  const Matrix st = uniform_matrix(n, 2, seed, -2.0, 2.0);
  Matrix basis(2, 3);
  basis << 1.0, 0.5, -0.3, -0.2, 1.0, 0.8;
  Matrix x = st * basis;
  x.rowwise() += Eigen::RowVector3d(3.0, -1.0, 0.5);
  return x;
}

Matrix subspace_projector(const Matrix& y) {
  // Columns of y are orthonormal in both uses below.
  return y * y.transpose();
}

}  // namespace

TEST(Standardizer, FitApplyInvert) {
  Matrix x = uniform_matrix(50, 3, 1);
  x.col(1) *= 10.0;
  x.col(2).setConstant(4.0);
  const auto s = Standardizer::fit(x);
  const Matrix z = s.apply(x);
  EXPECT_NEAR(z.col(0).mean(), 0.0, 1e-12);
  EXPECT_NEAR(std::sqrt(z.col(1).squaredNorm() / 50.0), 1.0, 1e-12);
  EXPECT_EQ(s.scale[2], 1.0);
  EXPECT_LT((s.invert(z) - x).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Pca, RecoversAPlaneExactly) {
  const Matrix x = plane_points(100, 3);
  const auto e = fit_pca(x, 2);
  EXPECT_LT(pca_reconstruction_error(e, x), 1e-8);
  EXPECT_LT(pca_reconstruction_error(e, plane_points(30, 4)), 1e-8);
}

TEST(Pca, ComponentsOrthonormalScoresIdempotent) {
  const Matrix x = uniform_matrix(80, 4, 5) * uniform_matrix(4, 4, 6);
  const auto e = fit_pca(x, 3);
  const Matrix& c = e.pca().components;
  EXPECT_LT((c.transpose() * c - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-10);
  const Matrix centered = x.rowwise() - x.colwise().mean();
  EXPECT_LT((e.transform(x) - centered * c).cwiseAbs().maxCoeff(), 1e-12);
  const auto& ev = e.pca().explained_variance;
  EXPECT_GE(ev[0], ev[1]);
  EXPECT_GE(ev[1], ev[2]);
  for (Eigen::Index j = 0; j < 3; ++j) {
    Eigen::Index idx = 0;
    c.col(j).cwiseAbs().maxCoeff(&idx);
    EXPECT_GT(c(idx, j), 0.0);
  }
}

TEST(Pca, ReconstructionErrorNonIncreasingInM) {
  const Matrix x = uniform_matrix(60, 5, 8) * uniform_matrix(5, 5, 9);
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t m = 1; m <= 5; ++m) {
    const double err = pca_reconstruction_error(fit_pca(x, m), x);
    EXPECT_LE(err, prev + 1e-12);
    prev = err;
  }
  EXPECT_LT(prev, 1e-20);
}

TEST(Pca, WhitenedDataTiesStillReconstruct) {
  // Identity covariance: every direction has the same variance.
  Matrix x(4, 2);
  x << 1, 0, -1, 0, 0, 1, 0, -1;
  const auto e = fit_pca(x, 2);
  EXPECT_NEAR(e.pca().explained_variance[0], e.pca().explained_variance[1], 1e-12);
  EXPECT_LT(pca_reconstruction_error(e, x), 1e-20);
}

TEST(Pca, Contracts) {
  EXPECT_THROW(fit_pca(Matrix::Zero(1, 3), 2), ValidationError);
  EXPECT_THROW(fit_pca(uniform_matrix(10, 3, 1), 4), ValidationError);
  EXPECT_THROW(fit_pca(uniform_matrix(10, 3, 1), 0), ValidationError);
  const auto e = fit_pca(Matrix::Zero(5, 3), 2);  // zero variance is allowed
  EXPECT_TRUE(e.transform(Matrix::Zero(2, 3)).isZero());
  EXPECT_THROW(e.transform(Matrix::Zero(2, 2)), ValidationError);
  EXPECT_THROW(Embedder().transform(Matrix::Zero(2, 2)), ValidationError);
}

TEST(Lle, WeightRowsSumToOne) {
  SwissRollConfig cfg;
  cfg.n = 300;
  const auto ds = gen_swiss_roll(cfg);
  const auto e = fit_lle(ds.x, 2);
  const Matrix w = lle_weight_matrix(e.lle());
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    EXPECT_NEAR(w.row(i).sum(), 1.0, 1e-10);
    EXPECT_EQ(w(i, i), 0.0);
  }
}

TEST(Lle, DuplicatePointsAreHandledByRegularization) {
  Matrix x = uniform_matrix(30, 3, 4);
  x.row(5) = x.row(6);
  x.row(7) = x.row(6);
  const auto e = fit_lle(x, 2, {5, 1e-3});
  EXPECT_TRUE(e.lle().embedding.allFinite());
}

TEST(Lle, BottomEigenvectorIsConstant) {
  const Matrix x = uniform_matrix(40, 3, 12);
  const auto e = fit_lle(x, 2, {6, 1e-3});
  const Matrix w = lle_weight_matrix(e.lle());
  const auto eig = gram_eigen_jacobi(Matrix::Identity(40, 40) - w);
  EXPECT_NEAR(eig.values[0], 0.0, 1e-12);
  const Vector v = eig.vectors.col(0);
  EXPECT_LT((v.array() - 1.0 / std::sqrt(40.0)).abs().maxCoeff(), 1e-8);
}

TEST(Lle, MatchesDenseEigenOracle) {
  // n=20, d=3, k=5. Weights and the eigenproblem are rebuilt here from
  // scratch; Eigen's self-adjoint solver is the reference.
  const Matrix x = uniform_matrix(20, 3, 99);
  const std::size_t k = 5;
  const double reg = 1e-3;
  const auto e = fit_lle(x, 2, {k, reg});

  Matrix w = Matrix::Zero(20, 20);
  for (Eigen::Index i = 0; i < 20; ++i) {
    std::vector<std::pair<double, Eigen::Index>> d;
    for (Eigen::Index j = 0; j < 20; ++j) {
      if (j != i) d.emplace_back((x.row(j) - x.row(i)).squaredNorm(), j);
    }
    std::sort(d.begin(), d.end());
    Matrix diff(static_cast<Eigen::Index>(k), 3);
    for (std::size_t a = 0; a < k; ++a) diff.row(static_cast<Eigen::Index>(a)) = x.row(d[a].second) - x.row(i);
    Matrix g = diff * diff.transpose();
    g.diagonal().array() += reg * g.trace();
    const Vector sol = g.fullPivLu().solve(Vector::Ones(static_cast<Eigen::Index>(k)));
    for (std::size_t a = 0; a < k; ++a) w(i, d[a].second) = sol[static_cast<Eigen::Index>(a)] / sol.sum();
  }
  EXPECT_LT((w - lle_weight_matrix(e.lle())).cwiseAbs().maxCoeff(), 1e-10);

  const Matrix ia = Matrix::Identity(20, 20) - w;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(ia.transpose() * ia);
  const Matrix oracle = solver.eigenvectors().middleCols(1, 2);
  const Matrix& y = e.lle().embedding;
  EXPECT_LT((y.transpose() * y - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LT((subspace_projector(y) - subspace_projector(oracle)).cwiseAbs().maxCoeff(), 1e-6);
  for (Eigen::Index j = 0; j < 2; ++j) EXPECT_NEAR(e.lle().eigenvalues[j], solver.eigenvalues()[j + 1], 1e-10);
}

TEST(Lle, OutOfSampleReproducesTrainingPoints) {
  SwissRollConfig cfg;
  cfg.n = 200;
  const auto ds = gen_swiss_roll(cfg);
  const auto e = fit_lle(ds.x, 2);
  EXPECT_LT((e.transform(ds.x) - e.lle().embedding).cwiseAbs().maxCoeff(), 1e-6);
  // A point near a training point lands near its embedding.
  Matrix q = ds.x.topRows(5);
  q.array() += 1e-7;
  EXPECT_LT((e.transform(q) - e.lle().embedding.topRows(5)).cwiseAbs().maxCoeff(), 1e-2);
}

TEST(Lle, Contracts) {
  const Matrix x = uniform_matrix(20, 3, 1);
  EXPECT_THROW(fit_lle(x, 2, {2, 1e-3}), ValidationError);
  EXPECT_THROW(fit_lle(x, 2, {20, 1e-3}), ValidationError);
  EXPECT_THROW(fit_lle(x, 2, {5, 0.0}), ValidationError);
  EXPECT_THROW(fit_lle(x, 2, {5, -1.0}), ValidationError);
  EXPECT_THROW(fit_lle(uniform_matrix(2001, 3, 1), 2), ValidationError);
}

TEST(Autoencoder, SpecMirrorsHiddenLayers) {
  AutoencoderOptions o;
  o.hidden = {8, 4};
  const auto spec = autoencoder_spec(3, 2, o);
  ASSERT_EQ(spec.layers.size(), 6u);
  const std::vector<std::size_t> outs{8, 4, 2, 4, 8, 3};
  for (std::size_t k = 0; k < 6; ++k) EXPECT_EQ(spec.layers[k].fan_out, outs[k]);
  EXPECT_EQ(spec.layers.back().activation, Activation::identity);
  EXPECT_EQ(spec.loss, Loss::mse);
  const auto plain = autoencoder_spec(3, 2, {});
  ASSERT_EQ(plain.layers.size(), 2u);
  EXPECT_EQ(plain.layers[0].activation, Activation::tanh);
  o.hidden_activation = Activation::relu;
  o.bottleneck_activation = Activation::tanh;
  const auto mixed = autoencoder_spec(3, 2, o);
  EXPECT_EQ(mixed.layers[1].activation, Activation::relu);
  EXPECT_EQ(mixed.layers[2].activation, Activation::tanh);
  EXPECT_EQ(mixed.layers[3].activation, Activation::relu);
}

TEST(Autoencoder, LearnsAPlaneWithDefaults) {
  const Matrix x = plane_points(200, 21);
  const auto e = fit_autoencoder(x, 2);
  EXPECT_LT(autoencoder_reconstruction_mse(e, x), 1e-2);
}

TEST(Autoencoder, TransformIsTheBottleneckOfTheFullPass) {
  SwissRollConfig cfg;
  cfg.n = 150;
  const auto ds = gen_swiss_roll(cfg);
  AutoencoderOptions o;
  o.hidden = {6};
  o.train.epochs = 5;
  const auto e = fit_autoencoder(ds.x, 2, o);
  const Matrix z = e.transform(ds.x);
  EXPECT_EQ(z.rows(), 150);
  EXPECT_EQ(z.cols(), 2);
  const auto& s = e.autoencoder();
  const auto cache = s.network.forward(s.standardizer.apply(ds.x), false);
  EXPECT_TRUE(z == cache.outputs[s.bottleneck_layer]);
}

TEST(Autoencoder, Contracts) {
  const Matrix x = uniform_matrix(20, 3, 2);
  EXPECT_THROW(fit_autoencoder(x, 3), ValidationError);
  EXPECT_THROW(fit_autoencoder(x, 0), ValidationError);
  AutoencoderOptions o;
  o.hidden_activation = Activation::softmax;
  EXPECT_THROW(fit_autoencoder(x, 2, o), ValidationError);
}

TEST(KMeans, SeparatedCloudsGiveTheGeneratingPartition) {
  Matrix x = uniform_matrix(40, 2, 3, -0.5, 0.5);
  x.bottomRows(20).array() += 10.0;
  const auto r = kmeans(x, 2, 1);
  for (int i = 1; i < 20; ++i) EXPECT_EQ(r.labels[static_cast<std::size_t>(i)], r.labels[0]);
  for (int i = 21; i < 40; ++i) EXPECT_EQ(r.labels[static_cast<std::size_t>(i)], r.labels[20]);
  EXPECT_NE(r.labels[0], r.labels[20]);
}

TEST(KMeans, MatchesExhaustiveTwoPartitionOptimum) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    // Two loose clouds of 5 and 6 points; brute force all 2^11 splits.
    Matrix x = uniform_matrix(11, 2, seed + 50);
    x.bottomRows(6).array() += 3.0;
    const auto n = x.rows();
    double best = std::numeric_limits<double>::infinity();
    for (unsigned mask = 1; mask + 1 < (1u << n); ++mask) {
      double cost = 0.0;
      for (unsigned side = 0; side < 2; ++side) {
        Eigen::RowVectorXd c = Eigen::RowVectorXd::Zero(2);
        int count = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
          if (((mask >> i) & 1u) == side) {
            c += x.row(i);
            ++count;
          }
        }
        c /= count;
        for (Eigen::Index i = 0; i < n; ++i) {
          if (((mask >> i) & 1u) == side) cost += (x.row(i) - c).squaredNorm();
        }
      }
      best = std::min(best, cost);
    }
    EXPECT_NEAR(kmeans(x, 2, seed).inertia, best, 1e-9);
  }
}

TEST(KMeans, ClosedFormCases) {
  const Matrix x = uniform_matrix(9, 3, 4);
  const auto one = kmeans(x, 1, 0);
  EXPECT_LT((one.centroids.row(0) - x.colwise().mean()).cwiseAbs().maxCoeff(), 1e-12);
  const auto all = kmeans(x, 9, 0);
  EXPECT_NEAR(all.inertia, 0.0, 1e-20);
  EXPECT_THROW(kmeans(x, 10, 0), ValidationError);
  EXPECT_THROW(kmeans(x, 0, 0), ValidationError);
}

TEST(KMeans, InertiaNonIncreasingAndConsistent) {
  SwissRollConfig cfg;
  cfg.n = 500;
  const auto ds = gen_swiss_roll(cfg);
  const auto r = kmeans(ds.x, 6, 3);
  for (std::size_t i = 1; i < r.inertia_history.size(); ++i) {
    EXPECT_LE(r.inertia_history[i], r.inertia_history[i - 1] + 1e-9);
  }
  double inertia = 0.0;
  for (Eigen::Index i = 0; i < ds.x.rows(); ++i) {
    const int l = r.labels[static_cast<std::size_t>(i)];
    ASSERT_GE(l, 0);
    ASSERT_LT(l, 6);
    inertia += (ds.x.row(i) - r.centroids.row(l)).squaredNorm();
  }
  EXPECT_NEAR(inertia, r.inertia, 1e-8 * inertia);
}

TEST(KMeans, DuplicatePointsDoNotLeaveEmptyClusters) {
  Matrix x = Matrix::Zero(6, 2);
  x.row(5) << 1.0, 1.0;
  const auto r = kmeans(x, 3, 2);
  EXPECT_TRUE(r.centroids.allFinite());
  EXPECT_NEAR(r.inertia, 0.0, 1e-20);
}

TEST(EmbedderPersistence, RoundTripEveryKind) {
  SwissRollConfig cfg;
  cfg.n = 120;
  const auto ds = gen_swiss_roll(cfg);
  AutoencoderOptions o;
  o.hidden = {5};
  o.train.epochs = 3;
  const std::vector<Embedder> all{fit_identity(ds.x), fit_pca(ds.x, 2, {true}), fit_lle(ds.x, 2),
                                  fit_autoencoder(ds.x, 2, o)};
  const Matrix probe = ds.x.topRows(10).array() + 0.01;
  for (const auto& e : all) {
    const auto path = std::filesystem::temp_directory_path() / ("deepcausal_test_emb_" + to_string(e.kind()) + ".json");
    save_embedder(e, path);
    const auto back = load_embedder(path);
    EXPECT_EQ(back.kind(), e.kind());
    EXPECT_EQ(back.output_dim(), e.output_dim());
    EXPECT_TRUE(back.transform(probe) == e.transform(probe)) << to_string(e.kind());
    std::filesystem::remove(path);
  }
  auto j = embedder_to_json(all[1]);
  j["method"] = "tsne";
  EXPECT_THROW(embedder_from_json(j), ValidationError);
}
