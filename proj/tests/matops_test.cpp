#include <gtest/gtest.h>

#include <random>

#include "support/oracles.hpp"
#include "wsrctrl/error.hpp"
#include "wsrctrl/matops.hpp"

namespace wsrctrl {
namespace {

Mat M(std::initializer_list<std::initializer_list<double>> rows) {
  Mat m(static_cast<Index>(rows.size()), static_cast<Index>(rows.begin()->size()));
  Index i = 0;
  for (const auto& r : rows) {
    Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

TEST(Vec, StacksColumns) {
  EXPECT_EQ(vec(M({{1, 3}, {2, 4}})), (Vec(4) << 1, 2, 3, 4).finished());
  EXPECT_EQ(vec(Mat::Identity(2, 2)), (Vec(4) << 1, 0, 0, 1).finished());
  EXPECT_EQ(vec(Mat::Zero(2, 3)), Vec::Zero(6));
}

TEST(Vech, LowerTriangleColumnOrder) {
  EXPECT_EQ(vech(M({{1, 2}, {2, 3}})), (Vec(3) << 1, 2, 3).finished());
  EXPECT_EQ(vech(Mat::Identity(3, 3)), (Vec(6) << 1, 0, 0, 1, 0, 1).finished());
  EXPECT_THROW(vech(Mat::Zero(2, 3)), DimensionError);
}

TEST(Unvech, InvertsVech) {
  EXPECT_EQ(unvech((Vec(3) << 1, 2, 3).finished(), 2).matrix(), M({{1, 2}, {2, 3}}));
  EXPECT_EQ(unvech(Vec::Zero(6), 3).matrix(), Mat::Zero(3, 3));
  EXPECT_THROW(unvech(Vec::Zero(4), 2), DimensionError);

  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 1 + trial % 5;
    const Mat s = testing::random_symmetric(rng, n);
    EXPECT_EQ(unvech(vech(s), n).matrix(), s);
    const Vec v = testing::random_matrix(rng, n * (n + 1) / 2, 1);
    EXPECT_EQ(vech(unvech(v, n)), v);
  }
}

TEST(SymMat, SymmetrizesOnConstruction) {
  const SymMat s(M({{1, 2}, {4, 3}}));
  EXPECT_EQ(s.matrix(), M({{1, 3}, {3, 3}}));
  EXPECT_THROW(SymMat(Mat::Zero(2, 3)), DimensionError);
}

TEST(Kron, BlockLayout) {
  const Mat m = M({{1, 2}, {3, 4}});
  Mat block = Mat::Zero(4, 4);
  block.topLeftCorner(2, 2) = m;
  block.bottomRightCorner(2, 2) = m;
  EXPECT_EQ(kron(Mat::Identity(2, 2), m), block);
  EXPECT_EQ(kron(M({{2.5}}), m), 2.5 * m);
}

TEST(Kron, VecIdentityAgainstDirectProduct) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const Mat c1 = testing::random_matrix(rng, 2, 2);
    const Mat c2 = testing::random_matrix(rng, 2, 2);
    const Mat x = testing::random_matrix(rng, 2, 2);
    const Mat direct = c2 * x * c1.transpose();
    EXPECT_LE((kron(c1, c2) * vec(x) - vec(direct)).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(DuplicationElimination, TwoByTwoLiterals) {
  EXPECT_EQ(elimination_matrix(2), M({{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 0, 1}}));
  EXPECT_EQ(duplication_matrix(2), M({{1, 0, 0}, {0, 1, 0}, {0, 1, 0}, {0, 0, 1}}));
  EXPECT_EQ(elimination_matrix(3) * duplication_matrix(3), Mat::Identity(6, 6));
}

TEST(DuplicationElimination, IdentitiesOnRandomSymmetric) {
  std::mt19937_64 rng(3);
  for (Index n = 1; n <= 5; ++n) {
    const Mat d = duplication_matrix(n);
    const Mat l = elimination_matrix(n);
    EXPECT_EQ(l * d, Mat::Identity(n * (n + 1) / 2, n * (n + 1) / 2));
    for (int trial = 0; trial < 5; ++trial) {
      const Mat s = testing::random_symmetric(rng, n);
      EXPECT_LE((d * vech(s) - vec(s)).cwiseAbs().maxCoeff(), 1e-14);
      EXPECT_LE((l * vec(s) - vech(s)).cwiseAbs().maxCoeff(), 1e-14);
    }
  }
}

TEST(Compress, Basics) {
  EXPECT_EQ(compress(Mat::Identity(4, 4)), Mat::Identity(3, 3));
  EXPECT_EQ(compress(M({{2.5}})), M({{2.5}}));
  EXPECT_THROW(compress(Mat::Zero(3, 3)), DimensionError);
  EXPECT_THROW(compress(Mat::Zero(4, 3)), DimensionError);
}

TEST(Compress, IsLinear) {
  std::mt19937_64 rng(5);
  const Mat d1 = testing::random_matrix(rng, 9, 9);
  const Mat d2 = testing::random_matrix(rng, 9, 9);
  const double a = 1.7;
  const double b = -0.3;
  EXPECT_LE((compress(a * d1 + b * d2) - (a * compress(d1) + b * compress(d2))).cwiseAbs().maxCoeff(),
            1e-13);
}

// vech(E[M^T S M]) = compress(E[M^T kron M^T]) vech(S), brute force on a
// handful of random closed-loop matrices.
TEST(Compress, RepresentsCongruenceOnSymmetricMatrices) {
  std::mt19937_64 rng(13);
  std::vector<Mat> as, bs;
  for (int i = 0; i < 4; ++i) {
    as.push_back(testing::random_matrix(rng, 2, 2));
    bs.push_back(testing::random_matrix(rng, 2, 1));
  }
  const Mat l = testing::random_matrix(rng, 1, 2);
  const Mat s = testing::random_symmetric(rng, 2);
  Mat lhs = Mat::Zero(2, 2);
  Mat kr = Mat::Zero(4, 4);
  for (int i = 0; i < 4; ++i) {
    const Mat m = as[i] - bs[i] * l;
    lhs += m.transpose() * s * m / 4.0;
    kr += kron(m.transpose(), m.transpose()) / 4.0;
  }
  EXPECT_LE((vech(lhs) - compress(kr) * vech(s)).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(SpectralRadius, KnownValues) {
  EXPECT_DOUBLE_EQ(spectral_radius(M({{0.5, 0}, {0, -0.9}})), 0.9);
  EXPECT_NEAR(spectral_radius(Mat::Identity(5, 5)), 1.0, 1e-15);
  // lambda^2 + 0.25 = 0
  EXPECT_NEAR(spectral_radius(M({{0, 1}, {-0.25, 0}})), 0.5, 1e-14);
  EXPECT_THROW(spectral_radius(Mat::Zero(2, 3)), DimensionError);
}

TEST(SpectralRadius, ScalesWithAbsoluteFactor) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const Mat d = testing::random_matrix(rng, 4, 4);
    const double c = -2.0 + 0.4 * trial;
    EXPECT_NEAR(spectral_radius(c * d), std::abs(c) * spectral_radius(d), 1e-12);
  }
}

}  // namespace
}  // namespace wsrctrl
