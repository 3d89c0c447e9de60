#include "wsrctrl/matops.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "wsrctrl/error.hpp"

namespace wsrctrl {

SymMat::SymMat(const Eigen::Ref<const Mat>& m) {
  if (m.rows() != m.cols()) {
    throw DimensionError("SymMat: matrix is " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()) + ", expected square");
  }
  m_ = 0.5 * (m + m.transpose());
}

SymMat SymMat::Zero(Index n) { return SymMat(Mat::Zero(n, n)); }

SymMat SymMat::Identity(Index n) { return SymMat(Mat::Identity(n, n)); }

double SymMat::min_eigenvalue() const {
  if (dim() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Mat> es(m_, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw EigenFailure("SymMat: eigen-solver failed");
  return es.eigenvalues()(0);
}

double SymMat::max_eigenvalue() const {
  if (dim() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Mat> es(m_, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw EigenFailure("SymMat: eigen-solver failed");
  return es.eigenvalues()(dim() - 1);
}

void require_finite(const Eigen::Ref<const Mat>& m, std::string_view what) {
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = 0; i < m.rows(); ++i) {
      if (!std::isfinite(m(i, j))) {
        throw NonFiniteValue(std::string(what) + ": non-finite entry at (" + std::to_string(i) +
                                 "," + std::to_string(j) + ")",
                             static_cast<std::size_t>(i + j * m.rows()));
      }
    }
  }
}

Vec vec(const Eigen::Ref<const Mat>& c) {
  Vec v(c.size());
  for (Index j = 0; j < c.cols(); ++j) v.segment(j * c.rows(), c.rows()) = c.col(j);
  return v;
}

Mat unvec(const Eigen::Ref<const Vec>& v, Index rows, Index cols) {
  if (v.size() != rows * cols) {
    throw DimensionError("unvec: length " + std::to_string(v.size()) + " != " +
                         std::to_string(rows) + "*" + std::to_string(cols));
  }
  Mat m(rows, cols);
  for (Index j = 0; j < cols; ++j) m.col(j) = v.segment(j * rows, rows);
  return m;
}

Vec vech(const Eigen::Ref<const Mat>& s) {
  if (s.rows() != s.cols()) {
    throw DimensionError("vech: matrix is " + std::to_string(s.rows()) + "x" +
                         std::to_string(s.cols()) + ", expected square");
  }
  const Index n = s.rows();
  Vec v(n * (n + 1) / 2);
  Index k = 0;
  for (Index j = 0; j < n; ++j) {
    for (Index i = j; i < n; ++i) v(k++) = s(i, j);
  }
  return v;
}

Vec vech(const SymMat& s) { return vech(s.matrix()); }

Index triangular_root(Index len) {
  Index n = static_cast<Index>((std::sqrt(8.0 * static_cast<double>(len) + 1.0) - 1.0) / 2.0);
  while (n * (n + 1) / 2 < len) ++n;
  while (n > 0 && n * (n + 1) / 2 > len) --n;
  if (n * (n + 1) / 2 != len) {
    throw DimensionError("length " + std::to_string(len) + " is not n(n+1)/2 for any n");
  }
  return n;
}

SymMat unvech(const Eigen::Ref<const Vec>& v, Index n) {
  if (v.size() != n * (n + 1) / 2) {
    throw DimensionError("unvech: length " + std::to_string(v.size()) + " does not match n=" +
                         std::to_string(n) + " (needs " + std::to_string(n * (n + 1) / 2) + ")");
  }
  Mat m(n, n);
  Index k = 0;
  for (Index j = 0; j < n; ++j) {
    for (Index i = j; i < n; ++i) {
      m(i, j) = v(k);
      m(j, i) = v(k);
      ++k;
    }
  }
  return SymMat(m);
}

Mat kron(const Eigen::Ref<const Mat>& a, const Eigen::Ref<const Mat>& b) {
  Mat k(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index j = 0; j < a.cols(); ++j) {
    for (Index i = 0; i < a.rows(); ++i) {
      k.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return k;
}

Mat duplication_matrix(Index n) {
  Mat d = Mat::Zero(n * n, n * (n + 1) / 2);
  Index k = 0;
  for (Index j = 0; j < n; ++j) {
    for (Index i = j; i < n; ++i) {
      d(i + j * n, k) = 1.0;
      d(j + i * n, k) = 1.0;
      ++k;
    }
  }
  return d;
}

Mat elimination_matrix(Index n) {
  Mat l = Mat::Zero(n * (n + 1) / 2, n * n);
  Index k = 0;
  for (Index j = 0; j < n; ++j) {
    for (Index i = j; i < n; ++i) l(k++, i + j * n) = 1.0;
  }
  return l;
}

Mat compress(const Eigen::Ref<const Mat>& d) {
  if (d.rows() != d.cols()) {
    throw DimensionError("compress: matrix is " + std::to_string(d.rows()) + "x" +
                         std::to_string(d.cols()) + ", expected square");
  }
  const auto n = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(d.rows()))));
  if (n * n != d.rows()) {
    throw DimensionError("compress: size " + std::to_string(d.rows()) + " is not n^2");
  }
  return elimination_matrix(n) * d * duplication_matrix(n);
}

double spectral_radius(const Eigen::Ref<const Mat>& d) {
  if (d.rows() != d.cols()) {
    throw DimensionError("spectral_radius: matrix is " + std::to_string(d.rows()) + "x" +
                         std::to_string(d.cols()) + ", expected square");
  }
  if (d.rows() == 0) return 0.0;
  require_finite(d, "spectral_radius");
  Eigen::EigenSolver<Mat> es(d, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) throw EigenFailure("spectral_radius: eigen-solver did not converge");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace wsrctrl
