#pragma once

// Small dense-matrix kernel. Storage is column-major everywhere so that
// vec() is plain column stacking and the Kronecker identities hold as
// written: (C1 kron C2) vec(X) = vec(C2 X C1^T).

#include <Eigen/Dense>

#include <string_view>

namespace wsrctrl {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Index = Eigen::Index;

// Symmetric matrix. Construction symmetrizes as (S + S^T) / 2, so rounding
// noise from Monte-Carlo averages never leaves the symmetric manifold.
class SymMat {
 public:
  SymMat() = default;
  explicit SymMat(const Eigen::Ref<const Mat>& m);

  static SymMat Zero(Index n);
  static SymMat Identity(Index n);

  Index dim() const { return m_.rows(); }
  const Mat& matrix() const { return m_; }
  double operator()(Index i, Index j) const { return m_(i, j); }

  double min_eigenvalue() const;
  double max_eigenvalue() const;

  SymMat operator+(const SymMat& o) const { return SymMat(m_ + o.m_); }
  SymMat operator-(const SymMat& o) const { return SymMat(m_ - o.m_); }
  SymMat operator*(double s) const { return SymMat(m_ * s); }

 private:
  Mat m_;
};

// Throws NonFiniteValue naming `what` if any entry is NaN or infinite.
void require_finite(const Eigen::Ref<const Mat>& m, std::string_view what);

Vec vec(const Eigen::Ref<const Mat>& c);
Mat unvec(const Eigen::Ref<const Vec>& v, Index rows, Index cols);

// Lower-triangular column order: S11, S21, ..., Sn1, S22, ..., Snn.
Vec vech(const Eigen::Ref<const Mat>& s);
Vec vech(const SymMat& s);
SymMat unvech(const Eigen::Ref<const Vec>& v, Index n);

Mat kron(const Eigen::Ref<const Mat>& a, const Eigen::Ref<const Mat>& b);

// D_n vech(S) = vec(S); L_n vec(S) = vech(S).
Mat duplication_matrix(Index n);
Mat elimination_matrix(Index n);

// L_n D D_n for an n^2 x n^2 matrix D.
Mat compress(const Eigen::Ref<const Mat>& d);

// Largest eigenvalue modulus of a square real matrix.
double spectral_radius(const Eigen::Ref<const Mat>& d);

// n from n(n+1)/2; throws DimensionError if `len` is not triangular.
Index triangular_root(Index len);

}  // namespace wsrctrl
