#pragma once

// Dense symmetric-matrix primitives shared by every other module. Orders stay
// in the low hundreds (n*p), so everything is dense Eigen storage.

#include <Eigen/Dense>

namespace crossover {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Relative rank tolerance: eigenvalues with |lambda| <= tol * max|lambda|
/// are treated as zero.
inline constexpr double kRankTolerance = 1e-10;

/// Symmetric matrix. Construction symmetrizes as (M + M')/2, so
/// entries(i,j) == entries(j,i) holds bit-for-bit.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(const Matrix& m);

  static SymMatrix zero(Eigen::Index order);
  static SymMatrix identity(Eigen::Index order);

  Eigen::Index order() const { return m_.rows(); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }
  const Matrix& dense() const { return m_; }

  /// Eigenvalues sorted ascending.
  Vector eigenvalues() const;

  SymMatrix operator+(const SymMatrix& o) const { return SymMatrix(m_ + o.m_); }
  SymMatrix operator-(const SymMatrix& o) const { return SymMatrix(m_ - o.m_); }
  SymMatrix operator*(double c) const { return SymMatrix(m_ * c); }

 private:
  Matrix m_;
};

inline SymMatrix operator*(double c, const SymMatrix& s) { return s * c; }

struct SymEigen {
  Vector values;   // ascending
  Matrix vectors;  // columns match values
};

SymEigen sym_eigen(const SymMatrix& g);

/// B_k = I_k - J_k / k.
SymMatrix centering(int k);

/// p x p matrix holding B_k in its top-left k x k corner, zeros elsewhere.
SymMatrix padded_centering(int k, int p);

Matrix kron(const Matrix& g1, const Matrix& g2);

/// Moore-Penrose inverse through the symmetric eigendecomposition.
SymMatrix pinv(const SymMatrix& g, double tol = kRankTolerance);

/// Projector onto the orthogonal complement of the column span of g,
/// I - g (g'g)^+ g'.
SymMatrix proj_complement(const Matrix& g, double tol = kRankTolerance);

/// Schur complement c11 - c12 * pinv(c22) * c12'.
SymMatrix schur_complement(const SymMatrix& c11, const Matrix& c12, const SymMatrix& c22,
                           double tol = kRankTolerance);

/// Column-major vectorization.
Vector vec(const Matrix& m);

}  // namespace crossover
