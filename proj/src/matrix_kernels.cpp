#include "crossover/matrix_kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "crossover/errors.hpp"

namespace crossover {

SymMatrix::SymMatrix(const Matrix& m) {
  if (m.rows() != m.cols()) throw ValidationError("SymMatrix requires a square matrix");
  m_ = (m + m.transpose()) * 0.5;
}

SymMatrix SymMatrix::zero(Eigen::Index order) { return SymMatrix(Matrix::Zero(order, order)); }

SymMatrix SymMatrix::identity(Eigen::Index order) {
  return SymMatrix(Matrix::Identity(order, order));
}

Vector SymMatrix::eigenvalues() const {
  if (order() == 0) return Vector();
  Eigen::SelfAdjointEigenSolver<Matrix> es(m_, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

SymEigen sym_eigen(const SymMatrix& g) {
  if (g.order() == 0) return {};
  Eigen::SelfAdjointEigenSolver<Matrix> es(g.dense());
  return {es.eigenvalues(), es.eigenvectors()};
}

SymMatrix centering(int k) {
  if (k < 1) throw ValidationError("centering: order must be >= 1");
  Matrix b = Matrix::Identity(k, k);
  b.array() -= 1.0 / k;
  return SymMatrix(b);
}

SymMatrix padded_centering(int k, int p) {
  if (k < 1 || p < 1 || k > p) throw ValidationError("padded_centering: need 1 <= k <= p");
  Matrix b = Matrix::Zero(p, p);
  b.topLeftCorner(k, k) = centering(k).dense();
  return SymMatrix(b);
}

Matrix kron(const Matrix& g1, const Matrix& g2) {
  Matrix out(g1.rows() * g2.rows(), g1.cols() * g2.cols());
  for (Eigen::Index i = 0; i < g1.rows(); ++i)
    for (Eigen::Index j = 0; j < g1.cols(); ++j)
      out.block(i * g2.rows(), j * g2.cols(), g2.rows(), g2.cols()) = g1(i, j) * g2;
  return out;
}

SymMatrix pinv(const SymMatrix& g, double tol) {
  const auto n = g.order();
  if (n == 0) return g;
  const SymEigen es = sym_eigen(g);
  const double scale = es.values.cwiseAbs().maxCoeff();
  if (scale == 0.0) return SymMatrix::zero(n);
  Vector inv = Vector::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i)
    if (std::abs(es.values(i)) > tol * scale) inv(i) = 1.0 / es.values(i);
  return SymMatrix(es.vectors * inv.asDiagonal() * es.vectors.transpose());
}

SymMatrix proj_complement(const Matrix& g, double tol) {
  if (g.rows() < 1) throw ValidationError("proj_complement: matrix has no rows");
  const auto rows = g.rows();
  if (g.cols() == 0) return SymMatrix::identity(rows);
  const SymEigen es = sym_eigen(SymMatrix(g.transpose() * g));
  const double scale = es.values.cwiseAbs().maxCoeff();
  Matrix p = Matrix::Identity(rows, rows);
  if (scale == 0.0) return SymMatrix(p);
  // Orthonormal basis of the column span: u_i = g v_i / sqrt(lambda_i).
  for (Eigen::Index i = 0; i < es.values.size(); ++i) {
    if (es.values(i) <= tol * scale) continue;
    const Vector u = g * es.vectors.col(i) / std::sqrt(es.values(i));
    p.noalias() -= u * u.transpose();
  }
  return SymMatrix(p);
}

SymMatrix schur_complement(const SymMatrix& c11, const Matrix& c12, const SymMatrix& c22,
                           double tol) {
  return SymMatrix(c11.dense() - c12 * pinv(c22, tol).dense() * c12.transpose());
}

Vector vec(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

}  // namespace crossover
