#include "crossover/dropout_model.hpp"

#include <cmath>
#include <sstream>

#include "crossover/errors.hpp"

namespace crossover {

DropoutMechanism::DropoutMechanism(int periods, int subjects, std::vector<double> probabilities)
    : p_(periods), n_(subjects), a_(std::move(probabilities)) {
  if (p_ < 2) throw ValidationError("mechanism: need p >= 2 periods");
  if (n_ < 2) throw ValidationError("mechanism: need n >= 2 subjects");
  if (static_cast<int>(a_.size()) != p_) {
    std::ostringstream os;
    os << "mechanism: probability vector has length " << a_.size() << ", expected p = " << p_;
    throw ValidationError(os.str());
  }
  double total = 0.0;
  for (int k = 0; k < p_; ++k) {
    if (!std::isfinite(a_[k]) || a_[k] < 0.0) {
      std::ostringstream os;
      os << "mechanism: a_" << (k + 1) << " = " << a_[k] << " is not a probability";
      throw ValidationError(os.str());
    }
    total += a_[k];
  }
  if (std::abs(total - 1.0) > 1e-9) {
    std::ostringstream os;
    os << "mechanism: probabilities sum to " << total << ", expected 1";
    throw ValidationError(os.str());
  }
  for (double& x : a_) x /= total;

  prefix_.assign(p_ + 1, 0.0);
  for (int k = 1; k <= p_; ++k) prefix_[k] = prefix_[k - 1] + a_[k - 1];
  suffix_.assign(p_ + 2, 0.0);
  for (int k = p_; k >= 1; --k) suffix_[k] = suffix_[k + 1] + a_[k - 1];

  for (int k = 1; k <= p_; ++k) {
    if (a_[k - 1] > 0.0) {
      m_ = k;
      break;
    }
  }
  if (m_ < 2)
    warnings_.emplace_back(
        "stay length 1 has positive probability; such subjects carry no within-subject "
        "information");

  alpha_.resize(p_);
  beta_.resize(p_);
  const double n = n_;
  for (int k = 1; k <= p_; ++k) {
    const double ak = a_[k - 1];
    alpha_[k - 1] =
        ((n + 1.0) * ak + std::pow(prefix_[k - 1], n + 1.0) - std::pow(prefix_[k], n + 1.0)) / n;
    beta_[k - 1] =
        ak + suffix_[k + 1] * std::pow(prefix_[k], n) - suffix_[k] * std::pow(prefix_[k - 1], n);
    if (alpha_[k - 1] < -1e-12 || beta_[k - 1] < -1e-12) {
      std::ostringstream os;
      os << "mechanism: negative coefficient at k = " << k << " (alpha " << alpha_[k - 1]
         << ", beta " << beta_[k - 1] << ")";
      throw ValidationError(os.str());
    }
  }
}

double DropoutMechanism::a(int k) const {
  if (k < 1 || k > p_) throw ValidationError("mechanism: period index out of range");
  return a_[k - 1];
}

double DropoutMechanism::partial_sum(int j, int k) const {
  if (j < 1 || k > p_ + 1 || j > p_ + 1) throw ValidationError("partial_sum: index out of range");
  double s = 0.0;
  for (int i = j; i <= std::min(k, p_); ++i) s += a_[i - 1];
  return s;
}

std::vector<int> DropoutMechanism::support() const {
  std::vector<int> out;
  for (int k = 1; k <= p_; ++k)
    if (a_[k - 1] > 0.0) out.push_back(k);
  return out;
}

double DropoutMechanism::alpha(int k) const {
  if (k < 1 || k > p_) throw ValidationError("alpha: period index out of range");
  return alpha_[k - 1];
}

double DropoutMechanism::beta(int k) const {
  if (k < 1 || k > p_) throw ValidationError("beta: period index out of range");
  return beta_[k - 1];
}

DropoutMechanism DropoutMechanism::with_subjects(int subjects) const {
  return DropoutMechanism(p_, subjects, a_);
}

SymMatrix weighted_centering_sum(const std::vector<double>& weights, int p) {
  Matrix out = Matrix::Zero(p, p);
  for (int k = 2; k <= p; ++k) {
    const double w = weights[k - 1];
    if (w != 0.0) out += w * padded_centering(k, p).dense();
  }
  return SymMatrix(out);
}

MechanismMatrices matrices(const DropoutMechanism& mech) {
  const int p = mech.periods();
  const int n = mech.subjects();
  SymMatrix a = weighted_centering_sum(mech.alphas(), p);
  SymMatrix b = weighted_centering_sum(mech.betas(), p);
  const Matrix v = kron(Matrix::Identity(n, n), a.dense()) -
                   kron(Matrix::Constant(n, n, 1.0), b.dense()) / static_cast<double>(n);
  return {std::move(a), std::move(b), SymMatrix(v)};
}

namespace {

// E 1/(2 + X) for X ~ Bin(m, q).
double inverse_binomial_moment(int m, double q) {
  double total = 0.0;
  for (int j = 0; j <= m; ++j) {
    const double log_pmf = std::lgamma(m + 1.0) - std::lgamma(j + 1.0) - std::lgamma(m - j + 1.0);
    const double w = (q == 0.0) ? (j == 0 ? 1.0 : 0.0)
                     : (q == 1.0) ? (j == m ? 1.0 : 0.0)
                                  : std::exp(log_pmf + j * std::log(q) + (m - j) * std::log1p(-q));
    total += w / (j + 2.0);
  }
  return total;
}

}  // namespace

std::vector<double> exact_pair_betas(const DropoutMechanism& mech) {
  const int p = mech.periods();
  const int n = mech.subjects();
  std::vector<double> tail(p + 2, 0.0);
  for (int k = 1; k <= p; ++k) {
    const double q = mech.partial_sum(k, p);
    tail[k] = inverse_binomial_moment(n - 2, q) * q * q;
  }
  std::vector<double> w(p);
  for (int k = 1; k <= p; ++k) w[k - 1] = n * (tail[k] - tail[k + 1]);
  return w;
}

MechanismMatrices exact_matrices(const DropoutMechanism& mech) {
  const int p = mech.periods();
  const int n = mech.subjects();
  const auto pair = exact_pair_betas(mech);
  std::vector<double> diag(p);
  for (int k = 1; k <= p; ++k)
    diag[k - 1] = mech.alpha(k) - mech.beta(k) / n + pair[k - 1] / n;
  SymMatrix a = weighted_centering_sum(diag, p);
  SymMatrix b = weighted_centering_sum(pair, p);
  const Matrix v = kron(Matrix::Identity(n, n), a.dense()) -
                   kron(Matrix::Constant(n, n, 1.0), b.dense()) / static_cast<double>(n);
  return {std::move(a), std::move(b), SymMatrix(v)};
}

TypeHCheck type_h_identity_check(int k, const Vector& eta, double b, double tol) {
  const auto p = eta.size();
  if (k < 1 || k > p) throw ValidationError("type-H check: need 1 <= k <= length(eta)");
  const Vector ones = Vector::Ones(p);
  const Matrix sigma = Matrix::Identity(p, p) + eta * ones.transpose() + ones * eta.transpose() +
                       b * Matrix::Constant(p, p, 1.0);
  const Matrix sk = sigma.topLeftCorner(k, k);
  Eigen::FullPivLU<Matrix> lu(sk);
  if (!lu.isInvertible()) throw ValidationError("type-H check: leading block is singular");
  const Matrix inv = lu.inverse();
  const Vector u = inv * Vector::Ones(k);
  const double denom = u.sum();
  if (std::abs(denom) < 1e-14)
    throw ValidationError("type-H check: 1' S^-1 1 vanishes");
  const Matrix lhs = inv - u * u.transpose() / denom;
  const double err = (lhs - centering(k).dense()).cwiseAbs().maxCoeff();
  return {err <= tol, err};
}

}  // namespace crossover
