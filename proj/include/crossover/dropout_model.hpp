#pragma once

// Random subject dropout: stay lengths l_i are i.i.d. with P(l_i = k) = a_k and
// a subject never re-enters once it leaves.

#include <string>
#include <vector>

#include "crossover/matrix_kernels.hpp"

namespace crossover {

class DropoutMechanism {
 public:
  /// Validates a (length p, entries >= 0, sum 1 within 1e-9) and caches the
  /// partial sums and the alpha/beta coefficients. Throws ValidationError.
  DropoutMechanism(int periods, int subjects, std::vector<double> probabilities);

  int periods() const { return p_; }
  int subjects() const { return n_; }
  const std::vector<double>& probabilities() const { return a_; }

  /// Probability of staying exactly k periods (1-based).
  double a(int k) const;

  /// a_{jk} = a_j + ... + a_k, zero when j > k.
  double partial_sum(int j, int k) const;

  /// Smallest stay length with positive probability.
  int min_stay() const { return m_; }

  /// Stay lengths with positive probability, ascending.
  std::vector<int> support() const;

  /// True when a single stay length carries all the mass.
  bool is_deterministic() const { return support().size() == 1; }

  /// alpha_k = ((n+1) a_k + a_{1,k-1}^{n+1} - a_{1k}^{n+1}) / n, 1-based k.
  double alpha(int k) const;
  /// beta_k = a_k + a_{k+1,p} a_{1k}^n - a_{kp} a_{1,k-1}^n, 1-based k.
  double beta(int k) const;

  const std::vector<double>& alphas() const { return alpha_; }
  const std::vector<double>& betas() const { return beta_; }

  /// Same probabilities, different number of subjects.
  DropoutMechanism with_subjects(int subjects) const;

  /// Non-fatal diagnostics collected at construction.
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  int p_;
  int n_;
  int m_ = 0;
  std::vector<double> a_;
  std::vector<double> prefix_;  // prefix_[k] = a_{1k}, prefix_[0] = 0
  std::vector<double> suffix_;  // suffix_[k] = a_{kp}, suffix_[p+1] = 0
  std::vector<double> alpha_;
  std::vector<double> beta_;
  std::vector<std::string> warnings_;
};

struct MechanismMatrices {
  SymMatrix A;  // p x p, sum_k alpha_k B^k_p
  SymMatrix B;  // p x p, sum_k beta_k B^k_p
  SymMatrix V;  // np x np, I_n (x) A - J_n (x) B / n
};

/// sum_k w[k-1] * B^k_p.
SymMatrix weighted_centering_sum(const std::vector<double>& weights, int p);

MechanismMatrices matrices(const DropoutMechanism& mech);

/// Coefficients of the exact between-subject block E O_ij = -sum_k w_k B^k_p / n:
/// w_k = n (c_k a_{kp}^2 - c_{k+1} a_{k+1,p}^2) with c_k = E 1/(2 + Bin(n-2, a_{kp})).
std::vector<double> exact_pair_betas(const DropoutMechanism& mech);

/// E O computed exactly. The diagonal blocks agree with matrices(); the
/// off-diagonal blocks use exact_pair_betas instead of beta_k.
MechanismMatrices exact_matrices(const DropoutMechanism& mech);

struct TypeHCheck {
  bool pass = false;
  double max_error = 0.0;
};

/// Checks S^-1 - S^-1 J S^-1 / (1' S^-1 1) = B_k for the leading k x k block S
/// of Sigma = I + eta 1' + 1 eta' + b J. Throws ValidationError when S is
/// singular.
TypeHCheck type_h_identity_check(int k, const Vector& eta, double b, double tol = 1e-10);

}  // namespace crossover
