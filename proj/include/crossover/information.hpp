#pragma once

// Information matrices for direct treatment effects: realized ones for a
// given vector of stay lengths, the surrogate built from E[O] = V, the
// per-sequence check matrices, and the A/D/E/T criteria.

#include <array>
#include <string>
#include <vector>

#include "crossover/design.hpp"
#include "crossover/dropout_model.hpp"

namespace crossover {

struct DesignMatrices {
  Matrix T;  // np x t, subject blocks of p rows
  Matrix F;  // np x t, carryover incidence
};

DesignMatrices design_matrices(const Design& d);

struct InfoMatrix {
  SymMatrix c11;
  Matrix c12;
  SymMatrix c22;
  SymMatrix schur;     // c11 - c12 c22^+ c21
  Vector eigenvalues;  // of schur, ascending, smallest clamped to 0 when negligible
};

/// Assembles the Schur complement and its spectrum from the component blocks.
InfoMatrix make_info(SymMatrix c11, Matrix c12, SymMatrix c22);

/// C_d(tau, l) by direct projection: O = M' pr(MZ | MU)^perp M.
InfoMatrix realized_info(const Design& d, const std::vector<int>& stay);

/// Expected components C_dij = E C_dij(l) = G_i' V G_j and their Schur complement.
InfoMatrix surrogate_info(const Design& d, const DropoutMechanism& mech);

/// Same with an explicit V, e.g. exact_matrices(mech).
InfoMatrix surrogate_info(const Design& d, const MechanismMatrices& mm);

struct CheckMatrices {
  SymMatrix c11;
  Matrix c12;
  SymMatrix c22;
};

/// C-check_s11 = T'(A-B)T + That' B That, and the 12/22 analogues with F.
CheckMatrices check_matrices(const TreatmentSequence& s, const MechanismMatrices& mm);

enum class Criterion { A, D, E, T };
inline constexpr std::array<Criterion, 4> kAllCriteria{Criterion::A, Criterion::D, Criterion::E,
                                                       Criterion::T};

std::string to_string(Criterion c);
Criterion parse_criterion(const std::string& text);

/// lambda_2 <= 1e-9 * max(1, lambda_t) counts as disconnected.
bool is_disconnected(const Vector& eigenvalues);

/// Criterion value from ascending eigenvalues (lambda_1 is the structural zero).
double criterion_value(const Vector& eigenvalues, Criterion which, int n);

inline double criterion(const InfoMatrix& info, Criterion which, int n) {
  return criterion_value(info.eigenvalues, which, n);
}

/// Per-subject sufficient statistics for fast realized information matrices.
///
/// With G~_u = B_{l_u} [T_u F_u]_{1..l_u} and Z~_u = B_{l_u} I_{l_u,p}, the
/// projected components are K - L' H^+ L with K = sum G~'G~, L = sum Z~'G~,
/// H = sum Z~'Z~ = sum B^{l_u}_p. Equivalent to realized_info.
class RealizationKernel {
 public:
  struct Stats {
    Matrix K;  // 2t x 2t
    Matrix L;  // p x 2t
    Matrix H;  // p x p

    Stats& operator+=(const Stats& o);
    void add_scaled(const Stats& o, double c);
  };

  RealizationKernel(int periods, int treatments);

  /// Contribution of one subject with sequence s staying `stay` periods.
  Stats contribution(const TreatmentSequence& s, int stay) const;
  Stats zero() const;

  InfoMatrix info(const Stats& total) const;
  InfoMatrix info(const Design& d, const std::vector<int>& stay) const;

  int periods() const { return p_; }
  int treatments() const { return t_; }

 private:
  int p_;
  int t_;
};

}  // namespace crossover
