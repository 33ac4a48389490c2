#pragma once

// Per-sequence quadratics q_s(x) = q11 + 2 q12 x + q22 x^2 and the minimax
// program min_x max_s q_s(x) whose solution (x*, y*) and active set T certify
// universal optimality of the surrogate criterion.

#include <optional>
#include <string>
#include <vector>

#include "crossover/dropout_model.hpp"
#include "crossover/sequences.hpp"

namespace crossover {

struct QCoefficients {
  double q11 = 0.0;
  double q12 = 0.0;
  double q22 = 0.0;

  double value(double x) const { return q11 + 2.0 * q12 * x + q22 * x * x; }
  double derivative(double x) const { return 2.0 * q12 + 2.0 * q22 * x; }
};

/// Closed-form coefficients assembled from prefix statistics:
///   q^k11 = k - xi/k
///   q^k12 = (k rho + f_last - xi)/k
///   q^k22 = (kt-1)(k-1)/(kt) - (xi - 2 f_last + 1)/k
/// weighted by alpha_k.
QCoefficients q_coeffs(const TreatmentSequence& s, const DropoutMechanism& mech);

double q_derivative(const TreatmentSequence& s, const DropoutMechanism& mech, double x);

enum class Regime { closed_form_i, closed_form_ii, closed_form_ii_boundary, closed_form_iii, numeric };

std::string to_string(Regime r);

struct OptimalityCertificate {
  int treatments = 0;
  DropoutMechanism mechanism;
  double x_star = 0.0;
  double y_star = 0.0;
  Regime regime = Regime::numeric;
  double tol_support = 0.0;
  std::vector<TreatmentSequence> support;    // lexicographic
  std::vector<SymmetricBlock> support_blocks;  // support as a union of orbits

  bool in_support(const TreatmentSequence& s) const;
};

struct SolveOptions {
  std::size_t budget = kEnumerationBudget;
  /// Support tolerance is support_rel_tol * max(1, y*).
  double support_rel_tol = 1e-9;
};

/// Numeric minimax over all t^p sequences. The regime tag is set to a closed
/// form when one applies and agrees with the numeric solution.
OptimalityCertificate solve_minimax(const DropoutMechanism& mech, int t,
                                    const SolveOptions& opts = {});

/// Closed-form regimes (i)-(iii); empty when no precondition holds.
std::optional<OptimalityCertificate> closed_form(const DropoutMechanism& mech, int t,
                                                 const SolveOptions& opts = {});

/// Upper envelope h(x) = max_i q_i(x) over a set of quadratics.
double envelope(const std::vector<QCoefficients>& qs, double x);

/// argmin_x max_i q_i(x), exact up to rounding: golden-section search on the
/// convex envelope followed by an active-set refinement over vertices and
/// pairwise intersections. Requires every q22 > 0.
double minimize_envelope(const std::vector<QCoefficients>& qs);

}  // namespace crossover
