#pragma once

// Linear optimality system on the support T and the exact-design search that
// minimizes its Euclidean residual over integer counts summing to n.

#include <cstdint>
#include <map>
#include <vector>

#include "crossover/design.hpp"
#include "crossover/information.hpp"
#include "crossover/q_solver.hpp"

namespace crossover {

/// X p = Y for weights p over the support. Rows: vec of the t x t
/// treatment equation, vec of the t x t carryover equation, vec of the p x t
/// period-balance equation. Columns follow cert.support order.
struct OptimalitySystem {
  Matrix X;
  Vector Y;  // approximate form; the exact form is n * Y
  std::vector<TreatmentSequence> columns;
};

OptimalitySystem build_system(const OptimalityCertificate& cert, const DropoutMechanism& mech);

struct ApproximateCheck {
  double residual = 0.0;      // ||X p - Y|| over the support
  double mass_outside = 0.0;  // total weight on sequences outside T
  std::vector<TreatmentSequence> outside;
};

ApproximateCheck verify_approximate(const ApproximateDesign& weights,
                                    const OptimalityCertificate& cert,
                                    const DropoutMechanism& mech);

/// ||X N - n Y|| for integer counts; counts outside the support are ignored
/// (callers check support separately).
double exact_residual(const OptimalitySystem& sys, const std::map<TreatmentSequence, int>& counts,
                      int n);

struct SearchOptions {
  std::uint64_t seed = 1;
  int restarts = 8;
  int iters = 20000;         // projected-gradient iterations for the relaxation
  int perturbations = 300;   // iterated-local-search kicks per restart
};

struct SearchResult {
  Design design;
  double residual = 0.0;
  int restarts_used = 0;
  long moves = 0;  // improving transfers applied in the winning run
  std::uint64_t seed = 0;
};

/// Projected-gradient least squares on {N >= 0, sum N = n} followed by
/// largest-remainder rounding; the starting point of exact_search.
std::vector<int> rounded_relaxation(const OptimalitySystem& sys, int n, int iters);

SearchResult exact_search(int n, const OptimalityCertificate& cert, const DropoutMechanism& mech,
                          const SearchOptions& opts = {});

struct SymmetricSolution {
  std::vector<std::pair<SymmetricBlock, double>> block_weights;
  ApproximateDesign design;  // block weight spread uniformly over members
};

/// Solves sum_b w_b q_b'(x*) = 0, sum_b w_b = 1, w >= 0 over the chosen blocks.
/// With one zero-derivative block it gets weight one; otherwise weights are
/// uniform within the positive and within the negative derivative groups.
/// Throws ValidationError when infeasible or a block lies outside T.
SymmetricSolution symmetric_solve(const OptimalityCertificate& cert, const DropoutMechanism& mech,
                                  const std::vector<SymmetricBlock>& blocks);

/// Euclidean projection onto {x >= 0, sum x = total}.
Vector project_to_simplex(const Vector& v, double total);

}  // namespace crossover
