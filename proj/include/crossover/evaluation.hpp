#pragma once

// Expected criterion phi0 over dropout realizations (exact enumeration or
// seeded Monte Carlo), surrogate phi1, gap, efficiency bounds, comparisons and
// theta sweeps.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "crossover/design.hpp"
#include "crossover/design_search.hpp"
#include "crossover/information.hpp"
#include "crossover/q_solver.hpp"

namespace crossover {

enum class Method { automatic, exact, monte_carlo };

std::string to_string(Method m);
Method parse_method(const std::string& text);

struct EvalOptions {
  Method method = Method::automatic;
  std::uint64_t seed = 1;
  long reps = 100000;
  std::size_t exact_budget = std::size_t{1} << 20;
  unsigned threads = 0;  // 0: CROSSOVER_THREADS or hardware concurrency
};

struct Phi0Estimate {
  double phi0 = 0.0;
  double stderr_ = 0.0;  // 0 in exact mode
  double v_phi = 0.0;    // variance of the criterion over realizations
};

/// All four criteria from one pass over the same realizations.
struct Phi0Batch {
  std::array<Phi0Estimate, 4> by_criterion;  // indexed like kAllCriteria
  Method method = Method::exact;
  long replications = 0;  // realizations drawn (MC) or collapsed cells visited (exact)
  std::uint64_t seed = 0;

  const Phi0Estimate& operator[](Criterion c) const {
    return by_criterion[static_cast<std::size_t>(c)];
  }
};

/// Number of collapsed cells exact enumeration would visit (subjects sharing a
/// sequence contribute multinomial compositions instead of k^c tuples).
double exact_cell_count(const Design& d, const DropoutMechanism& mech);

Phi0Batch evaluate_phi0_all(const Design& d, const DropoutMechanism& mech,
                            const EvalOptions& opts = {});
Phi0Estimate evaluate_phi0(const Design& d, const DropoutMechanism& mech, Criterion which,
                           const EvalOptions& opts = {});

double evaluate_phi1(const Design& d, const DropoutMechanism& mech, Criterion which);

struct EfficiencyBounds {
  double e1_tilde = 0.0;
  double gap = 0.0;
  double ell = 0.0;
};

/// e1_tilde = phi1 / (y* / (t-1)), gap = phi0 / phi1, ell = e1_tilde * gap.
EfficiencyBounds efficiency_bounds(double phi0, double phi1, double y_star, int t);

struct EvaluationReport {
  Criterion criterion = Criterion::T;
  double phi0 = 0.0;
  double phi0_stderr = 0.0;
  double v_phi = 0.0;
  double sd_phi = 0.0;
  double phi1 = 0.0;
  double gap = 0.0;
  double e1_tilde = 0.0;
  double ell = 0.0;
  Method method = Method::exact;
  long replications = 0;
  std::uint64_t seed = 0;
};

/// Reports for the requested criteria sharing one set of realizations. The
/// certificate supplies y*; pass nullptr to have it solved here.
std::vector<EvaluationReport> evaluate(const Design& d, const DropoutMechanism& mech,
                                       const std::vector<Criterion>& criteria,
                                       const EvalOptions& opts = {},
                                       const OptimalityCertificate* cert = nullptr);

struct CompareReport {
  Criterion criterion = Criterion::T;
  EvaluationReport design;
  EvaluationReport baseline;
  std::optional<double> phi0_ratio;  // empty when the baseline phi0 is 0
  std::optional<double> v_ratio;
  std::optional<double> sd_ratio;
};

/// Ratios of design over baseline. Both use the same seed so Monte Carlo draws
/// are shared subject by subject; designs with different n are evaluated under
/// the mechanism rescaled to their own n.
std::vector<CompareReport> compare(const Design& d, const Design& baseline,
                                   const DropoutMechanism& mech,
                                   const std::vector<Criterion>& criteria,
                                   const EvalOptions& opts = {});

struct SweepRow {
  double theta = 0.0;
  EvaluationReport report;
};

/// a = (0,...,0, theta, 1-theta) over p periods. With no fixed design the exact
/// search is rerun for every theta.
std::vector<SweepRow> sweep_theta(const std::optional<Design>& fixed, int p, int t, int n,
                                  const std::vector<Criterion>& criteria,
                                  const std::vector<double>& grid, const EvalOptions& opts = {},
                                  const SearchOptions& search = {});

std::vector<double> parse_grid(const std::string& text);

std::string sweep_csv(const std::vector<SweepRow>& rows);

/// Pairwise (tree) summation in index order.
double pairwise_sum(const double* x, std::size_t n);

}  // namespace crossover
