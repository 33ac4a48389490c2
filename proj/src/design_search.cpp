#include "crossover/design_search.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "crossover/errors.hpp"
#include "crossover/parallel.hpp"

namespace crossover {

OptimalitySystem build_system(const OptimalityCertificate& cert, const DropoutMechanism& mech) {
  if (cert.support.empty()) throw ValidationError("build_system: empty support");
  const int t = cert.treatments;
  const int p = mech.periods();
  const auto mm = matrices(mech);
  const Matrix bt = centering(t).dense();
  const double x = cert.x_star;
  const int t2 = t * t;
  const int rows = 2 * t2 + p * t;

  OptimalitySystem sys;
  sys.columns = cert.support;
  sys.X.resize(rows, static_cast<Eigen::Index>(cert.support.size()));
  for (std::size_t j = 0; j < cert.support.size(); ++j) {
    const auto& s = cert.support[j];
    const auto ck = check_matrices(s, mm);
    const Matrix eq1 = ck.c11.dense() + x * ck.c12 * bt;
    const Matrix eq2 = ck.c12.transpose() + x * ck.c22.dense() * bt;
    const Matrix eq3 = mm.B.dense() * (incidence(s) * bt + x * carryover_incidence(s) * bt);
    Vector col(rows);
    col << vec(eq1), vec(eq2), vec(eq3);
    sys.X.col(static_cast<Eigen::Index>(j)) = col;
  }
  sys.Y = Vector::Zero(rows);
  sys.Y.head(t2) = vec(cert.y_star / (t - 1.0) * bt);
  return sys;
}

ApproximateCheck verify_approximate(const ApproximateDesign& weights,
                                    const OptimalityCertificate& cert,
                                    const DropoutMechanism& mech) {
  const auto sys = build_system(cert, mech);
  Vector w = Vector::Zero(sys.X.cols());
  ApproximateCheck out;
  for (const auto& [s, weight] : weights.weights) {
    const auto it = std::lower_bound(sys.columns.begin(), sys.columns.end(), s);
    if (it == sys.columns.end() || *it != s) {
      if (weight != 0.0) {
        out.mass_outside += weight;
        out.outside.push_back(s);
      }
      continue;
    }
    w(it - sys.columns.begin()) = weight;
  }
  out.residual = (sys.X * w - sys.Y).norm();
  return out;
}

double exact_residual(const OptimalitySystem& sys, const std::map<TreatmentSequence, int>& counts,
                      int n) {
  Vector w = Vector::Zero(sys.X.cols());
  for (const auto& [s, c] : counts) {
    const auto it = std::lower_bound(sys.columns.begin(), sys.columns.end(), s);
    if (it != sys.columns.end() && *it == s) w(it - sys.columns.begin()) = c;
  }
  return (sys.X * w - n * sys.Y).norm();
}

Vector project_to_simplex(const Vector& v, double total) {
  const auto n = v.size();
  std::vector<double> u(v.data(), v.data() + n);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cum = 0.0;
  double theta = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    cum += u[i];
    const double cand = (cum - total) / (i + 1.0);
    if (u[i] - cand > 0.0) theta = cand;
  }
  return (v.array() - theta).max(0.0).matrix();
}

namespace {

struct LocalSearch {
  const Matrix& gram;  // X'X
  const Vector& lin;   // X'Y_n
  double scale;

  Vector gradient(const std::vector<int>& counts) const {
    Vector cv(gram.rows());
    for (Eigen::Index i = 0; i < cv.size(); ++i) cv(i) = counts[i];
    return gram * cv - lin;
  }

  // Change of ||X N - Y||^2 when one unit moves from a to b.
  double transfer(const Vector& g, int a, int b) const {
    return 2.0 * (g(b) - g(a)) + gram(b, b) + gram(a, a) - 2.0 * gram(a, b);
  }

  void apply(std::vector<int>& counts, Vector& g, int a, int b) const {
    --counts[a];
    ++counts[b];
    g += gram.col(b) - gram.col(a);
  }

  // First-improvement unit transfers until a full pass finds nothing.
  long unit_pass(std::vector<int>& counts, Vector& g, const std::vector<int>& order) const {
    long moves = 0;
    bool improved = true;
    while (improved) {
      improved = false;
      for (int a : order) {
        if (counts[a] == 0) continue;
        for (int b : order) {
          if (b == a) continue;
          if (transfer(g, a, b) < -1e-12 * scale) {
            apply(counts, g, a, b);
            ++moves;
            improved = true;
            if (counts[a] == 0) break;
          }
        }
      }
    }
    return moves;
  }

  // One improving pair of simultaneous transfers a->b, c->d, if any.
  bool pair_move(std::vector<int>& counts, Vector& g, const std::vector<int>& order) const {
    std::vector<int> occupied;
    for (int a : order)
      if (counts[a] > 0) occupied.push_back(a);
    for (std::size_t i = 0; i < occupied.size(); ++i) {
      const int a = occupied[i];
      for (int b : order) {
        if (b == a) continue;
        const double d1 = transfer(g, a, b);
        for (std::size_t k = i; k < occupied.size(); ++k) {
          const int c = occupied[k];
          if (c == a && counts[a] < 2) continue;
          for (int d : order) {
            if (d == c) continue;
            const double cross = gram(b, d) - gram(b, c) - gram(a, d) + gram(a, c);
            if (d1 + transfer(g, c, d) + 2.0 * cross < -1e-12 * scale) {
              apply(counts, g, a, b);
              apply(counts, g, c, d);
              return true;
            }
          }
        }
      }
    }
    return false;
  }

  long run(std::vector<int>& counts, const std::vector<int>& order, bool pairs) const {
    Vector g = gradient(counts);
    long moves = unit_pass(counts, g, order);
    while (pairs && pair_move(counts, g, order)) moves += 2 + unit_pass(counts, g, order);
    return moves;
  }
};

std::vector<int> largest_remainder(const Vector& relaxed, int n) {
  const auto S = relaxed.size();
  std::vector<int> counts(S);
  std::vector<std::pair<double, Eigen::Index>> rem;
  int assigned = 0;
  for (Eigen::Index i = 0; i < S; ++i) {
    const double v = std::max(0.0, relaxed(i));
    counts[i] = static_cast<int>(std::floor(v + 1e-12));
    assigned += counts[i];
    rem.emplace_back(v - counts[i], i);
  }
  std::stable_sort(rem.begin(), rem.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++counts[rem[k % rem.size()].second];
  // Rounding can overshoot only through the floor slack above.
  for (Eigen::Index i = S - 1; assigned > n && i >= 0; --i) {
    while (counts[i] > 0 && assigned > n) {
      --counts[i];
      --assigned;
    }
  }
  return counts;
}

}  // namespace

std::vector<int> rounded_relaxation(const OptimalitySystem& sys, int n, int iters) {
  const auto S = sys.X.cols();
  const Matrix gram = sys.X.transpose() * sys.X;
  const Vector lin = sys.X.transpose() * (n * sys.Y);
  // Relaxation on the scaled simplex by projected gradient.
  const double lipschitz = std::max(SymMatrix(gram).eigenvalues().maxCoeff(), 1e-300);
  Vector relaxed = Vector::Constant(S, static_cast<double>(n) / S);
  for (int it = 0; it < iters; ++it) {
    const Vector next = project_to_simplex(relaxed - (gram * relaxed - lin) / lipschitz, n);
    const double change = (next - relaxed).cwiseAbs().maxCoeff();
    relaxed = next;
    if (change < 1e-13 * std::max(1.0, static_cast<double>(n))) break;
  }
  return largest_remainder(relaxed, n);
}

SearchResult exact_search(int n, const OptimalityCertificate& cert, const DropoutMechanism& mech,
                          const SearchOptions& opts) {
  if (n < 1) throw ValidationError("exact_search: need n >= 1");
  if (cert.support.empty()) throw ValidationError("exact_search: empty support");
  const auto sys = build_system(cert, mech);
  const auto S = sys.X.cols();
  const Vector target = n * sys.Y;
  const Matrix gram = sys.X.transpose() * sys.X;
  const Vector lin = sys.X.transpose() * target;

  const std::vector<int> rounded = rounded_relaxation(sys, n, opts.iters);

  struct Run {
    std::vector<int> counts;
    double residual = 0.0;
    long moves = 0;
  };
  const int runs = std::max(0, opts.restarts) + 1;
  std::vector<Run> results(runs);
  const LocalSearch search{gram, lin, std::max(1.0, gram.diagonal().maxCoeff())};
  auto residual_of = [&](const std::vector<int>& counts) {
    Vector cv(S);
    for (Eigen::Index i = 0; i < S; ++i) cv(i) = counts[i];
    return (sys.X * cv - target).norm();
  };

  parallel_chunks(static_cast<std::size_t>(runs), worker_count(), [&](std::size_t b, std::size_t e) {
    for (std::size_t r = b; r < e; ++r) {
      std::seed_seq seq{static_cast<std::uint32_t>(opts.seed),
                        static_cast<std::uint32_t>(opts.seed >> 32),
                        static_cast<std::uint32_t>(r)};
      std::mt19937_64 rng(seq);
      auto kick = [&](std::vector<int>& counts, int transfers) {
        for (int k = 0; k < transfers; ++k) {
          std::vector<int> occupied;
          for (Eigen::Index i = 0; i < S; ++i)
            if (counts[i] > 0) occupied.push_back(static_cast<int>(i));
          const int from = occupied[rng() % occupied.size()];
          const int to = static_cast<int>(rng() % static_cast<std::uint64_t>(S));
          --counts[from];
          ++counts[to];
        }
      };

      std::vector<int> counts = rounded;
      std::vector<int> order(S);
      std::iota(order.begin(), order.end(), 0);
      if (r > 0) {
        // Fisher-Yates with explicit modulo draws keeps the order portable.
        for (Eigen::Index i = S - 1; i > 0; --i)
          std::swap(order[i], order[rng() % static_cast<std::uint64_t>(i + 1)]);
        kick(counts, std::max(1, n / 4));
      }
      long moves = search.run(counts, order, false);
      double residual = residual_of(counts);

      // Iterated local search: perturb the incumbent, descend, keep strict gains.
      for (int it = 0; it < opts.perturbations; ++it) {
        std::vector<int> trial = counts;
        kick(trial, 1 + static_cast<int>(rng() % 3));
        const long m = search.run(trial, order, false);
        const double res = residual_of(trial);
        if (res < residual * (1.0 - 1e-12)) {
          counts = std::move(trial);
          residual = res;
          moves += m;
        }
      }
      moves += search.run(counts, order, true);
      results[r] = {counts, residual_of(counts), moves};
    }
  });

  std::size_t best = 0;
  for (std::size_t r = 1; r < results.size(); ++r)
    if (results[r].residual < results[best].residual) best = r;

  std::map<TreatmentSequence, int> counts;
  for (Eigen::Index i = 0; i < S; ++i)
    if (results[best].counts[i] > 0) counts[sys.columns[i]] = results[best].counts[i];
  return {Design::from_counts(mech.periods(), cert.treatments, counts), results[best].residual,
          runs - 1, results[best].moves, opts.seed};
}

SymmetricSolution symmetric_solve(const OptimalityCertificate& cert, const DropoutMechanism& mech,
                                  const std::vector<SymmetricBlock>& blocks) {
  if (blocks.empty()) throw ValidationError("symmetric_solve: no blocks given");
  std::vector<double> deriv;
  double scale = 0.0;
  for (const auto& b : blocks) {
    if (!cert.in_support(b.representative()))
      throw ValidationError("symmetric_solve: block <" + b.representative().str() +
                            "> lies outside the support");
    deriv.push_back(q_derivative(b.representative(), mech, cert.x_star));
    scale = std::max(scale, std::abs(deriv.back()));
  }
  const double zero_tol = 1e-9 * std::max(1.0, scale);
  std::vector<double> w(blocks.size(), 0.0);
  std::vector<std::size_t> zero, pos, neg;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (std::abs(deriv[i]) <= zero_tol) zero.push_back(i);
    else if (deriv[i] > 0.0) pos.push_back(i);
    else neg.push_back(i);
  }
  if (!zero.empty()) {
    for (auto i : zero) w[i] = 1.0 / zero.size();
  } else {
    if (pos.empty() || neg.empty())
      throw ValidationError(
          "symmetric_solve: infeasible, every chosen block has a derivative of the same sign");
    double sp = 0.0, sn = 0.0;
    for (auto i : pos) sp += deriv[i];
    for (auto i : neg) sn += deriv[i];
    const double kappa = 1.0 / (neg.size() * sp - pos.size() * sn);
    for (auto i : pos) w[i] = -sn * kappa;
    for (auto i : neg) w[i] = sp * kappa;
  }
  SymmetricSolution out;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    out.block_weights.emplace_back(blocks[i], w[i]);
    if (w[i] == 0.0) continue;
    for (const auto& m : blocks[i].members())
      out.design.weights[m] += w[i] / static_cast<double>(blocks[i].size());
  }
  return out;
}

}  // namespace crossover
