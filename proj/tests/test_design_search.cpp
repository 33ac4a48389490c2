#include <cmath>

#include "crossover/design_search.hpp"
#include "crossover/errors.hpp"
#include "crossover/fixtures.hpp"
#include "doctest.h"

using namespace crossover;

namespace {

TreatmentSequence seq(const char* text, int t) { return TreatmentSequence::parse(text, t); }

ApproximateDesign as_weights(const Design& d) {
  ApproximateDesign w;
  for (const auto& [s, c] : d.counts()) w.weights[s] = static_cast<double>(c) / d.subjects();
  return w;
}

double residual_of(const OptimalitySystem& sys, const std::vector<int>& counts, int n) {
  Vector v(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) v(i) = counts[i];
  return (sys.X * v - n * sys.Y).norm();
}

}  // namespace

TEST_CASE("optimality system layout") {
  const DropoutMechanism mech(4, 16, {0, 0, 0.5, 0.5});
  const auto cert = solve_minimax(mech, 4);
  const auto sys = build_system(cert, mech);
  CHECK(sys.X.rows() == 2 * 16 + 4 * 4);
  CHECK(sys.X.cols() == 48);
  CHECK(sys.columns == cert.support);
  CHECK(sys.Y.tail(16 + 16).cwiseAbs().maxCoeff() == 0.0);

  // All mass on one all-distinct sequence cannot balance carryover.
  ApproximateDesign one;
  one.weights[seq("1234", 4)] = 1.0;
  CHECK(verify_approximate(one, cert, mech).residual > 1e-3);

  ApproximateDesign outside;
  outside.weights[seq("1212", 4)] = 1.0;
  const auto chk = verify_approximate(outside, cert, mech);
  CHECK(chk.mass_outside == 1.0);
  REQUIRE(chk.outside.size() == 1);
  CHECK(chk.outside[0].str() == "1212");
}

TEST_CASE("symmetric solutions satisfy the optimality system") {
  const std::vector<std::pair<DropoutMechanism, int>> cases{
      {DropoutMechanism(4, 16, {0, 0, 0.5, 0.5}), 4},
      {DropoutMechanism(4, 16, {0, 0, 0, 1}), 4},
      {DropoutMechanism(3, 10, {0, 0, 1}), 3},
      {DropoutMechanism(5, 12, {0, 0, 0, 0, 1}), 3},
      {DropoutMechanism(4, 16, {0, 0, 0.85, 0.15}), 4},
      {DropoutMechanism(6, 14, {0, 0, 0, 0, 0.4, 0.6}), 2}};
  for (const auto& [mech, t] : cases) {
    const auto cert = solve_minimax(mech, t);
    const auto sol = symmetric_solve(cert, mech, cert.support_blocks);
    double total = 0.0, value = 0.0;
    for (const auto& [b, w] : sol.block_weights) {
      total += w;
      value += w * q_coeffs(b.representative(), mech).value(cert.x_star);
    }
    CHECK(std::abs(total - 1.0) < 1e-12);
    CHECK(std::abs(value - cert.y_star) < 1e-9);
    const auto chk = verify_approximate(sol.design, cert, mech);
    CHECK(chk.residual <= 1e-8);
    CHECK(chk.mass_outside == 0.0);
  }
}

TEST_CASE("symmetric solve on two chosen blocks") {
  const DropoutMechanism mech(6, 14, {0, 0, 0, 0, 0.4, 0.6});
  const auto cert = solve_minimax(mech, 2);
  const auto s1 = seq("122121", 2), s2 = seq("122211", 2);
  const auto sol = symmetric_solve(cert, mech, {symmetric_block(s1), symmetric_block(s2)});
  const double d1 = q_derivative(s1, mech, cert.x_star);
  const double d2 = q_derivative(s2, mech, cert.x_star);
  CHECK(d1 * d2 < 0.0);
  REQUIRE(sol.block_weights.size() == 2);
  const double w1 = sol.block_weights[0].second, w2 = sol.block_weights[1].second;
  CHECK(w2 / w1 == doctest::Approx(-d1 / d2).epsilon(1e-12));
  CHECK(verify_approximate(sol.design, cert, mech).residual <= 1e-8);
  CHECK(sol.design.weights.size() == 4);

  // Regime with the repeat block alone: its derivative vanishes at x*.
  const DropoutMechanism vertex(4, 16, {0, 0, 0.85, 0.15});
  const auto cv = solve_minimax(vertex, 4);
  const auto only = symmetric_solve(cv, vertex, {symmetric_block(seq("1233", 4))});
  CHECK(only.block_weights[0].second == 1.0);

  CHECK_THROWS_AS(symmetric_solve(cert, mech, {symmetric_block(s2)}), ValidationError);
  CHECK_THROWS_AS(symmetric_solve(cert, mech, {symmetric_block(seq("111111", 2))}),
                  ValidationError);
}

TEST_CASE("uniform weights over the six-period two-treatment support") {
  const DropoutMechanism mech(6, 14, {0, 0, 0, 0, 0.4, 0.6});
  const auto cert = solve_minimax(mech, 2);
  ApproximateDesign w;
  for (const auto& s : cert.support) w.weights[s] = 1.0 / cert.support.size();
  // Reported for information; uniform weights need not solve the system.
  MESSAGE("uniform residual: " << verify_approximate(w, cert, mech).residual);
}

TEST_CASE("exact search reaches an integer optimum when one exists") {
  // Complete experiment p = t = 3: weights 1/36 on <122> members and 5/36 on
  // <123> members, so n = 36 admits a zero residual.
  const DropoutMechanism mech(3, 36, {0, 0, 1});
  const auto cert = solve_minimax(mech, 3);
  const auto result = exact_search(36, cert, mech);
  CHECK(result.residual < 1e-8);
  CHECK(result.design.subjects() == 36);
  const auto info = surrogate_info(result.design, mech);
  const Matrix expect = 36 * cert.y_star / 2.0 * centering(3).dense();
  CHECK((info.schur.dense() - expect).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("exact search contracts") {
  const auto fx = fixture("d2");
  const auto cert = solve_minimax(fx.mechanism, 4);
  const auto sys = build_system(cert, fx.mechanism);

  SearchOptions opts;
  opts.seed = 7;
  opts.restarts = 2;
  const auto a = exact_search(16, cert, fx.mechanism, opts);
  const auto b = exact_search(16, cert, fx.mechanism, opts);
  CHECK(a.design.sequences() == b.design.sequences());
  CHECK(a.residual == b.residual);
  CHECK(a.restarts_used == 2);
  for (const auto& s : a.design.sequences()) CHECK(cert.in_support(s));

  CHECK(a.residual <= residual_of(sys, rounded_relaxation(sys, 16, opts.iters), 16) + 1e-12);
  CHECK(std::abs(exact_residual(sys, a.design.counts(), 16) - a.residual) < 1e-10);
  CHECK(std::abs(verify_approximate(as_weights(a.design), cert, fx.mechanism).residual -
                 a.residual / 16) < 1e-10);

  const auto single = exact_search(1, cert, fx.mechanism, opts);
  CHECK(single.design.subjects() == 1);
  CHECK(single.residual > 0.0);
  CHECK(cert.in_support(single.design.sequences()[0]));

  CHECK_THROWS_AS(exact_search(0, cert, fx.mechanism), ValidationError);
}

TEST_CASE("simplex projection") {
  Vector v(3);
  v << 0.2, 0.5, -1.0;
  const Vector p = project_to_simplex(v, 1.0);
  CHECK(p.sum() == doctest::Approx(1.0));
  CHECK(p.minCoeff() >= 0.0);
  CHECK(p(2) == 0.0);
  CHECK(p(1) - p(0) == doctest::Approx(0.3));
}
