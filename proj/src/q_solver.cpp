#include "crossover/q_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "crossover/errors.hpp"

namespace crossover {

QCoefficients q_coeffs(const TreatmentSequence& s, const DropoutMechanism& mech) {
  if (s.periods() != mech.periods())
    throw ValidationError("q_coeffs: sequence length differs from the number of periods");
  const int t = s.treatments();
  const auto& x = s.labels();
  std::vector<int> counts(t, 0);
  int xi = 0;
  int rho = 0;
  QCoefficients q;
  for (int k = 1; k <= s.periods(); ++k) {
    const int label = x[k - 1] - 1;
    xi += 2 * counts[label] + 1;  // (f+1)^2 - f^2
    ++counts[label];
    if (k >= 2 && x[k - 2] == x[k - 1]) ++rho;
    const double alpha = mech.alpha(k);
    if (alpha == 0.0) continue;
    const double kk = k;
    const double f = counts[label];
    q.q11 += alpha * (kk - xi / kk);
    q.q12 += alpha * (kk * rho + f - xi) / kk;
    q.q22 += alpha * ((kk * t - 1.0) * (kk - 1.0) / (kk * t) - (xi - 2.0 * f + 1.0) / kk);
  }
  return q;
}

double q_derivative(const TreatmentSequence& s, const DropoutMechanism& mech, double x) {
  return q_coeffs(s, mech).derivative(x);
}

std::string to_string(Regime r) {
  switch (r) {
    case Regime::closed_form_i: return "closed_form_i";
    case Regime::closed_form_ii: return "closed_form_ii";
    case Regime::closed_form_ii_boundary: return "closed_form_ii_boundary";
    case Regime::closed_form_iii: return "closed_form_iii";
    case Regime::numeric: return "numeric";
  }
  return "numeric";
}

bool OptimalityCertificate::in_support(const TreatmentSequence& s) const {
  return std::binary_search(support.begin(), support.end(), s);
}

double envelope(const std::vector<QCoefficients>& qs, double x) {
  double h = -std::numeric_limits<double>::infinity();
  for (const auto& q : qs) h = std::max(h, q.value(x));
  return h;
}

namespace {

// Real roots of a x^2 + 2 b x + c = 0 (numerically stable form).
std::vector<double> roots(double a, double b, double c) {
  std::vector<double> out;
  const double scale = std::max({std::abs(a), std::abs(b), std::abs(c), 1e-300});
  if (std::abs(a) <= 1e-14 * scale) {
    if (std::abs(b) > 1e-14 * scale) out.push_back(-c / (2.0 * b));
    return out;
  }
  const double disc = b * b - a * c;
  if (disc < 0.0) return out;
  const double sq = std::sqrt(disc);
  const double qv = -(b + std::copysign(sq, b));
  if (qv != 0.0) {
    out.push_back(qv / a);
    out.push_back(c / qv);
  } else {
    out.push_back(-b / a);
  }
  return out;
}

}  // namespace

double minimize_envelope(const std::vector<QCoefficients>& qs) {
  if (qs.empty()) throw ValidationError("minimize_envelope: no quadratics");
  double reach = 0.0;
  for (const auto& q : qs) {
    if (!(q.q22 > 0.0)) throw ValidationError("minimize_envelope: quadratic without positive curvature");
    reach = std::max(reach, std::abs(q.q12) / q.q22);
  }
  double lo = -(2.0 + reach);
  double hi = 2.0 + reach;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double hc = envelope(qs, c);
  double hd = envelope(qs, d);
  for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
    if (hc < hd) {
      hi = d;
      d = c;
      hd = hc;
      c = hi - inv_phi * (hi - lo);
      hc = envelope(qs, c);
    } else {
      lo = c;
      c = d;
      hc = hd;
      d = lo + inv_phi * (hi - lo);
      hd = envelope(qs, d);
    }
  }
  const double approx = 0.5 * (lo + hi);
  const double h_approx = envelope(qs, approx);

  // The minimizer of a max of strictly convex quadratics is the vertex of one
  // of them or a crossing of two; both must be active near the approximation.
  const double slack = 1e-6 * std::max(1.0, std::abs(h_approx));
  std::vector<QCoefficients> active;
  for (const auto& q : qs)
    if (q.value(approx) >= h_approx - slack) active.push_back(q);
  std::sort(active.begin(), active.end(), [](const auto& a, const auto& b) {
    return std::tie(a.q11, a.q12, a.q22) < std::tie(b.q11, b.q12, b.q22);
  });
  active.erase(std::unique(active.begin(), active.end(),
                           [](const auto& a, const auto& b) {
                             return a.q11 == b.q11 && a.q12 == b.q12 && a.q22 == b.q22;
                           }),
               active.end());

  // A candidate is certified when zero lies in the hull of the active
  // derivatives there; among certified candidates keep the lowest envelope.
  double best_x = approx;
  double best_h = std::numeric_limits<double>::infinity();
  bool certified = false;
  auto consider = [&](double x) {
    if (!std::isfinite(x)) return;
    const double h = envelope(qs, x);
    const double tol = 1e-12 * std::max(1.0, std::abs(h));
    double dmin = std::numeric_limits<double>::infinity();
    double dmax = -dmin;
    for (const auto& q : qs) {
      if (q.value(x) < h - tol) continue;
      const double dq = q.derivative(x);
      dmin = std::min(dmin, dq);
      dmax = std::max(dmax, dq);
    }
    const double dtol = 1e-12 * std::max({1.0, std::abs(dmin), std::abs(dmax)});
    if (dmin > dtol || dmax < -dtol) return;
    if (!certified || h < best_h) {
      certified = true;
      best_h = h;
      best_x = x;
    }
  };
  for (std::size_t i = 0; i < active.size(); ++i) {
    consider(-active[i].q12 / active[i].q22);
    for (std::size_t j = i + 1; j < active.size(); ++j) {
      for (double r : roots(active[i].q22 - active[j].q22, active[i].q12 - active[j].q12,
                            active[i].q11 - active[j].q11))
        consider(r);
    }
  }
  return best_x;
}

namespace {

struct SupportBuilder {
  std::vector<TreatmentSequence> support;
  std::vector<SymmetricBlock> blocks;
};

SupportBuilder support_at(const std::vector<TreatmentSequence>& all,
                          const std::map<TreatmentSequence, QCoefficients>& by_block, double x,
                          double y, double tol) {
  SupportBuilder out;
  for (const auto& s : all) {
    const auto& q = by_block.at(canonical_form(s));
    if (q.value(x) >= y - tol) out.support.push_back(s);
  }
  out.blocks = blocks_of(out.support);
  return out;
}

bool same_support(const OptimalityCertificate& a, const OptimalityCertificate& b) {
  return a.support == b.support;
}

}  // namespace

OptimalityCertificate solve_minimax(const DropoutMechanism& mech, int t, const SolveOptions& opts) {
  const auto all = enumerate_sequences(t, mech.periods(), opts.budget);
  std::map<TreatmentSequence, QCoefficients> by_block;
  for (const auto& s : all) {
    auto rep = canonical_form(s);
    if (!by_block.contains(rep)) by_block.emplace(rep, q_coeffs(rep, mech));
  }
  std::vector<QCoefficients> qs;
  qs.reserve(by_block.size());
  for (const auto& [rep, q] : by_block) qs.push_back(q);

  OptimalityCertificate cert{t, mech, 0.0, 0.0, Regime::numeric, 0.0, {}, {}};
  cert.x_star = minimize_envelope(qs);
  cert.y_star = envelope(qs, cert.x_star);
  cert.tol_support = opts.support_rel_tol * std::max(1.0, cert.y_star);
  auto sup = support_at(all, by_block, cert.x_star, cert.y_star, cert.tol_support);
  cert.support = std::move(sup.support);
  cert.support_blocks = std::move(sup.blocks);
  cert.regime = Regime::numeric;

  if (auto cf = closed_form(mech, t, opts)) {
    if (std::abs(cf->x_star - cert.x_star) <= 1e-9 && std::abs(cf->y_star - cert.y_star) <= 1e-9 &&
        same_support(*cf, cert))
      cert.regime = cf->regime;
  }
  return cert;
}

namespace {

// k = z t + r with 0 < r <= t.
std::pair<int, int> split_count(int k, int t) {
  int r = k % t;
  if (r == 0) r = t;
  return {(k - r) / t, r};
}

std::vector<TreatmentSequence> union_of_blocks(const std::vector<SymmetricBlock>& blocks) {
  std::vector<TreatmentSequence> out;
  for (const auto& b : blocks) {
    auto m = b.members();
    out.insert(out.end(), m.begin(), m.end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

// (1, 2, ..., p-1, p-1): distinct in the first p-1 periods, last repeated.
SymmetricBlock repeat_block(int p, int t) {
  std::vector<int> labels(p);
  for (int k = 0; k < p - 1; ++k) labels[k] = k + 1;
  labels[p - 1] = p - 1;
  return SymmetricBlock(TreatmentSequence(t, labels));
}

SymmetricBlock distinct_block(int p, int t) {
  std::vector<int> labels(p);
  for (int k = 0; k < p; ++k) labels[k] = k + 1;
  return SymmetricBlock(TreatmentSequence(t, labels));
}

}  // namespace

std::optional<OptimalityCertificate> closed_form(const DropoutMechanism& mech, int t,
                                                 const SolveOptions& opts) {
  const int p = mech.periods();
  const int m = mech.min_stay();
  const double tt = t;
  auto alpha = [&](int k) { return mech.alpha(k); };
  auto finish = [&](OptimalityCertificate cert) {
    cert.tol_support = opts.support_rel_tol * std::max(1.0, cert.y_star);
    cert.support_blocks = blocks_of(cert.support);
    return cert;
  };

  // (i) many periods relative to treatments: balanced prefix counts at x* = 0.
  if (m > t) {
    double lhs = 0.0;
    double y = 0.0;
    for (int k = m; k <= p; ++k) {
      const auto [z, r] = split_count(k, t);
      lhs += alpha(k) * (k * (m * t - t * t + 1.0 - k) + t - r * (t - r + 1.0));
      y += alpha(k) * (k * (1.0 - 1.0 / tt) - r * (t - r) / (k * tt));
    }
    if (lhs >= 0.0) {
      OptimalityCertificate cert{t, mech, 0.0, 0.0, Regime::numeric, 0.0, {}, {}};
      cert.regime = Regime::closed_form_i;
      cert.x_star = 0.0;
      cert.y_star = y;
      for (const auto& s : enumerate_sequences(t, p, opts.budget)) {
        bool balanced = true;
        for (int k = m; k <= p && balanced; ++k) {
          const auto z = split_count(k, t).first;
          for (int c : prefix_stats(s, k).counts)
            if (c != z && c != z + 1) balanced = false;
        }
        if (balanced) cert.support.push_back(s);
      }
      return finish(std::move(cert));
    }
  }

  // (ii) few periods: x* = 1/(p-1), support <re> u <di>.
  if (p <= t) {
    double lhs = 0.0;
    for (int k = m; k <= p - 1; ++k) lhs += alpha(k) * (k - 1.0) * (p + 1.0 / tt - k);
    const double rhs = alpha(p) * ((p - 1.0) * (p - 1.0) - (1.0 + 1.0 / tt) * p + 1.0 / tt);
    const double gap = rhs - lhs;
    const double eq_tol = 1e-12 * std::max({1.0, std::abs(lhs), std::abs(rhs)});
    if (gap >= -eq_tol) {
      OptimalityCertificate cert{t, mech, 0.0, 0.0, Regime::numeric, 0.0, {}, {}};
      cert.x_star = 1.0 / (p - 1.0);
      double y = 0.0;
      for (int k = m; k <= p; ++k)
        y += alpha(k) * (k - 1.0) *
             (1.0 - (2.0 * p - 1.0 - k + 1.0 / tt) / (k * (p - 1.0) * (p - 1.0)));
      cert.y_star = y;
      if (std::abs(gap) <= eq_tol) {
        cert.regime = Regime::closed_form_ii_boundary;
        cert.support = union_of_blocks({repeat_block(p, t)});
      } else {
        cert.regime = Regime::closed_form_ii;
        cert.support = union_of_blocks({repeat_block(p, t), distinct_block(p, t)});
      }
      return finish(std::move(cert));
    }
  }

  // (iii) <re> alone, x* at the vertex of its quadratic.
  if (p - 1 <= t) {
    double num = 0.0;
    double den = 0.0;
    for (int k = m; k <= p; ++k) {
      if (k < p) num += alpha(k) * (k - 1.0) / k;
      den += alpha(k) * (k - 1.0) * (k - 1.0 - 1.0 / tt) / k;
    }
    if (den > 0.0) {
      const double x0 = num / den;
      const bool upper_ok = p == 2 || x0 < 1.0 / (p - 2.0);
      if (x0 > 1.0 / (p - 1.0) && upper_ok) {
        double quad = 0.0, lin = 0.0, cst = 0.0;
        for (int k = m; k <= p; ++k) {
          quad += alpha(k) * (k - 1.0) * (1.0 - 1.0 / k - 1.0 / (k * tt));
          if (k < p) lin += alpha(k) * (1.0 - 1.0 / k);
          cst += alpha(k) * (k - 1.0);
        }
        cst -= 2.0 * alpha(p) / p;
        OptimalityCertificate cert{t, mech, 0.0, 0.0, Regime::numeric, 0.0, {}, {}};
        cert.regime = Regime::closed_form_iii;
        cert.x_star = x0;
        cert.y_star = quad * x0 * x0 - 2.0 * lin * x0 + cst;
        cert.support = union_of_blocks({repeat_block(p, t)});
        return finish(std::move(cert));
      }
    }
  }
  return std::nullopt;
}

}  // namespace crossover
