#include "crossover/evaluation.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "crossover/errors.hpp"
#include "crossover/parallel.hpp"

namespace crossover {

std::string to_string(Method m) {
  switch (m) {
    case Method::automatic: return "auto";
    case Method::exact: return "exact";
    case Method::monte_carlo: return "monte_carlo";
  }
  return "?";
}

Method parse_method(const std::string& text) {
  if (text == "auto") return Method::automatic;
  if (text == "exact") return Method::exact;
  if (text == "mc" || text == "monte_carlo") return Method::monte_carlo;
  throw ValidationError("unknown method '" + text + "' (expected auto, exact or mc)");
}

double pairwise_sum(const double* x, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(x, half) + pairwise_sum(x + half, n - half);
}

namespace {

void check_dimensions(const Design& d, const DropoutMechanism& mech) {
  if (d.periods() != mech.periods())
    throw ValidationError("design has " + std::to_string(d.periods()) +
                          " periods but the mechanism has " + std::to_string(mech.periods()));
  if (d.subjects() != mech.subjects())
    throw ValidationError("design has " + std::to_string(d.subjects()) +
                          " subjects but the mechanism has " + std::to_string(mech.subjects()));
}

struct Composition {
  double weight;
  RealizationKernel::Stats stats;
};

// All ways to spread `count` identical subjects over the stay lengths, with
// their multinomial probabilities.
std::vector<Composition> compositions(const RealizationKernel& kernel, const TreatmentSequence& s,
                                      int count, const std::vector<int>& stays,
                                      const DropoutMechanism& mech) {
  const std::size_t m = stays.size();
  std::vector<RealizationKernel::Stats> unit;
  for (int k : stays) unit.push_back(kernel.contribution(s, k));
  std::vector<Composition> out;
  std::vector<int> parts(m, 0);
  auto emit = [&]() {
    double logw = std::lgamma(count + 1.0);
    auto stats = kernel.zero();
    for (std::size_t j = 0; j < m; ++j) {
      logw += parts[j] * std::log(mech.a(stays[j])) - std::lgamma(parts[j] + 1.0);
      if (parts[j] > 0) stats.add_scaled(unit[j], parts[j]);
    }
    out.push_back({std::exp(logw), std::move(stats)});
  };
  auto rec = [&](auto&& self, std::size_t j, int left) -> void {
    if (j + 1 == m) {
      parts[j] = left;
      emit();
      return;
    }
    for (int c = left; c >= 0; --c) {
      parts[j] = c;
      self(self, j + 1, left - c);
    }
  };
  rec(rec, 0, count);
  return out;
}

double binomial(int n, int k) {
  return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0));
}

struct Samples {
  std::vector<double> weight;                 // exact mode only
  std::array<std::vector<double>, 4> values;  // criterion values per cell / replicate
};

void record(Samples& out, std::size_t i, const InfoMatrix& info, int n) {
  for (std::size_t c = 0; c < kAllCriteria.size(); ++c)
    out.values[c][i] = criterion_value(info.eigenvalues, kAllCriteria[c], n);
}

Phi0Batch run_exact(const Design& d, const DropoutMechanism& mech, const EvalOptions& opts) {
  const RealizationKernel kernel(d.periods(), d.treatments());
  const std::vector<int> stays = mech.support();
  std::vector<std::vector<Composition>> groups;
  for (const auto& [s, count] : d.counts())
    groups.push_back(compositions(kernel, s, count, stays, mech));

  std::size_t cells = 1;
  for (const auto& g : groups) cells *= g.size();
  const int n = d.subjects();

  Samples samples;
  samples.weight.assign(cells, 0.0);
  for (auto& v : samples.values) v.assign(cells, 0.0);

  parallel_chunks(cells, worker_count(opts.threads), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      auto total = kernel.zero();
      double w = 1.0;
      std::size_t rest = i;
      for (std::size_t g = groups.size(); g-- > 0;) {
        const auto& comp = groups[g][rest % groups[g].size()];
        rest /= groups[g].size();
        w *= comp.weight;
        total += comp.stats;
      }
      samples.weight[i] = w;
      record(samples, i, kernel.info(total), n);
    }
  });

  Phi0Batch batch;
  batch.method = Method::exact;
  batch.replications = static_cast<long>(cells);
  batch.seed = opts.seed;
  std::vector<double> terms(cells);
  for (std::size_t c = 0; c < kAllCriteria.size(); ++c) {
    const auto& v = samples.values[c];
    for (std::size_t i = 0; i < cells; ++i) terms[i] = samples.weight[i] * v[i];
    const double mean = pairwise_sum(terms.data(), cells);
    for (std::size_t i = 0; i < cells; ++i)
      terms[i] = samples.weight[i] * (v[i] - mean) * (v[i] - mean);
    batch.by_criterion[c] = {mean, 0.0, pairwise_sum(terms.data(), cells)};
  }
  return batch;
}

Phi0Batch run_monte_carlo(const Design& d, const DropoutMechanism& mech,
                          const EvalOptions& opts) {
  if (opts.reps < 2) throw ValidationError("Monte Carlo needs at least 2 replications");
  const RealizationKernel kernel(d.periods(), d.treatments());
  const std::vector<int> stays = mech.support();
  std::vector<double> cdf;
  double acc = 0.0;
  for (int k : stays) cdf.push_back(acc += mech.a(k));
  cdf.back() = 1.0;

  // Per-subject contributions for every possible stay length.
  std::vector<std::vector<RealizationKernel::Stats>> unit;
  for (const auto& s : d.sequences()) {
    std::vector<RealizationKernel::Stats> row;
    for (int k : stays) row.push_back(kernel.contribution(s, k));
    unit.push_back(std::move(row));
  }

  const auto reps = static_cast<std::size_t>(opts.reps);
  const int n = d.subjects();
  Samples samples;
  for (auto& v : samples.values) v.assign(reps, 0.0);

  parallel_chunks(reps, worker_count(opts.threads), [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      std::seed_seq seq{static_cast<std::uint32_t>(opts.seed),
                        static_cast<std::uint32_t>(opts.seed >> 32),
                        static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(r >> 32)};
      std::mt19937_64 rng(seq);
      auto total = kernel.zero();
      for (int u = 0; u < n; ++u) {
        const double draw = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        std::size_t j = 0;
        while (j + 1 < cdf.size() && draw >= cdf[j]) ++j;
        total += unit[u][j];
      }
      record(samples, r, kernel.info(total), n);
    }
  });

  Phi0Batch batch;
  batch.method = Method::monte_carlo;
  batch.replications = opts.reps;
  batch.seed = opts.seed;
  std::vector<double> dev(reps);
  for (std::size_t c = 0; c < kAllCriteria.size(); ++c) {
    const auto& v = samples.values[c];
    const double mean = pairwise_sum(v.data(), reps) / static_cast<double>(reps);
    for (std::size_t i = 0; i < reps; ++i) dev[i] = (v[i] - mean) * (v[i] - mean);
    const double var = pairwise_sum(dev.data(), reps) / static_cast<double>(reps - 1);
    batch.by_criterion[c] = {mean, std::sqrt(var / static_cast<double>(reps)), var};
  }
  return batch;
}

}  // namespace

double exact_cell_count(const Design& d, const DropoutMechanism& mech) {
  const int m = static_cast<int>(mech.support().size());
  double cells = 1.0;
  for (const auto& [s, count] : d.counts()) cells *= std::round(binomial(count + m - 1, m - 1));
  return cells;
}

Phi0Batch evaluate_phi0_all(const Design& d, const DropoutMechanism& mech,
                            const EvalOptions& opts) {
  check_dimensions(d, mech);
  const double cells = exact_cell_count(d, mech);
  const bool fits = cells <= static_cast<double>(opts.exact_budget);
  switch (opts.method) {
    case Method::exact:
      if (!fits) {
        std::ostringstream msg;
        msg << "exact enumeration needs " << cells << " realization cells, above the budget of "
            << opts.exact_budget << "; use the Monte Carlo method instead";
        throw BudgetError(msg.str());
      }
      return run_exact(d, mech, opts);
    case Method::monte_carlo: return run_monte_carlo(d, mech, opts);
    case Method::automatic: break;
  }
  return fits ? run_exact(d, mech, opts) : run_monte_carlo(d, mech, opts);
}

Phi0Estimate evaluate_phi0(const Design& d, const DropoutMechanism& mech, Criterion which,
                           const EvalOptions& opts) {
  return evaluate_phi0_all(d, mech, opts)[which];
}

double evaluate_phi1(const Design& d, const DropoutMechanism& mech, Criterion which) {
  return criterion(surrogate_info(d, mech), which, d.subjects());
}

EfficiencyBounds efficiency_bounds(double phi0, double phi1, double y_star, int t) {
  EfficiencyBounds b;
  b.e1_tilde = phi1 / (y_star / (t - 1.0));
  b.gap = phi1 > 0.0 ? phi0 / phi1 : std::nan("");
  b.ell = b.e1_tilde * b.gap;
  return b;
}

std::vector<EvaluationReport> evaluate(const Design& d, const DropoutMechanism& mech,
                                       const std::vector<Criterion>& criteria,
                                       const EvalOptions& opts,
                                       const OptimalityCertificate* cert) {
  check_dimensions(d, mech);
  std::optional<OptimalityCertificate> solved;
  if (cert == nullptr) {
    solved = solve_minimax(mech, d.treatments());
    cert = &*solved;
  }
  const auto batch = evaluate_phi0_all(d, mech, opts);
  const auto surrogate = surrogate_info(d, mech);
  std::vector<EvaluationReport> out;
  for (Criterion c : criteria) {
    const auto& est = batch[c];
    EvaluationReport r;
    r.criterion = c;
    r.phi0 = est.phi0;
    r.phi0_stderr = est.stderr_;
    r.v_phi = est.v_phi;
    r.sd_phi = std::sqrt(est.v_phi);
    r.phi1 = criterion(surrogate, c, d.subjects());
    const auto b = efficiency_bounds(r.phi0, r.phi1, cert->y_star, d.treatments());
    r.gap = b.gap;
    r.e1_tilde = b.e1_tilde;
    r.ell = b.ell;
    r.method = batch.method;
    r.replications = batch.replications;
    r.seed = batch.seed;
    out.push_back(r);
  }
  return out;
}

std::vector<CompareReport> compare(const Design& d, const Design& baseline,
                                   const DropoutMechanism& mech,
                                   const std::vector<Criterion>& criteria,
                                   const EvalOptions& opts) {
  if (d.periods() != baseline.periods() || d.treatments() != baseline.treatments())
    throw ValidationError("compare: designs differ in periods or treatments");
  auto for_design = [&](const Design& x) {
    return x.subjects() == mech.subjects() ? mech : mech.with_subjects(x.subjects());
  };
  const auto md = for_design(d);
  const auto mb = for_design(baseline);
  const auto cd = solve_minimax(md, d.treatments());
  const auto cb = d.subjects() == baseline.subjects() ? cd : solve_minimax(mb, d.treatments());
  const auto rd = evaluate(d, md, criteria, opts, &cd);
  const auto rb = evaluate(baseline, mb, criteria, opts, &cb);
  std::vector<CompareReport> out;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    CompareReport c;
    c.criterion = criteria[i];
    c.design = rd[i];
    c.baseline = rb[i];
    if (rb[i].phi0 != 0.0) c.phi0_ratio = rd[i].phi0 / rb[i].phi0;
    if (rb[i].v_phi != 0.0) c.v_ratio = rd[i].v_phi / rb[i].v_phi;
    if (rb[i].sd_phi != 0.0) c.sd_ratio = rd[i].sd_phi / rb[i].sd_phi;
    out.push_back(c);
  }
  return out;
}

std::vector<SweepRow> sweep_theta(const std::optional<Design>& fixed, int p, int t, int n,
                                  const std::vector<Criterion>& criteria,
                                  const std::vector<double>& grid, const EvalOptions& opts,
                                  const SearchOptions& search) {
  if (p < 2) throw ValidationError("sweep: need at least two periods");
  if (fixed && (fixed->periods() != p || fixed->treatments() != t || fixed->subjects() != n))
    throw ValidationError("sweep: fixed design does not match p, t, n");
  std::vector<SweepRow> rows;
  for (double theta : grid) {
    if (!(theta > 0.0 && theta < 1.0))
      throw ValidationError("sweep: theta values must lie in (0, 1)");
    std::vector<double> a(p, 0.0);
    a[p - 2] = theta;
    a[p - 1] = 1.0 - theta;
    const DropoutMechanism mech(p, n, a);
    const auto cert = solve_minimax(mech, t);
    const Design d = fixed ? *fixed : exact_search(n, cert, mech, search).design;
    for (const auto& r : evaluate(d, mech, criteria, opts, &cert)) rows.push_back({theta, r});
  }
  return rows;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  auto number = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ValidationError("bad theta grid entry '" + s + "'");
    }
  };
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
    if (parts.size() != 3) throw ValidationError("theta grid must be start:stop:step");
    const double start = number(parts[0]), stop = number(parts[1]), step = number(parts[2]);
    if (!(step > 0.0) || stop < start) throw ValidationError("theta grid needs step > 0, stop >= start");
    for (long i = 0;; ++i) {
      const double v = start + i * step;
      if (v > stop + 1e-9 * step) break;
      out.push_back(v);
    }
  } else {
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) out.push_back(number(item));
  }
  if (out.empty()) throw ValidationError("empty theta grid");
  return out;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "theta,criterion,phi0,stderr,v_phi,phi1,gap,e1_tilde,ell\n";
  char buf[256];
  for (const auto& row : rows) {
    const auto& r = row.report;
    std::snprintf(buf, sizeof buf, "%.10g,%s,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n",
                  row.theta, to_string(r.criterion).c_str(), r.phi0, r.phi0_stderr, r.v_phi,
                  r.phi1, r.gap, r.e1_tilde, r.ell);
    out += buf;
  }
  return out;
}

}  // namespace crossover
