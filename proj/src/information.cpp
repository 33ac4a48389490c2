#include "crossover/information.hpp"

#include <cmath>
#include <sstream>

#include "crossover/errors.hpp"

namespace crossover {

DesignMatrices design_matrices(const Design& d) {
  const int p = d.periods();
  const int t = d.treatments();
  const int n = d.subjects();
  DesignMatrices out{Matrix::Zero(n * p, t), Matrix::Zero(n * p, t)};
  for (int u = 0; u < n; ++u) {
    out.T.block(u * p, 0, p, t) = incidence(d.sequences()[u]);
    out.F.block(u * p, 0, p, t) = carryover_incidence(d.sequences()[u]);
  }
  return out;
}

InfoMatrix make_info(SymMatrix c11, Matrix c12, SymMatrix c22) {
  InfoMatrix info{std::move(c11), std::move(c12), std::move(c22), {}, {}};
  info.schur = schur_complement(info.c11, info.c12, info.c22);
  info.eigenvalues = info.schur.eigenvalues();
  if (info.eigenvalues.size() > 0) {
    const double top = std::abs(info.eigenvalues(info.eigenvalues.size() - 1));
    if (std::abs(info.eigenvalues(0)) <= 1e-9 * top || top == 0.0) info.eigenvalues(0) = 0.0;
  }
  return info;
}

namespace {

void check_stays(const Design& d, const std::vector<int>& stay) {
  if (static_cast<int>(stay.size()) != d.subjects())
    throw ValidationError("stay-length vector does not match the number of subjects");
  for (int l : stay)
    if (l < 1 || l > d.periods()) throw ValidationError("stay length outside 1..p");
}

}  // namespace

InfoMatrix realized_info(const Design& d, const std::vector<int>& stay) {
  check_stays(d, stay);
  const int p = d.periods();
  const int n = d.subjects();
  int observed = 0;
  for (int l : stay) observed += l;

  // M keeps the first l_u rows of each subject block.
  Matrix m = Matrix::Zero(observed, n * p);
  int row = 0;
  for (int u = 0; u < n; ++u)
    for (int k = 0; k < stay[u]; ++k) m(row++, u * p + k) = 1.0;

  const Matrix z = kron(Vector::Ones(n), Matrix::Identity(p, p));
  const Matrix usub = kron(Matrix::Identity(n, n), Vector::Ones(p));
  Matrix nuisance(observed, p + n);
  nuisance << m * z, m * usub;
  const Matrix o = m.transpose() * proj_complement(nuisance).dense() * m;

  const auto dm = design_matrices(d);
  return make_info(SymMatrix(dm.T.transpose() * o * dm.T), dm.T.transpose() * o * dm.F,
                   SymMatrix(dm.F.transpose() * o * dm.F));
}

InfoMatrix surrogate_info(const Design& d, const DropoutMechanism& mech) {
  if (d.periods() != mech.periods() || d.subjects() != mech.subjects())
    throw ValidationError("surrogate_info: design and mechanism disagree on p or n");
  return surrogate_info(d, matrices(mech));
}

InfoMatrix surrogate_info(const Design& d, const MechanismMatrices& mm) {
  if (mm.V.order() != static_cast<Eigen::Index>(d.periods()) * d.subjects())
    throw ValidationError("surrogate_info: V does not match the design size");
  const auto dm = design_matrices(d);
  const Matrix& v = mm.V.dense();
  return make_info(SymMatrix(dm.T.transpose() * v * dm.T), dm.T.transpose() * v * dm.F,
                   SymMatrix(dm.F.transpose() * v * dm.F));
}

CheckMatrices check_matrices(const TreatmentSequence& s, const MechanismMatrices& mm) {
  if (s.periods() != mm.A.order())
    throw ValidationError("check_matrices: sequence length differs from the number of periods");
  const Matrix t = incidence(s);
  const Matrix f = carryover_incidence(s);
  const Matrix bt = centering(s.treatments()).dense();
  const Matrix th = t * bt;
  const Matrix fh = f * bt;
  const Matrix amb = mm.A.dense() - mm.B.dense();
  const Matrix& b = mm.B.dense();
  return {SymMatrix(t.transpose() * amb * t + th.transpose() * b * th),
          t.transpose() * amb * f + th.transpose() * b * fh,
          SymMatrix(f.transpose() * amb * f + fh.transpose() * b * fh)};
}

std::string to_string(Criterion c) {
  switch (c) {
    case Criterion::A: return "A";
    case Criterion::D: return "D";
    case Criterion::E: return "E";
    case Criterion::T: return "T";
  }
  return "?";
}

Criterion parse_criterion(const std::string& text) {
  if (text == "a" || text == "A") return Criterion::A;
  if (text == "d" || text == "D") return Criterion::D;
  if (text == "e" || text == "E") return Criterion::E;
  if (text == "t" || text == "T") return Criterion::T;
  throw ValidationError("unknown criterion '" + text + "' (expected a, d, e or t)");
}

bool is_disconnected(const Vector& ev) {
  if (ev.size() < 2) return true;
  return ev(1) <= 1e-9 * std::max(1.0, ev(ev.size() - 1));
}

double criterion_value(const Vector& ev, Criterion which, int n) {
  const auto t = ev.size();
  if (t < 2) throw ValidationError("criterion: need at least two treatments");
  const double nn = n;
  if (which == Criterion::T) {
    double s = 0.0;
    for (Eigen::Index i = 1; i < t; ++i) s += ev(i);
    return s / (nn * (t - 1.0));
  }
  if (is_disconnected(ev)) return 0.0;
  switch (which) {
    case Criterion::A: {
      double s = 0.0;
      for (Eigen::Index i = 1; i < t; ++i) s += 1.0 / ev(i);
      return (t - 1.0) / (nn * s);
    }
    case Criterion::D: {
      double logs = 0.0;
      for (Eigen::Index i = 1; i < t; ++i) logs += std::log(ev(i));
      return std::exp(logs / (t - 1.0)) / nn;
    }
    case Criterion::E: return ev(1) / nn;
    case Criterion::T: break;
  }
  return 0.0;
}

RealizationKernel::Stats& RealizationKernel::Stats::operator+=(const Stats& o) {
  K += o.K;
  L += o.L;
  H += o.H;
  return *this;
}

void RealizationKernel::Stats::add_scaled(const Stats& o, double c) {
  K += c * o.K;
  L += c * o.L;
  H += c * o.H;
}

RealizationKernel::RealizationKernel(int periods, int treatments) : p_(periods), t_(treatments) {}

RealizationKernel::Stats RealizationKernel::zero() const {
  return {Matrix::Zero(2 * t_, 2 * t_), Matrix::Zero(p_, 2 * t_), Matrix::Zero(p_, p_)};
}

RealizationKernel::Stats RealizationKernel::contribution(const TreatmentSequence& s,
                                                         int stay) const {
  if (stay < 1 || stay > p_) throw ValidationError("stay length outside 1..p");
  Matrix g(stay, 2 * t_);
  g << incidence(s).topRows(stay), carryover_incidence(s).topRows(stay);
  const Matrix bl = centering(stay).dense();
  const Matrix gt = bl * g;
  Matrix zt = Matrix::Zero(stay, p_);
  zt.leftCols(stay) = bl;
  return {gt.transpose() * gt, zt.transpose() * gt, zt.transpose() * zt};
}

InfoMatrix RealizationKernel::info(const Stats& total) const {
  const Matrix q = total.K - total.L.transpose() * pinv(SymMatrix(total.H)).dense() * total.L;
  return make_info(SymMatrix(q.topLeftCorner(t_, t_)), q.topRightCorner(t_, t_),
                   SymMatrix(q.bottomRightCorner(t_, t_)));
}

InfoMatrix RealizationKernel::info(const Design& d, const std::vector<int>& stay) const {
  check_stays(d, stay);
  Stats total = zero();
  for (int u = 0; u < d.subjects(); ++u) total += contribution(d.sequences()[u], stay[u]);
  return info(total);
}

}  // namespace crossover
