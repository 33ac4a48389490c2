#include "crossover/sequences.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "crossover/errors.hpp"

namespace crossover {

TreatmentSequence::TreatmentSequence(int treatments, std::vector<int> labels)
    : t_(treatments), labels_(std::move(labels)) {
  if (t_ < 1) throw ValidationError("sequence: need at least one treatment");
  if (labels_.empty()) throw ValidationError("sequence: empty");
  for (int x : labels_) {
    if (x < 1 || x > t_) {
      std::ostringstream os;
      os << "sequence: label " << x << " outside 1.." << t_;
      throw ValidationError(os.str());
    }
  }
}

TreatmentSequence TreatmentSequence::parse(std::string_view text, int treatments) {
  std::vector<int> labels;
  if (text.find(',') != std::string_view::npos) {
    std::size_t start = 0;
    while (start <= text.size()) {
      const auto end = std::min(text.find(',', start), text.size());
      const std::string token(text.substr(start, end - start));
      if (token.empty() || token.find_first_not_of("0123456789") != std::string::npos)
        throw ValidationError("sequence: bad label '" + token + "' in '" + std::string(text) + "'");
      labels.push_back(std::stoi(token));
      start = end + 1;
    }
  } else {
    if (treatments > 9)
      throw ValidationError("sequence: t > 9 requires comma-separated labels");
    for (char c : text) {
      if (c < '0' || c > '9')
        throw ValidationError("sequence: bad character in '" + std::string(text) + "'");
      labels.push_back(c - '0');
    }
  }
  return TreatmentSequence(treatments, std::move(labels));
}

std::string TreatmentSequence::str() const {
  std::string out;
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (t_ > 9) {
      if (i) out += ',';
      out += std::to_string(labels_[i]);
    } else {
      out += static_cast<char>('0' + labels_[i]);
    }
  }
  return out;
}

std::vector<TreatmentSequence> enumerate_sequences(int t, int p, std::size_t budget) {
  if (t < 2 || p < 2) throw ValidationError("enumerate_sequences: need t >= 2 and p >= 2");
  const double total = std::pow(static_cast<double>(t), p);
  if (total > static_cast<double>(budget)) {
    std::ostringstream os;
    os << "enumerate_sequences: t^p = " << total << " exceeds the budget of " << budget
       << "; enumerate symmetric blocks instead";
    throw BudgetError(os.str());
  }
  std::vector<TreatmentSequence> out;
  out.reserve(static_cast<std::size_t>(total));
  std::vector<int> labels(p, 1);
  while (true) {
    out.emplace_back(t, labels);
    int i = p - 1;
    while (i >= 0 && labels[i] == t) labels[i--] = 1;
    if (i < 0) break;
    ++labels[i];
  }
  return out;
}

Matrix incidence(const TreatmentSequence& s) {
  Matrix m = Matrix::Zero(s.periods(), s.treatments());
  for (int k = 0; k < s.periods(); ++k) m(k, s.labels()[k] - 1) = 1.0;
  return m;
}

Matrix carryover_incidence(const TreatmentSequence& s) {
  Matrix m = Matrix::Zero(s.periods(), s.treatments());
  for (int k = 1; k < s.periods(); ++k) m(k, s.labels()[k - 1] - 1) = 1.0;
  return m;
}

PrefixStats prefix_stats(const TreatmentSequence& s, int k) {
  if (k < 1 || k > s.periods()) throw ValidationError("prefix_stats: k out of range");
  PrefixStats st;
  st.counts.assign(s.treatments(), 0);
  const auto& x = s.labels();
  for (int j = 0; j < k; ++j) {
    ++st.counts[x[j] - 1];
    if (j + 1 < k && x[j] == x[j + 1]) ++st.rho;
  }
  for (int c : st.counts) st.xi += c * c;
  st.f_last = st.counts[x[k - 1] - 1];
  return st;
}

TreatmentSequence apply_permutation(const TreatmentSequence& s, const std::vector<int>& sigma) {
  const int t = s.treatments();
  if (static_cast<int>(sigma.size()) != t) throw ValidationError("permutation: wrong length");
  std::vector<bool> seen(t, false);
  for (int v : sigma) {
    if (v < 1 || v > t || seen[v - 1]) throw ValidationError("permutation: not a bijection");
    seen[v - 1] = true;
  }
  std::vector<int> out(s.labels());
  for (int& v : out) v = sigma[v - 1];
  return TreatmentSequence(t, std::move(out));
}

TreatmentSequence canonical_form(const TreatmentSequence& s) {
  std::vector<int> relabel(s.treatments() + 1, 0);
  int next = 1;
  std::vector<int> out(s.labels());
  for (int& v : out) {
    if (relabel[v] == 0) relabel[v] = next++;
    v = relabel[v];
  }
  return TreatmentSequence(s.treatments(), std::move(out));
}

namespace {

int distinct_labels(const TreatmentSequence& s) {
  return static_cast<int>(std::set<int>(s.labels().begin(), s.labels().end()).size());
}

}  // namespace

SymmetricBlock::SymmetricBlock(const TreatmentSequence& any_member)
    : rep_(canonical_form(any_member)), size_(1) {
  const int t = rep_.treatments();
  const int used = distinct_labels(rep_);
  for (int i = 0; i < used; ++i) size_ *= static_cast<std::size_t>(t - i);
}

std::vector<TreatmentSequence> SymmetricBlock::members() const {
  // Orbit = images of the canonical form under injective maps of its used
  // labels 1..u into 1..t.
  const int t = rep_.treatments();
  const int used = distinct_labels(rep_);
  std::vector<TreatmentSequence> out;
  out.reserve(size_);
  std::vector<int> image(used, 0);
  std::vector<bool> taken(t + 1, false);
  auto recurse = [&](auto&& self, int depth) -> void {
    if (depth == used) {
      std::vector<int> labels(rep_.labels());
      for (int& v : labels) v = image[v - 1];
      out.emplace_back(t, std::move(labels));
      return;
    }
    for (int c = 1; c <= t; ++c) {
      if (taken[c]) continue;
      taken[c] = true;
      image[depth] = c;
      self(self, depth + 1);
      taken[c] = false;
    }
  };
  recurse(recurse, 0);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<SymmetricBlock> blocks_of(const std::vector<TreatmentSequence>& seqs) {
  std::set<SymmetricBlock> uniq;
  for (const auto& s : seqs) uniq.emplace(s);
  return {uniq.begin(), uniq.end()};
}

}  // namespace crossover
