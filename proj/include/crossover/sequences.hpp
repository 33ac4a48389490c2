#pragma once

// Treatment sequences over {1..t}, their incidence matrices, prefix statistics
// and orbits under treatment relabeling.

#include <compare>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "crossover/matrix_kernels.hpp"

namespace crossover {

inline constexpr std::size_t kEnumerationBudget = 1'000'000;

class TreatmentSequence {
 public:
  /// Labels are 1-based, one per period. Throws ValidationError when a label
  /// falls outside {1..treatments}.
  TreatmentSequence(int treatments, std::vector<int> labels);

  /// "122211" for t <= 9, otherwise comma separated ("1,10,3"). Commas are
  /// accepted for any t.
  static TreatmentSequence parse(std::string_view text, int treatments);

  int treatments() const { return t_; }
  int periods() const { return static_cast<int>(labels_.size()); }
  const std::vector<int>& labels() const { return labels_; }
  /// Label in period k, 1-based.
  int at(int k) const { return labels_[k - 1]; }

  std::string str() const;

  friend bool operator==(const TreatmentSequence&, const TreatmentSequence&) = default;
  friend auto operator<=>(const TreatmentSequence& a, const TreatmentSequence& b) {
    if (auto c = a.t_ <=> b.t_; c != 0) return c;
    return a.labels_ <=> b.labels_;
  }

 private:
  int t_;
  std::vector<int> labels_;
};

/// All t^p sequences in lexicographic order. Throws BudgetError past `budget`.
std::vector<TreatmentSequence> enumerate_sequences(int t, int p,
                                                   std::size_t budget = kEnumerationBudget);

/// p x t treatment incidence: row k has a single 1 in column t_k.
Matrix incidence(const TreatmentSequence& s);
/// p x t carryover incidence: first row zero, row k equals row k-1 of incidence.
Matrix carryover_incidence(const TreatmentSequence& s);

struct PrefixStats {
  std::vector<int> counts;  // f_{s_k,i}, i = 1..t
  int xi = 0;               // sum_i f_{s_k,i}^2
  int rho = 0;              // number of j < k with t_j == t_{j+1}
  int f_last = 0;           // f_{s_k, t_k}
};

/// Statistics of the first k periods (1 <= k <= p).
PrefixStats prefix_stats(const TreatmentSequence& s, int k);

/// sigma[i-1] is the image of label i; sigma must be a permutation of 1..t.
TreatmentSequence apply_permutation(const TreatmentSequence& s, const std::vector<int>& sigma);

/// Relabels treatments in order of first appearance: the lexicographically
/// smallest member of the orbit.
TreatmentSequence canonical_form(const TreatmentSequence& s);

class SymmetricBlock {
 public:
  explicit SymmetricBlock(const TreatmentSequence& any_member);

  const TreatmentSequence& representative() const { return rep_; }
  std::size_t size() const { return size_; }
  /// Orbit members in lexicographic order.
  std::vector<TreatmentSequence> members() const;
  bool contains(const TreatmentSequence& s) const { return canonical_form(s) == rep_; }

  friend bool operator==(const SymmetricBlock& a, const SymmetricBlock& b) {
    return a.rep_ == b.rep_;
  }
  friend auto operator<=>(const SymmetricBlock& a, const SymmetricBlock& b) {
    return a.rep_ <=> b.rep_;
  }

 private:
  TreatmentSequence rep_;
  std::size_t size_;
};

inline SymmetricBlock symmetric_block(const TreatmentSequence& s) { return SymmetricBlock(s); }

/// Distinct symmetric blocks covering `seqs`, in representative order.
std::vector<SymmetricBlock> blocks_of(const std::vector<TreatmentSequence>& seqs);

}  // namespace crossover
