#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "crossover/sequences.hpp"

namespace crossover {

/// An exact crossover design: one treatment sequence per subject, in subject
/// order. Subject order never affects the information matrices.
class Design {
 public:
  Design(int periods, int treatments, std::vector<TreatmentSequence> subjects,
         std::optional<std::string> name = std::nullopt);

  /// Expands counts into subjects, in sequence order.
  static Design from_counts(int periods, int treatments,
                            const std::map<TreatmentSequence, int>& counts,
                            std::optional<std::string> name = std::nullopt);

  int periods() const { return p_; }
  int treatments() const { return t_; }
  int subjects() const { return static_cast<int>(subjects_.size()); }
  const std::vector<TreatmentSequence>& sequences() const { return subjects_; }
  const std::optional<std::string>& name() const { return name_; }

  std::map<TreatmentSequence, int> counts() const;

 private:
  int p_;
  int t_;
  std::vector<TreatmentSequence> subjects_;
  std::optional<std::string> name_;
};

/// Real weights over sequences summing to one.
struct ApproximateDesign {
  std::map<TreatmentSequence, double> weights;
};

}  // namespace crossover
