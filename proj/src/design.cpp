#include "crossover/design.hpp"

#include <sstream>

#include "crossover/errors.hpp"

namespace crossover {

Design::Design(int periods, int treatments, std::vector<TreatmentSequence> subjects,
               std::optional<std::string> name)
    : p_(periods), t_(treatments), subjects_(std::move(subjects)), name_(std::move(name)) {
  if (p_ < 2 || t_ < 2) throw ValidationError("design: need p >= 2 and t >= 2");
  if (subjects_.empty()) throw ValidationError("design: no subjects");
  for (std::size_t i = 0; i < subjects_.size(); ++i) {
    const auto& s = subjects_[i];
    if (s.periods() != p_ || s.treatments() != t_) {
      std::ostringstream os;
      os << "design: subject " << (i + 1) << " sequence '" << s.str() << "' does not match p = "
         << p_ << ", t = " << t_;
      throw ValidationError(os.str());
    }
  }
}

Design Design::from_counts(int periods, int treatments,
                           const std::map<TreatmentSequence, int>& counts,
                           std::optional<std::string> name) {
  std::vector<TreatmentSequence> subjects;
  for (const auto& [s, c] : counts) {
    if (c < 0) throw ValidationError("design: negative count");
    for (int i = 0; i < c; ++i) subjects.push_back(s);
  }
  return Design(periods, treatments, std::move(subjects), std::move(name));
}

std::map<TreatmentSequence, int> Design::counts() const {
  std::map<TreatmentSequence, int> out;
  for (const auto& s : subjects_) ++out[s];
  return out;
}

}  // namespace crossover
