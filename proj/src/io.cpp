#include "crossover/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "crossover/errors.hpp"

namespace crossover::io {

Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw ValidationError("'" + path + "' is not valid JSON: " + e.what());
  }
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

namespace {

const Json& field(const Json& j, const char* key) {
  if (!j.is_object()) throw ValidationError("expected a JSON object");
  const auto it = j.find(key);
  if (it == j.end()) throw ValidationError(std::string("missing field '") + key + "'");
  return *it;
}

int integer(const Json& j, const char* key) {
  const Json& v = field(j, key);
  if (!v.is_number_integer()) throw ValidationError(std::string("field '") + key + "' must be an integer");
  return v.get<int>();
}

double probability(const Json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    const auto slash = s.find('/');
    try {
      std::size_t used = 0;
      if (slash == std::string::npos) {
        const double x = std::stod(s, &used);
        if (used == s.size()) return x;
      } else {
        const std::string num = s.substr(0, slash), den = s.substr(slash + 1);
        std::size_t un = 0, ud = 0;
        const double x = std::stod(num, &un), y = std::stod(den, &ud);
        if (un == num.size() && ud == den.size() && y != 0.0) return x / y;
      }
    } catch (const std::exception&) {
    }
    throw ValidationError("bad probability '" + s + "'");
  }
  throw ValidationError("probabilities must be numbers or \"k/m\" strings");
}

Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

DropoutMechanism mechanism_from_json(const Json& j) {
  const Json& a = field(j, "a");
  if (!a.is_array()) throw ValidationError("field 'a' must be an array");
  std::vector<double> probs;
  for (const auto& v : a) probs.push_back(probability(v));
  const int p = j.contains("p") ? integer(j, "p") : static_cast<int>(probs.size());
  return DropoutMechanism(p, integer(j, "n"), probs);
}

Json to_json(const DropoutMechanism& mech) {
  return Json{{"p", mech.periods()}, {"n", mech.subjects()}, {"a", mech.probabilities()}};
}

Design design_from_json(const Json& j) {
  const int p = integer(j, "p");
  const int t = integer(j, "t");
  const int n = integer(j, "n");
  const Json& seqs = field(j, "sequences");
  if (!seqs.is_array()) throw ValidationError("field 'sequences' must be an array");
  std::vector<TreatmentSequence> subjects;
  for (const auto& s : seqs) {
    if (!s.is_string()) throw ValidationError("sequences must be strings");
    subjects.push_back(TreatmentSequence::parse(s.get<std::string>(), t));
  }
  if (static_cast<int>(subjects.size()) != n)
    throw ValidationError("design lists " + std::to_string(subjects.size()) +
                          " sequences but n = " + std::to_string(n));
  std::optional<std::string> name;
  if (j.contains("name")) {
    if (!j["name"].is_string()) throw ValidationError("field 'name' must be a string");
    name = j["name"].get<std::string>();
  }
  return Design(p, t, std::move(subjects), std::move(name));
}

Json to_json(const Design& d) {
  Json seqs = Json::array();
  for (const auto& s : d.sequences()) seqs.push_back(s.str());
  Json j{{"p", d.periods()}, {"t", d.treatments()}, {"n", d.subjects()}, {"sequences", seqs}};
  if (d.name()) j["name"] = *d.name();
  return j;
}

Json to_json(const OptimalityCertificate& cert) {
  Json support = Json::array();
  for (const auto& s : cert.support) support.push_back(s.str());
  Json blocks = Json::array();
  for (const auto& b : cert.support_blocks)
    blocks.push_back(Json{{"representative", b.representative().str()}, {"size", b.size()}});
  return Json{{"t", cert.treatments},
              {"mechanism", to_json(cert.mechanism)},
              {"x_star", cert.x_star},
              {"y_star", cert.y_star},
              {"regime", to_string(cert.regime)},
              {"tol_support", cert.tol_support},
              {"support_size", cert.support.size()},
              {"support", support},
              {"support_blocks", blocks}};
}

Json to_json(const SearchResult& r) {
  return Json{{"design", to_json(r.design)},
              {"search",
               {{"residual", r.residual},
                {"restarts_used", r.restarts_used},
                {"moves", r.moves},
                {"seed", r.seed}}}};
}

Json to_json(const EvaluationReport& r) {
  return Json{{"criterion", to_string(r.criterion)},
              {"phi0", r.phi0},
              {"phi0_stderr", r.phi0_stderr},
              {"v_phi", r.v_phi},
              {"sd_phi", r.sd_phi},
              {"phi1", r.phi1},
              {"gap", finite_or_null(r.gap)},
              {"e1_tilde", r.e1_tilde},
              {"ell", finite_or_null(r.ell)},
              {"method", to_string(r.method)},
              {"replications", r.replications},
              {"seed", r.seed}};
}

Json to_json(const CompareReport& r) {
  auto ratio = [](const std::optional<double>& v) {
    return v ? Json(*v) : Json("undefined");
  };
  return Json{{"criterion", to_string(r.criterion)},
              {"phi0_ratio", ratio(r.phi0_ratio)},
              {"v_ratio", ratio(r.v_ratio)},
              {"sd_ratio", ratio(r.sd_ratio)},
              {"design", to_json(r.design)},
              {"baseline", to_json(r.baseline)}};
}

}  // namespace crossover::io
