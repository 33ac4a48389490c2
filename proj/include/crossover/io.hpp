#pragma once

// JSON formats for mechanisms, designs, certificates and reports.

#include <string>

#include "json.hpp"

#include "crossover/design.hpp"
#include "crossover/design_search.hpp"
#include "crossover/dropout_model.hpp"
#include "crossover/evaluation.hpp"
#include "crossover/q_solver.hpp"

namespace crossover::io {

using Json = nlohmann::json;

/// Reads and parses a JSON file; ValidationError on any failure.
Json load_json_file(const std::string& path);

/// Pretty-printed with sorted keys and a trailing newline.
std::string dump(const Json& j);

/// {"p": int (optional, defaults to len(a)), "n": int, "a": [numbers or "k/m" strings]}
DropoutMechanism mechanism_from_json(const Json& j);
Json to_json(const DropoutMechanism& mech);

/// {"p", "t", "n", "sequences": [period-major strings], "name" (optional)}.
/// Subject order is kept so that load followed by emit reproduces the file.
Design design_from_json(const Json& j);
Json to_json(const Design& d);

Json to_json(const OptimalityCertificate& cert);
Json to_json(const SearchResult& r);
Json to_json(const EvaluationReport& r);
Json to_json(const CompareReport& r);

}  // namespace crossover::io
