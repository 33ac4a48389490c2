#include "crossover/fixtures.hpp"

#include <sstream>

#include "crossover/errors.hpp"

namespace crossover {

namespace {

std::vector<TreatmentSequence> parse_all(const std::vector<std::string>& cols, int t) {
  std::vector<TreatmentSequence> out;
  for (const auto& c : cols) out.push_back(TreatmentSequence::parse(c, t));
  return out;
}

// Printed displays put periods in rows and subjects in columns; each row here
// is one period listed across subjects.
std::vector<std::string> columns_from_rows(const std::vector<std::string>& rows) {
  std::vector<std::vector<std::string>> cells;
  for (const auto& r : rows) {
    std::istringstream in(r);
    std::vector<std::string> row;
    for (std::string tok; in >> tok;) row.push_back(tok);
    cells.push_back(row);
  }
  std::vector<std::string> cols(cells.front().size());
  for (const auto& row : cells)
    for (std::size_t j = 0; j < row.size(); ++j) cols[j] += row[j];
  return cols;
}

Fixture make_d2() {
  // p = t = 4, n = 16; 1234 and 4321 are the only repeated sequences.
  const std::vector<std::string> cols{"2433", "1422", "2311", "3411", "3122", "4133",
                                      "3244", "2144", "1234", "1234", "1342", "2413",
                                      "4321", "4321", "4213", "3142"};
  return {"d2", Design(4, 4, parse_all(cols, 4), "d2"),
          DropoutMechanism(4, 16, {0.0, 0.0, 0.5, 0.5})};
}

Fixture make_d4() {
  // One copy of the first twelve columns, two copies of the last six.
  std::vector<std::string> cols{"2344", "2433", "2311", "3411", "4322", "4211",
                                "2314", "3412", "3421", "4213", "4231", "3241"};
  const std::vector<std::string> doubled{"3122", "4133", "2144", "1243", "1432", "1324"};
  for (int copy = 0; copy < 2; ++copy) cols.insert(cols.end(), doubled.begin(), doubled.end());
  return {"d4", Design(4, 4, parse_all(cols, 4), "d4"),
          DropoutMechanism(4, 24, {0.0, 0.1, 0.4, 0.5})};
}

Fixture make_d6() {
  // p = t = 5, n = 20; rows are periods 1..5.
  const auto cols = columns_from_rows({
      "1 2 4 4 3 2 1 2 1 1 3 2 4 5 5 5 5 3 4 3",
      "2 5 1 2 1 3 2 3 5 4 4 5 5 4 4 2 3 1 3 1",
      "3 4 3 5 5 4 4 5 3 3 1 1 1 2 2 1 2 2 5 4",
      "4 1 5 3 2 5 3 1 2 2 5 3 3 1 1 4 4 4 2 5",
      "4 1 5 3 2 1 5 4 4 5 2 4 2 3 3 3 1 5 1 2",
  });
  return {"d6", Design(5, 5, parse_all(cols, 5), "d6"),
          DropoutMechanism(5, 20, {0.0, 1.0 / 20, 3.0 / 20, 1.0 / 5, 3.0 / 5})};
}

Fixture make_d8() {
  // t = 3, p = 5: five copies of six sequences.
  const std::vector<std::string> base{"13221", "23112", "32113", "31223", "12332", "21331"};
  std::vector<std::string> cols;
  for (int copy = 0; copy < 5; ++copy) cols.insert(cols.end(), base.begin(), base.end());
  return {"d8", Design(5, 3, parse_all(cols, 3), "d8"),
          DropoutMechanism(5, 30, {0.0, 0.0, 1.0 / 3, 1.0 / 3, 1.0 / 3})};
}

Fixture make_d9() {
  // t = 2, p = 6: 122121 and 211212 once, 122211 and 211122 six times each.
  std::vector<std::string> cols{"122121", "211212"};
  for (int copy = 0; copy < 6; ++copy) {
    cols.push_back("122211");
    cols.push_back("211122");
  }
  return {"d9", Design(6, 2, parse_all(cols, 2), "d9"),
          DropoutMechanism(6, 14, {0.0, 0.0, 0.0, 0.0, 0.4, 0.6})};
}

}  // namespace

std::vector<std::string> fixture_names() { return {"d2", "d4", "d6", "d8", "d9"}; }

Fixture fixture(const std::string& name) {
  if (name == "d2") return make_d2();
  if (name == "d4") return make_d4();
  if (name == "d6") return make_d6();
  if (name == "d8") return make_d8();
  if (name == "d9") return make_d9();
  throw ValidationError("unknown fixture '" + name + "' (known: d2, d4, d6, d8, d9)");
}

}  // namespace crossover
