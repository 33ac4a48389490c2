#pragma once

// Built-in published designs with the dropout mechanisms they were built for.

#include <string>
#include <vector>

#include "crossover/design.hpp"
#include "crossover/dropout_model.hpp"

namespace crossover {

struct Fixture {
  std::string name;
  Design design;
  DropoutMechanism mechanism;
};

/// d2, d4, d6, d8, d9.
std::vector<std::string> fixture_names();

/// ValidationError for an unknown name.
Fixture fixture(const std::string& name);

}  // namespace crossover
