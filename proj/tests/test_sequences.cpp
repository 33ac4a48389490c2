#include <algorithm>
#include <numeric>
#include <set>

#include "crossover/errors.hpp"
#include "crossover/sequences.hpp"
#include "doctest.h"

using namespace crossover;

namespace {

TreatmentSequence seq(const char* text, int t) { return TreatmentSequence::parse(text, t); }

}  // namespace

TEST_CASE("parsing and text form") {
  CHECK(seq("122211", 2).labels() == std::vector<int>{1, 2, 2, 2, 1, 1});
  CHECK(seq("1,2,10", 10).str() == "1,2,10");
  CHECK(seq("2433", 4).str() == "2433");
  CHECK_THROWS_AS(seq("1253", 4), ValidationError);
  CHECK_THROWS_AS(seq("10", 2), ValidationError);
  CHECK_THROWS_AS(seq("1,,2", 3), ValidationError);
}

TEST_CASE("enumeration") {
  const auto two = enumerate_sequences(2, 2);
  REQUIRE(two.size() == 4);
  CHECK(two[0].str() == "11");
  CHECK(two[1].str() == "12");
  CHECK(two[2].str() == "21");
  CHECK(two[3].str() == "22");
  CHECK(enumerate_sequences(4, 4).size() == 256);
  CHECK(enumerate_sequences(2, 6).size() == 64);
  const auto all = enumerate_sequences(3, 4);
  CHECK(std::is_sorted(all.begin(), all.end()));
  CHECK_THROWS_AS(enumerate_sequences(10, 7), BudgetError);
  CHECK_THROWS_AS(enumerate_sequences(4, 4, 100), BudgetError);
}

TEST_CASE("incidence matrices") {
  const auto s = seq("12", 2);
  const Matrix t = incidence(s);
  const Matrix f = carryover_incidence(s);
  CHECK(t(0, 0) == 1.0);
  CHECK(t(0, 1) == 0.0);
  CHECK(t(1, 1) == 1.0);
  CHECK(f.row(0).sum() == 0.0);
  CHECK(f(1, 0) == 1.0);
  for (const auto& x : enumerate_sequences(3, 4)) {
    const Matrix tx = incidence(x);
    const Matrix fx = carryover_incidence(x);
    CHECK((tx.rowwise().sum().array() == 1.0).all());
    CHECK(fx.row(0).sum() == 0.0);
    CHECK(fx.bottomRows(3) == tx.topRows(3));
    CHECK((tx * centering(3).dense()).rowwise().sum().cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("prefix statistics") {
  const auto a = prefix_stats(seq("122211", 2), 6);
  CHECK(a.counts == std::vector<int>{3, 3});
  CHECK(a.xi == 18);
  CHECK(a.rho == 3);
  CHECK(a.f_last == 3);
  const auto b = prefix_stats(seq("1234", 4), 4);
  CHECK(b.counts == std::vector<int>{1, 1, 1, 1});
  CHECK(b.xi == 4);
  CHECK(b.rho == 0);
  CHECK(b.f_last == 1);
  // Cauchy-Schwarz: xi >= k^2/t with equality exactly for equal counts.
  for (const auto& s : enumerate_sequences(3, 4))
    for (int k = 1; k <= 4; ++k) {
      const auto st = prefix_stats(s, k);
      CHECK(std::accumulate(st.counts.begin(), st.counts.end(), 0) == k);
      CHECK(3 * st.xi >= k * k);
      const bool equal = std::all_of(st.counts.begin(), st.counts.end(),
                                     [&](int c) { return c == st.counts[0]; });
      CHECK((3 * st.xi == k * k) == equal);
    }
  CHECK_THROWS_AS(prefix_stats(seq("12", 2), 3), ValidationError);
}

TEST_CASE("permutations and symmetric blocks") {
  CHECK(apply_permutation(seq("1123", 3), {2, 3, 1}).str() == "2231");
  CHECK_THROWS_AS(apply_permutation(seq("12", 2), {1, 1}), ValidationError);

  CHECK(symmetric_block(seq("1234", 4)).size() == 24);
  CHECK(symmetric_block(seq("1111", 4)).size() == 4);
  const auto b = symmetric_block(seq("122211", 2));
  CHECK(b.size() == 2);
  CHECK(b.representative().str() == "122211");
  CHECK(symmetric_block(seq("211122", 2)) == b);
  CHECK(b.contains(seq("211122", 2)));
  CHECK_FALSE(b.contains(seq("122121", 2)));

  // Orbits partition the full enumeration and block sizes divide t!.
  for (int t = 2; t <= 4; ++t) {
    const auto all = enumerate_sequences(t, 4);
    const auto blocks = blocks_of(all);
    std::size_t total = 0;
    int fact = 1;
    for (int i = 2; i <= t; ++i) fact *= i;
    std::set<TreatmentSequence> seen;
    for (const auto& blk : blocks) {
      total += blk.size();
      CHECK(fact % blk.size() == 0);
      const auto members = blk.members();
      CHECK(members.size() == blk.size());
      CHECK(members.front() == blk.representative());
      for (const auto& m : members) CHECK(seen.insert(m).second);
    }
    CHECK(total == all.size());
  }
}
