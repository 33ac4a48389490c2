#include <array>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>
#include <sys/wait.h>

#include "crossover/errors.hpp"
#include "crossover/fixtures.hpp"
#include "crossover/io.hpp"
#include "doctest.h"

using namespace crossover;
using io::Json;

namespace {

struct Run {
  int code;
  std::string out;
};

Run run_cli(const std::string& args) {
  const std::string cmd = std::string(CROSSOVER_CLI) + " " + args + " 2>/dev/null";
  std::unique_ptr<FILE, int (*)(FILE*)> pipe(popen(cmd.c_str(), "r"), pclose);
  REQUIRE(pipe);
  std::string out;
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), pipe.get())) out += buf.data();
  const int status = pclose(pipe.release());
  return {WEXITSTATUS(status), out};
}

std::string temp_file(const std::string& name, const std::string& content) {
  const std::string path = std::string(CROSSOVER_TMP) + "/" + name;
  std::ofstream(path) << content;
  return path;
}

}  // namespace

TEST_CASE("fixtures") {
  CHECK(fixture_names().size() == 5);
  const auto d2 = fixture("d2");
  CHECK(d2.design.subjects() == 16);
  const auto counts = d2.design.counts();
  for (const auto& [s, c] : counts) {
    const bool repeated = s.str() == "1234" || s.str() == "4321";
    CHECK(c == (repeated ? 2 : 1));
  }
  CHECK(counts.size() == 14);

  const auto d4 = fixture("d4");
  CHECK(d4.design.subjects() == 24);
  int twice = 0;
  for (const auto& [s, c] : d4.design.counts()) twice += c == 2;
  CHECK(twice == 6);

  const auto d6 = fixture("d6");
  CHECK(d6.design.subjects() == 20);
  CHECK(d6.design.sequences()[0].str() == "12344");
  CHECK(d6.design.sequences()[19].str() == "31452");

  const auto d8 = fixture("d8");
  CHECK(d8.design.subjects() == 30);
  for (const auto& [s, c] : d8.design.counts()) CHECK(c == 5);

  const auto d9 = fixture("d9");
  CHECK(d9.design.subjects() == 14);
  CHECK(d9.design.counts().at(TreatmentSequence::parse("122121", 2)) == 1);
  CHECK(d9.design.counts().at(TreatmentSequence::parse("211122", 2)) == 6);

  for (const auto& name : fixture_names()) {
    const auto f = fixture(name);
    CHECK(f.design.periods() == f.mechanism.periods());
    CHECK(f.design.subjects() == f.mechanism.subjects());
  }
  CHECK_THROWS_AS(fixture("d7"), ValidationError);
}

TEST_CASE("design JSON round trip") {
  for (const auto& name : fixture_names()) {
    const auto text = io::dump(io::to_json(fixture(name).design));
    const auto back = io::design_from_json(Json::parse(text));
    CHECK(io::dump(io::to_json(back)) == text);
  }
  CHECK_THROWS_AS(io::design_from_json(Json::parse(R"({"p":2,"t":2,"n":2,"sequences":["12"]})")),
                  ValidationError);
  CHECK_THROWS_AS(io::design_from_json(Json::parse(R"({"p":2,"t":2,"n":1,"sequences":["13"]})")),
                  ValidationError);
  CHECK_THROWS_AS(io::design_from_json(Json::parse(R"({"p":3,"t":2,"n":1,"sequences":["12"]})")),
                  ValidationError);
}

TEST_CASE("mechanism JSON") {
  const auto m = io::mechanism_from_json(Json::parse(R"({"n":30,"a":[0,0,"1/3","1/3","1/3"]})"));
  CHECK(m.periods() == 5);
  CHECK(m.a(3) == doctest::Approx(1.0 / 3.0));
  const auto back = io::mechanism_from_json(io::to_json(m));
  CHECK(back.probabilities() == m.probabilities());
  CHECK_THROWS_AS(io::mechanism_from_json(Json::parse(R"({"n":3,"a":[0.5,0.6,-0.1,0]})")),
                  ValidationError);
  CHECK_THROWS_AS(io::mechanism_from_json(Json::parse(R"({"n":3,"a":["x"]})")), ValidationError);
  CHECK_THROWS_AS(io::mechanism_from_json(Json::parse(R"({"a":[0,1]})")), ValidationError);
}

TEST_CASE("command line: solve") {
  const auto mech = temp_file("half.json", R"({"p":4,"n":16,"a":[0,0,0.5,0.5]})");
  const auto r = run_cli("solve --mech " + mech + " --t 4");
  REQUIRE(r.code == 0);
  const auto j = Json::parse(r.out);
  CHECK(j["regime"] == "closed_form_ii");
  CHECK(std::abs(j["x_star"].get<double>() - 1.0 / 3.0) < 1e-9);
  CHECK(j["support"].size() == 48);

  const auto complete = temp_file("complete.json", R"({"p":4,"n":16,"a":[0,0,0,1]})");
  const auto c = run_cli("solve --mech " + complete + " --t 4 --closed-form-only");
  REQUIRE(c.code == 0);
  CHECK(std::abs(Json::parse(c.out)["y_star"].get<double>() - 3.0 * (1.0 - 3.25 / 36.0)) < 1e-12);

  const auto bad = temp_file("bad.json", R"({"p":4,"n":16,"a":[0.5,0.6,-0.1,0]})");
  CHECK(run_cli("solve --mech " + bad + " --t 4").code == 2);
  CHECK(run_cli("solve --mech /nonexistent.json --t 4").code == 2);
  CHECK(run_cli("solve --bogus").code == 2);
}

TEST_CASE("command line: design") {
  const auto a = run_cli("design --fixture d2 --restarts 0 --seed 7");
  const auto b = run_cli("design --fixture d2 --restarts 0 --seed 7");
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  const auto j = Json::parse(a.out);
  CHECK(j["design"]["n"] == 16);
  CHECK(j["search"]["restarts_used"] == 0);

  const auto one = run_cli("design --fixture d2 --n 1");
  REQUIRE(one.code == 0);
  const auto k = Json::parse(one.out);
  CHECK(k["design"]["sequences"].size() == 1);
  CHECK(k["search"]["residual"].get<double>() > 0.0);
}

TEST_CASE("command line: evaluate, compare, sweep, fixtures") {
  const auto e = run_cli("evaluate --fixture d9 --method exact --criterion t");
  REQUIRE(e.code == 0);
  const auto rep = Json::parse(e.out)["reports"][0];
  CHECK(std::abs(rep["phi0"].get<double>() - 2.7368) < 1e-4);
  CHECK(rep["method"] == "exact");

  CHECK(run_cli("evaluate --fixture d8 --method exact").code == 1);
  CHECK(run_cli("evaluate --fixture d8 --criterion q").code == 2);

  const auto design = temp_file("d2.json", run_cli("fixtures d2").out);
  const auto mech = temp_file("d2mech.json", run_cli("fixtures d2 --mech").out);
  const auto cmp = run_cli("compare --design " + design + " --baseline " + design + " --mech " +
                           mech + " --criterion t");
  REQUIRE(cmp.code == 0);
  const auto cj = Json::parse(cmp.out)["comparisons"][0];
  CHECK(cj["phi0_ratio"].get<double>() == 1.0);
  CHECK(cj["v_ratio"].get<double>() == 1.0);

  const auto flat = temp_file(
      "flat.json", R"({"p":4,"t":4,"n":16,"sequences":["1234","1234","1234","1234","1234","1234",
      "1234","1234","1234","1234","1234","1234","1234","1234","1234","1234"]})");
  const auto undefined = run_cli("compare --design " + design + " --baseline " + flat +
                                 " --mech " + mech + " --criterion a");
  REQUIRE(undefined.code == 0);
  CHECK(Json::parse(undefined.out)["comparisons"][0]["phi0_ratio"] == "undefined");

  const auto sweep = run_cli("sweep --fixture d2 --theta-grid 0.25,0.75 --criterion t");
  REQUIRE(sweep.code == 0);
  CHECK(sweep.out.rfind("theta,criterion,phi0,stderr,v_phi,phi1,gap,e1_tilde,ell\n", 0) == 0);
  CHECK(std::count(sweep.out.begin(), sweep.out.end(), '\n') == 3);

  const auto list = run_cli("fixtures");
  CHECK(list.out == "d2\nd4\nd6\nd8\nd9\n");
}
