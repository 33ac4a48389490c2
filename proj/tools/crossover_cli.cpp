// Command-line front end: solve, design, evaluate, compare, sweep, fixtures.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "crossover/errors.hpp"
#include "crossover/evaluation.hpp"
#include "crossover/fixtures.hpp"
#include "crossover/io.hpp"

using namespace crossover;
using io::Json;

namespace {

struct Source {
  std::string design_file;
  std::string fixture_name;
  std::string mech_file;
};

DropoutMechanism load_mechanism(const Source& src) {
  if (!src.mech_file.empty()) return io::mechanism_from_json(io::load_json_file(src.mech_file));
  if (!src.fixture_name.empty()) return fixture(src.fixture_name).mechanism;
  throw ValidationError("a mechanism is required: pass --mech FILE or --fixture NAME");
}

Design load_design(const std::string& file, const std::string& fixture_name) {
  if (!file.empty() && !fixture_name.empty())
    throw ValidationError("pass either a design file or a fixture, not both");
  if (!file.empty()) return io::design_from_json(io::load_json_file(file));
  if (!fixture_name.empty()) return fixture(fixture_name).design;
  throw ValidationError("a design is required: pass --design FILE or --fixture NAME");
}

std::vector<Criterion> parse_criteria(const std::string& text) {
  if (text == "all") return {kAllCriteria.begin(), kAllCriteria.end()};
  return {parse_criterion(text)};
}

struct EvalFlags {
  std::string criterion = "all";
  std::string method = "auto";
  long reps = 100000;
  std::uint64_t seed = 1;
  std::size_t budget = std::size_t{1} << 20;
  unsigned threads = 0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--criterion", criterion, "a, d, e, t or all")->capture_default_str();
    cmd->add_option("--method", method, "auto, exact or mc")->capture_default_str();
    cmd->add_option("--reps", reps, "Monte Carlo replications")->capture_default_str();
    cmd->add_option("--seed", seed, "random seed")->capture_default_str();
    cmd->add_option("--exact-budget", budget, "largest number of exact realization cells")
        ->capture_default_str();
    cmd->add_option("--threads", threads, "worker threads (0: CROSSOVER_THREADS or all cores)");
  }

  EvalOptions options() const {
    EvalOptions o;
    o.method = parse_method(method);
    o.reps = reps;
    o.seed = seed;
    o.exact_budget = budget;
    o.threads = threads;
    return o;
  }
};

void write_text(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Crossover designs under random subject dropout"};
  app.require_subcommand(1);

  // solve
  Source solve_src;
  int solve_t = 0;
  bool closed_only = false;
  std::size_t solve_budget = kEnumerationBudget;
  auto* solve = app.add_subcommand("solve", "Optimality certificate (x*, y*, support)");
  solve->add_option("--mech", solve_src.mech_file, "mechanism JSON");
  solve->add_option("--fixture", solve_src.fixture_name, "use a fixture's mechanism");
  solve->add_option("--t", solve_t, "number of treatments (default: the fixture's)");
  solve->add_flag("--closed-form-only", closed_only, "fail unless a closed form applies");
  solve->add_option("--budget", solve_budget, "largest t^p to enumerate")->capture_default_str();

  // design
  Source design_src;
  int design_t = 0, design_n = 0;
  SearchOptions search;
  std::string design_out;
  auto* design = app.add_subcommand("design", "Search for an exact design");
  design->add_option("--mech", design_src.mech_file, "mechanism JSON");
  design->add_option("--fixture", design_src.fixture_name, "use a fixture's mechanism");
  design->add_option("--t", design_t, "number of treatments");
  design->add_option("--n", design_n, "number of subjects (default: the mechanism's)");
  design->add_option("--seed", search.seed, "random seed")->capture_default_str();
  design->add_option("--restarts", search.restarts, "random restarts")->capture_default_str();
  design->add_option("--iters", search.iters, "relaxation iterations")->capture_default_str();
  design->add_option("--out", design_out, "also write the design JSON here");

  // evaluate
  Source eval_src;
  EvalFlags eval_flags;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "phi0, V_phi, phi1, gap and bounds");
  evaluate_cmd->add_option("--design", eval_src.design_file, "design JSON");
  evaluate_cmd->add_option("--fixture", eval_src.fixture_name, "built-in design");
  evaluate_cmd->add_option("--mech", eval_src.mech_file, "mechanism JSON (default: the fixture's)");
  eval_flags.attach(evaluate_cmd);

  // compare
  Source cmp_src;
  std::string baseline_file, baseline_fixture;
  EvalFlags cmp_flags;
  auto* compare_cmd = app.add_subcommand("compare", "Ratios of phi0 and V_phi against a baseline");
  compare_cmd->add_option("--design", cmp_src.design_file, "design JSON");
  compare_cmd->add_option("--fixture", cmp_src.fixture_name, "built-in design");
  compare_cmd->add_option("--baseline", baseline_file, "baseline design JSON");
  compare_cmd->add_option("--baseline-fixture", baseline_fixture, "built-in baseline design");
  compare_cmd->add_option("--mech", cmp_src.mech_file, "mechanism JSON (default: the fixture's)");
  cmp_flags.attach(compare_cmd);

  // sweep
  std::string sweep_design, sweep_fixture, grid_text = "0.05:0.95:0.05", sweep_out;
  int sweep_p = 0, sweep_t = 0, sweep_n = 0;
  EvalFlags sweep_flags;
  SearchOptions sweep_search;
  auto* sweep = app.add_subcommand("sweep", "CSV over a = (0,...,0,theta,1-theta)");
  sweep->add_option("--design", sweep_design, "design JSON, or 'search' to rerun the search");
  sweep->add_option("--fixture", sweep_fixture, "built-in design");
  sweep->add_option("--p", sweep_p, "periods (search mode)");
  sweep->add_option("--t", sweep_t, "treatments (search mode)");
  sweep->add_option("--n", sweep_n, "subjects (search mode)");
  sweep->add_option("--theta-grid", grid_text, "start:stop:step or a comma list")
      ->capture_default_str();
  sweep->add_option("--restarts", sweep_search.restarts, "search restarts")->capture_default_str();
  sweep->add_option("--out", sweep_out, "write the CSV here instead of stdout");
  sweep_flags.attach(sweep);

  // fixtures
  std::string fixture_show;
  bool fixture_mech = false;
  auto* fixtures_cmd = app.add_subcommand("fixtures", "List or print built-in designs");
  fixtures_cmd->add_option("name", fixture_show, "fixture to print");
  fixtures_cmd->add_flag("--mech", fixture_mech, "print its mechanism instead of the design");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*solve) {
      const auto mech = load_mechanism(solve_src);
      int t = solve_t;
      if (t == 0 && !solve_src.fixture_name.empty())
        t = fixture(solve_src.fixture_name).design.treatments();
      if (t < 2) throw ValidationError("--t is required (at least 2)");
      SolveOptions opts;
      opts.budget = solve_budget;
      std::optional<OptimalityCertificate> cert;
      if (closed_only) {
        cert = closed_form(mech, t, opts);
        if (!cert) throw ValidationError("no closed-form regime applies to this mechanism and t");
      } else {
        cert = solve_minimax(mech, t, opts);
      }
      Json j = io::to_json(*cert);
      if (!mech.warnings().empty()) j["warnings"] = mech.warnings();
      std::cout << io::dump(j);
    } else if (*design) {
      auto mech = load_mechanism(design_src);
      int t = design_t;
      if (t == 0 && !design_src.fixture_name.empty())
        t = fixture(design_src.fixture_name).design.treatments();
      if (t < 2) throw ValidationError("--t is required (at least 2)");
      const int n = design_n == 0 ? mech.subjects() : design_n;
      if (n < 1) throw ValidationError("--n must be positive");
      // A single subject has no mechanism of its own; keep the loaded n for the certificate.
      if (n != mech.subjects() && n >= 2) mech = mech.with_subjects(n);
      const auto cert = solve_minimax(mech, t);
      const auto result = exact_search(n, cert, mech, search);
      if (!design_out.empty()) write_text(io::dump(io::to_json(result.design)), design_out);
      std::cout << io::dump(io::to_json(result));
    } else if (*evaluate_cmd) {
      const auto d = load_design(eval_src.design_file, eval_src.fixture_name);
      const auto mech = load_mechanism(eval_src);
      const auto cert = solve_minimax(mech, d.treatments());
      Json reports = Json::array();
      for (const auto& r :
           evaluate(d, mech, parse_criteria(eval_flags.criterion), eval_flags.options(), &cert))
        reports.push_back(io::to_json(r));
      Json j{{"mechanism", io::to_json(mech)}, {"y_star", cert.y_star}, {"reports", reports}};
      if (d.name()) j["design"] = *d.name();
      std::cout << io::dump(j);
    } else if (*compare_cmd) {
      const auto d = load_design(cmp_src.design_file, cmp_src.fixture_name);
      const auto base = load_design(baseline_file, baseline_fixture);
      Source mech_src = cmp_src;
      if (mech_src.fixture_name.empty()) mech_src.fixture_name = baseline_fixture;
      const auto mech = load_mechanism(mech_src);
      Json out = Json::array();
      for (const auto& r :
           compare(d, base, mech, parse_criteria(cmp_flags.criterion), cmp_flags.options()))
        out.push_back(io::to_json(r));
      std::cout << io::dump(Json{{"mechanism", io::to_json(mech)}, {"comparisons", out}});
    } else if (*sweep) {
      std::optional<Design> fixed;
      int p = sweep_p, t = sweep_t, n = sweep_n;
      if (sweep_design != "search") {
        fixed = load_design(sweep_design, sweep_fixture);
        p = fixed->periods();
        t = fixed->treatments();
        n = fixed->subjects();
      } else if (p < 2 || t < 2 || n < 1) {
        throw ValidationError("search mode needs --p, --t and --n");
      }
      sweep_search.seed = sweep_flags.seed;
      const auto rows = sweep_theta(fixed, p, t, n, parse_criteria(sweep_flags.criterion),
                                    parse_grid(grid_text), sweep_flags.options(), sweep_search);
      write_text(sweep_csv(rows), sweep_out);
    } else if (*fixtures_cmd) {
      if (fixture_show.empty()) {
        for (const auto& name : fixture_names()) std::cout << name << "\n";
      } else {
        const auto f = fixture(fixture_show);
        std::cout << io::dump(fixture_mech ? io::to_json(f.mechanism) : io::to_json(f.design));
      }
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
