#include "msearch/cli.hpp"

#include <cmath>
#include <fstream>
#include <optional>
#include <vector>

#include <CLI11.hpp>

#include "msearch/dominance.hpp"
#include "msearch/report.hpp"
#include "msearch/scenario.hpp"
#include "msearch/solver.hpp"
#include "msearch/statics.hpp"
#include "msearch/utility.hpp"

namespace msearch::cli {

namespace {

using report::Cell;
using report::Report;
using scenario::Scenario;
using scenario::ScenarioError;

struct Flags {
  std::string scenario_path;
  std::optional<double> beta, gamma, tol, threshold;
  std::optional<std::uint64_t> seed, cases, samples, episodes;
  std::optional<std::string> function_class, theorem, op;
  std::string out_path;
  std::optional<std::string> format;
  std::size_t jobs = 1;
  std::string scaffold_command;
};

struct Outcome {
  Report report;
  int code = kExitOk;
};

Cell num(double v) { return v; }
Cell count(std::size_t v) { return static_cast<std::int64_t>(v); }

std::string node_label(const Grid& grid, std::size_t node) {
  std::string s = "(";
  for (std::size_t d = 0; d < grid.dims(); ++d) s += (d ? ", " : "") + report::format_number(grid.coord(node, d));
  return s + ")";
}

std::string nodes_label(const Grid& grid, const std::vector<std::size_t>& nodes) {
  std::string s;
  for (std::size_t i = 0; i < nodes.size(); ++i) s += (i ? " " : "") + node_label(grid, nodes[i]);
  return s;
}

std::string values_label(std::span<const double> v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + report::format_number(v[i]);
  return s + "]";
}

std::string axes_label(const Grid& grid) {
  std::string s;
  for (std::size_t d = 0; d < grid.dims(); ++d) s += (d ? " x " : "") + values_label(grid.axis(d));
  return s;
}

Scenario load(const Flags& fl) {
  Scenario s = scenario::load_scenario(fl.scenario_path);
  if (fl.beta) s.beta = *fl.beta;
  if (fl.gamma) s.gamma = *fl.gamma;
  if (fl.seed) s.options.seed = *fl.seed;
  if (fl.function_class) s.options.function_class = *fl.function_class;
  if (fl.theorem) s.options.theorem = *fl.theorem;
  if (fl.op) s.options.op = *fl.op;
  if (fl.samples) s.options.samples = *fl.samples;
  if (fl.episodes) s.options.episodes = *fl.episodes;
  if (fl.threshold) s.options.threshold = *fl.threshold;
  if (fl.cases) {
    if (!s.suite) s.suite = scenario::SuiteBlock{};
    s.suite->cases = *fl.cases;
  }
  return s;
}

template <class Parse>
auto resolve_option(const std::optional<std::string>& v, const char* path, Parse parse) {
  if (!v) throw ScenarioError(path, "missing (set it in the scenario or on the command line)");
  try {
    return parse(*v);
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(path, e.what());
  }
}

double class_tolerance(const Scenario& s, const Flags& fl) {
  const double t = fl.tol.value_or(s.options.class_tol.value_or(kClassTolerance));
  if (!(t > 0.0)) throw ScenarioError("options.class_tol", "must be > 0");
  return t;
}

void add_params(Report& r, const SearchParams& p) {
  r.header.emplace_back("beta", report::format_number(p.beta));
  r.header.emplace_back("gamma", report::format_number(p.gamma));
  r.header.emplace_back("tol", report::format_number(p.tol));
}

Outcome cmd_solve(const Flags& fl) {
  Scenario s = load(fl);
  if (fl.tol) s.tol = *fl.tol;
  const GridPtr grid = scenario::resolve_grid(s);
  const Pmf pmf = scenario::resolve_pmf(s, grid, "pmf");
  const TabulatedUtility u = scenario::resolve_utility(s, grid);
  const SearchParams params = scenario::resolve_params(s, 1e-10);
  const Solution sol = reservation_utility(pmf, u, params);

  Outcome o;
  o.report.kind = "solve";
  o.report.header = {{"command", "solve"}, {"scenario", fl.scenario_path}, {"grid", axes_label(*grid)},
                     {"utility", s.utility->family}};
  add_params(o.report, params);
  auto& sum = o.report.add_table("summary", {"reservation_utility", "residual", "iterations", "bisection_estimate",
                                             "acceptance_size", "expected_value"});
  sum.rows.push_back({num(sol.reservation_utility), num(sol.residual), count(sol.iterations),
                      num(sol.bisection_estimate), count(sol.acceptance.size()), num(expectation(pmf, sol.value))});
  auto& nodes = o.report.add_table("nodes", {"node", "mass", "utility", "value", "accept"});
  std::size_t a = 0;
  for (std::size_t i = 0; i < grid->size(); ++i) {
    const bool acc = a < sol.acceptance.size() && sol.acceptance[a] == i;
    if (acc) ++a;
    nodes.rows.push_back({node_label(*grid, i), num(pmf.mass(i)), num(u[i]), num(value_function(sol, i)), acc});
  }
  return o;
}

Outcome cmd_dominate(const Flags& fl) {
  const Scenario s = load(fl);
  const GridPtr grid = scenario::resolve_grid(s);
  const Pmf f = scenario::resolve_pmf(s, grid, "f");
  const Pmf g = scenario::resolve_pmf(s, grid, "g");
  const FunctionClass cls = resolve_option(s.options.function_class, "options.class", parse_function_class);
  const double tol = class_tolerance(s, fl);
  const DominanceResult res = dominates(f, g, cls, tol);

  Outcome o;
  o.report.kind = "dominance";
  o.report.header = {{"command", "dominate"},
                     {"scenario", fl.scenario_path},
                     {"grid", axes_label(*grid)},
                     {"class", std::string(to_string(cls))},
                     {"class_tol", report::format_number(tol)}};
  std::string brute = "n/a";
  if (cls == FunctionClass::increasing && grid->size() <= kMaxBruteForceNodes)
    brute = dominates_increasing_bruteforce(f, g, tol) ? "dominates" : "fails";
  auto& sum = o.report.add_table("summary", {"class", "verdict", "lp_optimum", "witness_gap", "pivots",
                                             "upper_set_check", "note"});
  sum.rows.push_back({std::string(to_string(cls)), std::string(to_string(res.verdict)), num(res.lp_optimum),
                      num(res.witness_gap), count(res.pivots), brute, res.note});
  if (res.witness) {
    auto& w = o.report.add_table("witness", {"node", "value", "f_mass", "g_mass"});
    for (std::size_t i = 0; i < res.grid->size(); ++i)
      w.rows.push_back({node_label(*res.grid, i), num((*res.witness)[i]), num(f.mass(i)), num(g.mass(i))});
  }
  o.code = res.verdict == Verdict::dominates ? kExitOk : kExitVerdictFailed;
  return o;
}

std::vector<std::string> case_columns() {
  return {"case_id", "theorem", "premise_dom", "premise_mem", "u_F", "u_G", "verdict"};
}

std::vector<Cell> case_row(std::size_t id, TheoremId t, const VerificationReport& r) {
  const double nan = std::nan("");
  return {count(id),
          std::string(to_string(t)),
          std::string(to_string(r.premise_dominance.verdict)),
          r.premise_membership,
          num(r.vacuous ? nan : r.u_f),
          num(r.vacuous ? nan : r.u_g),
          std::string(to_string(outcome_of(r)))};
}

Outcome cmd_verify(const Flags& fl) {
  Scenario s = load(fl);
  if (fl.tol) s.tol = *fl.tol;
  const TheoremId thm = resolve_option(s.options.theorem, "options.theorem", parse_theorem);
  const double ctol = s.options.class_tol.value_or(kClassTolerance);
  Outcome o;
  o.report.kind = "verify";

  if (s.suite) {
    SuiteSpec spec;
    spec.theorem = thm;
    spec.cases = s.suite->cases;
    spec.seed = s.options.seed.value_or(1);
    spec.shape = s.suite->shape;
    spec.tol = s.tol.value_or(1e-10);
    spec.class_tol = ctol;
    spec.jobs = fl.jobs;
    if (!s.suite->randomize_params) spec.params = scenario::resolve_params(s, 1e-10);
    SuiteReport rep;
    try {
      rep = run_suite(spec);
    } catch (const std::invalid_argument& e) {
      throw ScenarioError("suite", e.what());
    }
    const auto shape = spec.shape.empty() ? default_shape(thm) : spec.shape;
    std::string shape_label;
    for (std::size_t i = 0; i < shape.size(); ++i) shape_label += (i ? "x" : "") + std::to_string(shape[i]);
    o.report.header = {{"command", "verify"},
                       {"mode", "suite"},
                       {"theorem", std::string(to_string(thm))},
                       {"class", std::string(to_string(class_for(thm)))},
                       {"cases", std::to_string(spec.cases)},
                       {"seed", std::to_string(spec.seed)},
                       {"shape", shape_label},
                       {"params", spec.params ? "fixed" : "randomized"},
                       {"tol", report::format_number(spec.tol)},
                       {"class_tol", report::format_number(ctol)}};
    if (spec.params) {
      o.report.header.emplace_back("beta", report::format_number(spec.params->beta));
      o.report.header.emplace_back("gamma", report::format_number(spec.params->gamma));
    }
    auto& cases = o.report.add_table("cases", case_columns());
    for (const auto& row : rep.rows) cases.rows.push_back(case_row(row.case_id, thm, row.report));
    auto& sum = o.report.add_table("summary", {"pass", "fail", "vacuous"});
    sum.rows.push_back({count(rep.summary.pass), count(rep.summary.fail), count(rep.summary.vacuous)});
    if (rep.summary.fail > 0) {
      auto& fails = o.report.add_table("failures", {"case_id", "case_seed", "axes", "f", "g", "utility", "beta",
                                                    "gamma", "reason"});
      for (const auto& row : rep.rows) {
        if (outcome_of(row.report) != CaseOutcome::fail) continue;
        const auto& in = row.input;
        fails.rows.push_back({count(row.case_id), std::to_string(row.case_seed), axes_label(in.f.grid()),
                              values_label(in.f.masses()), values_label(in.g.masses()),
                              values_label(in.utility.values()), num(in.params.beta), num(in.params.gamma),
                              row.report.reason});
      }
      o.code = kExitVerdictFailed;
    }
    return o;
  }

  const GridPtr grid = scenario::resolve_grid(s);
  TheoremCase c{.theorem = thm,
                .f = scenario::resolve_pmf(s, grid, "f"),
                .g = scenario::resolve_pmf(s, grid, "g"),
                .utility = scenario::resolve_utility(s, grid),
                .params = scenario::resolve_params(s, 1e-10),
                .class_tol = ctol};
  const VerificationReport r = verify_theorem(c);
  o.report.header = {{"command", "verify"},
                     {"mode", "single"},
                     {"scenario", fl.scenario_path},
                     {"theorem", std::string(to_string(thm))},
                     {"class", std::string(to_string(class_for(thm)))},
                     {"grid", axes_label(*grid)},
                     {"class_tol", report::format_number(ctol)}};
  add_params(o.report, c.params);
  auto& cases = o.report.add_table("cases", case_columns());
  cases.rows.push_back(case_row(0, thm, r));
  auto& detail = o.report.add_table("detail", {"lp_optimum", "acceptance_F", "acceptance_G", "reason"});
  detail.rows.push_back(
      {num(r.premise_dominance.lp_optimum), count(r.acceptance_f), count(r.acceptance_g), r.reason});
  if (outcome_of(r) == CaseOutcome::fail) o.code = kExitVerdictFailed;

  if (s.expected) {
    const auto& ex = *s.expected;
    auto& exp = o.report.add_table("expectations", {"quantity", "expected", "actual", "match"});
    auto check_value = [&](const char* name, const std::optional<double>& want, double got) {
      if (!want) return;
      const bool ok = !r.vacuous && std::abs(*want - got) <= ex.tolerance;
      exp.rows.push_back({std::string(name), num(*want), num(r.vacuous ? std::nan("") : got), ok});
      if (!ok) o.code = kExitVerdictFailed;
    };
    check_value("u_F", ex.u_f, r.u_f);
    check_value("u_G", ex.u_g, r.u_g);
    if (ex.conclusion) {
      const bool actual = !r.vacuous && r.conclusion_holds;
      const bool ok = actual == *ex.conclusion;
      exp.rows.push_back({std::string("conclusion"), *ex.conclusion, actual, ok});
      if (!ok) o.code = kExitVerdictFailed;
    }
  }
  return o;
}

Outcome cmd_closure(const Flags& fl) {
  Scenario s;
  if (!fl.scenario_path.empty()) s = load(fl);
  else {
    s.options.function_class = fl.function_class;
    s.options.op = fl.op;
    s.options.samples = fl.samples;
    s.options.seed = fl.seed;
  }
  const FunctionClass cls = resolve_option(s.options.function_class, "options.class", parse_function_class);
  const ClosureOperator op = resolve_option(s.options.op, "options.operator", parse_closure_operator);
  const std::size_t samples = s.options.samples.value_or(50);
  const std::uint64_t seed = s.options.seed.value_or(1);
  if (samples == 0) throw ScenarioError("options.samples", "must be >= 1");
  const double tol = class_tolerance(s, fl);
  const ClosureReport rep = closure_check(cls, op, samples, seed, tol);

  Outcome o;
  o.report.kind = "closure";
  o.report.header = {{"command", "closure"},
                     {"class", std::string(to_string(cls))},
                     {"operator", std::string(to_string(op))},
                     {"samples", std::to_string(samples)},
                     {"seed", std::to_string(seed)},
                     {"class_tol", report::format_number(tol)}};
  auto& sum = o.report.add_table("summary",
                                 {"class", "operator", "samples", "preserved", "expected_closed", "passed"});
  sum.rows.push_back({std::string(to_string(cls)), std::string(to_string(op)), count(rep.samples),
                      count(rep.preserved), rep.closed_expected, rep.passed});
  if (rep.counterexample_before) {
    const Grid grid({{1.0, 2.0}, {1.0, 2.0}});
    auto& ce = o.report.add_table("counterexample", {"stage", "member", "margin", "witness_kind", "witness_nodes"});
    for (auto [stage, m] : {std::pair{"before", &*rep.counterexample_before},
                            std::pair{"after", &*rep.counterexample_after}}) {
      ce.rows.push_back({std::string(stage), m->member, num(m->margin),
                         m->witness ? m->witness->kind : std::string("-"),
                         m->witness ? nodes_label(grid, m->witness->nodes) : std::string("-")});
    }
  }
  if (!rep.violations.empty()) {
    auto& v = o.report.add_table("violations", {"sample", "kind", "margin"});
    for (const auto& cv : rep.violations)
      v.rows.push_back({count(cv.sample), cv.violation.kind, num(cv.violation.margin)});
  }
  o.code = rep.passed ? kExitOk : kExitVerdictFailed;
  return o;
}

Outcome cmd_simulate(const Flags& fl) {
  Scenario s = load(fl);
  if (fl.tol) s.tol = *fl.tol;
  const GridPtr grid = scenario::resolve_grid(s);
  const Pmf pmf = scenario::resolve_pmf(s, grid, "pmf");
  const TabulatedUtility u = scenario::resolve_utility(s, grid);
  const SearchParams params = scenario::resolve_params(s, 1e-10);
  const Solution sol = reservation_utility(pmf, u, params);
  const double threshold = s.options.threshold.value_or(sol.reservation_utility);
  if (!std::isfinite(threshold)) throw ScenarioError("options.threshold", "must be finite");
  const std::uint64_t seed = s.options.seed.value_or(1);
  const std::size_t episodes = s.options.episodes.value_or(100000);
  if (episodes == 0) throw ScenarioError("options.episodes", "must be >= 1");
  const SimulationStats st = simulate_search(pmf, u, params, threshold, seed, episodes);
  const double optimal = expectation(pmf, sol.value);

  Outcome o;
  o.report.kind = "simulate";
  o.report.header = {{"command", "simulate"},   {"scenario", fl.scenario_path},
                     {"grid", axes_label(*grid)}, {"seed", std::to_string(seed)},
                     {"episodes", std::to_string(episodes)}};
  add_params(o.report, params);
  auto& t = o.report.add_table("simulation", {"threshold", "mean", "std_error", "horizon", "truncated",
                                              "mean_wait", "optimal_value", "z_vs_optimal"});
  const double z = st.std_error > 0.0 ? (st.mean - optimal) / st.std_error : 0.0;
  t.rows.push_back({num(threshold), num(st.mean), num(st.std_error), count(st.horizon), count(st.truncated),
                    num(st.mean_wait), num(optimal), num(z)});
  return o;
}

void write_outputs(const Outcome& o, const Flags& fl, std::ostream& out) {
  const report::Format stdout_fmt = (fl.format && fl.out_path.empty()) ? report::parse_format(*fl.format)
                                                                          : report::Format::table;
  out << report::emit_report(o.report, stdout_fmt);
  if (!fl.out_path.empty()) {
    const auto fmt = report::parse_format(fl.format.value_or("jsonl"));
    std::ofstream f(fl.out_path, std::ios::binary);
    if (!f) throw ScenarioError("--out", "cannot write '" + fl.out_path + "'");
    f << report::emit_report(o.report, fmt);
  }
}

}  // namespace

int run_command(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multicriteria job-search stopping problems and comparative statics checks", "msearch"};
  app.require_subcommand(1);
  Flags fl;

  auto common = [&](CLI::App* sub, bool scenario_required) {
    auto* opt = sub->add_option("scenario", fl.scenario_path, "Scenario file (JSON)");
    if (scenario_required) opt->required();
    sub->add_option("--tol", fl.tol, "Tolerance override");
    sub->add_option("--seed", fl.seed, "Random seed override");
    sub->add_option("--out", fl.out_path, "Write a machine-readable report here");
    sub->add_option("--format", fl.format, "Report format: table, csv or jsonl");
  };
  auto params = [&](CLI::App* sub) {
    sub->add_option("--beta", fl.beta, "Discount factor override");
    sub->add_option("--gamma", fl.gamma, "Unemployment flow utility override");
  };

  auto* solve = app.add_subcommand("solve", "Reservation utility, value function and acceptance set");
  common(solve, true);
  params(solve);
  auto* dom = app.add_subcommand("dominate", "Dominance of F over G on a function class");
  common(dom, true);
  dom->add_option("--class", fl.function_class, "Function class");
  auto* verify = app.add_subcommand("verify", "Check a comparative-statics theorem on a case or a suite");
  common(verify, true);
  params(verify);
  verify->add_option("--theorem", fl.theorem, "T2a, T2b, T2c, T3 or T4");
  verify->add_option("--cases", fl.cases, "Number of generated cases (suite mode)");
  verify->add_option("--jobs", fl.jobs, "Worker threads for suites")->check(CLI::PositiveNumber);
  auto* closure = app.add_subcommand("closure", "Closure of a class under truncation, affine maps or clamping");
  common(closure, false);
  closure->add_option("--class", fl.function_class, "Function class");
  closure->add_option("--operator", fl.op, "truncate, affine or clamp");
  closure->add_option("--samples", fl.samples, "Random members to test");
  auto* sim = app.add_subcommand("simulate", "Monte Carlo evaluation of a threshold policy");
  common(sim, true);
  params(sim);
  sim->add_option("--threshold", fl.threshold, "Acceptance threshold (default: the reservation utility)");
  sim->add_option("--episodes", fl.episodes, "Number of episodes");
  auto* scaffold = app.add_subcommand("scaffold", "Print a template scenario for a command");
  scaffold->add_option("command", fl.scaffold_command, "solve, dominate, verify, closure or simulate")->required();
  scaffold->add_option("--out", fl.out_path, "Write the template here instead of stdout");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "msearch: " << e.what() << "\n";
    return kExitInputError;
  }

  try {
    if (scaffold->parsed()) {
      const std::string text = scenario::write_scenario(scenario::scaffold_scenario(fl.scaffold_command));
      if (fl.out_path.empty()) {
        out << text;
      } else {
        std::ofstream f(fl.out_path, std::ios::binary);
        if (!f) throw ScenarioError("--out", "cannot write '" + fl.out_path + "'");
        f << text;
      }
      return kExitOk;
    }
    if (fl.format) report::parse_format(*fl.format);
    Outcome o;
    if (solve->parsed()) o = cmd_solve(fl);
    else if (dom->parsed()) o = cmd_dominate(fl);
    else if (verify->parsed()) o = cmd_verify(fl);
    else if (closure->parsed()) o = cmd_closure(fl);
    else o = cmd_simulate(fl);
    write_outputs(o, fl, out);
    return o.code;
  } catch (const std::exception& e) {
    err << "msearch: error: " << e.what() << "\n";
    return kExitInputError;
  }
}

}  // namespace msearch::cli
