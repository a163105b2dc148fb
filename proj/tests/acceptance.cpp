// Acceptance checks: one PASS/FAIL line per criterion, exit status 0 only when
// every criterion passes. Reference values are computed here, independently of
// the library code paths they check.

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "msearch/cli.hpp"
#include "msearch/dominance.hpp"
#include "msearch/solver.hpp"
#include "msearch/statics.hpp"
#include "msearch/utility.hpp"

using namespace msearch;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) detail = what;
    ok = ok && cond;
  }
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// Fixed point of t = (1-b) g + b E[max(U, t)] by solving the affine equation
// on each segment between consecutive utility levels.
double closed_form(const Pmf& pmf, const TabulatedUtility& u, double beta, double gamma) {
  std::map<double, double> at;
  for (std::size_t i = 0; i < u.size(); ++i) at[u[i]] += pmf.mass(i);
  std::vector<std::pair<double, double>> lv(at.begin(), at.end());
  const double inf = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k <= lv.size(); ++k) {
    const double lo = k == 0 ? -inf : lv[k - 1].first, hi = k == lv.size() ? inf : lv[k].first;
    double p_low = 0, high = 0;
    for (std::size_t j = 0; j < lv.size(); ++j) {
      if (j < k) p_low += lv[j].second;
      else high += lv[j].second * lv[j].first;
    }
    const double t = ((1 - beta) * gamma + beta * high) / (1 - beta * p_low);
    if (t >= lo - 1e-12 && t <= hi + 1e-12) return t;
  }
  return std::nan("");
}

// F-mass >= G-mass on every upper set of the product order: all node subsets
// are enumerated and the upward-closed ones compared.
bool upper_sets_dominate(const Pmf& f, const Pmf& g, double tol) {
  const Grid& grid = f.grid();
  const std::size_t n = grid.size();
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    bool upper = true;
    for (std::size_t a = 0; a < n && upper; ++a)
      if (mask >> a & 1u)
        for (std::size_t b = 0; b < n; ++b)
          if (grid.leq(a, b) && !(mask >> b & 1u)) upper = false;
    if (!upper) continue;
    double fm = 0, gm = 0;
    for (std::size_t a = 0; a < n; ++a)
      if (mask >> a & 1u) fm += f.mass(a), gm += g.mass(a);
    if (fm < gm - tol) return false;
  }
  return true;
}

Outcome criterion1() {
  Outcome o;
  const auto t0 = Clock::now();
  const TabulatedUtility u = tabulate_family({"custom", {}, {5, -5, 14, 5}}, make_grid({{1, 2}, {1, 2}}));
  const Membership before = is_member(u, FunctionClass::supermodular);
  const Membership after = is_member(truncate(u), FunctionClass::supermodular);
  const double elapsed = seconds_since(t0);
  // U(1,1) + U(2,2) - U(1,2) - U(2,1) before and after truncation.
  const double margin_before = (5.0 + 5.0) - (-5.0 + 14.0);
  const double margin_after = (5.0 + 5.0) - (0.0 + 14.0);
  o.require(before.member && before.margin == margin_before, "supermodular margin of U is not exactly 1");
  o.require(!after.member && after.margin == margin_after, "margin of truncated U is not exactly -4");
  o.require(elapsed < 1e-3, "took " + fmt("%.3g", elapsed * 1e3) + " ms");
  o.detail = o.ok ? "margins 1 and -4, " + fmt("%.3g", elapsed * 1e6) + " us" : o.detail;
  return o;
}

Outcome criterion2() {
  Outcome o;
  const auto t0 = Clock::now();
  auto single = make_grid({{3}});
  auto two = make_grid({{0, 2}});
  struct Ref {
    Pmf pmf;
    TabulatedUtility u;
    SearchParams p;
    double expected;
  };
  const std::vector<Ref> refs = {
      {point_mass(single, 0), TabulatedUtility(single, {3}), {0.5, 1.0, 1e-10}, 0.5 * 1.0 + 0.5 * 3.0},
      {make_pmf(two, {0.5, 0.5}), TabulatedUtility(two, {0, 2}), {0.5, 0.5, 1e-10}, 1.0},
      {make_pmf(two, {0.25, 0.75}), TabulatedUtility(two, {0, 2}), {0.5, 0.5, 1e-10}, 8.0 / 7.0},
  };
  for (const auto& r : refs) {
    const Solution s = reservation_utility(r.pmf, r.u, r.p);
    o.require(std::abs(s.reservation_utility - r.expected) <= 1e-9, "contraction solver off for " + fmt("%.6g", r.expected));
    o.require(std::abs(s.bisection_estimate - r.expected) <= 1e-9, "bisection off for " + fmt("%.6g", r.expected));
  }
  auto eng = rng::make_engine(2, 0);
  double worst = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 2 + rng::uniform_index(eng, 10);
    std::vector<double> axis(n), w(n), v(n);
    for (std::size_t i = 0; i < n; ++i) {
      axis[i] = static_cast<double>(i);
      w[i] = rng::uniform01(eng);
      v[i] = rng::uniform(eng, -5, 10);
    }
    auto g = make_grid({axis});
    auto pmf = normalize(g, w);
    TabulatedUtility u(g, v);
    SearchParams p{rng::uniform(eng, 0.01, 0.99), rng::uniform(eng, 0.05, 5), 1e-10};
    const Solution s = reservation_utility(pmf, u, p);
    worst = std::max(worst, std::abs(s.reservation_utility - s.bisection_estimate));
    o.require(std::abs(s.reservation_utility - closed_form(pmf, u, p.beta, p.gamma)) <= 1e-8,
              "random scenario disagrees with the segment-wise solution");
  }
  const double elapsed = seconds_since(t0);
  o.require(worst <= 1e-8, "solver disagreement " + fmt("%.3g", worst));
  o.require(elapsed < 1.0, "took " + fmt("%.3g", elapsed) + " s");
  if (o.ok) o.detail = "2, 1, 8/7 matched; max disagreement " + fmt("%.2g", worst) + ", " + fmt("%.3g", elapsed) + " s";
  return o;
}

Outcome criterion3() {
  Outcome o;
  const auto t0 = Clock::now();
  auto g = make_grid({{0, 1, 2}, {0, 1, 2}});
  auto eng = rng::make_engine(3, 0);
  std::size_t agree = 0, dom = 0;
  const std::size_t pairs = 200;
  for (std::size_t rep = 0; rep < pairs; ++rep) {
    std::vector<double> wf(9), wg(9);
    for (auto& x : wg) x = rng::coin(eng, 0.3) ? 0.0 : rng::uniform01(eng);
    wg[rng::uniform_index(eng, 9)] += 0.1;
    const Pmf base = normalize(g, wg);
    Pmf other = base;
    if (rep % 2 == 0) {
      // Upward moves make dominance common enough to exercise both verdicts.
      for (int k = 0; k < 2; ++k) {
        const std::size_t from = rng::uniform_index(eng, 9);
        std::vector<std::size_t> above;
        for (std::size_t to = 0; to < 9; ++to)
          if (to != from && g->leq(from, to)) above.push_back(to);
        if (above.empty() || other.mass(from) <= 0) continue;
        other = fosd_shift(other, from, above[rng::uniform_index(eng, above.size())],
                           other.mass(from) * rng::uniform01(eng));
      }
    } else {
      for (auto& x : wf) x = rng::uniform01(eng);
      other = normalize(g, wf);
    }
    const DominanceResult r = dominates(other, base, FunctionClass::increasing);
    const bool oracle = upper_sets_dominate(other, base, kClassTolerance);
    if (r.verdict != Verdict::inconclusive && (r.verdict == Verdict::dominates) == oracle &&
        dominates_increasing_bruteforce(other, base) == oracle)
      ++agree;
    dom += oracle;
  }
  const double elapsed = seconds_since(t0);
  o.require(agree == pairs, std::to_string(pairs - agree) + " disagreements");
  o.require(elapsed < 30.0, "took " + fmt("%.3g", elapsed) + " s");
  if (o.ok)
    o.detail = std::to_string(agree) + "/" + std::to_string(pairs) + " agree (" + std::to_string(dom) +
               " dominating), " + fmt("%.3g", elapsed) + " s";
  return o;
}

Outcome criterion4() {
  Outcome o;
  const auto t0 = Clock::now();
  std::string counts;
  for (auto t : kAllTheorems) {
    SuiteSpec spec;
    spec.theorem = t;
    spec.cases = 100;
    spec.seed = 20;
    const SuiteReport rep = run_suite(spec);
    std::size_t held = 0;
    for (const auto& row : rep.rows)
      if (!row.report.vacuous && row.report.u_f >= row.report.u_g - 1e-8) ++held;
    o.require(held == 100, std::string(to_string(t)) + ": " + std::to_string(held) + "/100 (" +
                               std::to_string(rep.summary.vacuous) + " vacuous)");
    counts += std::string(counts.empty() ? "" : " ") + std::string(to_string(t)) + " " + std::to_string(held) + "/100";
  }
  const double elapsed = seconds_since(t0);
  o.require(elapsed < 60.0, "took " + fmt("%.3g", elapsed) + " s");
  if (o.ok) o.detail = counts + ", " + fmt("%.3g", elapsed) + " s";
  return o;
}

Outcome criterion5() {
  Outcome o;
  auto g = make_grid({{1, 2}, {1, 2}});
  const std::vector<double> deltas{0, 0.05, 0.10, 0.15, 0.20, 0.25};
  // Several (beta, gamma) so that the reservation level moves across the utility levels.
  const std::vector<SearchParams> params{{0.5, 1.0, 1e-10}, {0.9, 1.0, 1e-10}, {0.95, 2.0, 1e-10}};
  std::string trace;
  for (const auto& p : params) {
    const auto path = concordance_path(uniform_pmf(g), 0, 3, deltas, tabulate_product(g), p);
    for (std::size_t i = 1; i < path.size(); ++i) {
      o.require(path[i].reservation_utility >= path[i - 1].reservation_utility - 1e-9,
                "u_F decreased at delta " + fmt("%.2f", deltas[i]));
      o.require(path[i].acceptance_size <= path[i - 1].acceptance_size,
                "acceptance set grew at delta " + fmt("%.2f", deltas[i]));
    }
    trace += (trace.empty() ? "" : "; ") + fmt("beta %.2g: ", p.beta) + fmt("%.6g", path.front().reservation_utility) +
             fmt(" -> %.6g", path.back().reservation_utility);
  }
  if (o.ok) o.detail = trace;
  return o;
}

Outcome criterion6() {
  Outcome o;
  std::size_t checked = 0;
  for (auto c : {FunctionClass::increasing, FunctionClass::convex, FunctionClass::componentwise_convex,
                 FunctionClass::increasing_supermodular, FunctionClass::increasing_ultramodular}) {
    for (auto op : {ClosureOperator::truncate, ClosureOperator::affine}) {
      const ClosureReport r = closure_check(c, op, 50, 6);
      o.require(r.preserved == 50 && r.violations.empty(),
                std::string(to_string(c)) + " under " + std::string(to_string(op)) + ": " +
                    std::to_string(r.violations.size()) + " violations");
      checked += r.samples;
    }
  }
  const ClosureReport sm = closure_check(FunctionClass::supermodular, ClosureOperator::truncate, 50, 6);
  o.require(sm.passed, "plain supermodular suite did not record the expected failure");
  o.require(sm.counterexample_before && sm.counterexample_before->member && sm.counterexample_before->margin == 1.0,
            "example is not supermodular with margin 1");
  o.require(sm.counterexample_after && !sm.counterexample_after->member && sm.counterexample_after->margin == -4.0,
            "truncated example does not fail with margin -4");
  if (o.ok) o.detail = std::to_string(checked) + " members preserved; supermodular truncation fails on the 2x2 example";
  return o;
}

Outcome criterion7() {
  Outcome o;
  auto g = make_grid({{0, 2}});
  const Pmf pmf = make_pmf(g, {0.5, 0.5});
  const TabulatedUtility u(g, {0, 2});
  const SearchParams p{0.5, 0.5, 1e-10};
  const double u_f = reservation_utility(pmf, u, p).reservation_utility;
  // E[V] = sum_x m(x) max(U(x), u_F) / (1 - beta) = 0.5 * 4 + 0.5 * 2.
  const double analytic = (0.5 * std::max(0.0, u_f) + 0.5 * std::max(2.0, u_f)) / (1 - p.beta);
  const SimulationStats at = simulate_search(pmf, u, p, u_f, 7, 100000);
  o.require(std::abs(at.mean - analytic) <= 3 * at.std_error,
            "mean " + fmt("%.6g", at.mean) + " vs " + fmt("%.6g", analytic));
  for (double th : {u_f - 0.5, u_f + 0.5}) {
    const SimulationStats alt = simulate_search(pmf, u, p, th, 8, 100000);
    o.require(alt.mean <= at.mean + 3 * at.std_error, "threshold " + fmt("%.3g", th) + " beats u_F");
  }
  if (o.ok)
    o.detail = "mean " + fmt("%.5f", at.mean) + " +- " + fmt("%.2g", at.std_error) + " vs " + fmt("%.5f", analytic);
  return o;
}

Outcome criterion8() {
  Outcome o;
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("msearch_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const fs::path sc = dir / "suite.json";
  std::ofstream(sc) << R"({"schema_version": 1, "options": {"theorem": "T4", "seed": 8}, "suite": {"cases": 40}})";
  auto read = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  for (const char* format : {"jsonl", "csv"}) {
    std::vector<std::string> outputs;
    for (const char* jobs : {"1", "1", "4"}) {
      const fs::path out = dir / ("run" + std::to_string(outputs.size()) + "." + format);
      std::ostringstream sink, err;
      const std::vector<std::string> args{"verify", sc.string(), "--out", out.string(), "--format", format,
                                          "--jobs", jobs};
      const int code = cli::run_command(args, sink, err);
      o.require(code == 0, std::string("verify exited with ") + std::to_string(code) + " " + err.str());
      outputs.push_back(read(out));
    }
    o.require(!outputs[0].empty(), "empty report");
    o.require(outputs[0] == outputs[1] && outputs[0] == outputs[2], std::string(format) + " output differs");
  }
  std::error_code ec;
  fs::remove_all(dir, ec);
  if (o.ok) o.detail = "jsonl and csv suite reports byte-identical across 3 runs";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"1 example 1 supermodularity and truncation", criterion1},
      {"2 closed-form reservation utilities", criterion2},
      {"3 increasing-order LP vs upper sets", criterion3},
      {"4 theorem suites", criterion4},
      {"5 concordance monotone path", criterion5},
      {"6 closure suites", criterion6},
      {"7 monte carlo consistency", criterion7},
      {"8 determinism", criterion8},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.ok = false;
      o.detail = std::string("exception: ") + e.what();
    }
    std::printf("%s  %-44s %s\n", o.ok ? "PASS" : "FAIL", name, o.detail.c_str());
    failed += !o.ok;
  }
  std::fflush(stdout);
  return failed == 0 ? 0 : 1;
}
