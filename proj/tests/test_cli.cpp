#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "msearch/cli.hpp"
#include "msearch/report.hpp"
#include "msearch/scenario.hpp"

namespace fs = std::filesystem;
using namespace msearch;
using nlohmann::json;

namespace {

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("msearch_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  fs::path file(const std::string& name, const std::string& content) const {
    auto p = path_ / name;
    std::ofstream(p, std::ios::binary) << content;
    return p;
  }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run_command(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<json> jsonl(const std::string& text) {
  std::vector<json> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) out.push_back(json::parse(line));
  return out;
}

std::string scaffold(const std::string& command) {
  return scenario::write_scenario(scenario::scaffold_scenario(command));
}

}  // namespace

TEST_CASE("scaffolded scenarios round-trip") {
  for (const char* cmd : {"solve", "simulate", "dominate", "verify", "closure"}) {
    const auto s = scenario::scaffold_scenario(cmd);
    CHECK_MESSAGE(scenario::parse_scenario(scenario::write_scenario(s)) == s, cmd);
  }
  CHECK_THROWS_AS(scenario::scaffold_scenario("plot"), std::invalid_argument);

  scenario::Scenario full = scenario::scaffold_scenario("verify");
  full.pmf = scenario::PmfSpec{.points = {{{1, 1}, 0.5}, {{2, 2}, 0.5}}};
  full.options.class_tol = 1e-8;
  full.suite = scenario::SuiteBlock{.cases = 7, .shape = {3, 3}, .randomize_params = false};
  full.expected = scenario::Expected{.u_f = 2.0, .u_g = 1.5, .conclusion = true, .tolerance = 1e-6};
  CHECK(scenario::parse_scenario(scenario::write_scenario(full)) == full);
}

TEST_CASE("scenario errors name the field") {
  auto path_of = [](const std::string& text) -> std::string {
    try {
      scenario::parse_scenario(text);
    } catch (const scenario::ScenarioError& e) {
      return e.path();
    }
    return "<no error>";
  };
  CHECK(path_of("{") == "<root>");
  CHECK(path_of(R"({"grid": {}})") == "schema_version");
  CHECK(path_of(R"({"schema_version": 2})") == "schema_version");
  CHECK(path_of(R"({"schema_version": 1, "colour": 3})") == "colour");
  CHECK(path_of(R"({"schema_version": 1, "params": {"beta": "high"}})") == "params.beta");
  CHECK(path_of(R"({"schema_version": 1, "params": {"delta": 1}})") == "params.delta");
  CHECK(path_of(R"({"schema_version": 1, "grid": {"axes": [[0, 1], [0, "x"]]}})") == "grid.axes[1][1]");
  CHECK(path_of(R"({"schema_version": 1, "f": {"weights": [1], "points": []}})") == "f");
  CHECK(path_of(R"({"schema_version": 1, "f": {"points": [{"node": [1]}]}})") == "f.points[0]");
  CHECK(path_of(R"({"schema_version": 1, "suite": {"cases": -3}})") == "suite.cases");

  auto s = scenario::parse_scenario(R"({"schema_version": 1, "grid": {"axes": [[0, 1]]}, "pmf": {"weights": [0.3, 0.3]}})");
  auto grid = scenario::resolve_grid(s);
  CHECK_THROWS_WITH_AS(scenario::resolve_pmf(s, grid, "pmf"), doctest::Contains("pmf"), scenario::ScenarioError);
  CHECK_THROWS_WITH_AS(scenario::resolve_utility(s, grid), doctest::Contains("utility"), scenario::ScenarioError);
  CHECK_THROWS_WITH_AS(scenario::resolve_params(s, 1e-10), doctest::Contains("params.beta"), scenario::ScenarioError);
  auto bad_grid = scenario::parse_scenario(R"({"schema_version": 1, "grid": {"axes": [[1, 0]]}})");
  CHECK_THROWS_WITH_AS(scenario::resolve_grid(bad_grid), doctest::Contains("grid.axes"), scenario::ScenarioError);
}

TEST_CASE("solve on the two-point scenario") {
  TempDir tmp;
  auto sc = tmp.file("solve.json", scaffold("solve"));
  auto r = run({"solve", sc.string()});
  CHECK(r.code == cli::kExitOk);
  CHECK(r.out.find("reservation_utility") != std::string::npos);

  auto out = tmp / "solve.jsonl";
  REQUIRE(run({"solve", sc.string(), "--out", out.string()}).code == 0);
  auto recs = jsonl(slurp(out));
  REQUIRE(recs.size() >= 2);
  CHECK(recs[0]["record"] == "header");
  CHECK(recs[0]["kind"] == "solve");
  CHECK(recs[0]["config"]["beta"] == "0.5");
  const auto& summary = recs[1];
  CHECK(summary["table"] == "summary");
  CHECK(std::abs(summary["reservation_utility"].get<double>() - 1.0) <= 1e-9);
  int accepted = 0;
  for (const auto& rec : recs)
    if (rec.value("table", "") == "nodes" && rec["accept"] == true) ++accepted;
  CHECK(accepted == 1);

  // Flags override file values and are echoed in the header.
  auto out2 = tmp / "solve2.jsonl";
  REQUIRE(run({"solve", sc.string(), "--gamma", "5", "--out", out2.string()}).code == 0);
  CHECK(jsonl(slurp(out2))[0]["config"]["gamma"] == "5");
}

TEST_CASE("dominate exit codes") {
  TempDir tmp;
  auto sc = tmp.file("dom.json", scaffold("dominate"));
  auto r = run({"dominate", sc.string(), "--class", "increasing"});
  CHECK(r.code == cli::kExitOk);
  CHECK(r.out.find("dominates") != std::string::npos);

  auto swapped = json::parse(scaffold("dominate"));
  std::swap(swapped["f"], swapped["g"]);
  auto sc2 = tmp.file("dom2.json", swapped.dump());
  auto out = tmp / "dom2.csv";
  CHECK(run({"dominate", sc2.string(), "--out", out.string(), "--format", "csv"}).code == cli::kExitVerdictFailed);
  const auto csv = slurp(out);
  CHECK(csv.rfind("# msearch-report v1\n# kind=dominance\n", 0) == 0);
  CHECK(csv.find("## table=witness") != std::string::npos);

  CHECK(run({"dominate", sc.string(), "--class", "concave"}).code == cli::kExitInputError);
}

TEST_CASE("verify: single case, expectations and suites") {
  TempDir tmp;
  auto sc = tmp.file("verify.json", scaffold("verify"));
  CHECK(run({"verify", sc.string()}).code == cli::kExitOk);

  auto corrupted = json::parse(scaffold("verify"));
  corrupted["expected"] = {{"u_F", 99.0}};
  auto bad = tmp.file("corrupt.json", corrupted.dump());
  auto r = run({"verify", bad.string(), "--theorem", "T3"});
  CHECK(r.code == cli::kExitVerdictFailed);
  CHECK(r.out.find("expectations") != std::string::npos);

  auto honest = json::parse(scaffold("verify"));
  honest["expected"] = {{"conclusion", true}};
  CHECK(run({"verify", tmp.file("honest.json", honest.dump()).string()}).code == cli::kExitOk);

  // A case whose dominance premise fails is vacuous, not a failure.
  auto backwards = json::parse(scaffold("verify"));
  std::swap(backwards["f"], backwards["g"]);
  auto rv = run({"verify", tmp.file("back.json", backwards.dump()).string()});
  CHECK(rv.code == cli::kExitOk);
  CHECK(rv.out.find("vacuous") != std::string::npos);

  auto suite = tmp.file("suite.json", R"({"schema_version": 1, "options": {"theorem": "T3", "seed": 4}, "suite": {"cases": 5}})");
  auto out = tmp / "suite.jsonl";
  REQUIRE(run({"verify", suite.string(), "--out", out.string()}).code == cli::kExitOk);
  auto recs = jsonl(slurp(out));
  std::size_t case_rows = 0;
  for (const auto& rec : recs) {
    if (rec.value("table", "") != "cases") continue;
    ++case_rows;
    for (const char* col : {"case_id", "theorem", "premise_dom", "premise_mem", "u_F", "u_G", "verdict"})
      CHECK_MESSAGE(rec.contains(col), col);
  }
  CHECK(case_rows == 5);
  CHECK(run({"verify", suite.string(), "--cases", "0"}).code == cli::kExitOk);
  CHECK(run({"verify", suite.string(), "--theorem", "T9"}).code == cli::kExitInputError);
}

TEST_CASE("closure and simulate") {
  TempDir tmp;
  CHECK(run({"closure", "--class", "supermodular", "--operator", "truncate", "--samples", "5"}).code ==
        cli::kExitOk);
  CHECK(run({"closure", "--class", "convex", "--operator", "affine", "--samples", "5"}).code == cli::kExitOk);
  CHECK(run({"closure", "--operator", "truncate"}).code == cli::kExitInputError);
  auto sc = tmp.file("closure.json", scaffold("closure"));
  CHECK(run({"closure", sc.string(), "--samples", "5"}).code == cli::kExitOk);

  auto sim = tmp.file("sim.json", scaffold("simulate"));
  auto out = tmp / "sim.jsonl";
  REQUIRE(run({"simulate", sim.string(), "--episodes", "20000", "--out", out.string()}).code == cli::kExitOk);
  auto recs = jsonl(slurp(out));
  REQUIRE(recs.size() == 2);
  const double mean = recs[1]["mean"].get<double>(), se = recs[1]["std_error"].get<double>();
  CHECK(std::abs(mean - 3.0) <= 3 * se);
}

TEST_CASE("input errors exit with code 2") {
  TempDir tmp;
  CHECK(run({}).code == cli::kExitInputError);
  CHECK(run({"fly"}).code == cli::kExitInputError);
  CHECK(run({"solve"}).code == cli::kExitInputError);
  CHECK(run({"solve", (tmp / "missing.json").string()}).code == cli::kExitInputError);
  auto broken = tmp.file("broken.json", R"({"schema_version": 1, "grid": {"axes": [[0, 2]]}, "pmf": {"weights": [0.5, 0.6]},
    "utility": {"family": "linear"}, "params": {"beta": 0.5, "gamma": 0.5}})");
  auto r = run({"solve", broken.string()});
  CHECK(r.code == cli::kExitInputError);
  CHECK(r.err.find("pmf") != std::string::npos);
  auto sc = tmp.file("solve.json", scaffold("solve"));
  CHECK(run({"solve", sc.string(), "--beta", "1.5"}).code == cli::kExitInputError);
  CHECK(run({"solve", sc.string(), "--format", "xml"}).code == cli::kExitInputError);
  CHECK(run({"scaffold", "plot"}).code == cli::kExitInputError);
}

TEST_CASE("identical runs write identical bytes") {
  TempDir tmp;
  auto suite = tmp.file("suite.json", R"({"schema_version": 1, "options": {"theorem": "T2b", "seed": 11}, "suite": {"cases": 8}})");
  for (const char* fmt : {"jsonl", "csv", "table"}) {
    auto a = tmp / (std::string("a.") + fmt), b = tmp / (std::string("b.") + fmt);
    REQUIRE(run({"verify", suite.string(), "--out", a.string(), "--format", fmt}).code == 0);
    REQUIRE(run({"verify", suite.string(), "--out", b.string(), "--format", fmt, "--jobs", "3"}).code == 0);
    CHECK(slurp(a) == slurp(b));
    CHECK_FALSE(slurp(a).empty());
  }
}

TEST_CASE("report encodings") {
  report::Report rep;
  rep.kind = "demo";
  rep.header = {{"seed", "3"}};
  auto& t = rep.add_table("rows", {"name", "x", "n", "ok"});
  t.rows.push_back({std::string("a"), 1.0 / 3.0, std::int64_t{7}, true});
  t.rows.push_back({std::string("b, \"c\""), std::nan(""), std::int64_t{-1}, false});

  for (auto f : {report::Format::table, report::Format::csv, report::Format::jsonl})
    CHECK(report::emit_report(rep, f) == report::emit_report(rep, f));

  const auto csv = report::emit_report(rep, report::Format::csv);
  CHECK(csv.find("# msearch-report v1\n# kind=demo\n# seed=3\n## table=rows\nname,x,n,ok\n") == 0);
  CHECK(csv.find("0.333333333333") != std::string::npos);

  auto recs = jsonl(report::emit_report(rep, report::Format::jsonl));
  REQUIRE(recs.size() == 3);
  CHECK(recs[0]["version"] == 1);
  CHECK(recs[1]["n"] == 7);
  CHECK(recs[2]["x"].is_null());
  CHECK(recs[2]["name"] == "b, \"c\"");

  CHECK(report::format_number(-0.0) == "0");
  CHECK(report::format_number(2.0) == "2");
  CHECK(report::format_number(8.0 / 7.0) == "1.14285714286");
  CHECK(report::parse_format("json-lines") == report::Format::jsonl);
  CHECK_THROWS_AS(report::parse_format("xml"), std::invalid_argument);

  report::Report empty;
  empty.kind = "verify";
  empty.add_table("cases", {"case_id", "theorem", "premise_dom", "premise_mem", "u_F", "u_G", "verdict"});
  const auto ecsv = report::emit_report(empty, report::Format::csv);
  CHECK(ecsv == "# msearch-report v1\n# kind=verify\n## table=cases\ncase_id,theorem,premise_dom,premise_mem,u_F,u_G,verdict\n");
  CHECK(jsonl(report::emit_report(empty, report::Format::jsonl)).size() == 1);
}

TEST_CASE("the installed binary honours the exit-code contract") {
  TempDir tmp;
  auto sc = tmp.file("solve.json", scaffold("solve"));
  const std::string bin = MSEARCH_CLI_PATH;
  auto status = [&](const std::string& args) {
    const int raw = std::system((bin + " " + args + " > /dev/null 2>&1").c_str());
    return WEXITSTATUS(raw);
  };
  CHECK(status("solve " + sc.string()) == 0);
  CHECK(status("solve " + (tmp / "nope.json").string()) == 2);
  auto swapped = json::parse(scaffold("dominate"));
  std::swap(swapped["f"], swapped["g"]);
  CHECK(status("dominate " + tmp.file("d.json", swapped.dump()).string()) == 1);
}
