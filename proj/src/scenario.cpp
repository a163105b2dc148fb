#include "msearch/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>


namespace msearch::scenario {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::string& path, std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) throw ScenarioError(path.empty() ? "<root>" : path, "expected an object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) throw ScenarioError(path.empty() ? key : path + "." + key, "unknown field");
  }
}

double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ScenarioError(path, "expected a number");
  return j.get<double>();
}

std::uint64_t get_count(const json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<std::int64_t>() < 0)
    throw ScenarioError(path, "expected a nonnegative integer");
  return j.get<std::uint64_t>();
}

std::string get_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw ScenarioError(path, "expected a string");
  return j.get<std::string>();
}

bool get_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) throw ScenarioError(path, "expected true or false");
  return j.get<bool>();
}

std::vector<double> get_numbers(const json& j, const std::string& path) {
  if (!j.is_array()) throw ScenarioError(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get_number(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

PmfSpec parse_pmf(const json& j, const std::string& path) {
  check_keys(j, path, {"weights", "points"});
  PmfSpec p;
  const bool has_w = j.contains("weights"), has_p = j.contains("points");
  if (has_w == has_p) throw ScenarioError(path, "give exactly one of 'weights' or 'points'");
  if (has_w) p.weights = get_numbers(j["weights"], path + ".weights");
  if (has_p) {
    const auto& pts = j["points"];
    if (!pts.is_array()) throw ScenarioError(path + ".points", "expected an array");
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const std::string ip = path + ".points[" + std::to_string(i) + "]";
      check_keys(pts[i], ip, {"node", "mass"});
      if (!pts[i].contains("node") || !pts[i].contains("mass")) throw ScenarioError(ip, "needs 'node' and 'mass'");
      p.points.push_back({get_numbers(pts[i]["node"], ip + ".node"), get_number(pts[i]["mass"], ip + ".mass")});
    }
  }
  return p;
}

json pmf_json(const PmfSpec& p) {
  if (!p.points.empty()) {
    json pts = json::array();
    for (const auto& pt : p.points) pts.push_back({{"node", pt.node}, {"mass", pt.mass}});
    return {{"points", pts}};
  }
  return {{"weights", p.weights}};
}

}  // namespace

Scenario parse_scenario(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError("<root>", std::string("malformed JSON: ") + e.what());
  }
  check_keys(j, "", {"schema_version", "grid", "pmf", "f", "g", "utility", "params", "options", "suite", "expected"});
  Scenario s;
  if (!j.contains("schema_version")) throw ScenarioError("schema_version", "missing");
  s.schema_version = static_cast<int>(get_count(j["schema_version"], "schema_version"));
  if (s.schema_version != kSchemaVersion)
    throw ScenarioError("schema_version", "unsupported version " + std::to_string(s.schema_version));

  if (j.contains("grid")) {
    check_keys(j["grid"], "grid", {"axes"});
    const auto& ax = j["grid"].value("axes", json());
    if (!ax.is_array()) throw ScenarioError("grid.axes", "expected an array of coordinate arrays");
    std::vector<std::vector<double>> axes;
    for (std::size_t d = 0; d < ax.size(); ++d) axes.push_back(get_numbers(ax[d], "grid.axes[" + std::to_string(d) + "]"));
    s.axes = std::move(axes);
  }
  for (auto [key, slot] : {std::pair{"pmf", &s.pmf}, std::pair{"f", &s.f}, std::pair{"g", &s.g}})
    if (j.contains(key)) *slot = parse_pmf(j[key], key);

  if (j.contains("utility")) {
    const auto& u = j["utility"];
    check_keys(u, "utility", {"family", "coefficients", "values"});
    FamilySpec fs;
    fs.family = u.contains("family") ? get_string(u["family"], "utility.family") : "custom";
    if (u.contains("coefficients")) fs.coefficients = get_numbers(u["coefficients"], "utility.coefficients");
    if (u.contains("values")) fs.values = get_numbers(u["values"], "utility.values");
    s.utility = std::move(fs);
  }
  if (j.contains("params")) {
    const auto& p = j["params"];
    check_keys(p, "params", {"beta", "gamma", "tol"});
    if (p.contains("beta")) s.beta = get_number(p["beta"], "params.beta");
    if (p.contains("gamma")) s.gamma = get_number(p["gamma"], "params.gamma");
    if (p.contains("tol")) s.tol = get_number(p["tol"], "params.tol");
  }
  if (j.contains("options")) {
    const auto& o = j["options"];
    check_keys(o, "options", {"class", "theorem", "operator", "seed", "episodes", "threshold", "samples", "class_tol"});
    if (o.contains("class")) s.options.function_class = get_string(o["class"], "options.class");
    if (o.contains("theorem")) s.options.theorem = get_string(o["theorem"], "options.theorem");
    if (o.contains("operator")) s.options.op = get_string(o["operator"], "options.operator");
    if (o.contains("seed")) s.options.seed = get_count(o["seed"], "options.seed");
    if (o.contains("episodes")) s.options.episodes = get_count(o["episodes"], "options.episodes");
    if (o.contains("threshold")) s.options.threshold = get_number(o["threshold"], "options.threshold");
    if (o.contains("samples")) s.options.samples = get_count(o["samples"], "options.samples");
    if (o.contains("class_tol")) s.options.class_tol = get_number(o["class_tol"], "options.class_tol");
  }
  if (j.contains("suite")) {
    const auto& b = j["suite"];
    check_keys(b, "suite", {"cases", "shape", "randomize_params"});
    SuiteBlock sb;
    if (b.contains("cases")) sb.cases = get_count(b["cases"], "suite.cases");
    if (b.contains("shape")) {
      if (!b["shape"].is_array()) throw ScenarioError("suite.shape", "expected an array of counts");
      for (std::size_t i = 0; i < b["shape"].size(); ++i)
        sb.shape.push_back(get_count(b["shape"][i], "suite.shape[" + std::to_string(i) + "]"));
    }
    if (b.contains("randomize_params")) sb.randomize_params = get_bool(b["randomize_params"], "suite.randomize_params");
    s.suite = std::move(sb);
  }
  if (j.contains("expected")) {
    const auto& e = j["expected"];
    check_keys(e, "expected", {"u_F", "u_G", "conclusion", "tolerance"});
    Expected ex;
    if (e.contains("u_F")) ex.u_f = get_number(e["u_F"], "expected.u_F");
    if (e.contains("u_G")) ex.u_g = get_number(e["u_G"], "expected.u_G");
    if (e.contains("conclusion")) ex.conclusion = get_bool(e["conclusion"], "expected.conclusion");
    if (e.contains("tolerance")) ex.tolerance = get_number(e["tolerance"], "expected.tolerance");
    s.expected = ex;
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("<file>", "cannot read '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

std::string write_scenario(const Scenario& s) {
  json j = json::object();
  j["schema_version"] = s.schema_version;
  if (s.axes) j["grid"] = {{"axes", *s.axes}};
  if (s.pmf) j["pmf"] = pmf_json(*s.pmf);
  if (s.f) j["f"] = pmf_json(*s.f);
  if (s.g) j["g"] = pmf_json(*s.g);
  if (s.utility) {
    json u = {{"family", s.utility->family}};
    if (!s.utility->coefficients.empty()) u["coefficients"] = s.utility->coefficients;
    if (!s.utility->values.empty()) u["values"] = s.utility->values;
    j["utility"] = u;
  }
  if (s.beta || s.gamma || s.tol) {
    json p = json::object();
    if (s.beta) p["beta"] = *s.beta;
    if (s.gamma) p["gamma"] = *s.gamma;
    if (s.tol) p["tol"] = *s.tol;
    j["params"] = p;
  }
  json o = json::object();
  const auto& op = s.options;
  if (op.function_class) o["class"] = *op.function_class;
  if (op.theorem) o["theorem"] = *op.theorem;
  if (op.op) o["operator"] = *op.op;
  if (op.seed) o["seed"] = *op.seed;
  if (op.episodes) o["episodes"] = *op.episodes;
  if (op.threshold) o["threshold"] = *op.threshold;
  if (op.samples) o["samples"] = *op.samples;
  if (op.class_tol) o["class_tol"] = *op.class_tol;
  if (!o.empty()) j["options"] = o;
  if (s.suite) {
    j["suite"] = {{"cases", s.suite->cases}, {"randomize_params", s.suite->randomize_params}};
    if (!s.suite->shape.empty()) j["suite"]["shape"] = s.suite->shape;
  }
  if (s.expected) {
    json e = {{"tolerance", s.expected->tolerance}};
    if (s.expected->u_f) e["u_F"] = *s.expected->u_f;
    if (s.expected->u_g) e["u_G"] = *s.expected->u_g;
    if (s.expected->conclusion) e["conclusion"] = *s.expected->conclusion;
    j["expected"] = e;
  }
  return j.dump(2) + "\n";
}

Scenario scaffold_scenario(std::string_view command) {
  Scenario s;
  if (command == "solve" || command == "simulate") {
    s.axes = {{0.0, 2.0}};
    s.pmf = PmfSpec{.weights = {0.5, 0.5}};
    s.utility = FamilySpec{.family = "linear", .coefficients = {1.0}};
    s.beta = 0.5;
    s.gamma = 0.5;
    s.tol = 1e-10;
    if (command == "simulate") {
      s.options.threshold = 1.0;
      s.options.seed = 1;
      s.options.episodes = 100000;
    }
  } else if (command == "dominate") {
    s.axes = {{0.0, 2.0}};
    s.f = PmfSpec{.weights = {0.25, 0.75}};
    s.g = PmfSpec{.weights = {0.5, 0.5}};
    s.options.function_class = "increasing";
  } else if (command == "verify") {
    s.axes = {{1.0, 2.0}, {1.0, 2.0}};
    s.f = PmfSpec{.weights = {0.5, 0.0, 0.0, 0.5}};
    s.g = PmfSpec{.weights = {0.25, 0.25, 0.25, 0.25}};
    s.utility = FamilySpec{.family = "product"};
    s.beta = 0.5;
    s.gamma = 1.0;
    s.tol = 1e-10;
    s.options.theorem = "T3";
  } else if (command == "closure") {
    s.options.function_class = "increasing_supermodular";
    s.options.op = "truncate";
    s.options.samples = 50;
    s.options.seed = 1;
  } else {
    throw std::invalid_argument("no scenario template for command '" + std::string(command) + "'");
  }
  return s;
}

GridPtr resolve_grid(const Scenario& s) {
  if (!s.axes) throw ScenarioError("grid", "missing");
  try {
    return make_grid(*s.axes);
  } catch (const std::invalid_argument& e) {
    throw ScenarioError("grid.axes", e.what());
  }
}

Pmf resolve_pmf(const Scenario& s, const GridPtr& grid, std::string_view field) {
  const std::optional<PmfSpec>* slot = field == "pmf" ? &s.pmf : field == "f" ? &s.f : field == "g" ? &s.g : nullptr;
  const std::string path(field);
  if (!slot || !*slot) throw ScenarioError(path, "missing");
  const PmfSpec& spec = **slot;
  std::vector<double> mass;
  if (!spec.points.empty()) {
    mass.assign(grid->size(), 0.0);
    std::set<std::size_t> seen;
    for (std::size_t i = 0; i < spec.points.size(); ++i) {
      const std::string ip = path + ".points[" + std::to_string(i) + "]";
      const auto node = grid->find(spec.points[i].node);
      if (!node) throw ScenarioError(ip + ".node", "not a node of the grid");
      if (!seen.insert(*node).second) throw ScenarioError(ip + ".node", "listed twice");
      mass[*node] = spec.points[i].mass;
    }
  } else {
    mass = spec.weights;
  }
  try {
    return make_pmf(grid, std::move(mass));
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(path, e.what());
  }
}

TabulatedUtility resolve_utility(const Scenario& s, const GridPtr& grid) {
  if (!s.utility) throw ScenarioError("utility", "missing");
  try {
    return tabulate_family(*s.utility, grid);
  } catch (const std::invalid_argument& e) {
    throw ScenarioError("utility", e.what());
  }
}

SearchParams resolve_params(const Scenario& s, double default_tol) {
  SearchParams p;
  if (!s.beta) throw ScenarioError("params.beta", "missing");
  if (!s.gamma) throw ScenarioError("params.gamma", "missing");
  p.beta = *s.beta;
  p.gamma = *s.gamma;
  p.tol = s.tol.value_or(default_tol);
  if (!(p.beta > 0.0 && p.beta < 1.0)) throw ScenarioError("params.beta", "must lie in (0, 1)");
  if (!(p.gamma > 0.0) || !std::isfinite(p.gamma)) throw ScenarioError("params.gamma", "must be > 0");
  if (!(p.tol > 0.0) || !std::isfinite(p.tol)) throw ScenarioError("params.tol", "must be > 0");
  return p;
}

}  // namespace msearch::scenario
