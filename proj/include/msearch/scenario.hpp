#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "msearch/lattice.hpp"
#include "msearch/utility.hpp"

// Scenario files: JSON documents with an explicit schema_version.
//
// {
//   "schema_version": 1,
//   "grid":    {"axes": [[0, 2]]},
//   "pmf":     {"weights": [0.5, 0.5]},                 (solve, simulate)
//   "f", "g":  {"points": [{"node": [2], "mass": 1}]},  (dominate, verify)
//   "utility": {"family": "linear", "coefficients": [1]}
//              | {"family": "product"} | {"family": "min"}
//              | {"family": "custom", "values": [...]},
//   "params":  {"beta": 0.5, "gamma": 0.5, "tol": 1e-10},
//   "options": {"class": "increasing", "theorem": "T3", "operator": "truncate",
//               "seed": 7, "episodes": 100000, "threshold": 1.0,
//               "samples": 50, "class_tol": 1e-9},
//   "suite":   {"cases": 100, "shape": [3, 3], "randomize_params": true},
//   "expected": {"u_F": 1.0, "u_G": 1.0, "conclusion": true, "tolerance": 1e-8}
// }
//
// Unknown keys are rejected. Errors name the offending field path.

namespace msearch::scenario {

inline constexpr int kSchemaVersion = 1;

class ScenarioError : public std::invalid_argument {
 public:
  ScenarioError(std::string path, const std::string& message)
      : std::invalid_argument(path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct PointMass {
  std::vector<double> node;
  double mass = 0.0;
  bool operator==(const PointMass&) const = default;
};

struct PmfSpec {
  std::vector<double> weights;    // dense, canonical node order
  std::vector<PointMass> points;  // sparse alternative
  bool operator==(const PmfSpec&) const = default;
};

struct Options {
  std::optional<std::string> function_class;
  std::optional<std::string> theorem;
  std::optional<std::string> op;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> episodes;
  std::optional<double> threshold;
  std::optional<std::uint64_t> samples;
  std::optional<double> class_tol;
  bool operator==(const Options&) const = default;
};

struct SuiteBlock {
  std::uint64_t cases = 100;
  std::vector<std::size_t> shape;
  bool randomize_params = true;
  bool operator==(const SuiteBlock&) const = default;
};

struct Expected {
  std::optional<double> u_f;
  std::optional<double> u_g;
  std::optional<bool> conclusion;
  double tolerance = 1e-8;
  bool operator==(const Expected&) const = default;
};

struct Scenario {
  int schema_version = kSchemaVersion;
  std::optional<std::vector<std::vector<double>>> axes;
  std::optional<PmfSpec> pmf;
  std::optional<PmfSpec> f;
  std::optional<PmfSpec> g;
  std::optional<FamilySpec> utility;
  std::optional<double> beta;
  std::optional<double> gamma;
  std::optional<double> tol;
  Options options;
  std::optional<SuiteBlock> suite;
  std::optional<Expected> expected;
  bool operator==(const Scenario&) const = default;
};

Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::filesystem::path& path);
std::string write_scenario(const Scenario& s);

/// A ready-to-run template for one of the subcommands.
Scenario scaffold_scenario(std::string_view command);

// Resolution into library values; each throws ScenarioError naming the field.
GridPtr resolve_grid(const Scenario& s);
Pmf resolve_pmf(const Scenario& s, const GridPtr& grid, std::string_view field);
TabulatedUtility resolve_utility(const Scenario& s, const GridPtr& grid);
SearchParams resolve_params(const Scenario& s, double default_tol);

}  // namespace msearch::scenario
