#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "msearch/lattice.hpp"
#include "msearch/random.hpp"

namespace msearch {

/// Absolute tolerance on constraint slacks for membership and dominance.
inline constexpr double kClassTolerance = 1e-9;

enum class FunctionClass {
  increasing,
  convex,
  componentwise_convex,
  supermodular,
  ultramodular,
  increasing_supermodular,
  increasing_ultramodular,
};

inline constexpr FunctionClass kAllClasses[] = {
    FunctionClass::increasing,   FunctionClass::convex,
    FunctionClass::componentwise_convex, FunctionClass::supermodular,
    FunctionClass::ultramodular, FunctionClass::increasing_supermodular,
    FunctionClass::increasing_ultramodular,
};

std::string_view to_string(FunctionClass c);
/// Throws std::invalid_argument on an unknown name.
FunctionClass parse_function_class(std::string_view name);

/// Which local constraint families make up a class. Convexity is not local
/// and is handled by subgradient programs instead.
struct ClassParts {
  bool increasing = false;
  bool componentwise_convex = false;
  bool supermodular = false;
  bool convex = false;
};
ClassParts parts_of(FunctionClass c);

/// One homogeneous linear inequality  sum_k coef[k] * u[nodes[k]] >= 0.
struct LocalConstraint {
  std::string_view kind;  // "increasing", "componentwise_convex" or "supermodular"
  std::vector<std::size_t> nodes;
  std::vector<double> coef;

  double slack(std::span<const double> u) const;
};

/// Local constraints of the class on the grid, in a fixed order: increasing
/// edges, then per-axis slope changes, then 2x2 cross differences; within each
/// family by ascending node. On a product of chains these characterize the
/// class exactly.
std::vector<LocalConstraint> local_constraints(const Grid& grid, const ClassParts& parts);

struct Violation {
  std::string kind;
  std::vector<std::size_t> nodes;
  double margin = 0.0;
};

struct Membership {
  bool member = true;
  /// Smallest constraint slack (+inf when the class imposes no constraint on
  /// this grid). For the convex part, minus the largest subgradient defect.
  double margin = 0.0;
  /// First violated constraint in canonical order.
  std::optional<Violation> witness;
};

/// Decides membership of a tabulated function in a class.
///
/// increasing: u(successor) - u(x) >= -tol along every axis.
/// componentwise_convex: consecutive divided differences nondecreasing.
/// supermodular: elementary 2x2 cross differences >= -tol.
/// convex: every node admits a subgradient g with
///   u(x_j) >= u(x_i) + g.(x_j - x_i) - tol for all j (extendability to a
///   convex function on R^K), decided by one small LP per node.
Membership is_member(const TabulatedUtility& u, FunctionClass c, double tol = kClassTolerance);

/// Largest subgradient defect at `node` (0 when a subgradient exists).
double convex_defect(const TabulatedUtility& u, std::size_t node);

// Closed-form families ------------------------------------------------------

/// sum_d a_d * x_d + b.
TabulatedUtility tabulate_linear(const GridPtr& grid, std::span<const double> a, double b = 0.0);
/// prod_d x_d. Increasing ultramodular on nonnegative grids.
TabulatedUtility tabulate_product(const GridPtr& grid);
/// min_d x_d. Increasing supermodular; not componentwise convex in general.
TabulatedUtility tabulate_min(const GridPtr& grid);

struct FamilySpec {
  std::string family;               // linear | product | min | custom
  std::vector<double> coefficients; // linear: slopes, optionally followed by an intercept
  std::vector<double> values;       // custom: node values in canonical order

  bool operator==(const FamilySpec&) const = default;
};

TabulatedUtility tabulate_family(const FamilySpec& spec, const GridPtr& grid);

// Closure operators ---------------------------------------------------------

/// max(u, 0).
TabulatedUtility truncate(const TabulatedUtility& u);
/// m * u + n with m > 0 and n >= 0.
TabulatedUtility affine_transform(const TabulatedUtility& u, double m, double n);
/// max(u, level).
TabulatedUtility clamp_below(const TabulatedUtility& u, double level);

/// The two-by-two utility U(1,1)=U(2,2)=5, U(1,2)=-5, U(2,1)=14: supermodular,
/// but its truncation is not.
TabulatedUtility truncation_counterexample();

/// Random member of `c` built as a nonnegative combination of generators of
/// the class (steps, hinges, products of per-axis monotone pieces) plus an
/// arbitrary constant, then confirmed with is_member. Throws std::runtime_error
/// if no verified member is found within 64 attempts.
TabulatedUtility random_member(FunctionClass c, const GridPtr& grid, rng::Engine& eng);

}  // namespace msearch
