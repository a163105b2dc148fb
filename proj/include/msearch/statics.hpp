#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "msearch/dominance.hpp"
#include "msearch/lattice.hpp"
#include "msearch/solver.hpp"
#include "msearch/utility.hpp"

namespace msearch {

// Comparative statics: if F dominates G on a class closed under truncation and
// positive affine maps, and the utility belongs to that class, then the
// reservation utility under F is at least the one under G. The harness checks
// both premises, solves both stopping problems and compares.

enum class TheoremId { T2a, T2b, T2c, T3, T4 };

inline constexpr TheoremId kAllTheorems[] = {TheoremId::T2a, TheoremId::T2b, TheoremId::T2c, TheoremId::T3,
                                             TheoremId::T4};

std::string_view to_string(TheoremId t);
TheoremId parse_theorem(std::string_view name);

/// T2a increasing, T2b convex, T2c componentwise convex,
/// T3 increasing supermodular, T4 increasing ultramodular.
FunctionClass class_for(TheoremId t);

struct TheoremCase {
  TheoremId theorem = TheoremId::T2a;
  Pmf f;
  Pmf g;
  TabulatedUtility utility;
  SearchParams params;
  /// Tolerance of the dominance and membership premises.
  double class_tol = kClassTolerance;
};

struct VerificationReport {
  DominanceResult premise_dominance;
  bool premise_membership = false;
  double u_f = 0.0;
  double u_g = 0.0;
  std::size_t acceptance_f = 0;
  std::size_t acceptance_g = 0;
  bool conclusion_holds = false;
  /// A premise failed (or could not be decided); nothing was concluded.
  bool vacuous = false;
  std::string reason;
};

/// Checks the dominance premise, then membership; solves both problems only
/// when both hold. conclusion_holds := u_F >= u_G - 10 tol.
VerificationReport verify_theorem(const TheoremCase& c);

enum class CaseOutcome { pass, fail, vacuous };
std::string_view to_string(CaseOutcome o);
CaseOutcome outcome_of(const VerificationReport& r);

struct SuiteSpec {
  TheoremId theorem = TheoremId::T2a;
  std::size_t cases = 100;
  std::uint64_t seed = 1;
  /// Nodes per axis; empty selects the theorem's default shape.
  std::vector<std::size_t> shape;
  /// When absent, beta and gamma are drawn per case.
  std::optional<SearchParams> params;
  double tol = 1e-10;
  double class_tol = kClassTolerance;
  /// Worker threads; results do not depend on it.
  std::size_t jobs = 1;
};

/// {6} for T2a, {3, 3} otherwise.
std::vector<std::size_t> default_shape(TheoremId t);

/// Case `index` of the suite: a random grid and base pmf G, F obtained from G
/// by one to three transfers of the theorem's generator (fosd_shift,
/// mean_preserving_spread or concordance_transfer), and a verified random
/// utility from the theorem's class. Depends only on (spec, index).
TheoremCase generate_case(const SuiteSpec& spec, std::size_t index);

struct SuiteRow {
  std::size_t case_id = 0;
  std::uint64_t case_seed = 0;
  TheoremCase input;
  VerificationReport report;
};

struct SuiteSummary {
  std::size_t pass = 0;
  std::size_t fail = 0;
  std::size_t vacuous = 0;
};

struct SuiteReport {
  std::vector<SuiteRow> rows;
  SuiteSummary summary;
};

SuiteReport run_suite(const SuiteSpec& spec);
/// Runs an explicit list of cases; case ids follow list order.
SuiteReport run_cases(const std::vector<TheoremCase>& cases, std::size_t jobs = 1);

enum class ClosureOperator { truncate, affine, clamp };
std::string_view to_string(ClosureOperator op);
ClosureOperator parse_closure_operator(std::string_view name);

/// Whether the class is closed under the operator: affine maps preserve every
/// class; truncation and clamping preserve all but supermodular and
/// ultramodular (closure there needs monotonicity).
bool expected_closed(FunctionClass c, ClosureOperator op);

struct ClosureViolation {
  std::size_t sample = 0;
  Violation violation;
};

struct ClosureReport {
  FunctionClass function_class = FunctionClass::increasing;
  ClosureOperator op = ClosureOperator::truncate;
  std::size_t samples = 0;
  std::size_t preserved = 0;
  bool closed_expected = true;
  std::vector<ClosureViolation> violations;
  /// For classes not expected to be closed: membership of the two-by-two
  /// counterexample before and after the operator.
  std::optional<Membership> counterexample_before;
  std::optional<Membership> counterexample_after;
  bool passed = false;
};

/// Applies the operator to `samples` verified random members and re-tests
/// membership. truncate: max(u, 0). affine: m u + n with m in [0.1, 10],
/// n in [0, 5]. clamp: max(u, l) / (1 - beta) with l in [0, max|u|] and beta in
/// [0.05, 0.95]. Passes when an expected closure shows no violation, or when an
/// expected non-closure is exhibited by the counterexample.
ClosureReport closure_check(FunctionClass c, ClosureOperator op, std::size_t samples, std::uint64_t seed,
                            double tol = kClassTolerance);

struct PathPoint {
  double delta = 0.0;
  double reservation_utility = 0.0;
  std::size_t acceptance_size = 0;
};

/// Reservation utility along growing concordance transfers delta applied to g
/// on the rectangle (low, high).
std::vector<PathPoint> concordance_path(const Pmf& g, std::size_t low, std::size_t high,
                                        const std::vector<double>& deltas, const TabulatedUtility& u,
                                        const SearchParams& params);

}  // namespace msearch
