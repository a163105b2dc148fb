#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "msearch/lattice.hpp"
#include "msearch/utility.hpp"

namespace msearch {

enum class Verdict { dominates, fails, inconclusive };

std::string_view to_string(Verdict v);

/// Upper bound on LP columns accepted by dominates().
inline constexpr std::size_t kMaxLpVariables = 5000;
/// Upper-set enumeration is exponential in the node count.
inline constexpr std::size_t kMaxBruteForceNodes = 12;

struct DominanceResult {
  Verdict verdict = Verdict::inconclusive;
  /// min over the class, normalized to 0 <= U <= 1, of E_F[U] - E_G[U].
  double lp_optimum = 0.0;
  /// A class member with E_F - E_G < -tol, present when verdict == fails.
  std::optional<TabulatedUtility> witness;
  /// E_F[witness] - E_G[witness] recomputed by direct summation.
  double witness_gap = 0.0;
  GridPtr grid;
  std::string note;
  std::size_t pivots = 0;
};

/// Does F dominate G on the class, i.e. E_F[U] >= E_G[U] for every U in it?
///
/// Both pmfs are first placed on a common grid. The class is a convex cone
/// containing the constants, so the question reduces to the sign of
///   min sum_i (f_i - g_i) U_i  over  {U in class, 0 <= U <= 1},
/// which is a linear program over the local constraints of the class (plus
/// free subgradient variables for the convex class). A negative optimum comes
/// with its minimizer as a witness; numerical trouble yields `inconclusive`.
DominanceResult dominates(const Pmf& f, const Pmf& g, FunctionClass c, double tol = kClassTolerance);

/// F-mass >= G-mass - tol on every upper set of the product order.
/// Independent check of dominates(f, g, increasing) on small grids.
bool dominates_increasing_bruteforce(const Pmf& f, const Pmf& g, double tol = kClassTolerance);

/// Moves eps of mass from `from` up to `to` (to >= from componentwise).
Pmf fosd_shift(const Pmf& g, std::size_t from, std::size_t to, double eps);

/// Splits eps of the mass at `node` between its two neighbours along `axis`,
/// weighted so that the mean along the axis is unchanged.
Pmf mean_preserving_spread(const Pmf& g, std::size_t axis, std::size_t node, double eps);

/// Moves delta from the anti-diagonal corners of the rectangle spanned by
/// `low` and `high` to its diagonal corners. `low` and `high` must differ in
/// exactly two coordinates, with low strictly below high in both.
Pmf concordance_transfer(const Pmf& g, std::size_t low, std::size_t high, double delta);

}  // namespace msearch
