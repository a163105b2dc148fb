#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "msearch/lattice.hpp"

namespace msearch {

/// Raised when an iterative solve does not reach its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kMaxSolverIterations = 1'000'000;

struct Solution {
  double reservation_utility = 0.0;
  /// Lifetime value max(U(x), u*) / (1 - beta) at every node.
  TabulatedUtility value;
  /// Nodes with U(x) >= u* - tol, ascending.
  std::vector<std::size_t> acceptance;
  /// Defect of the reservation equation at the returned value.
  double residual = 0.0;
  std::size_t iterations = 0;
  /// Independent bisection estimate and its iteration count.
  double bisection_estimate = 0.0;
  std::size_t bisection_iterations = 0;
};

/// psi(t) = (1 - beta) gamma + beta E[max(U, t)]. Nondecreasing, and a
/// contraction of modulus beta; its fixed point is the reservation utility.
double continuation_map(double t, const Pmf& pmf, const TabulatedUtility& u, const SearchParams& params);

/// t - gamma - beta / (1 - beta) E[(U - t)^+].
double reservation_residual(double t, const Pmf& pmf, const TabulatedUtility& u, const SearchParams& params);

/// Solves for the reservation utility twice, by fixed-point iteration of
/// continuation_map and by bisection on t - psi(t), and requires the two to
/// agree within 10 tol. Throws ConvergenceError otherwise.
Solution reservation_utility(const Pmf& pmf, const TabulatedUtility& u, const SearchParams& params);

/// max(U(x), u*) / (1 - beta).
double value_function(const Solution& solution, std::size_t node);

struct SimulationStats {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t episodes = 0;
  /// Periods after which an unfinished episode is cut off.
  std::size_t horizon = 0;
  std::size_t truncated = 0;
  double mean_wait = 0.0;
};

/// Smallest T with beta^T (max|U| + gamma) / (1 - beta) < tol.
std::size_t simulation_horizon(const TabulatedUtility& u, const SearchParams& params);

/// Monte Carlo value of the policy "accept iff U(w) >= threshold": the mean
/// of sum_{t<T} beta^t gamma + beta^T U(w_T) / (1 - beta) over episodes.
/// Episode i draws from an engine seeded by (seed, i).
SimulationStats simulate_search(const Pmf& pmf, const TabulatedUtility& u, const SearchParams& params,
                                double threshold, std::uint64_t seed, std::size_t episodes);

}  // namespace msearch
