#include "msearch/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "msearch/random.hpp"

namespace msearch {

namespace {

void check_inputs(const Pmf& pmf, const TabulatedUtility& u, const SearchParams& params) {
  params.validate();
  if (!same_grid(pmf.grid_ptr(), u.grid_ptr()))
    throw std::invalid_argument("reservation solver: pmf and utility live on different grids");
}

double expected_max(double t, const Pmf& pmf, const TabulatedUtility& u) {
  double s = 0.0;
  for (std::size_t i = 0; i < pmf.size(); ++i) s += pmf.mass(i) * std::max(u[i], t);
  return s;
}

double expected_excess(double t, const Pmf& pmf, const TabulatedUtility& u) {
  double s = 0.0;
  for (std::size_t i = 0; i < pmf.size(); ++i) s += pmf.mass(i) * std::max(u[i] - t, 0.0);
  return s;
}

}  // namespace

double continuation_map(double t, const Pmf& pmf, const TabulatedUtility& u, const SearchParams& params) {
  check_inputs(pmf, u, params);
  if (!std::isfinite(t)) throw std::invalid_argument("continuation_map: t must be finite");
  return (1.0 - params.beta) * params.gamma + params.beta * expected_max(t, pmf, u);
}

double reservation_residual(double t, const Pmf& pmf, const TabulatedUtility& u, const SearchParams& params) {
  check_inputs(pmf, u, params);
  return t - params.gamma - params.beta / (1.0 - params.beta) * expected_excess(t, pmf, u);
}

Solution reservation_utility(const Pmf& pmf, const TabulatedUtility& u, const SearchParams& params) {
  check_inputs(pmf, u, params);
  const double beta = params.beta, gamma = params.gamma, tol = params.tol;
  auto psi = [&](double t) { return (1.0 - beta) * gamma + beta * expected_max(t, pmf, u); };
  auto residual = [&](double t) { return t - gamma - beta / (1.0 - beta) * expected_excess(t, pmf, u); };

  // Fixed-point iteration; the residual shrinks geometrically at rate beta.
  double t = gamma;
  double r = residual(t);
  std::size_t iters = 0;
  while (std::abs(r) > 0.5 * tol) {
    if (iters >= kMaxSolverIterations)
      throw ConvergenceError("reservation_utility: fixed-point iteration hit the cap with residual " +
                             std::to_string(r));
    const double next = psi(t);
    ++iters;
    if (next == t) break;
    t = next;
    r = residual(t);
  }
  if (std::abs(r) > tol)
    throw ConvergenceError("reservation_utility: fixed-point iteration stalled with residual " +
                           std::to_string(r));

  // Bisection on the strictly increasing map t - psi(t); psi maps the bracket
  // into itself.
  double lo = std::min(gamma, u.min());
  double hi = std::max(gamma, u.max()) + gamma * beta / (1.0 - beta);
  double mid = 0.5 * (lo + hi);
  std::size_t bis_iters = 0;
  while (true) {
    mid = 0.5 * (lo + hi);
    const double rm = residual(mid);
    if (std::abs(rm) <= 0.5 * tol) break;
    if (mid <= lo || mid >= hi || bis_iters >= kMaxSolverIterations) {
      if (std::abs(rm) > tol)
        throw ConvergenceError("reservation_utility: bisection stalled with residual " + std::to_string(rm));
      break;
    }
    (rm < 0.0 ? lo : hi) = mid;
    ++bis_iters;
  }
  if (std::abs(mid - t) > 10.0 * tol)
    throw ConvergenceError("reservation_utility: fixed point " + std::to_string(t) + " and bisection " +
                           std::to_string(mid) + " disagree");

  std::vector<double> value(u.size());
  std::vector<std::size_t> accept;
  for (std::size_t i = 0; i < u.size(); ++i) {
    value[i] = std::max(u[i], t) / (1.0 - beta);
    if (u[i] >= t - tol) accept.push_back(i);
  }
  return Solution{.reservation_utility = t,
                  .value = TabulatedUtility(u.grid_ptr(), std::move(value)),
                  .acceptance = std::move(accept),
                  .residual = r,
                  .iterations = iters,
                  .bisection_estimate = mid,
                  .bisection_iterations = bis_iters};
}

double value_function(const Solution& solution, std::size_t node) { return solution.value.at(node); }

std::size_t simulation_horizon(const TabulatedUtility& u, const SearchParams& params) {
  params.validate();
  const double scale = (std::max(std::abs(u.min()), std::abs(u.max())) + params.gamma) / (1.0 - params.beta);
  std::size_t T = 0;
  double disc = 1.0;
  while (disc * scale >= params.tol) {
    disc *= params.beta;
    ++T;
  }
  return T;
}

SimulationStats simulate_search(const Pmf& pmf, const TabulatedUtility& u, const SearchParams& params,
                                double threshold, std::uint64_t seed, std::size_t episodes) {
  check_inputs(pmf, u, params);
  if (episodes == 0) throw std::invalid_argument("simulate_search: episodes must be >= 1");
  if (!std::isfinite(threshold)) throw std::invalid_argument("simulate_search: threshold must be finite");

  std::vector<double> cdf(pmf.size());
  std::partial_sum(pmf.masses().begin(), pmf.masses().end(), cdf.begin());
  auto draw = [&](rng::Engine& eng) {
    const double r = rng::uniform01(eng) * cdf.back();
    auto it = std::upper_bound(cdf.begin(), cdf.end(), r);
    std::size_t node = it == cdf.end() ? cdf.size() - 1 : static_cast<std::size_t>(it - cdf.begin());
    while (pmf.mass(node) == 0.0 && node > 0) --node;
    return node;
  };

  const double beta = params.beta;
  SimulationStats st;
  st.episodes = episodes;
  st.horizon = simulation_horizon(u, params);
  // Welford accumulation keeps the variance stable for long runs.
  double mean = 0.0, m2 = 0.0, wait_sum = 0.0;
  for (std::size_t e = 0; e < episodes; ++e) {
    auto eng = rng::make_engine(seed, e);
    double total = 0.0, disc = 1.0;
    bool accepted = false;
    std::size_t t = 0;
    for (; t < st.horizon; ++t) {
      const std::size_t w = draw(eng);
      if (u[w] >= threshold) {
        total += disc * u[w] / (1.0 - beta);
        accepted = true;
        break;
      }
      total += disc * params.gamma;
      disc *= beta;
    }
    if (!accepted) ++st.truncated;
    wait_sum += static_cast<double>(t);
    const double delta = total - mean;
    mean += delta / static_cast<double>(e + 1);
    m2 += delta * (total - mean);
  }
  st.mean = mean;
  const double n = static_cast<double>(episodes);
  st.std_error = episodes > 1 ? std::sqrt(m2 / (n - 1.0) / n) : 0.0;
  st.mean_wait = wait_sum / n;
  return st;
}

}  // namespace msearch
