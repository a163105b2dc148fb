#include "msearch/dominance.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "msearch/simplex.hpp"

namespace msearch {

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::dominates: return "dominates";
    case Verdict::fails: return "fails";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "unknown";
}

DominanceResult dominates(const Pmf& f_in, const Pmf& g_in, FunctionClass c, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("dominates: tol must be > 0");
  const CommonSupport cs = common_grid(f_in, g_in);
  const Grid& grid = *cs.grid;
  const std::size_t n = grid.size();
  const std::size_t K = grid.dims();
  const ClassParts parts = parts_of(c);

  const std::size_t columns = n + (parts.convex ? 2 * K * n : 0);
  if (columns > kMaxLpVariables)
    throw std::length_error("dominates: program needs " + std::to_string(columns) + " columns, limit is " +
                            std::to_string(kMaxLpVariables));

  lp::Problem prob;
  for (std::size_t i = 0; i < n; ++i) prob.add_variable(cs.f.mass(i) - cs.g.mass(i));
  for (std::size_t i = 0; i < n; ++i) prob.add_row({{i, 1.0}}, lp::Sense::less_equal, 1.0);
  // Cone rows are written as -a'U <= 0 so the slack basis at U = 0 is feasible.
  for (const auto& con : local_constraints(grid, parts)) {
    std::vector<lp::Term> terms;
    for (std::size_t k = 0; k < con.nodes.size(); ++k) terms.push_back({con.nodes[k], -con.coef[k]});
    prob.add_row(std::move(terms), lp::Sense::less_equal, 0.0);
  }
  if (parts.convex) {
    std::vector<std::size_t> sub(n * K);
    for (auto& s : sub) s = prob.add_variable(0.0, true);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        // U_j >= U_i + g_i . (x_j - x_i)
        std::vector<lp::Term> terms{{i, 1.0}, {j, -1.0}};
        for (std::size_t d = 0; d < K; ++d) {
          const double step = grid.coord(j, d) - grid.coord(i, d);
          if (step != 0.0) terms.push_back({sub[i * K + d], step});
        }
        prob.add_row(std::move(terms), lp::Sense::less_equal, 0.0);
      }
  }

  DominanceResult out;
  out.grid = cs.grid;
  const auto res = lp::minimize(prob);
  out.pivots = res.pivots;
  if (res.status != lp::Status::optimal) {
    out.verdict = Verdict::inconclusive;
    out.note = "LP ended with status " + std::string(lp::to_string(res.status));
    return out;
  }
  out.lp_optimum = res.objective;
  if (res.objective >= -tol) {
    out.verdict = Verdict::dominates;
    return out;
  }

  TabulatedUtility w(cs.grid, std::vector<double>(res.x.begin(), res.x.begin() + static_cast<std::ptrdiff_t>(n)));
  out.witness_gap = expectation(cs.f, w) - expectation(cs.g, w);
  const auto mem = is_member(w, c, tol);
  if (out.witness_gap < -tol && mem.member) {
    out.verdict = Verdict::fails;
  } else {
    out.verdict = Verdict::inconclusive;
    out.note = mem.member ? "witness gap does not confirm the LP optimum" : "LP witness is not a class member";
  }
  out.witness = std::move(w);
  return out;
}

bool dominates_increasing_bruteforce(const Pmf& f_in, const Pmf& g_in, double tol) {
  const CommonSupport cs = common_grid(f_in, g_in);
  const Grid& grid = *cs.grid;
  const std::size_t n = grid.size();
  if (n > kMaxBruteForceNodes)
    throw std::length_error("dominates_increasing_bruteforce: " + std::to_string(n) + " nodes exceed the limit of " +
                            std::to_string(kMaxBruteForceNodes));
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    bool upper = true;
    for (std::size_t x = 0; x < n && upper; ++x) {
      if (!(mask >> x & 1u)) continue;
      for (std::size_t d = 0; d < grid.dims(); ++d) {
        auto s = grid.successor(x, d);
        if (s && !(mask >> *s & 1u)) {
          upper = false;
          break;
        }
      }
    }
    if (!upper) continue;
    double fm = 0.0, gm = 0.0;
    for (std::size_t x = 0; x < n; ++x)
      if (mask >> x & 1u) {
        fm += cs.f.mass(x);
        gm += cs.g.mass(x);
      }
    if (fm < gm - tol) return false;
  }
  return true;
}

namespace {

void check_eps(double eps, double donor, const char* what) {
  if (!std::isfinite(eps) || eps < 0.0) throw std::invalid_argument(std::string(what) + ": amount must be >= 0");
  if (eps > donor) throw std::invalid_argument(std::string(what) + ": insufficient donor mass");
}

double take(double mass, double eps) { return eps == mass ? 0.0 : mass - eps; }

}  // namespace

Pmf fosd_shift(const Pmf& g, std::size_t from, std::size_t to, double eps) {
  const Grid& grid = g.grid();
  if (from >= grid.size() || to >= grid.size()) throw std::out_of_range("fosd_shift: node out of range");
  if (!grid.leq(from, to)) throw std::invalid_argument("fosd_shift: target node does not dominate the source node");
  check_eps(eps, g.mass(from), "fosd_shift");
  std::vector<double> m(g.masses().begin(), g.masses().end());
  if (from == to || eps == 0.0) return Pmf(g.grid_ptr(), std::move(m));
  m[from] = take(m[from], eps);
  m[to] += eps;
  return Pmf(g.grid_ptr(), std::move(m));
}

Pmf mean_preserving_spread(const Pmf& g, std::size_t axis, std::size_t node, double eps) {
  const Grid& grid = g.grid();
  if (axis >= grid.dims()) throw std::out_of_range("mean_preserving_spread: axis out of range");
  if (node >= grid.size()) throw std::out_of_range("mean_preserving_spread: node out of range");
  const std::size_t i = grid.coord_index(node, axis);
  if (i == 0 || i + 1 >= grid.extent(axis))
    throw std::invalid_argument("mean_preserving_spread: node lies on the boundary of the axis");
  check_eps(eps, g.mass(node), "mean_preserving_spread");
  std::vector<double> m(g.masses().begin(), g.masses().end());
  if (eps == 0.0) return Pmf(g.grid_ptr(), std::move(m));
  const auto& ax = grid.axis(axis);
  const double lower_share = (ax[i + 1] - ax[i]) / (ax[i + 1] - ax[i - 1]);
  m[node] = take(m[node], eps);
  m[node - grid.stride(axis)] += lower_share * eps;
  m[node + grid.stride(axis)] += (1.0 - lower_share) * eps;
  return Pmf(g.grid_ptr(), std::move(m));
}

Pmf concordance_transfer(const Pmf& g, std::size_t low, std::size_t high, double delta) {
  const Grid& grid = g.grid();
  if (low >= grid.size() || high >= grid.size()) throw std::out_of_range("concordance_transfer: node out of range");
  std::vector<std::size_t> differ;
  for (std::size_t d = 0; d < grid.dims(); ++d) {
    const auto a = grid.coord_index(low, d), b = grid.coord_index(high, d);
    if (a > b) throw std::invalid_argument("concordance_transfer: low corner is not below high corner");
    if (a < b) differ.push_back(d);
  }
  if (differ.size() != 2)
    throw std::invalid_argument("concordance_transfer: corners must differ in exactly two coordinates");
  const std::size_t p = differ[0], q = differ[1];
  const std::size_t low_high = low + (grid.coord_index(high, q) - grid.coord_index(low, q)) * grid.stride(q);
  const std::size_t high_low = low + (grid.coord_index(high, p) - grid.coord_index(low, p)) * grid.stride(p);
  check_eps(delta, std::min(g.mass(low_high), g.mass(high_low)), "concordance_transfer");
  std::vector<double> m(g.masses().begin(), g.masses().end());
  if (delta == 0.0) return Pmf(g.grid_ptr(), std::move(m));
  m[low] += delta;
  m[high] += delta;
  m[low_high] = take(m[low_high], delta);
  m[high_low] = take(m[high_low], delta);
  return Pmf(g.grid_ptr(), std::move(m));
}

}  // namespace msearch
