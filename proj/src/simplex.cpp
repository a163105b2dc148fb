#include "msearch/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace msearch::lp {

std::string_view to_string(Status s) {
  switch (s) {
    case Status::optimal: return "optimal";
    case Status::infeasible: return "infeasible";
    case Status::unbounded: return "unbounded";
    case Status::iteration_limit: return "iteration_limit";
    case Status::numerical_failure: return "numerical_failure";
  }
  return "unknown";
}

std::size_t Problem::add_variable(double cost, bool free) {
  cost_.push_back(cost);
  free_.push_back(free);
  return cost_.size() - 1;
}

void Problem::add_row(std::vector<Term> terms, Sense sense, double rhs) {
  for (const auto& t : terms)
    if (t.var >= cost_.size()) throw std::out_of_range("lp: row references unknown variable");
  rows_.push_back({std::move(terms), sense, rhs});
}

struct Solver {
  Solver(const Problem& p, const Options& o) : prob(p), opt(o) {}

  const Problem& prob;
  const Options& opt;

  std::size_t m = 0;       // rows
  std::size_t ncols = 0;   // structural + slack + artificial columns
  std::size_t first_artificial = 0;
  std::vector<std::size_t> pos_col, neg_col;  // neg_col = npos for bounded vars
  std::vector<double> tab;                    // m x (ncols + 1), row-major; last column is rhs
  std::vector<double> dcost;                  // ncols + 1; last entry is -objective
  std::vector<std::size_t> basis;
  std::size_t pivots = 0;
  std::size_t max_pivots = 0;

  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  double& at(std::size_t r, std::size_t c) { return tab[r * (ncols + 1) + c]; }
  double at(std::size_t r, std::size_t c) const { return tab[r * (ncols + 1) + c]; }

  void build() {
    const std::size_t nv = prob.cost_.size();
    m = prob.rows_.size();
    std::size_t col = 0;
    pos_col.resize(nv);
    neg_col.assign(nv, npos);
    for (std::size_t j = 0; j < nv; ++j) {
      pos_col[j] = col++;
      if (prob.free_[j]) neg_col[j] = col++;
    }
    const std::size_t structural = col;
    std::size_t n_slack = 0, n_art = 0;
    for (const auto& row : prob.rows_) {
      const bool flip = row.rhs < 0.0;
      Sense s = row.sense;
      if (flip && s != Sense::equal) s = (s == Sense::less_equal) ? Sense::greater_equal : Sense::less_equal;
      if (s != Sense::equal) ++n_slack;
      if (s != Sense::less_equal) ++n_art;
    }
    first_artificial = structural + n_slack;
    ncols = first_artificial + n_art;
    tab.assign(m * (ncols + 1), 0.0);
    basis.assign(m, npos);

    std::size_t slack = structural, art = first_artificial;
    for (std::size_t r = 0; r < m; ++r) {
      const auto& row = prob.rows_[r];
      const bool flip = row.rhs < 0.0;
      const double sign = flip ? -1.0 : 1.0;
      Sense s = row.sense;
      if (flip && s != Sense::equal) s = (s == Sense::less_equal) ? Sense::greater_equal : Sense::less_equal;
      for (const auto& t : row.terms) {
        at(r, pos_col[t.var]) += sign * t.coef;
        if (neg_col[t.var] != npos) at(r, neg_col[t.var]) -= sign * t.coef;
      }
      at(r, ncols) = sign * row.rhs;
      if (s == Sense::less_equal) {
        at(r, slack) = 1.0;
        basis[r] = slack++;
      } else if (s == Sense::greater_equal) {
        at(r, slack++) = -1.0;
        at(r, art) = 1.0;
        basis[r] = art++;
      } else {
        at(r, art) = 1.0;
        basis[r] = art++;
      }
    }
    max_pivots = opt.max_pivots ? opt.max_pivots : std::max<std::size_t>(20000, 50 * (m + ncols));
  }

  void price(const std::vector<double>& c) {
    dcost.assign(ncols + 1, 0.0);
    for (std::size_t j = 0; j < ncols; ++j) dcost[j] = c[j];
    for (std::size_t r = 0; r < m; ++r) {
      const double cb = c[basis[r]];
      if (cb == 0.0) continue;
      for (std::size_t j = 0; j <= ncols; ++j) dcost[j] -= cb * at(r, j);
    }
  }

  void pivot(std::size_t pr, std::size_t pc) {
    const std::size_t w = ncols + 1;
    double* prow = &tab[pr * w];
    const double inv = 1.0 / prow[pc];
    for (std::size_t j = 0; j < w; ++j) prow[j] *= inv;
    prow[pc] = 1.0;
    for (std::size_t r = 0; r < m; ++r) {
      if (r == pr) continue;
      double* row = &tab[r * w];
      const double f = row[pc];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < w; ++j) row[j] -= f * prow[j];
      row[pc] = 0.0;
    }
    const double f = dcost[pc];
    if (f != 0.0) {
      for (std::size_t j = 0; j < w; ++j) dcost[j] -= f * prow[j];
      dcost[pc] = 0.0;
    }
    basis[pr] = pc;
    ++pivots;
  }

  // Runs Bland pivots over columns [0, allowed_end).
  Status iterate(std::size_t allowed_end) {
    while (true) {
      if (pivots >= max_pivots) return Status::iteration_limit;
      std::size_t enter = npos;
      for (std::size_t j = 0; j < allowed_end; ++j) {
        if (dcost[j] < -opt.cost_tol) {
          enter = j;
          break;
        }
      }
      if (enter == npos) return Status::optimal;
      std::size_t leave = npos;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < m; ++r) {
        const double a = at(r, enter);
        if (a <= opt.pivot_tol) continue;
        const double ratio = std::max(at(r, ncols), 0.0) / a;
        if (ratio < best - 1e-12 || (ratio <= best + 1e-12 && leave != npos && basis[r] < basis[leave])) {
          if (ratio < best) best = ratio;
          leave = r;
        }
      }
      if (leave == npos) return Status::unbounded;
      pivot(leave, enter);
    }
  }

  Result run() {
    build();
    Result res;
    // Phase 1: drive artificials to zero.
    if (first_artificial < ncols) {
      std::vector<double> c1(ncols, 0.0);
      for (std::size_t j = first_artificial; j < ncols; ++j) c1[j] = 1.0;
      price(c1);
      const Status s = iterate(ncols);
      res.pivots = pivots;
      if (s != Status::optimal) {
        res.status = (s == Status::unbounded) ? Status::numerical_failure : s;
        return res;
      }
      double infeas = 0.0;
      for (std::size_t r = 0; r < m; ++r)
        if (basis[r] >= first_artificial) infeas += at(r, ncols);
      if (infeas > opt.feasibility_tol) {
        res.status = Status::infeasible;
        return res;
      }
      for (std::size_t r = 0; r < m; ++r) {
        if (basis[r] < first_artificial) continue;
        std::size_t best = npos;
        double mag = opt.pivot_tol;
        for (std::size_t j = 0; j < first_artificial; ++j) {
          if (std::abs(at(r, j)) > mag) {
            mag = std::abs(at(r, j));
            best = j;
          }
        }
        if (best != npos) pivot(r, best);
        // Otherwise the row is redundant and its artificial stays basic at zero.
      }
    }
    // Phase 2.
    std::vector<double> c2(ncols, 0.0);
    for (std::size_t j = 0; j < prob.cost_.size(); ++j) {
      c2[pos_col[j]] = prob.cost_[j];
      if (neg_col[j] != npos) c2[neg_col[j]] = -prob.cost_[j];
    }
    price(c2);
    const Status s = iterate(first_artificial);
    res.pivots = pivots;
    if (s != Status::optimal) {
      res.status = s;
      return res;
    }

    std::vector<double> colval(ncols, 0.0);
    for (std::size_t r = 0; r < m; ++r) colval[basis[r]] = std::max(at(r, ncols), 0.0);
    res.x.assign(prob.cost_.size(), 0.0);
    for (std::size_t j = 0; j < prob.cost_.size(); ++j) {
      res.x[j] = colval[pos_col[j]];
      if (neg_col[j] != npos) res.x[j] -= colval[neg_col[j]];
    }
    res.objective = 0.0;
    for (std::size_t j = 0; j < prob.cost_.size(); ++j) res.objective += prob.cost_[j] * res.x[j];

    double scale = 1.0;
    for (const auto& row : prob.rows_) {
      double lhs = 0.0;
      for (const auto& t : row.terms) lhs += t.coef * res.x[t.var];
      double v = 0.0;
      if (row.sense != Sense::greater_equal) v = std::max(v, lhs - row.rhs);
      if (row.sense != Sense::less_equal) v = std::max(v, row.rhs - lhs);
      res.max_violation = std::max(res.max_violation, v);
      scale = std::max(scale, std::abs(row.rhs));
    }
    res.status = res.max_violation <= 1e3 * opt.feasibility_tol * scale ? Status::optimal
                                                                        : Status::numerical_failure;
    return res;
  }
};

Result minimize(const Problem& problem, const Options& options) {
  Solver solver(problem, options);
  return solver.run();
}

}  // namespace msearch::lp
