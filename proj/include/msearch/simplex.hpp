#pragma once

#include <cstddef>
#include <string_view>
#include <utility>
#include <vector>

// Small dense two-phase simplex solver.
//
//   minimize    c'x
//   subject to  a_r'x {<=, >=, =} b_r   for every row r
//               x_j >= 0, or x_j free
//
// Pivoting follows Bland's rule (lowest-index entering column, lowest-index
// leaving basic variable on ratio ties), so degenerate programs terminate.
// Sized for the dominance and membership programs: a few thousand columns
// at most.

namespace msearch::lp {

enum class Sense { less_equal, greater_equal, equal };

enum class Status { optimal, infeasible, unbounded, iteration_limit, numerical_failure };

std::string_view to_string(Status s);

struct Term {
  std::size_t var;
  double coef;
};

class Problem {
 public:
  /// Adds a variable with objective coefficient `cost`; returns its index.
  std::size_t add_variable(double cost = 0.0, bool free = false);
  void add_row(std::vector<Term> terms, Sense sense, double rhs);

  std::size_t num_vars() const { return cost_.size(); }
  std::size_t num_rows() const { return rows_.size(); }

 private:
  friend struct Solver;
  struct Row {
    std::vector<Term> terms;
    Sense sense;
    double rhs;
  };
  std::vector<double> cost_;
  std::vector<bool> free_;
  std::vector<Row> rows_;
};

struct Options {
  double pivot_tol = 1e-11;
  double cost_tol = 1e-11;
  double feasibility_tol = 1e-9;
  std::size_t max_pivots = 0;  // 0 selects 50 * (rows + columns), at least 20000
};

struct Result {
  Status status = Status::numerical_failure;
  double objective = 0.0;
  std::vector<double> x;
  std::size_t pivots = 0;
  /// Largest row violation of x recomputed from the original rows.
  double max_violation = 0.0;
};

Result minimize(const Problem& problem, const Options& options = {});

}  // namespace msearch::lp
