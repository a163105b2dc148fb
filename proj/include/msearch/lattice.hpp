#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace msearch {

/// Absolute tolerance on the total mass of a distribution.
inline constexpr double kMassTolerance = 1e-9;

/**
 * Finite K-dimensional lattice: the Cartesian product of K strictly
 * increasing coordinate axes.
 *
 * Nodes are numbered in lexicographic order of their per-axis indices with
 * the first axis most significant, so on {1,2}x{1,2} the order is
 * (1,1), (1,2), (2,1), (2,2). Every tabulation in the library uses this order.
 */
class Grid {
 public:
  explicit Grid(std::vector<std::vector<double>> axes);

  std::size_t dims() const { return axes_.size(); }
  std::size_t size() const { return size_; }

  const std::vector<std::vector<double>>& axes() const { return axes_; }
  const std::vector<double>& axis(std::size_t d) const { return axes_.at(d); }
  std::size_t extent(std::size_t d) const { return axes_[d].size(); }
  std::size_t stride(std::size_t d) const { return strides_[d]; }

  /// Index of `node` along axis d.
  std::size_t coord_index(std::size_t node, std::size_t d) const {
    return (node / strides_[d]) % axes_[d].size();
  }
  double coord(std::size_t node, std::size_t d) const {
    return axes_[d][coord_index(node, d)];
  }

  std::vector<std::size_t> multi_index(std::size_t node) const;
  std::size_t flat_index(std::span<const std::size_t> idx) const;
  std::vector<double> point(std::size_t node) const;

  /// Node whose coordinates equal `point` exactly, if any.
  std::optional<std::size_t> find(std::span<const double> point) const;

  /// Successor of `node` along axis d, if it is not on the upper boundary.
  std::optional<std::size_t> successor(std::size_t node, std::size_t d) const {
    if (coord_index(node, d) + 1 >= axes_[d].size()) return std::nullopt;
    return node + strides_[d];
  }

  /// Componentwise order: a <= b in every coordinate.
  bool leq(std::size_t a, std::size_t b) const;

  bool operator==(const Grid& other) const { return axes_ == other.axes_; }

 private:
  std::vector<std::vector<double>> axes_;
  std::vector<std::size_t> strides_;
  std::size_t size_ = 0;
};

using GridPtr = std::shared_ptr<const Grid>;

GridPtr make_grid(std::vector<std::vector<double>> axes);

bool same_grid(const GridPtr& a, const GridPtr& b);

/// Probability mass function over the nodes of a grid. Masses are validated,
/// never rescaled.
class Pmf {
 public:
  Pmf(GridPtr grid, std::vector<double> mass);

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  std::span<const double> masses() const { return mass_; }
  double mass(std::size_t node) const { return mass_.at(node); }
  std::size_t size() const { return mass_.size(); }

  bool operator==(const Pmf& other) const {
    return same_grid(grid_, other.grid_) && mass_ == other.mass_;
  }

 private:
  GridPtr grid_;
  std::vector<double> mass_;
};

Pmf make_pmf(GridPtr grid, std::vector<double> weights);

/// Divides nonnegative weights by their sum. The only place masses are
/// rescaled; callers opt in explicitly.
Pmf normalize(GridPtr grid, std::vector<double> weights);

Pmf uniform_pmf(GridPtr grid);
Pmf point_mass(GridPtr grid, std::size_t node);

/// Real-valued function tabulated on every node of a grid.
class TabulatedUtility {
 public:
  TabulatedUtility(GridPtr grid, std::vector<double> values);

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t node) const { return values_[node]; }
  double at(std::size_t node) const { return values_.at(node); }
  std::size_t size() const { return values_.size(); }

  double min() const;
  double max() const;

  bool operator==(const TabulatedUtility& other) const {
    return same_grid(grid_, other.grid_) && values_ == other.values_;
  }

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

struct SearchParams {
  double beta = 0.5;
  double gamma = 1.0;
  double tol = 1e-10;

  /// Throws std::invalid_argument unless 0 < beta < 1, gamma > 0, tol > 0.
  void validate() const;
};

/// Sum over nodes of mass times utility.
double expectation(const Pmf& pmf, const TabulatedUtility& u);

/// Distribution of coordinate `dim` on a one-dimensional grid.
Pmf marginal(const Pmf& pmf, std::size_t dim);

/// Re-indexes `pmf` onto `target`, whose axes must contain every coordinate
/// of the pmf's axes.
Pmf embed(const Pmf& pmf, const GridPtr& target);

struct CommonSupport {
  GridPtr grid;
  Pmf f;
  Pmf g;
};

/// Places both pmfs on the per-axis union of their coordinates.
CommonSupport common_grid(const Pmf& f, const Pmf& g);

/// n i.i.d. node draws by inversion of the cumulative masses.
std::vector<std::size_t> sample_offers(const Pmf& pmf, std::uint64_t seed, std::size_t n);

}  // namespace msearch
