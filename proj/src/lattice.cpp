#include "msearch/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "msearch/random.hpp"

namespace msearch {

Grid::Grid(std::vector<std::vector<double>> axes) : axes_(std::move(axes)) {
  if (axes_.empty()) throw std::invalid_argument("grid: at least one axis is required");
  for (std::size_t d = 0; d < axes_.size(); ++d) {
    const auto& ax = axes_[d];
    if (ax.empty())
      throw std::invalid_argument("grid: axis " + std::to_string(d) + " is empty");
    for (std::size_t i = 0; i < ax.size(); ++i) {
      if (!std::isfinite(ax[i]))
        throw std::invalid_argument("grid: axis " + std::to_string(d) + " has a non-finite coordinate");
      if (i > 0 && !(ax[i - 1] < ax[i]))
        throw std::invalid_argument("grid: axis " + std::to_string(d) +
                                    " is not strictly increasing");
    }
  }
  strides_.assign(axes_.size(), 1);
  for (std::size_t d = axes_.size() - 1; d > 0; --d) strides_[d - 1] = strides_[d] * axes_[d].size();
  size_ = strides_[0] * axes_[0].size();
}

std::vector<std::size_t> Grid::multi_index(std::size_t node) const {
  std::vector<std::size_t> idx(dims());
  for (std::size_t d = 0; d < dims(); ++d) idx[d] = coord_index(node, d);
  return idx;
}

std::size_t Grid::flat_index(std::span<const std::size_t> idx) const {
  if (idx.size() != dims()) throw std::invalid_argument("grid: index has wrong dimension");
  std::size_t node = 0;
  for (std::size_t d = 0; d < dims(); ++d) {
    if (idx[d] >= axes_[d].size()) throw std::out_of_range("grid: index out of range");
    node += idx[d] * strides_[d];
  }
  return node;
}

std::vector<double> Grid::point(std::size_t node) const {
  std::vector<double> p(dims());
  for (std::size_t d = 0; d < dims(); ++d) p[d] = coord(node, d);
  return p;
}

std::optional<std::size_t> Grid::find(std::span<const double> point) const {
  if (point.size() != dims()) return std::nullopt;
  std::size_t node = 0;
  for (std::size_t d = 0; d < dims(); ++d) {
    const auto& ax = axes_[d];
    auto it = std::lower_bound(ax.begin(), ax.end(), point[d]);
    if (it == ax.end() || *it != point[d]) return std::nullopt;
    node += static_cast<std::size_t>(it - ax.begin()) * strides_[d];
  }
  return node;
}

bool Grid::leq(std::size_t a, std::size_t b) const {
  for (std::size_t d = 0; d < dims(); ++d)
    if (coord_index(a, d) > coord_index(b, d)) return false;
  return true;
}

GridPtr make_grid(std::vector<std::vector<double>> axes) {
  return std::make_shared<const Grid>(std::move(axes));
}

bool same_grid(const GridPtr& a, const GridPtr& b) {
  return a == b || (a && b && *a == *b);
}

Pmf::Pmf(GridPtr grid, std::vector<double> mass) : grid_(std::move(grid)), mass_(std::move(mass)) {
  if (!grid_) throw std::invalid_argument("pmf: null grid");
  if (mass_.size() != grid_->size())
    throw std::invalid_argument("pmf: expected " + std::to_string(grid_->size()) + " masses, got " +
                                std::to_string(mass_.size()));
  double total = 0.0;
  for (std::size_t i = 0; i < mass_.size(); ++i) {
    if (!std::isfinite(mass_[i]) || mass_[i] < 0.0)
      throw std::invalid_argument("pmf: mass at node " + std::to_string(i) + " is negative or non-finite");
    total += mass_[i];
  }
  if (std::abs(total - 1.0) > kMassTolerance)
    throw std::invalid_argument("pmf: masses sum to " + std::to_string(total) + ", not 1");
}

Pmf make_pmf(GridPtr grid, std::vector<double> weights) { return Pmf(std::move(grid), std::move(weights)); }

Pmf normalize(GridPtr grid, std::vector<double> weights) {
  double total = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) throw std::invalid_argument("normalize: weights must be finite and >= 0");
    total += w;
  }
  if (!(total > 0.0)) throw std::invalid_argument("normalize: weights sum to zero");
  for (double& w : weights) w /= total;
  return Pmf(std::move(grid), std::move(weights));
}

Pmf uniform_pmf(GridPtr grid) {
  const std::size_t n = grid->size();
  return Pmf(std::move(grid), std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

Pmf point_mass(GridPtr grid, std::size_t node) {
  std::vector<double> m(grid->size(), 0.0);
  m.at(node) = 1.0;
  return Pmf(std::move(grid), std::move(m));
}

TabulatedUtility::TabulatedUtility(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_) throw std::invalid_argument("utility: null grid");
  if (values_.size() != grid_->size())
    throw std::invalid_argument("utility: expected " + std::to_string(grid_->size()) + " values, got " +
                                std::to_string(values_.size()));
  for (std::size_t i = 0; i < values_.size(); ++i)
    if (!std::isfinite(values_[i]))
      throw std::invalid_argument("utility: value at node " + std::to_string(i) + " is not finite");
}

double TabulatedUtility::min() const { return *std::min_element(values_.begin(), values_.end()); }
double TabulatedUtility::max() const { return *std::max_element(values_.begin(), values_.end()); }

void SearchParams::validate() const {
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("params: beta must lie in (0, 1)");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("params: gamma must be > 0");
  if (!(tol > 0.0) || !std::isfinite(tol)) throw std::invalid_argument("params: tol must be > 0");
}

double expectation(const Pmf& pmf, const TabulatedUtility& u) {
  if (!same_grid(pmf.grid_ptr(), u.grid_ptr()))
    throw std::invalid_argument("expectation: pmf and utility live on different grids");
  double sum = 0.0;
  const auto m = pmf.masses();
  const auto v = u.values();
  for (std::size_t i = 0; i < m.size(); ++i) sum += m[i] * v[i];
  return sum;
}

Pmf marginal(const Pmf& pmf, std::size_t dim) {
  const Grid& grid = pmf.grid();
  if (dim >= grid.dims()) throw std::out_of_range("marginal: dimension out of range");
  std::vector<double> m(grid.extent(dim), 0.0);
  for (std::size_t node = 0; node < grid.size(); ++node) m[grid.coord_index(node, dim)] += pmf.mass(node);
  return Pmf(make_grid({grid.axis(dim)}), std::move(m));
}

Pmf embed(const Pmf& pmf, const GridPtr& target) {
  const Grid& src = pmf.grid();
  if (target->dims() != src.dims()) throw std::invalid_argument("embed: dimension mismatch");
  if (same_grid(pmf.grid_ptr(), target)) return Pmf(target, {pmf.masses().begin(), pmf.masses().end()});
  std::vector<double> m(target->size(), 0.0);
  for (std::size_t node = 0; node < src.size(); ++node) {
    const auto p = src.point(node);
    const auto dst = target->find(p);
    if (!dst) throw std::invalid_argument("embed: target grid does not contain every source coordinate");
    m[*dst] = pmf.mass(node);
  }
  return Pmf(target, std::move(m));
}

CommonSupport common_grid(const Pmf& f, const Pmf& g) {
  if (f.grid().dims() != g.grid().dims()) throw std::invalid_argument("common_grid: dimension mismatch");
  if (same_grid(f.grid_ptr(), g.grid_ptr())) return {f.grid_ptr(), f, Pmf(f.grid_ptr(), {g.masses().begin(), g.masses().end()})};
  std::vector<std::vector<double>> axes(f.grid().dims());
  for (std::size_t d = 0; d < axes.size(); ++d) {
    const auto& a = f.grid().axis(d);
    const auto& b = g.grid().axis(d);
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(axes[d]));
  }
  auto grid = make_grid(std::move(axes));
  return {grid, embed(f, grid), embed(g, grid)};
}

std::vector<std::size_t> sample_offers(const Pmf& pmf, std::uint64_t seed, std::size_t n) {
  if (n == 0) throw std::invalid_argument("sample_offers: n must be >= 1");
  std::vector<double> cdf(pmf.size());
  std::partial_sum(pmf.masses().begin(), pmf.masses().end(), cdf.begin());
  // Nodes with zero mass are never returned: inversion skips flat cdf steps.
  const double total = cdf.back();
  auto eng = rng::make_engine(seed, 0);
  std::vector<std::size_t> out(n);
  for (auto& draw : out) {
    const double r = rng::uniform01(eng) * total;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), r);
    if (it == cdf.end()) it = std::prev(cdf.end());
    std::size_t node = static_cast<std::size_t>(it - cdf.begin());
    while (pmf.mass(node) == 0.0 && node > 0) --node;
    draw = node;
  }
  return out;
}

}  // namespace msearch
