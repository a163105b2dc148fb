#include "msearch/utility.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "msearch/simplex.hpp"

namespace msearch {

std::string_view to_string(FunctionClass c) {
  switch (c) {
    case FunctionClass::increasing: return "increasing";
    case FunctionClass::convex: return "convex";
    case FunctionClass::componentwise_convex: return "componentwise_convex";
    case FunctionClass::supermodular: return "supermodular";
    case FunctionClass::ultramodular: return "ultramodular";
    case FunctionClass::increasing_supermodular: return "increasing_supermodular";
    case FunctionClass::increasing_ultramodular: return "increasing_ultramodular";
  }
  return "unknown";
}

FunctionClass parse_function_class(std::string_view name) {
  for (auto c : kAllClasses)
    if (to_string(c) == name) return c;
  throw std::invalid_argument("unknown function class '" + std::string(name) + "'");
}

ClassParts parts_of(FunctionClass c) {
  switch (c) {
    case FunctionClass::increasing: return {.increasing = true};
    case FunctionClass::convex: return {.convex = true};
    case FunctionClass::componentwise_convex: return {.componentwise_convex = true};
    case FunctionClass::supermodular: return {.supermodular = true};
    case FunctionClass::ultramodular: return {.componentwise_convex = true, .supermodular = true};
    case FunctionClass::increasing_supermodular: return {.increasing = true, .supermodular = true};
    case FunctionClass::increasing_ultramodular:
      return {.increasing = true, .componentwise_convex = true, .supermodular = true};
  }
  throw std::invalid_argument("unknown function class");
}

double LocalConstraint::slack(std::span<const double> u) const {
  double s = 0.0;
  for (std::size_t k = 0; k < nodes.size(); ++k) s += coef[k] * u[nodes[k]];
  return s;
}

std::vector<LocalConstraint> local_constraints(const Grid& grid, const ClassParts& parts) {
  std::vector<LocalConstraint> out;
  const std::size_t n = grid.size();
  const std::size_t K = grid.dims();
  if (parts.increasing) {
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t d = 0; d < K; ++d)
        if (auto s = grid.successor(x, d)) out.push_back({"increasing", {x, *s}, {-1.0, 1.0}});
  }
  if (parts.componentwise_convex) {
    for (std::size_t x = 0; x < n; ++x) {
      for (std::size_t d = 0; d < K; ++d) {
        const std::size_t i = grid.coord_index(x, d);
        if (i == 0 || i + 1 >= grid.extent(d)) continue;
        const auto& ax = grid.axis(d);
        const double h_lo = ax[i] - ax[i - 1];
        const double h_hi = ax[i + 1] - ax[i];
        const std::size_t lo = x - grid.stride(d), hi = x + grid.stride(d);
        out.push_back({"componentwise_convex",
                       {lo, x, hi},
                       {1.0 / h_lo, -1.0 / h_lo - 1.0 / h_hi, 1.0 / h_hi}});
      }
    }
  }
  if (parts.supermodular) {
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t p = 0; p < K; ++p)
        for (std::size_t q = p + 1; q < K; ++q) {
          auto xp = grid.successor(x, p);
          auto xq = grid.successor(x, q);
          if (!xp || !xq) continue;
          const std::size_t xpq = *xp + grid.stride(q);
          out.push_back({"supermodular", {x, *xq, *xp, xpq}, {1.0, -1.0, -1.0, 1.0}});
        }
  }
  return out;
}

double convex_defect(const TabulatedUtility& u, std::size_t node) {
  const Grid& grid = u.grid();
  const std::size_t K = grid.dims();
  lp::Problem prob;
  std::vector<std::size_t> g(K);
  for (std::size_t d = 0; d < K; ++d) g[d] = prob.add_variable(0.0, true);
  const std::size_t z = prob.add_variable(1.0);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    if (j == node) continue;
    std::vector<lp::Term> terms;
    for (std::size_t d = 0; d < K; ++d) {
      const double step = grid.coord(j, d) - grid.coord(node, d);
      if (step != 0.0) terms.push_back({g[d], step});
    }
    terms.push_back({z, -1.0});
    prob.add_row(std::move(terms), lp::Sense::less_equal, u[j] - u[node]);
  }
  if (prob.num_rows() == 0) return 0.0;
  const auto res = lp::minimize(prob);
  if (res.status != lp::Status::optimal)
    throw std::runtime_error("convexity test: subgradient program ended with status " +
                             std::string(lp::to_string(res.status)));
  return std::max(res.objective, 0.0);
}

Membership is_member(const TabulatedUtility& u, FunctionClass c, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("is_member: tol must be > 0");
  const ClassParts parts = parts_of(c);
  Membership out;
  out.margin = std::numeric_limits<double>::infinity();
  for (const auto& con : local_constraints(u.grid(), parts)) {
    const double s = con.slack(u.values());
    out.margin = std::min(out.margin, s);
    if (s < -tol && !out.witness) out.witness = Violation{std::string(con.kind), con.nodes, s};
  }
  if (parts.convex) {
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double defect = convex_defect(u, i);
      out.margin = std::min(out.margin, -defect);
      if (defect > tol && !out.witness) out.witness = Violation{"convex", {i}, -defect};
    }
  }
  out.member = !out.witness.has_value();
  return out;
}

TabulatedUtility tabulate_linear(const GridPtr& grid, std::span<const double> a, double b) {
  if (a.size() != grid->dims())
    throw std::invalid_argument("linear family: expected " + std::to_string(grid->dims()) + " slopes");
  std::vector<double> v(grid->size(), b);
  for (std::size_t x = 0; x < grid->size(); ++x)
    for (std::size_t d = 0; d < grid->dims(); ++d) v[x] += a[d] * grid->coord(x, d);
  return TabulatedUtility(grid, std::move(v));
}

TabulatedUtility tabulate_product(const GridPtr& grid) {
  std::vector<double> v(grid->size(), 1.0);
  for (std::size_t x = 0; x < grid->size(); ++x)
    for (std::size_t d = 0; d < grid->dims(); ++d) v[x] *= grid->coord(x, d);
  return TabulatedUtility(grid, std::move(v));
}

TabulatedUtility tabulate_min(const GridPtr& grid) {
  std::vector<double> v(grid->size());
  for (std::size_t x = 0; x < grid->size(); ++x) {
    double m = grid->coord(x, 0);
    for (std::size_t d = 1; d < grid->dims(); ++d) m = std::min(m, grid->coord(x, d));
    v[x] = m;
  }
  return TabulatedUtility(grid, std::move(v));
}

TabulatedUtility tabulate_family(const FamilySpec& spec, const GridPtr& grid) {
  const std::size_t K = grid->dims();
  if (spec.family == "linear") {
    if (spec.coefficients.empty()) return tabulate_linear(grid, std::vector<double>(K, 1.0));
    if (spec.coefficients.size() == K) return tabulate_linear(grid, spec.coefficients);
    if (spec.coefficients.size() == K + 1)
      return tabulate_linear(grid, std::span(spec.coefficients).first(K), spec.coefficients.back());
    throw std::invalid_argument("linear family: expected " + std::to_string(K) + " or " +
                                std::to_string(K + 1) + " coefficients");
  }
  if (spec.family == "product" || spec.family == "min") {
    if (!spec.coefficients.empty())
      throw std::invalid_argument(spec.family + " family takes no coefficients");
    return spec.family == "product" ? tabulate_product(grid) : tabulate_min(grid);
  }
  if (spec.family == "custom") return TabulatedUtility(grid, spec.values);
  throw std::invalid_argument("unknown utility family '" + spec.family + "'");
}

TabulatedUtility truncate(const TabulatedUtility& u) { return clamp_below(u, 0.0); }

TabulatedUtility affine_transform(const TabulatedUtility& u, double m, double n) {
  if (!(m > 0.0) || !std::isfinite(m)) throw std::invalid_argument("affine_transform: m must be > 0");
  if (!(n >= 0.0) || !std::isfinite(n)) throw std::invalid_argument("affine_transform: n must be >= 0");
  std::vector<double> v(u.values().begin(), u.values().end());
  for (double& x : v) x = m * x + n;
  return TabulatedUtility(u.grid_ptr(), std::move(v));
}

TabulatedUtility clamp_below(const TabulatedUtility& u, double level) {
  if (!std::isfinite(level)) throw std::invalid_argument("clamp_below: level must be finite");
  std::vector<double> v(u.values().begin(), u.values().end());
  for (double& x : v) x = std::max(x, level);
  return TabulatedUtility(u.grid_ptr(), std::move(v));
}

TabulatedUtility truncation_counterexample() {
  return TabulatedUtility(make_grid({{1.0, 2.0}, {1.0, 2.0}}), {5.0, -5.0, 14.0, 5.0});
}

namespace {

// Per-axis building blocks. Each returns the piece evaluated on the axis
// coordinates.
using Piece = std::vector<double>;

enum class Shape { any, increasing, increasing_convex, decreasing_convex, convex };

double pick_knot(const std::vector<double>& ax, rng::Engine& eng) {
  return ax[rng::uniform_index(eng, ax.size())];
}

Piece make_piece(const std::vector<double>& ax, Shape shape, bool nonneg, rng::Engine& eng) {
  Piece p(ax.size());
  const double lo = ax.front();
  const double c = pick_knot(ax, eng);
  const int variant = static_cast<int>(rng::uniform_index(eng, 3));
  for (std::size_t i = 0; i < ax.size(); ++i) {
    const double x = ax[i];
    switch (shape) {
      case Shape::increasing:
        if (variant == 0) p[i] = x >= c ? 1.0 : 0.0;
        else if (variant == 1) p[i] = x - lo;
        else p[i] = std::min(x, c) - lo;  // increasing concave
        break;
      case Shape::increasing_convex:
        p[i] = variant == 0 ? std::max(x - c, 0.0) : (variant == 1 ? x - lo : (x - lo) * (x - lo));
        break;
      case Shape::decreasing_convex:
        p[i] = variant == 0 ? std::max(c - x, 0.0) : (ax.back() - x) * (ax.back() - x);
        break;
      case Shape::convex:
        p[i] = variant == 0 ? std::abs(x - c) : (variant == 1 ? (x - c) * (x - c) : std::max(x - c, 0.0));
        break;
      case Shape::any:
        p[i] = rng::uniform(eng, -1.0, 1.0);
        break;
    }
  }
  if (!nonneg && shape != Shape::any && rng::coin(eng)) {
    // A negative constant offset keeps the shape but lets products change sign.
    const double off = rng::uniform(eng, 0.0, 1.0);
    for (double& v : p) v -= off;
  }
  return p;
}

struct Builder {
  const Grid& grid;
  rng::Engine& eng;
  std::vector<double> v;

  Builder(const Grid& g, rng::Engine& e) : grid(g), eng(e), v(g.size(), 0.0) {}

  double weight() { return rng::uniform(eng, 0.1, 2.0); }

  void add_separable(std::size_t d, const Piece& p, double w) {
    for (std::size_t x = 0; x < grid.size(); ++x) v[x] += w * p[grid.coord_index(x, d)];
  }
  void add_pair(std::size_t p, const Piece& a, std::size_t q, const Piece& b, double w) {
    for (std::size_t x = 0; x < grid.size(); ++x)
      v[x] += w * a[grid.coord_index(x, p)] * b[grid.coord_index(x, q)];
  }
  void add_upper_set(std::size_t z, double w) {
    for (std::size_t x = 0; x < grid.size(); ++x)
      if (grid.leq(z, x)) v[x] += w;
  }
  // Arguments are drawn in a fixed order so the stream of random numbers does
  // not depend on the compiler's argument evaluation order.
  void pair_term(std::size_t p, Shape sp, std::size_t q, Shape sq, bool nonneg) {
    const Piece a = make_piece(grid.axis(p), sp, nonneg, eng);
    const Piece c = make_piece(grid.axis(q), sq, nonneg, eng);
    const double w = weight();
    add_pair(p, a, q, c, w);
  }
  void separable_term(std::size_t d, Shape s, bool nonneg) {
    const Piece a = make_piece(grid.axis(d), s, nonneg, eng);
    const double w = weight();
    add_separable(d, a, w);
  }
  void upper_set_term() {
    const std::size_t z = rng::uniform_index(eng, grid.size());
    const double w = weight();
    add_upper_set(z, w);
  }

  std::pair<std::size_t, std::size_t> two_dims() {
    const std::size_t p = rng::uniform_index(eng, grid.dims());
    std::size_t q = rng::uniform_index(eng, grid.dims() - 1);
    if (q >= p) ++q;
    return {std::min(p, q), std::max(p, q)};
  }
  std::size_t terms() { return 1 + rng::uniform_index(eng, 4); }

  // Shifts by a constant so that a random share of the nodes goes negative.
  void random_offset() {
    const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
    const double shift = *mn + rng::uniform(eng, -0.2, 1.0) * (*mx - *mn);
    for (double& x : v) x -= shift;
  }
};

void build_member(FunctionClass c, Builder& b) {
  const Grid& grid = b.grid;
  const std::size_t K = grid.dims();
  auto& eng = b.eng;
  auto axis = [&]() { return rng::uniform_index(eng, K); };
  switch (c) {
    case FunctionClass::increasing:
      for (std::size_t t = b.terms(); t > 0; --t) {
        if (rng::coin(eng)) {
          b.upper_set_term();
        } else {
          const auto d = axis();
          b.separable_term(d, Shape::increasing, false);
        }
      }
      break;
    case FunctionClass::convex: {
      // Pointwise max of affine functions plus separable convex terms.
      const std::size_t planes = 1 + rng::uniform_index(eng, 3);
      std::vector<double> mx(grid.size(), -std::numeric_limits<double>::infinity());
      for (std::size_t k = 0; k < planes; ++k) {
        std::vector<double> a(K);
        for (double& s : a) s = rng::uniform(eng, -2.0, 2.0);
        const double c0 = rng::uniform(eng, -1.0, 1.0);
        for (std::size_t x = 0; x < grid.size(); ++x) {
          double val = c0;
          for (std::size_t d = 0; d < K; ++d) val += a[d] * grid.coord(x, d);
          mx[x] = std::max(mx[x], val);
        }
      }
      for (std::size_t x = 0; x < grid.size(); ++x) b.v[x] += mx[x];
      for (std::size_t t = rng::uniform_index(eng, 3); t > 0; --t) {
        const auto d = axis();
        b.separable_term(d, Shape::convex, true);
      }
      break;
    }
    case FunctionClass::componentwise_convex:
      for (std::size_t t = b.terms(); t > 0; --t) {
        if (K >= 2 && rng::coin(eng)) {
          // Products of nonnegative convex pieces are convex along each axis.
          const auto [p, q] = b.two_dims();
          const Shape sp = rng::coin(eng) ? Shape::increasing_convex : Shape::decreasing_convex;
          const Shape sq = rng::coin(eng) ? Shape::increasing_convex : Shape::decreasing_convex;
          b.pair_term(p, sp, q, sq, true);
        } else {
          const auto d = axis();
          b.separable_term(d, Shape::convex, true);
        }
      }
      break;
    case FunctionClass::supermodular:
      for (std::size_t d = 0; d < K; ++d)
        if (rng::coin(eng)) b.add_separable(d, make_piece(grid.axis(d), Shape::any, false, eng), 1.0);
      for (std::size_t t = K >= 2 ? b.terms() : 0; t > 0; --t) {
        const auto [p, q] = b.two_dims();
        // Both factors increasing, or both decreasing (negate both).
        auto a = make_piece(grid.axis(p), Shape::increasing, false, eng);
        auto c2 = make_piece(grid.axis(q), Shape::increasing, false, eng);
        if (rng::coin(eng)) {
          for (double& x : a) x = -x;
          for (double& x : c2) x = -x;
        }
        b.add_pair(p, a, q, c2, b.weight());
      }
      break;
    case FunctionClass::ultramodular:
      for (std::size_t t = b.terms(); t > 0; --t) {
        if (K >= 2 && rng::coin(eng)) {
          const auto [p, q] = b.two_dims();
          const Shape s = rng::coin(eng) ? Shape::increasing_convex : Shape::decreasing_convex;
          b.pair_term(p, s, q, s, true);
        } else {
          const auto d = axis();
          b.separable_term(d, Shape::convex, true);
        }
      }
      break;
    case FunctionClass::increasing_supermodular:
      for (std::size_t t = b.terms(); t > 0; --t) {
        const int kind = static_cast<int>(rng::uniform_index(eng, 3));
        if (kind == 0) {
          b.upper_set_term();
        } else if (kind == 1 && K >= 2) {
          const auto [p, q] = b.two_dims();
          b.pair_term(p, Shape::increasing, q, Shape::increasing, true);
        } else {
          const auto d = axis();
          b.separable_term(d, Shape::increasing, false);
        }
      }
      break;
    case FunctionClass::increasing_ultramodular:
      for (std::size_t t = b.terms(); t > 0; --t) {
        if (K >= 2 && rng::coin(eng)) {
          const auto [p, q] = b.two_dims();
          b.pair_term(p, Shape::increasing_convex, q, Shape::increasing_convex, true);
        } else {
          const auto d = axis();
          b.separable_term(d, Shape::increasing_convex, false);
        }
      }
      break;
  }
  b.random_offset();
}

}  // namespace

TabulatedUtility random_member(FunctionClass c, const GridPtr& grid, rng::Engine& eng) {
  for (int attempt = 0; attempt < 64; ++attempt) {
    Builder b(*grid, eng);
    build_member(c, b);
    TabulatedUtility u(grid, std::move(b.v));
    if (is_member(u, c).member) return u;
  }
  throw std::runtime_error("random_member: no verified member of class " + std::string(to_string(c)) +
                           " after 64 attempts");
}

}  // namespace msearch
