#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "msearch/lattice.hpp"
#include "msearch/random.hpp"

using namespace msearch;

namespace {

GridPtr square() { return make_grid({{1, 2}, {1, 2}}); }

TabulatedUtility coordinate_sum(const GridPtr& g) {
  std::vector<double> v(g->size());
  for (std::size_t i = 0; i < g->size(); ++i)
    for (std::size_t d = 0; d < g->dims(); ++d) v[i] += g->coord(i, d);
  return {g, v};
}

}  // namespace

TEST_CASE("grid nodes are lexicographic with the first axis most significant") {
  auto g = square();
  CHECK(g->size() == 4);
  CHECK(g->point(0) == std::vector<double>{1, 1});
  CHECK(g->point(1) == std::vector<double>{1, 2});
  CHECK(g->point(2) == std::vector<double>{2, 1});
  CHECK(g->point(3) == std::vector<double>{2, 2});
  CHECK(g->successor(0, 0) == 2u);
  CHECK(g->successor(0, 1) == 1u);
  CHECK_FALSE(g->successor(3, 0).has_value());
  CHECK(g->leq(0, 3));
  CHECK_FALSE(g->leq(1, 2));
  CHECK_FALSE(g->leq(2, 1));

  auto g3 = make_grid({{0, 1}, {0, 1, 2}, {5, 6}});
  for (std::size_t i = 0; i < g3->size(); ++i) CHECK(g3->flat_index(g3->multi_index(i)) == i);
  const std::vector<double> p{1, 2, 5};
  CHECK(g3->find(p) == g3->flat_index(std::vector<std::size_t>{1, 2, 0}));
  const std::vector<double> missing{1, 1.5, 5};
  CHECK_FALSE(g3->find(missing).has_value());
}

TEST_CASE("grid construction rejects bad axes") {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double inf = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(make_grid({}), std::invalid_argument);
  CHECK_THROWS_AS(make_grid({{}}), std::invalid_argument);
  CHECK_THROWS_AS(make_grid({{1, 1}}), std::invalid_argument);
  CHECK_THROWS_AS(make_grid({{2, 1}}), std::invalid_argument);
  CHECK_THROWS_AS(make_grid({{1, nan}}), std::invalid_argument);
  CHECK_THROWS_AS(make_grid({{1, inf}}), std::invalid_argument);
}

TEST_CASE("pmf validation") {
  auto g = square();
  CHECK_NOTHROW(make_pmf(g, {0.25, 0.25, 0.25, 0.25}));
  CHECK_NOTHROW(make_pmf(g, {0.5, 0, 0, 0.5}));
  CHECK_THROWS_AS(make_pmf(g, {0.3, 0.2, 0.2, 0.2}), std::invalid_argument);
  CHECK_THROWS_AS(make_pmf(g, {1.1, -0.1, 0, 0}), std::invalid_argument);
  CHECK_THROWS_AS(make_pmf(g, {0.5, 0.5}), std::invalid_argument);
  CHECK(uniform_pmf(g).masses()[2] == doctest::Approx(0.25));
  CHECK(normalize(g, {1, 1, 1, 1}) == uniform_pmf(g));
  CHECK(point_mass(g, 3).mass(3) == 1.0);
}

TEST_CASE("expectation examples") {
  auto g = square();
  auto diag = make_pmf(g, {0.5, 0, 0, 0.5});
  CHECK(expectation(diag, coordinate_sum(g)) == doctest::Approx(3.0).epsilon(1e-15));

  TabulatedUtility ex1(g, {5, -5, 14, 5});
  CHECK(expectation(uniform_pmf(g), ex1) == doctest::Approx(4.75).epsilon(1e-15));

  TabulatedUtility c(g, {2.5, 2.5, 2.5, 2.5});
  CHECK(expectation(diag, c) == doctest::Approx(2.5));

  auto other = make_grid({{1, 2}, {1, 3}});
  CHECK_THROWS_AS(expectation(diag, TabulatedUtility(other, {0, 0, 0, 0})), std::invalid_argument);
}

TEST_CASE("expectation is linear in masses and values") {
  auto g = make_grid({{0, 1, 2}, {0, 3}});
  auto eng = rng::make_engine(7, 0);
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<double> w1(6), w2(6), a(6), b(6);
    for (std::size_t i = 0; i < 6; ++i) {
      w1[i] = rng::uniform01(eng);
      w2[i] = rng::uniform01(eng);
      a[i] = rng::uniform(eng, -3, 3);
      b[i] = rng::uniform(eng, -3, 3);
    }
    auto p = normalize(g, w1), q = normalize(g, w2);
    TabulatedUtility ua(g, a), ub(g, b);
    std::vector<double> sum(6), mix(6);
    for (std::size_t i = 0; i < 6; ++i) {
      sum[i] = 2 * a[i] - b[i];
      mix[i] = 0.3 * p.mass(i) + 0.7 * q.mass(i);
    }
    CHECK(expectation(p, TabulatedUtility(g, sum)) ==
          doctest::Approx(2 * expectation(p, ua) - expectation(p, ub)).epsilon(1e-12));
    CHECK(expectation(make_pmf(g, mix), ua) ==
          doctest::Approx(0.3 * expectation(p, ua) + 0.7 * expectation(q, ua)).epsilon(1e-12));
  }
}

TEST_CASE("marginal examples") {
  auto g = square();
  auto m0 = marginal(make_pmf(g, {0.5, 0, 0, 0.5}), 0);
  CHECK(m0.grid().axis(0) == std::vector<double>{1, 2});
  CHECK(m0.mass(0) == doctest::Approx(0.5));
  CHECK(m0.mass(1) == doctest::Approx(0.5));
  auto m1 = marginal(uniform_pmf(g), 1);
  CHECK(m1.mass(0) == doctest::Approx(0.5));
  CHECK(m1.mass(1) == doctest::Approx(0.5));

  auto line = make_grid({{0, 1, 2}});
  auto p = make_pmf(line, {0.2, 0.3, 0.5});
  auto m = marginal(p, 0);
  CHECK(m.grid() == p.grid());
  CHECK(std::vector<double>(m.masses().begin(), m.masses().end()) ==
        std::vector<double>(p.masses().begin(), p.masses().end()));
  CHECK_THROWS_AS(marginal(p, 1), std::out_of_range);
}

TEST_CASE("common grid examples") {
  auto g = square();
  auto u = uniform_pmf(g);
  auto cs = common_grid(u, u);
  CHECK(*cs.grid == *g);
  CHECK(cs.f == u);

  auto f = make_pmf(make_grid({{1, 2}}), {0.4, 0.6});
  auto h = make_pmf(make_grid({{2, 3}}), {0.7, 0.3});
  auto c = common_grid(f, h);
  CHECK(c.grid->axis(0) == std::vector<double>{1, 2, 3});
  CHECK(std::vector<double>(c.f.masses().begin(), c.f.masses().end()) == std::vector<double>{0.4, 0.6, 0});
  CHECK(std::vector<double>(c.g.masses().begin(), c.g.masses().end()) == std::vector<double>{0, 0.7, 0.3});

  CHECK_THROWS_AS(common_grid(f, u), std::invalid_argument);
}

TEST_CASE("common grid preserves expectations (20 random cases)") {
  auto eng = rng::make_engine(11, 0);
  auto random_axis = [&](std::size_t n) {
    std::vector<double> a;
    double x = std::floor(rng::uniform(eng, -3, 3));
    for (std::size_t i = 0; i < n; ++i) {
      a.push_back(x);
      x += 1 + rng::uniform_index(eng, 2);
    }
    return a;
  };
  for (int rep = 0; rep < 20; ++rep) {
    auto gf = make_grid({random_axis(2 + rng::uniform_index(eng, 3)), random_axis(2)});
    auto gg = make_grid({random_axis(3), random_axis(1 + rng::uniform_index(eng, 3))});
    std::vector<double> wf(gf->size()), wg(gg->size());
    for (auto& w : wf) w = rng::uniform01(eng);
    for (auto& w : wg) w = rng::uniform01(eng);
    auto f = normalize(gf, wf), g = normalize(gg, wg);
    auto cs = common_grid(f, g);

    // A utility given by a formula in the coordinates, tabulated on each grid.
    auto formula = [](const std::vector<double>& x) { return std::sin(x[0]) * x[1] + x[0] * x[0]; };
    auto tab = [&](const GridPtr& grid) {
      std::vector<double> v(grid->size());
      for (std::size_t i = 0; i < grid->size(); ++i) v[i] = formula(grid->point(i));
      return TabulatedUtility(grid, v);
    };
    // Direct summation on the original supports.
    double ef = 0, eg = 0;
    for (std::size_t i = 0; i < gf->size(); ++i) ef += f.mass(i) * formula(gf->point(i));
    for (std::size_t i = 0; i < gg->size(); ++i) eg += g.mass(i) * formula(gg->point(i));
    CHECK(std::abs(expectation(cs.f, tab(cs.grid)) - ef) <= 1e-12 * (1 + std::abs(ef)));
    CHECK(std::abs(expectation(cs.g, tab(cs.grid)) - eg) <= 1e-12 * (1 + std::abs(eg)));
  }
}

TEST_CASE("sample_offers") {
  auto g = square();
  auto degenerate = point_mass(g, 2);
  for (auto n : sample_offers(degenerate, 3, 1000)) CHECK(n == 2u);

  auto u = uniform_pmf(g);
  CHECK(sample_offers(u, 42, 500) == sample_offers(u, 42, 500));
  CHECK(sample_offers(u, 42, 500) != sample_offers(u, 43, 500));

  const std::size_t n = 100000;
  std::vector<double> freq(4, 0.0);
  for (auto node : sample_offers(u, 2024, n)) freq[node] += 1.0 / n;
  for (double fr : freq) CHECK(std::abs(fr - 0.25) < 0.01);

  auto zeros = make_pmf(g, {0.5, 0, 0, 0.5});
  for (auto node : sample_offers(zeros, 5, 2000)) CHECK((node == 0 || node == 3));
}
