#include "msearch/statics.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "msearch/random.hpp"

namespace msearch {

std::string_view to_string(TheoremId t) {
  switch (t) {
    case TheoremId::T2a: return "T2a";
    case TheoremId::T2b: return "T2b";
    case TheoremId::T2c: return "T2c";
    case TheoremId::T3: return "T3";
    case TheoremId::T4: return "T4";
  }
  return "unknown";
}

TheoremId parse_theorem(std::string_view name) {
  for (auto t : kAllTheorems)
    if (to_string(t) == name) return t;
  throw std::invalid_argument("unknown theorem id '" + std::string(name) + "'");
}

FunctionClass class_for(TheoremId t) {
  switch (t) {
    case TheoremId::T2a: return FunctionClass::increasing;
    case TheoremId::T2b: return FunctionClass::convex;
    case TheoremId::T2c: return FunctionClass::componentwise_convex;
    case TheoremId::T3: return FunctionClass::increasing_supermodular;
    case TheoremId::T4: return FunctionClass::increasing_ultramodular;
  }
  throw std::invalid_argument("unknown theorem id");
}

VerificationReport verify_theorem(const TheoremCase& c) {
  c.params.validate();
  const FunctionClass cls = class_for(c.theorem);
  const CommonSupport cs = common_grid(c.f, c.g);
  if (!same_grid(cs.grid, c.utility.grid_ptr()))
    throw std::invalid_argument("verify_theorem: utility must be tabulated on the common grid of F and G");

  VerificationReport r;
  r.premise_dominance = dominates(cs.f, cs.g, cls, c.class_tol);
  r.premise_membership = is_member(c.utility, cls, c.class_tol).member;
  if (r.premise_dominance.verdict != Verdict::dominates) {
    r.vacuous = true;
    r.reason = "dominance premise " + std::string(to_string(r.premise_dominance.verdict));
    if (!r.premise_dominance.note.empty()) r.reason += ": " + r.premise_dominance.note;
    return r;
  }
  if (!r.premise_membership) {
    r.vacuous = true;
    r.reason = "utility is not " + std::string(to_string(cls));
    return r;
  }
  const Solution sf = reservation_utility(cs.f, c.utility, c.params);
  const Solution sg = reservation_utility(cs.g, c.utility, c.params);
  r.u_f = sf.reservation_utility;
  r.u_g = sg.reservation_utility;
  r.acceptance_f = sf.acceptance.size();
  r.acceptance_g = sg.acceptance.size();
  r.conclusion_holds = r.u_f >= r.u_g - 10.0 * c.params.tol;
  if (!r.conclusion_holds) r.reason = "reservation utility under F is below G";
  return r;
}

std::string_view to_string(CaseOutcome o) {
  switch (o) {
    case CaseOutcome::pass: return "pass";
    case CaseOutcome::fail: return "fail";
    case CaseOutcome::vacuous: return "vacuous";
  }
  return "unknown";
}

CaseOutcome outcome_of(const VerificationReport& r) {
  if (r.vacuous) return CaseOutcome::vacuous;
  return r.conclusion_holds ? CaseOutcome::pass : CaseOutcome::fail;
}

std::vector<std::size_t> default_shape(TheoremId t) {
  if (t == TheoremId::T2a) return {6};
  return {3, 3};
}

namespace {

GridPtr random_grid(const std::vector<std::size_t>& shape, rng::Engine& eng) {
  std::vector<std::vector<double>> axes(shape.size());
  for (std::size_t d = 0; d < shape.size(); ++d) {
    double x = rng::uniform(eng, 0.0, 1.0);
    for (std::size_t i = 0; i < shape[d]; ++i) {
      axes[d].push_back(x);
      x += rng::uniform(eng, 0.5, 2.0);
    }
  }
  return make_grid(std::move(axes));
}

Pmf random_pmf(const GridPtr& grid, rng::Engine& eng) {
  std::vector<double> w(grid->size());
  for (double& x : w) x = -std::log(1.0 - rng::uniform01(eng)) + 1e-3;
  return normalize(grid, std::move(w));
}

Pmf random_fosd(const Pmf& g, rng::Engine& eng) {
  const Grid& grid = g.grid();
  std::vector<std::pair<std::size_t, std::size_t>> moves;
  for (std::size_t a = 0; a < grid.size(); ++a) {
    if (g.mass(a) <= 0.0) continue;
    for (std::size_t b = 0; b < grid.size(); ++b)
      if (a != b && grid.leq(a, b)) moves.emplace_back(a, b);
  }
  if (moves.empty()) return g;
  const auto [from, to] = moves[rng::uniform_index(eng, moves.size())];
  const double eps = rng::uniform(eng, 0.1, 1.0) * g.mass(from);
  return fosd_shift(g, from, to, eps);
}

Pmf random_spread(const Pmf& g, rng::Engine& eng) {
  const Grid& grid = g.grid();
  std::vector<std::pair<std::size_t, std::size_t>> spots;
  for (std::size_t x = 0; x < grid.size(); ++x) {
    if (g.mass(x) <= 0.0) continue;
    for (std::size_t d = 0; d < grid.dims(); ++d) {
      const std::size_t i = grid.coord_index(x, d);
      if (i > 0 && i + 1 < grid.extent(d)) spots.emplace_back(d, x);
    }
  }
  if (spots.empty()) return g;
  const auto [axis, node] = spots[rng::uniform_index(eng, spots.size())];
  const double eps = rng::uniform(eng, 0.1, 1.0) * g.mass(node);
  return mean_preserving_spread(g, axis, node, eps);
}

Pmf random_concordance(const Pmf& g, rng::Engine& eng) {
  const Grid& grid = g.grid();
  const std::size_t K = grid.dims();
  const std::size_t p = rng::uniform_index(eng, K);
  std::size_t q = rng::uniform_index(eng, K - 1);
  if (q >= p) ++q;
  std::vector<std::size_t> lo(K), hi(K);
  for (std::size_t d = 0; d < K; ++d) lo[d] = hi[d] = rng::uniform_index(eng, grid.extent(d));
  for (std::size_t d : {std::min(p, q), std::max(p, q)}) {
    const std::size_t a = rng::uniform_index(eng, grid.extent(d) - 1);
    const std::size_t b = a + 1 + rng::uniform_index(eng, grid.extent(d) - 1 - a);
    lo[d] = a;
    hi[d] = b;
  }
  const std::size_t low = grid.flat_index(lo), high = grid.flat_index(hi);
  const std::size_t low_high = low + (hi[q] - lo[q]) * grid.stride(q);
  const std::size_t high_low = low + (hi[p] - lo[p]) * grid.stride(p);
  const double delta = rng::uniform(eng, 0.1, 1.0) * std::min(g.mass(low_high), g.mass(high_low));
  return concordance_transfer(g, low, high, delta);
}

void validate_spec(const SuiteSpec& spec) {
  const auto shape = spec.shape.empty() ? default_shape(spec.theorem) : spec.shape;
  if (shape.empty()) throw std::invalid_argument("suite: shape must name at least one axis");
  std::size_t nodes = 1;
  for (auto e : shape) {
    if (e < 2) throw std::invalid_argument("suite: every axis needs at least 2 nodes");
    nodes *= e;
  }
  if (nodes > 200) throw std::invalid_argument("suite: grid shape is too large for the dominance programs");
  const bool needs_interior = spec.theorem == TheoremId::T2b || spec.theorem == TheoremId::T2c;
  if (needs_interior && std::none_of(shape.begin(), shape.end(), [](auto e) { return e >= 3; }))
    throw std::invalid_argument("suite: mean-preserving spreads need an axis with at least 3 nodes");
  const bool needs_pair = spec.theorem == TheoremId::T3 || spec.theorem == TheoremId::T4;
  if (needs_pair && shape.size() < 2)
    throw std::invalid_argument("suite: concordance transfers need at least two dimensions");
  if (spec.params) spec.params->validate();
  if (!(spec.tol > 0.0) || !(spec.class_tol > 0.0)) throw std::invalid_argument("suite: tolerances must be > 0");
}

template <class Fn>
void parallel_for(std::size_t count, std::size_t jobs, Fn&& fn) {
  jobs = std::max<std::size_t>(1, std::min(jobs, count));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  if (error) std::rethrow_exception(error);
}

SuiteSummary summarize(const std::vector<SuiteRow>& rows) {
  SuiteSummary s;
  for (const auto& row : rows) {
    switch (outcome_of(row.report)) {
      case CaseOutcome::pass: ++s.pass; break;
      case CaseOutcome::fail: ++s.fail; break;
      case CaseOutcome::vacuous: ++s.vacuous; break;
    }
  }
  return s;
}

}  // namespace

TheoremCase generate_case(const SuiteSpec& spec, std::size_t index) {
  validate_spec(spec);
  auto eng = rng::make_engine(spec.seed, index);
  const auto shape = spec.shape.empty() ? default_shape(spec.theorem) : spec.shape;
  const GridPtr grid = random_grid(shape, eng);
  const Pmf g = random_pmf(grid, eng);

  SearchParams params;
  if (spec.params) {
    params = *spec.params;
  } else {
    params.beta = rng::uniform(eng, 0.05, 0.95);
    params.gamma = rng::uniform(eng, 0.1, 2.0);
    params.tol = spec.tol;
  }

  Pmf f = g;
  const std::size_t transfers = 1 + rng::uniform_index(eng, 3);
  for (std::size_t k = 0; k < transfers; ++k) {
    switch (spec.theorem) {
      case TheoremId::T2a: f = random_fosd(f, eng); break;
      case TheoremId::T2b:
      case TheoremId::T2c: f = random_spread(f, eng); break;
      case TheoremId::T3:
      case TheoremId::T4: f = random_concordance(f, eng); break;
    }
  }
  TabulatedUtility u = random_member(class_for(spec.theorem), grid, eng);
  return TheoremCase{.theorem = spec.theorem,
                     .f = std::move(f),
                     .g = g,
                     .utility = std::move(u),
                     .params = params,
                     .class_tol = spec.class_tol};
}

SuiteReport run_suite(const SuiteSpec& spec) {
  validate_spec(spec);
  std::vector<std::optional<SuiteRow>> slots(spec.cases);
  parallel_for(spec.cases, spec.jobs, [&](std::size_t i) {
    TheoremCase c = generate_case(spec, i);
    VerificationReport r = verify_theorem(c);
    slots[i].emplace(SuiteRow{.case_id = i,
                              .case_seed = rng::derive_seed(spec.seed, i),
                              .input = std::move(c),
                              .report = std::move(r)});
  });
  SuiteReport out;
  out.rows.reserve(slots.size());
  for (auto& s : slots) out.rows.push_back(std::move(*s));
  out.summary = summarize(out.rows);
  return out;
}

SuiteReport run_cases(const std::vector<TheoremCase>& cases, std::size_t jobs) {
  std::vector<std::optional<SuiteRow>> slots(cases.size());
  parallel_for(cases.size(), jobs, [&](std::size_t i) {
    slots[i].emplace(SuiteRow{.case_id = i, .case_seed = 0, .input = cases[i], .report = verify_theorem(cases[i])});
  });
  SuiteReport out;
  for (auto& s : slots) out.rows.push_back(std::move(*s));
  out.summary = summarize(out.rows);
  return out;
}

std::string_view to_string(ClosureOperator op) {
  switch (op) {
    case ClosureOperator::truncate: return "truncate";
    case ClosureOperator::affine: return "affine";
    case ClosureOperator::clamp: return "clamp";
  }
  return "unknown";
}

ClosureOperator parse_closure_operator(std::string_view name) {
  for (auto op : {ClosureOperator::truncate, ClosureOperator::affine, ClosureOperator::clamp})
    if (to_string(op) == name) return op;
  throw std::invalid_argument("unknown closure operator '" + std::string(name) + "'");
}

bool expected_closed(FunctionClass c, ClosureOperator op) {
  if (op == ClosureOperator::affine) return true;
  return c != FunctionClass::supermodular && c != FunctionClass::ultramodular;
}

ClosureReport closure_check(FunctionClass c, ClosureOperator op, std::size_t samples, std::uint64_t seed,
                            double tol) {
  if (samples == 0) throw std::invalid_argument("closure_check: samples must be >= 1");
  ClosureReport rep;
  rep.function_class = c;
  rep.op = op;
  rep.samples = samples;
  rep.closed_expected = expected_closed(c, op);

  for (std::size_t s = 0; s < samples; ++s) {
    auto eng = rng::make_engine(seed, s);
    const std::size_t K = 1 + rng::uniform_index(eng, 3);
    std::vector<std::size_t> shape(K);
    for (auto& e : shape) {
      if (K == 1) e = 3 + rng::uniform_index(eng, 4);
      else if (K == 2) e = 2 + rng::uniform_index(eng, 3);
      else e = 2 + rng::uniform_index(eng, 2);
    }
    const GridPtr grid = random_grid(shape, eng);
    const TabulatedUtility u = random_member(c, grid, eng);
    std::optional<TabulatedUtility> image;
    switch (op) {
      case ClosureOperator::truncate: image = truncate(u); break;
      case ClosureOperator::affine: {
        const double m = rng::uniform(eng, 0.1, 10.0);
        const double n = rng::uniform(eng, 0.0, 5.0);
        image = affine_transform(u, m, n);
        break;
      }
      case ClosureOperator::clamp: {
        const double level = rng::uniform(eng, 0.0, std::max(std::abs(u.min()), std::abs(u.max())));
        const double beta = rng::uniform(eng, 0.05, 0.95);
        image = affine_transform(clamp_below(u, level), 1.0 / (1.0 - beta), 0.0);
        break;
      }
    }
    auto mem = is_member(*image, c, tol);
    if (mem.member) ++rep.preserved;
    else rep.violations.push_back({s, *mem.witness});
  }

  if (rep.closed_expected) {
    rep.passed = rep.violations.empty();
  } else {
    const TabulatedUtility ex = truncation_counterexample();
    const TabulatedUtility ex_image =
        op == ClosureOperator::truncate ? truncate(ex) : affine_transform(clamp_below(ex, 0.0), 2.0, 0.0);
    rep.counterexample_before = is_member(ex, c, tol);
    rep.counterexample_after = is_member(ex_image, c, tol);
    rep.passed = rep.counterexample_before->member && !rep.counterexample_after->member;
  }
  return rep;
}

std::vector<PathPoint> concordance_path(const Pmf& g, std::size_t low, std::size_t high,
                                        const std::vector<double>& deltas, const TabulatedUtility& u,
                                        const SearchParams& params) {
  std::vector<PathPoint> out;
  for (double d : deltas) {
    const Pmf f = concordance_transfer(g, low, high, d);
    const Solution s = reservation_utility(f, u, params);
    out.push_back({d, s.reservation_utility, s.acceptance.size()});
  }
  return out;
}

}  // namespace msearch
