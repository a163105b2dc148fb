#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <string>

#include "msearch/dominance.hpp"
#include "msearch/lattice.hpp"
#include "msearch/solver.hpp"
#include "msearch/statics.hpp"
#include "msearch/utility.hpp"

#define STRINGIFY(x) #x
#define MACRO_STRINGIFY(x) STRINGIFY(x)

namespace py = pybind11;
using namespace msearch;

namespace {

// Python sees grids through a mutable-pointer holder; the library only ever
// hands out const grids, so the cast is never used to modify one.
std::shared_ptr<Grid> unconst(const GridPtr& g) { return std::const_pointer_cast<Grid>(g); }

std::vector<double> to_vec(std::span<const double> s) { return {s.begin(), s.end()}; }

py::dict membership_dict(const Membership& m) {
  py::dict d;
  d["member"] = m.member;
  d["margin"] = m.margin;
  if (m.witness) {
    d["witness_kind"] = m.witness->kind;
    d["witness_nodes"] = m.witness->nodes;
    d["witness_margin"] = m.witness->margin;
  } else {
    d["witness_kind"] = py::none();
  }
  return d;
}

py::dict report_dict(const VerificationReport& r) {
  py::dict d;
  d["premise_dominance"] = std::string(to_string(r.premise_dominance.verdict));
  d["lp_optimum"] = r.premise_dominance.lp_optimum;
  d["premise_membership"] = r.premise_membership;
  d["u_F"] = r.u_f;
  d["u_G"] = r.u_g;
  d["conclusion_holds"] = r.conclusion_holds;
  d["vacuous"] = r.vacuous;
  d["outcome"] = std::string(to_string(outcome_of(r)));
  d["reason"] = r.reason;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Multicriteria job search: reservation utilities, stochastic dominance and closure checks";

  py::enum_<FunctionClass>(m, "FunctionClass")
      .value("increasing", FunctionClass::increasing)
      .value("convex", FunctionClass::convex)
      .value("componentwise_convex", FunctionClass::componentwise_convex)
      .value("supermodular", FunctionClass::supermodular)
      .value("ultramodular", FunctionClass::ultramodular)
      .value("increasing_supermodular", FunctionClass::increasing_supermodular)
      .value("increasing_ultramodular", FunctionClass::increasing_ultramodular);

  py::enum_<Verdict>(m, "Verdict")
      .value("dominates", Verdict::dominates)
      .value("fails", Verdict::fails)
      .value("inconclusive", Verdict::inconclusive);

  py::class_<Grid, std::shared_ptr<Grid>>(m, "Grid")
      .def(py::init([](std::vector<std::vector<double>> axes) { return std::make_shared<Grid>(std::move(axes)); }),
           py::arg("axes"))
      .def_property_readonly("dims", &Grid::dims)
      .def_property_readonly("size", &Grid::size)
      .def_property_readonly("axes", &Grid::axes)
      .def("point", &Grid::point, py::arg("node"))
      .def("find", [](const Grid& g, std::vector<double> p) { return g.find(p); }, py::arg("point"))
      .def("__len__", &Grid::size);

  py::class_<Pmf>(m, "Pmf")
      .def(py::init([](std::shared_ptr<Grid> g, std::vector<double> w) { return make_pmf(g, std::move(w)); }),
           py::arg("grid"), py::arg("masses"))
      .def_property_readonly("grid", [](const Pmf& p) { return unconst(p.grid_ptr()); })
      .def_property_readonly("masses", [](const Pmf& p) { return to_vec(p.masses()); });

  py::class_<TabulatedUtility>(m, "TabulatedUtility")
      .def(py::init([](std::shared_ptr<Grid> g, std::vector<double> v) { return TabulatedUtility(g, std::move(v)); }),
           py::arg("grid"), py::arg("values"))
      .def_property_readonly("grid", [](const TabulatedUtility& u) { return unconst(u.grid_ptr()); })
      .def_property_readonly("values", [](const TabulatedUtility& u) { return to_vec(u.values()); });

  py::class_<SearchParams>(m, "SearchParams")
      .def(py::init([](double beta, double gamma, double tol) {
             SearchParams p{beta, gamma, tol};
             p.validate();
             return p;
           }),
           py::arg("beta"), py::arg("gamma"), py::arg("tol") = 1e-10)
      .def_readwrite("beta", &SearchParams::beta)
      .def_readwrite("gamma", &SearchParams::gamma)
      .def_readwrite("tol", &SearchParams::tol);

  py::class_<Solution>(m, "Solution")
      .def_readonly("reservation_utility", &Solution::reservation_utility)
      .def_property_readonly("value", [](const Solution& s) { return to_vec(s.value.values()); })
      .def_readonly("acceptance", &Solution::acceptance)
      .def_readonly("residual", &Solution::residual)
      .def_readonly("iterations", &Solution::iterations)
      .def_readonly("bisection_estimate", &Solution::bisection_estimate);

  py::class_<SimulationStats>(m, "SimulationStats")
      .def_readonly("mean", &SimulationStats::mean)
      .def_readonly("std_error", &SimulationStats::std_error)
      .def_readonly("episodes", &SimulationStats::episodes)
      .def_readonly("horizon", &SimulationStats::horizon)
      .def_readonly("truncated", &SimulationStats::truncated)
      .def_readonly("mean_wait", &SimulationStats::mean_wait);

  py::class_<DominanceResult>(m, "DominanceResult")
      .def_readonly("verdict", &DominanceResult::verdict)
      .def_readonly("lp_optimum", &DominanceResult::lp_optimum)
      .def_readonly("witness_gap", &DominanceResult::witness_gap)
      .def_readonly("note", &DominanceResult::note)
      .def_property_readonly("witness", [](const DominanceResult& r) -> py::object {
        if (!r.witness) return py::none();
        return py::cast(to_vec(r.witness->values()));
      });

  py::class_<Membership>(m, "Membership")
      .def_readonly("member", &Membership::member)
      .def_readonly("margin", &Membership::margin)
      .def("as_dict", &membership_dict);

  m.def("expectation", &expectation, py::arg("pmf"), py::arg("u"));
  m.def("marginal", &marginal, py::arg("pmf"), py::arg("dim"));
  m.def("common_grid", [](const Pmf& f, const Pmf& g) {
    auto cs = common_grid(f, g);
    return py::make_tuple(unconst(cs.grid), cs.f, cs.g);
  });
  m.def("sample_offers", &sample_offers, py::arg("pmf"), py::arg("seed"), py::arg("n"));

  m.def(
      "tabulate_family",
      [](std::shared_ptr<Grid> g, std::string family, std::vector<double> coefficients, std::vector<double> values) {
        return tabulate_family(FamilySpec{std::move(family), std::move(coefficients), std::move(values)}, g);
      },
      py::arg("grid"), py::arg("family"), py::arg("coefficients") = std::vector<double>{},
      py::arg("values") = std::vector<double>{});
  m.def("is_member", &is_member, py::arg("u"), py::arg("cls"), py::arg("tol") = kClassTolerance);
  m.def("truncate", [](const TabulatedUtility& u) { return msearch::truncate(u); }, py::arg("u"));
  m.def("affine_transform", &affine_transform, py::arg("u"), py::arg("m"), py::arg("n"));
  m.def("clamp_below", &clamp_below, py::arg("u"), py::arg("level"));
  m.def("truncation_counterexample", &truncation_counterexample);

  m.def("continuation_map", &continuation_map, py::arg("t"), py::arg("pmf"), py::arg("u"), py::arg("params"));
  m.def("reservation_utility", &reservation_utility, py::arg("pmf"), py::arg("u"), py::arg("params"));
  m.def("simulate_search", &simulate_search, py::arg("pmf"), py::arg("u"), py::arg("params"),
        py::arg("threshold"), py::arg("seed"), py::arg("episodes"));

  m.def("dominates", &dominates, py::arg("f"), py::arg("g"), py::arg("cls"), py::arg("tol") = kClassTolerance);
  m.def("dominates_increasing_bruteforce", &dominates_increasing_bruteforce, py::arg("f"), py::arg("g"),
        py::arg("tol") = kClassTolerance);
  m.def("fosd_shift", &fosd_shift, py::arg("g"), py::arg("from_node"), py::arg("to_node"), py::arg("eps"));
  m.def("mean_preserving_spread", &mean_preserving_spread, py::arg("g"), py::arg("axis"), py::arg("node"),
        py::arg("eps"));
  m.def("concordance_transfer", &concordance_transfer, py::arg("g"), py::arg("low"), py::arg("high"),
        py::arg("delta"));

  m.def(
      "verify_theorem",
      [](const std::string& theorem, const Pmf& f, const Pmf& g, const TabulatedUtility& u, const SearchParams& p,
         double class_tol) {
        return report_dict(verify_theorem(TheoremCase{parse_theorem(theorem), f, g, u, p, class_tol}));
      },
      py::arg("theorem"), py::arg("f"), py::arg("g"), py::arg("u"), py::arg("params"),
      py::arg("class_tol") = kClassTolerance);

  m.def(
      "run_suite",
      [](const std::string& theorem, std::size_t cases, std::uint64_t seed, std::vector<std::size_t> shape,
         std::size_t jobs) {
        SuiteSpec spec;
        spec.theorem = parse_theorem(theorem);
        spec.cases = cases;
        spec.seed = seed;
        spec.shape = std::move(shape);
        spec.jobs = jobs;
        SuiteReport rep;
        {
          py::gil_scoped_release release;
          rep = run_suite(spec);
        }
        py::list rows;
        for (const auto& row : rep.rows) {
          py::dict d = report_dict(row.report);
          d["case_id"] = row.case_id;
          d["case_seed"] = row.case_seed;
          rows.append(d);
        }
        py::dict out;
        out["pass"] = rep.summary.pass;
        out["fail"] = rep.summary.fail;
        out["vacuous"] = rep.summary.vacuous;
        out["rows"] = rows;
        return out;
      },
      py::arg("theorem"), py::arg("cases") = 100, py::arg("seed") = 1, py::arg("shape") = std::vector<std::size_t>{},
      py::arg("jobs") = 1);

  m.def(
      "closure_check",
      [](FunctionClass c, const std::string& op, std::size_t samples, std::uint64_t seed, double tol) {
        const ClosureReport r = closure_check(c, parse_closure_operator(op), samples, seed, tol);
        py::dict d;
        d["samples"] = r.samples;
        d["preserved"] = r.preserved;
        d["expected_closed"] = r.closed_expected;
        d["passed"] = r.passed;
        d["violations"] = r.violations.size();
        if (r.counterexample_after) {
          d["counterexample_before"] = membership_dict(*r.counterexample_before);
          d["counterexample_after"] = membership_dict(*r.counterexample_after);
        }
        return d;
      },
      py::arg("cls"), py::arg("operator"), py::arg("samples") = 50, py::arg("seed") = 1,
      py::arg("tol") = kClassTolerance);

#ifdef VERSION_INFO
  m.attr("__version__") = MACRO_STRINGIFY(VERSION_INFO);
#else
  m.attr("__version__") = "dev";
#endif
}
