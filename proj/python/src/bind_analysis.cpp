#include "bindings.hpp"

#include "hmvi/analysis.hpp"
#include "hmvi/io.hpp"
#include "hmvi/resolvent.hpp"

#include <pybind11/stl.h>

namespace py = pybind11;

namespace hmvi::py {

void init_analysis(pybind11::module_& m)
{
    m.def("contraction_factor", &contraction_factor, ::py::arg("constants"), ::py::arg("lam"));
    m.def("resolvent_lipschitz_bound", &resolvent_lipschitz_bound, ::py::arg("constants"), ::py::arg("lam"));
    m.def(
        "feasible_lambda", [](const OperatorConstants& c) { return to_python(to_json(feasible_lambda(c))); },
        ::py::arg("constants"));
    m.def(
        "boundary_sharpness",
        [](const OperatorConstants& c) {
            const auto r = boundary_sharpness(c);
            ::py::dict d;
            d["midpoint_kappa"] = r.midpoint_kappa;
            d["lo_kappa"] = r.lo_kappa;
            d["hi_kappa"] = r.hi_kappa;
            d["below_lo_kappa"] = r.below_lo_kappa;
            d["above_hi_kappa"] = r.above_hi_kappa;
            d["passed"] = r.passed;
            return d;
        },
        ::py::arg("constants"));
    m.def("envelope_fh", &envelope_fh, ::py::arg("kappa"), ::py::arg("e0"), ::py::arg("n"));
    m.def(
        "envelope_new",
        [](double kappa, const std::string& mu, double e0, std::size_t n) {
            return envelope_new(kappa, parse_step_sequence(mu), e0, n);
        },
        ::py::arg("kappa"), ::py::arg("mu"), ::py::arg("e0"), ::py::arg("n"));
    m.def(
        "rate_compare",
        [](const ProblemInstance& p, const IterationTrace& a, const IterationTrace& b, double margin, double window) {
            return to_python(to_json(rate_compare(p, a, b, RateOptions{margin, window})));
        },
        ::py::arg("problem"), ::py::arg("a"), ::py::arg("b"), ::py::arg("margin") = 0.05, ::py::arg("window") = 0.25);
    m.def(
        "audit_pair",
        [](const ProblemInstance& p, const IterationTrace& a, const IterationTrace& b, double gap_tol) {
            return to_python(to_json(audit_pair(a, b, p.kappa(), audit_slack(p), gap_tol)));
        },
        ::py::arg("problem"), ::py::arg("a"), ::py::arg("b"), ::py::arg("gap_tol") = 1e-8);
}

} // namespace hmvi::py
