#include "bindings.hpp"

#include "hmvi/errors.hpp"

namespace py = pybind11;

namespace hmvi::py {

pybind11::object to_python(const nlohmann::json& doc)
{
    return pybind11::module_::import("json").attr("loads")(doc.dump());
}

} // namespace hmvi::py

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Solvers and convergence audits for variational inclusions 0 in A(u) + M(u)";

    auto base = py::register_exception<hmvi::Error>(m, "HmviError", PyExc_RuntimeError);
    py::register_exception<hmvi::InputError>(m, "InputError", base.ptr());
    py::register_exception<hmvi::ConstantsError>(m, "ConstantsError", base.ptr());
    py::register_exception<hmvi::UnsupportedOperator>(m, "UnsupportedOperator", base.ptr());
    py::register_exception<hmvi::ResolventDivergence>(m, "ResolventDivergence", base.ptr());
    py::register_exception<hmvi::CannotCompare>(m, "CannotCompare", base.ptr());

    hmvi::py::init_core(m);
    hmvi::py::init_analysis(m);
}
