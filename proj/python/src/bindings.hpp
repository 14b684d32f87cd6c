#pragma once

#include <pybind11/pybind11.h>

#include <json.hpp>

namespace hmvi::py {

void init_core(pybind11::module_& m);
void init_analysis(pybind11::module_& m);

// JSON documents cross into Python as plain dicts.
pybind11::object to_python(const nlohmann::json& doc);

} // namespace hmvi::py
