#include "bindings.hpp"

#include "hmvi/cli.hpp"
#include "hmvi/problems.hpp"
#include "hmvi/schemes.hpp"

#include <pybind11/eigen.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;

namespace hmvi::py {

namespace {

Eigen::MatrixXd stack(const std::vector<Vector>& iterates)
{
    Eigen::MatrixXd out(static_cast<Index>(iterates.size()), iterates.empty() ? 0 : iterates.front().dim());
    for (std::size_t n = 0; n < iterates.size(); ++n) out.row(static_cast<Index>(n)) = iterates[n].values();
    return out;
}

} // namespace

void init_core(pybind11::module_& m)
{
    ::py::class_<OperatorConstants>(m, "OperatorConstants")
        .def(::py::init(&OperatorConstants::make), ::py::arg("gamma"), ::py::arg("tau"), ::py::arg("r"),
             ::py::arg("s"), ::py::arg("eta"))
        .def_readonly("gamma", &OperatorConstants::gamma)
        .def_readonly("tau", &OperatorConstants::tau)
        .def_readonly("r", &OperatorConstants::r)
        .def_readonly("s", &OperatorConstants::s)
        .def_readonly("eta", &OperatorConstants::eta)
        .def("__repr__", [](const OperatorConstants& c) {
            std::ostringstream os;
            os << "OperatorConstants(gamma=" << c.gamma << ", tau=" << c.tau << ", r=" << c.r << ", s=" << c.s
               << ", eta=" << c.eta << ")";
            return os.str();
        });

    ::py::class_<ProblemInstance>(m, "Problem")
        .def_property_readonly("dim", &ProblemInstance::dim)
        .def_property_readonly("lam", &ProblemInstance::lambda)
        .def_property_readonly("kappa", &ProblemInstance::kappa)
        .def_property_readonly("constants", &ProblemInstance::constants)
        .def_property_readonly("notes", &ProblemInstance::notes)
        .def_property_readonly("known_solution",
                               [](const ProblemInstance& p) -> std::optional<Eigen::VectorXd> {
                                   if (!p.known_solution()) return std::nullopt;
                                   return p.known_solution()->values();
                               })
        .def("with_lambda", &ProblemInstance::with_lambda, ::py::arg("lam"))
        .def("f_map", [](const ProblemInstance& p, const Eigen::VectorXd& x) { return f_map(p, Vector(x)).values(); },
             ::py::arg("x"))
        .def("resolve",
             [](const ProblemInstance& p, const Eigen::VectorXd& u) { return p.resolvent().resolve(Vector(u)).values(); },
             ::py::arg("u"));

    m.def("gen_scalar_affine", &gen_scalar_affine, ::py::arg("b"), ::py::arg("lam"));
    m.def(
        "gen_spd_linear",
        [](Index dim, double eigen_min, double eigen_max, std::uint64_t seed, double lambda, double a_scale, double mass,
           double b_scale, bool diagonal) {
            SpdLinearParams params;
            params.dim = dim;
            params.eigen_min = eigen_min;
            params.eigen_max = eigen_max;
            params.seed = seed;
            params.lambda = lambda;
            params.a_scale = a_scale;
            params.m = mass;
            params.b_scale = b_scale;
            params.diagonal = diagonal;
            return gen_spd_linear(params);
        },
        ::py::arg("dim") = 50, ::py::arg("eigen_min") = 1.0, ::py::arg("eigen_max") = 4.0, ::py::arg("seed") = 0,
        ::py::arg("lam") = 1.0, ::py::arg("a_scale") = 1.0, ::py::arg("m") = 1.0, ::py::arg("b_scale") = 1.0,
        ::py::arg("diagonal") = false);
    m.def(
        "gen_soft_threshold",
        [](Index dim, double c, double lambda, std::uint64_t seed, double b_scale) {
            return gen_soft_threshold(dim, c, lambda, seed, b_scale);
        },
        ::py::arg("dim"), ::py::arg("c"), ::py::arg("lam"), ::py::arg("seed") = 0, ::py::arg("b_scale") = 2.0);
    m.def(
        "gen_soft_threshold_from",
        [](const Eigen::VectorXd& b, double c, double lambda) { return gen_soft_threshold(Vector(b), c, lambda); },
        ::py::arg("b"), ::py::arg("c"), ::py::arg("lam"));

    ::py::class_<IterationTrace>(m, "Trace")
        .def_property_readonly("algorithm", [](const IterationTrace& t) { return std::string(to_string(t.algorithm)); })
        .def_property_readonly("iterates", [](const IterationTrace& t) { return stack(t.iterates); })
        .def_readonly("errors", &IterationTrace::errors)
        .def_readonly("residuals", &IterationTrace::residuals)
        .def_readonly("steps_used", &IterationTrace::steps_used)
        .def_readonly("converged", &IterationTrace::converged)
        .def_readonly("diverged", &IterationTrace::diverged)
        .def_readonly("hypothesis_violated", &IterationTrace::hypothesis_violated)
        .def_readonly("hypothesis_notes", &IterationTrace::hypothesis_notes)
        .def_property_readonly("wall_seconds",
                               [](const IterationTrace& t) { return std::chrono::duration<double>(t.wall_time).count(); });

    m.def(
        "run",
        [](const std::string& algorithm, const ProblemInstance& p, const Eigen::VectorXd& x0, const std::string& xi,
           const std::string& mu, double tol, std::size_t max_steps, bool stop_early) {
            const StoppingRule stop{tol, max_steps, stop_early};
            return run_algorithm(parse_algorithm(algorithm), p, Vector(x0), parse_step_sequence(xi),
                                 parse_step_sequence(mu), stop);
        },
        ::py::arg("algorithm"), ::py::arg("problem"), ::py::arg("x0"), ::py::arg("xi") = "const:0.5",
        ::py::arg("mu") = "const:0.5", ::py::arg("tol") = 1e-10, ::py::arg("max_steps") = 100000,
        ::py::arg("stop_early") = true, "Run fh, zgy, mann or new from x0 and return the trace.");

    m.def(
        "cli",
        [](const std::vector<std::string>& args) {
            std::vector<std::string> full{"hmvi"};
            full.insert(full.end(), args.begin(), args.end());
            std::vector<const char*> argv;
            for (const auto& a : full) argv.push_back(a.c_str());
            std::ostringstream out, err;
            const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
            return ::py::make_tuple(code, out.str(), err.str());
        },
        ::py::arg("args"), "Run the command-line tool in-process; returns (exit_code, stdout, stderr).");
}

} // namespace hmvi::py
