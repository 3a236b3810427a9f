#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "sparsedae/errors.hpp"
#include "sparsedae/expr.hpp"
#include "sparsedae/expr_parser.hpp"
#include "sparsedae/io.hpp"
#include "sparsedae/problems.hpp"
#include "sparsedae/sparse_jacobian.hpp"
#include "sparsedae/stepper.hpp"
#include "sparsedae/studies.hpp"

namespace py = pybind11;
using namespace sparsedae;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Sparse index-1 DAE and stiff ODE solver";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidOptions>(m, "InvalidOptions", error);
  py::register_exception<ParseError>(m, "ParseError", error);
  py::register_exception<InvalidSystem>(m, "InvalidSystem", error);
  py::register_exception<UnknownObservable>(m, "UnknownObservable", error);

  py::enum_<Method>(m, "Method")
      .value("EB", Method::EB)
      .value("CN", Method::CN)
      .value("IMPTRAP", Method::IMPTRAP)
      .value("RAD", Method::RAD);
  m.def("parse_method", &parse_method);
  m.def("method_order", [](Method mt) { return traits(mt).order; });
  m.def("extrapolated_order", [](Method mt) { return traits(mt).extrapolated_order; });

  py::enum_<ErrorDenominator>(m, "ErrorDenominator")
      .value("LITERAL", ErrorDenominator::Literal)
      .value("STANDARD", ErrorDenominator::Standard);
  py::enum_<NormReduction>(m, "NormReduction").value("MAX", NormReduction::Max).value("RMS", NormReduction::Rms);
  py::enum_<Status>(m, "Status")
      .value("SUCCESS", Status::Success)
      .value("TOO_MANY_STEPS", Status::TooManySteps)
      .value("STEP_UNDERFLOW", Status::StepUnderflow);

  py::class_<SolverOptions>(m, "SolverOptions")
      .def(py::init<>())
      .def_readwrite("tf", &SolverOptions::tf)
      .def_readwrite("atol", &SolverOptions::atol)
      .def_readwrite("hinit", &SolverOptions::hinit)
      .def_readwrite("hmax", &SolverOptions::hmax)
      .def_readwrite("ntot", &SolverOptions::ntot)
      .def_readwrite("iter", &SolverOptions::iter)
      .def_readwrite("method", &SolverOptions::method)
      .def_readwrite("extrapolate", &SolverOptions::extrapolate)
      .def_readwrite("fixed_h", &SolverOptions::fixed_h)
      .def_readwrite("denominator", &SolverOptions::denominator)
      .def_readwrite("reduction", &SolverOptions::reduction)
      .def_readwrite("ctol", &SolverOptions::ctol)
      .def("validate", &SolverOptions::validate);

  py::class_<Trajectory>(m, "Trajectory")
      .def_readonly("names", &Trajectory::names)
      .def_readonly("t", &Trajectory::t)
      .def_readonly("states", &Trajectory::states)
      .def_readonly("accepted", &Trajectory::accepted)
      .def_readonly("rejected", &Trajectory::rejected)
      .def_readonly("jacobian_updates", &Trajectory::jacobian_updates)
      .def_readonly("lu_count", &Trajectory::lu_count)
      .def_readonly("status", &Trajectory::status)
      .def_readonly("message", &Trajectory::message)
      .def_property_readonly("final_state", &Trajectory::final_state)
      .def("ok", &Trajectory::ok)
      .def("to_csv", [](const Trajectory& t) {
        std::ostringstream out;
        write_trajectory_csv(out, t);
        return out.str();
      });

  py::class_<Expr>(m, "Expr")
      .def("diff", [](const Expr& e, std::size_t k) { return diff(e, k); })
      .def("eval", [](const Expr& e, const ValueVector& uu, const ParameterMap& p) { return eval(e, uu, p); },
           py::arg("uu"), py::arg("params") = ParameterMap{})
      .def("free_unknowns", [](const Expr& e) { return free_unknowns(e); })
      .def("__str__", [](const Expr& e) { return to_string(e); });
  m.def("parse_expression", [](const std::string& text) { return parse_expression(text); });

  py::class_<Problem>(m, "Problem")
      .def_readonly("id", &Problem::id)
      .def_property_readonly("size", [](const Problem& p) { return p.system.size(); })
      .def_property_readonly("ode_count", [](const Problem& p) { return p.system.ode_count(); })
      .def_property_readonly("var_names", [](const Problem& p) { return p.system.var_names(); })
      .def_property_readonly("initial", [](const Problem& p) { return p.system.initial(); })
      .def_property_readonly("observables", [](const Problem& p) { return observable_names(p); })
      .def("probe", [](const Problem& p, const ValueVector& state, const std::string& name) {
        return probe(p, state, name);
      })
      .def("exact", [](const Problem& p, double t) -> std::optional<ValueVector> {
        if (!p.exact) return std::nullopt;
        return p.exact(t);
      });

  m.def(
      "make_problem",
      [](const std::string& id, std::size_t N, std::size_t M, double mu, double phi, double lambda, double Dx,
         double Dy, double Da, double delta) {
        ProblemConfig cfg{N, M, mu, phi, lambda, {Dx, Dy, Da, delta}};
        return make_problem(id, cfg);
      },
      py::arg("id"), py::arg("N") = 0, py::arg("M") = 0, py::arg("mu") = 2.0, py::arg("phi") = 0.5,
      py::arg("lambda_") = -1.0, py::arg("Dx") = 1.0, py::arg("Dy") = 1.0, py::arg("Da") = 1.0,
      py::arg("delta") = 1.0);
  m.def("parse_problem", &parse_problem, py::arg("text"), py::arg("id") = "file");
  m.def("load_problem", &load_problem);

  m.def(
      "integrate", [](const Problem& p, const SolverOptions& opt) { return integrate(p.system, opt); },
      py::call_guard<py::gil_scoped_release>());
  m.def("sparsity", [](const Problem& p, Method method) {
    const MethodResidual res = build_residual(p.system, method);
    return detect_pattern(res).rows;
  });

  py::class_<OrderStudy>(m, "OrderStudy")
      .def_readonly("h", &OrderStudy::h)
      .def_readonly("raw_error", &OrderStudy::raw_error)
      .def_readonly("extrapolated_error", &OrderStudy::extrapolated_error)
      .def_readonly("raw_slope", &OrderStudy::raw_slope)
      .def_readonly("extrapolated_slope", &OrderStudy::extrapolated_slope);
  m.def("order_study", &order_study, py::arg("problem"), py::arg("method"), py::arg("h"), py::arg("options"));
}
