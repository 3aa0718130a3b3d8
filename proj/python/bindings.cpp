#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "iqcrad/dynamic_iqc.hpp"
#include "iqcrad/model.hpp"
#include "iqcrad/problem_io.hpp"
#include "iqcrad/radius.hpp"
#include "iqcrad/verify.hpp"
#include "iqcrad/worstcase.hpp"

namespace py = pybind11;
using namespace iqcrad;

namespace {

py::object to_python(const io::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

SystemData make_system(const Matrix& A, const std::optional<Matrix>& B) {
  return B ? SystemData(A, *B) : SystemData::autonomous(A);
}

RadiusOptions radius_options(double bisect_tol, double rho_max, double strict_eps) {
  RadiusOptions o;
  o.bisect_tol = bisect_tol;
  o.rho_max = rho_max;
  o.strict_eps = strict_eps;
  return o;
}

py::dict trajectory_dict(const Trajectory& t) {
  py::dict d;
  d["states"] = t.states;
  d["inputs"] = t.inputs;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Spectral radius bounds and worst-case trajectories for systems under IQCs";

  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<io::ParseError>(m, "ParseError", PyExc_ValueError);

  m.def(
      "spectral_radius",
      [](const Matrix& A, const std::vector<Matrix>& iqcs, const std::optional<Matrix>& B,
         double bisect_tol, double rho_max, double strict_eps) {
        const SystemData sys = make_system(A, B);
        const IqcSet set(iqcs);
        set.check_compatible(sys);
        return to_python(io::certificate_to_json(
            spectral_radius(sys, set, radius_options(bisect_tol, rho_max, strict_eps))));
      },
      py::arg("A"), py::arg("iqcs"), py::arg("B") = py::none(), py::arg("bisect_tol") = 1e-6,
      py::arg("rho_max") = 1e3, py::arg("strict_eps") = 1e-8,
      "Certified bound on the convergence rate; returns the certificate as a dict.");

  m.def(
      "attainment_check",
      [](const Matrix& A, const std::vector<Matrix>& iqcs, double rho,
         const std::optional<Matrix>& B, double strict_eps) {
        const SystemData sys = make_system(A, B);
        const IqcSet set(iqcs);
        set.check_compatible(sys);
        RadiusOptions o;
        o.strict_eps = strict_eps;
        const AttainmentResult r = attainment_check(sys, set, rho, o);
        py::dict d;
        d["attained"] = r.attained;
        d["conclusive"] = r.conclusive;
        d["margin"] = r.margin;
        d["P"] = r.P;
        d["lambdas"] = r.lambdas;
        d["diagnostic"] = r.diagnostic;
        return d;
      },
      py::arg("A"), py::arg("iqcs"), py::arg("rho"), py::arg("B") = py::none(),
      py::arg("strict_eps") = 1e-8);

  m.def(
      "worst_case",
      [](const Matrix& A, const std::vector<Matrix>& iqcs, const std::optional<Matrix>& B,
         int horizon) {
        const SystemData sys = make_system(A, B);
        const IqcSet set(iqcs);
        set.check_compatible(sys);
        WorstCaseOptions o;
        o.horizon = horizon;
        const WorstCaseOutcome out = worst_case(sys, set, o);
        py::dict d;
        d["stage"] = to_string(out.stage);
        d["reason"] = out.reason;
        d["radius"] = out.radius ? to_python(io::certificate_to_json(*out.radius)) : py::none();
        if (out.report) {
          d["witness"] = to_python(io::witness_to_json(*out.report));
          d["trajectory"] = trajectory_dict(out.report->trajectory);
          const CheckReport checks = check_witness(*out.report, sys, set, horizon);
          d["checks"] = to_python(io::checks_to_json(checks));
          d["verified"] = checks.passed();
        } else {
          d["witness"] = py::none();
        }
        return d;
      },
      py::arg("A"), py::arg("iqcs"), py::arg("B") = py::none(), py::arg("horizon") = 1000,
      "Worst-case trajectory pipeline; the witness is re-checked before returning.");

  m.def(
      "lyapunov_operator",
      [](const Matrix& P, const Matrix& A, const std::optional<Matrix>& B, double rho) {
        return lyapunov_operator(P, make_system(A, B), rho);
      },
      py::arg("P"), py::arg("A"), py::arg("B") = py::none(), py::arg("rho") = 1.0);

  m.def(
      "lyapunov_adjoint",
      [](const Matrix& Q, const Matrix& A, const std::optional<Matrix>& B, double rho) {
        return lyapunov_adjoint(Q, make_system(A, B), rho);
      },
      py::arg("Q"), py::arg("A"), py::arg("B") = py::none(), py::arg("rho") = 1.0);

  m.def(
      "simulate",
      [](const Matrix& A, const Vector& x0, const std::optional<Matrix>& B,
         const std::vector<Vector>& inputs, int steps) {
        const SystemData sys = make_system(A, B);
        if (sys.m() == 0 && inputs.empty()) return trajectory_dict(simulate(sys, x0, steps));
        return trajectory_dict(simulate(sys, x0, inputs));
      },
      py::arg("A"), py::arg("x0"), py::arg("B") = py::none(),
      py::arg("inputs") = std::vector<Vector>{}, py::arg("steps") = 0);

  m.def(
      "iqc_partial_sums",
      [](const std::vector<Vector>& states, const std::vector<Vector>& inputs,
         const std::vector<Matrix>& iqcs) {
        Trajectory t;
        t.states = states;
        t.inputs = inputs;
        return iqc_partial_sums(t, IqcSet(iqcs));
      },
      py::arg("states"), py::arg("inputs"), py::arg("iqcs"));

  m.def(
      "augment_problem",
      [](const std::string& problem_json) {
        const io::Problem p = io::parse_problem(problem_json);
        if (!p.plant || p.filters.empty()) {
          throw io::ParseError("/", "augment needs a plant and at least one filter");
        }
        const Augmented a = augment(*p.plant, p.filters);
        py::dict d;
        d["A"] = a.sys.A();
        d["B"] = a.sys.B();
        d["iqcs"] = a.iqcs.entries();
        return d;
      },
      py::arg("problem_json"),
      "Static form of a plant with dynamic IQC filters, from a problem JSON string.");

  m.def(
      "load_problem",
      [](const std::string& path) {
        const io::Problem p = io::load_problem(path);
        py::dict d;
        if (p.sys) {
          d["A"] = p.sys->A();
          d["B"] = p.sys->B();
        }
        d["iqcs"] = p.iqcs.entries();
        return d;
      },
      py::arg("path"));
}
