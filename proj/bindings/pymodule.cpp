// Python bindings: a thin layer over the problem parser, the boundary-data
// diagnostics, the spectrum solver, and the artifact emitters. Heavy results
// cross the boundary as plain dicts/strings so the Python side carries no
// Eigen types.
#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "kreinspec/report.hpp"

namespace py = pybind11;
using namespace kreinspec;

namespace {

py::dict validation_dict(const ProblemSpec& prob) {
  ValidationReport r = validate_boundary_data(prob.M, prob.N);
  py::dict d;
  d["stacked_nonsingular"] = r.stacked_nonsingular;
  d["isotropy"] = r.isotropy;
  d["coupling"] = r.coupling;
  d["residual_MQM"] = r.res_mqm;
  d["residual_NQN"] = r.res_nqn;
  d["residual_selfadjointness"] = r.res_selfadj;
  d["pass"] = r.pass();
  return d;
}

py::dict classification_dict(const ProblemSpec& prob) {
  Classification c = classify(prob.M, prob.N);
  DeltaInfo di = compute_delta(prob.M, prob.N);
  py::dict d;
  d["essential_conditions"] = c.k;
  d["form_case"] = std::string(1, "abc"[static_cast<int>(c.form_case)]);
  const char* names[] = {"positive", "negative", "indefinite"};
  d["coupling_definiteness"] = names[static_cast<int>(di.definiteness)];
  py::list delta;
  for (int i = 0; i < 2; ++i) {
    py::list row;
    for (int j = 0; j < 2; ++j) row.append(di.delta(i, j));
    delta.append(row);
  }
  d["coupling_matrix"] = delta;
  d["delta1"] = di.delta1;
  d["delta2"] = di.delta2;
  return d;
}

py::list spectrum_list(const ProblemSpec& prob, double lmin, double lmax,
                       double density) {
  py::list out;
  for (const RealRoot& r : find_real_eigenvalues(prob, lmin, lmax, density)) {
    py::dict d;
    d["lambda"] = r.lambda;
    d["sign_change"] = r.sign_change;
    d["order_hint"] = r.order_hint;
    out.append(d);
  }
  return out;
}

py::dict hypothesis_dict(const ProblemSpec& prob) {
  HypothesisReport r = hypothesis_report(prob);
  py::dict d;
  d["criterion"] = to_string(r.criterion);
  d["essential_conditions"] = r.k;
  d["conclusion"] = to_string(r.conclusion);
  py::list checks;
  for (const HypothesisCheck& c : r.checks) {
    py::dict cd;
    cd["condition"] = c.name;
    cd["verdict"] = c.verdict == Verdict::Satisfied
                        ? "satisfied"
                        : (c.verdict == Verdict::Violated ? "violated" : "unknown");
    cd["required"] = c.required;
    checks.append(cd);
  }
  d["checks"] = checks;
  return d;
}

py::dict wverify_dict(const ProblemSpec& prob, int min_nodes) {
  WVerification r = verify_smoothing(prob, min_nodes);
  py::dict d;
  d["alpha"] = r.constants.alpha;
  d["kappa"] = r.constants.kappa;
  d["gamma"] = r.constants.gamma;
  d["k_norm"] = r.k_norm;
  d["k_norm_bound"] = r.k_norm_bound;
  d["z_norm"] = r.z_norm;
  d["z_norm_bound"] = r.z_norm_bound;
  d["min_eig"] = r.min_eig;
  d["min_eig_bound"] = r.min_eig_bound;
  d["coupling_residual"] = r.coupling_residual;
  d["nodes"] = r.nodes;
  d["pass"] = r.pass;
  return d;
}

py::list report_list(const ProblemSpec& prob) {
  py::list out;
  for (const Artifact& a : full_report(prob))
    out.append(py::make_tuple(a.filename, a.text, a.pass));
  return out;
}

} // namespace

PYBIND11_MODULE(_kreinspec, m) {
  m.doc() =
      "Indefinite Sturm-Liouville problems with eigenparameter-affine "
      "boundary conditions: validation, classification, spectra, and "
      "operator certification";

  py::register_exception<Error>(m, "KreinspecError");

  py::class_<ProblemSpec>(m, "Problem")
      .def_property_readonly("name", [](const ProblemSpec& p) { return p.name; })
      .def("__repr__", [](const ProblemSpec& p) {
        return "<kreinspec.Problem '" + p.name + "'>";
      });

  m.def("load_problem", [](const std::string& path) { return parse_problem(path); },
        py::arg("path"), "Parse a problem file from disk.");
  m.def("parse_problem_text",
        [](const std::string& text) { return parse_problem_text(text); },
        py::arg("text"), "Parse a problem from its JSON text.");
  m.def("canonical_text", [](const ProblemSpec& p) { return canonical_text(p); },
        py::arg("problem"),
        "Canonical serialization; parsing it back reproduces it byte for byte.");

  m.def("validate", &validation_dict, py::arg("problem"),
        "Boundary-data residuals and the overall verdict.");
  m.def("classify", &classification_dict, py::arg("problem"),
        "Essential-condition count, form case, and the coupling matrix.");
  m.def("spectrum", &spectrum_list, py::arg("problem"), py::arg("lmin") = -100.0,
        py::arg("lmax") = 100.0, py::arg("density") = 400.0,
        "Real eigenvalues on [lmin, lmax], sorted ascending.");
  m.def("hypothesis", &hypothesis_dict, py::arg("problem"),
        "Riesz-basis guarantee dispatcher verdicts.");
  m.def("wverify", &wverify_dict, py::arg("problem"), py::arg("min_nodes") = 2000,
        "Smoothing-operator certification summary.");
  m.def("report", &report_list, py::arg("problem"),
        "All artifacts as (filename, text, pass) tuples; deterministic.");
}
