#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "flagcd/errors.hpp"
#include "flagcd/flag_builder.hpp"
#include "flagcd/invariants.hpp"
#include "flagcd/job_config.hpp"
#include "flagcd/matrix_models.hpp"
#include "flagcd/report.hpp"

namespace py = pybind11;
using namespace flagcd;

PYBIND11_MODULE(_flagcd, m) {
  m.doc() = "Kernels, invariants and matrix models for flag-structured Cowen-Douglas operators";

  auto base = py::register_exception<Error>(m, "FlagcdError");
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());

  py::class_<DiskDomain>(m, "DiskDomain")
      .def(py::init<>())
      .def_static("with_radius", &DiskDomain::with_radius)
      .def_readonly("radius", &DiskDomain::radius)
      .def_readonly("max_eval_radius", &DiskDomain::max_eval_radius)
      .def("admits", &DiskDomain::admits);

  py::class_<ScalarKernel>(m, "ScalarKernel")
      .def_property_readonly("coefficients",
                             [](const ScalarKernel& k) {
                               const auto c = k.coefficients();
                               return std::vector<double>(c.begin(), c.end());
                             })
      .def_property_readonly("label", &ScalarKernel::label)
      .def_property_readonly("domain", &ScalarKernel::domain)
      .def("jet", &ScalarKernel::jet, py::arg("z"), py::arg("w"), py::arg("p") = 0, py::arg("q") = 0)
      .def("diagonal", &ScalarKernel::diagonal)
      .def("__call__", [](const ScalarKernel& k, cplx z, cplx w) { return k.jet(z, w); })
      .def("__repr__", [](const ScalarKernel& k) { return "<ScalarKernel " + k.label() + ">"; });

  m.def("make_power_series_kernel", &make_power_series_kernel, py::arg("coefficients"),
        py::arg("domain") = DiskDomain{}, py::arg("label") = "power_series");
  m.def("make_generalized_szego", &make_generalized_szego, py::arg("lam"), py::arg("scale") = 1.0,
        py::arg("terms") = kDefaultTerms, py::arg("domain") = DiskDomain{});
  m.def("make_fock_kernel", &make_fock_kernel, py::arg("scale") = 1.0, py::arg("terms") = kDefaultTerms,
        py::arg("domain") = DiskDomain{});
  m.def("gauge_transform", [](const ScalarKernel& k, const std::vector<cplx>& f) { return gauge_transform(k, f); });
  m.def("gram_matrix", [](const ScalarKernel& k, const std::vector<cplx>& pts) { return gram_matrix(k, pts); });

  py::class_<FlagKernel>(m, "FlagKernel")
      .def(py::init<ScalarKernel, ScalarKernel>())
      .def_property_readonly("k0", &FlagKernel::k0)
      .def_property_readonly("k1", &FlagKernel::k1)
      .def("__call__", [](const FlagKernel& fk, cplx z, cplx w) { return Eigen::MatrixXcd(fk(z, w)); });
  m.def("build_flag_kernel", &build_flag_kernel);
  m.def("build_jet_localization_kernel", &build_jet_localization_kernel);
  m.def("jet_action_matrix", [](const std::vector<cplx>& f, cplx w, int k) { return jet_action_matrix(f, w, k).entries; },
        py::arg("f"), py::arg("w"), py::arg("k") = 2);

  m.def("curvature", &curvature);
  m.def("ratio_invariant", &ratio_invariant);
  m.def("second_fundamental_form_coeff", &second_fundamental_form_coeff);
  m.def("relative_gap", &relative_gap);
  m.def("default_grid", [](const std::vector<double>& radii, int angles) { return default_grid(radii, angles); },
        py::arg("radii") = std::vector<double>{}, py::arg("angles") = 8);

  py::class_<EquivalenceVerdict>(m, "EquivalenceVerdict")
      .def_readonly("equivalent", &EquivalenceVerdict::equivalent)
      .def_readonly("max_curvature_gap", &EquivalenceVerdict::max_curvature_gap)
      .def_readonly("max_ratio_gap", &EquivalenceVerdict::max_ratio_gap)
      .def_readonly("tol", &EquivalenceVerdict::tol)
      .def("__bool__", [](const EquivalenceVerdict& v) { return v.equivalent; });
  m.def(
      "equivalent_fbn",
      [](const std::vector<ScalarKernel>& a, const std::vector<ScalarKernel>& b, std::vector<cplx> grid, double tol) {
        if (grid.empty()) grid = default_grid();
        return equivalent_fbn(a, b, grid, tol);
      },
      py::arg("a"), py::arg("b"), py::arg("grid") = std::vector<cplx>{}, py::arg("tol") = kDefaultEquivalenceTol);

  py::class_<OperatorModel>(m, "OperatorModel")
      .def_property_readonly("n", &OperatorModel::n)
      .def_property_readonly("block_size", &OperatorModel::block_size)
      .def_property_readonly("shape", [](const OperatorModel& om) { return to_string(om.shape); })
      .def("matrix", &OperatorModel::matrix);
  m.def(
      "kernel_chain_model",
      [](const std::vector<ScalarKernel>& ks, int N, double phase) { return kernel_chain_model(ks, N, phase); },
      py::arg("kernels"), py::arg("N") = kDefaultTruncation, py::arg("phase") = 0.0);
  m.def("intertwining_residual", &intertwining_residual);
  m.def(
      "eigenframe_dimension",
      [](const OperatorModel& om, cplx w, double tol) { return eigenframe(om, w, tol).dimension; }, py::arg("model"),
      py::arg("w"), py::arg("tol") = 1e-8);
  m.def(
      "commutant_dimension",
      [](const std::vector<Eigen::MatrixXcd>& ms) { return commutant_dimension(ms); }, py::arg("matrices"));
  m.def("star_commutant_dimension",
        [](const OperatorModel& om) { return irreducibility_probe(om).star_commutant_dim; });

  m.def("run_job_json", [](const std::string& text) { return report_to_json(run_job(parse_config(text))).dump(); },
        "Parse a job config, run it and return the report as JSON text.");
  m.def(
      "run_job_to",
      [](const std::string& text, const std::filesystem::path& dir) {
        const auto cfg = parse_config(text);
        return emit_report(run_job(cfg), dir, cfg.output.format);
      },
      "Run a job config and write its report files; returns the written paths.");
  m.def("config_echo", [](const std::string& text) { return config_to_json(parse_config(text)).dump(); });
  m.attr("__version__") = kToolVersion;
}
