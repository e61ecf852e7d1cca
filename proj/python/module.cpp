// Python bindings. Structured results cross the boundary as JSON text and are
// decoded on the Python side.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mafl/abp.hpp"
#include "mafl/degiorgi.hpp"
#include "mafl/functionals.hpp"
#include "mafl/pipeline.hpp"
#include "mafl/torus.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

mafl::ScalarField field_from(int n, const py::array_t<double, py::array::c_style | py::array::forcecast>& values) {
  if (values.ndim() != 2 * n) throw mafl::Error(mafl::ErrorKind::InvalidArgument, "expected a 2n-dimensional array");
  const int N = static_cast<int>(values.shape(0));
  for (int a = 1; a < 2 * n; ++a)
    if (values.shape(a) != N) throw mafl::Error(mafl::ErrorKind::InvalidResolution, "array must be N^(2n)");
  auto f = mafl::ScalarField::constant(mafl::make_grid(n, N), 0.0);
  std::copy(values.data(), values.data() + values.size(), f.values.begin());
  return f;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Parabolic complex Monge-Ampere flows on flat tori";

  py::register_exception<mafl::Error>(m, "MaflError", PyExc_ValueError);

  m.def(
      "scenario_hash",
      [](const std::string& text) { return mafl::Scenario::from_json(json::parse(text)).hash(); },
      py::arg("scenario_json"));

  m.def(
      "run_scenario",
      [](const std::string& text, const std::string& out_dir, bool resume) {
        const auto sc = mafl::Scenario::from_json(json::parse(text));
        mafl::EstimateReport r;
        {
          py::gil_scoped_release release;
          r = mafl::run_scenario(sc, {.out_dir = out_dir, .resume = resume});
        }
        return r.to_json().dump();
      },
      py::arg("scenario_json"), py::arg("out_dir") = "", py::arg("resume") = true);

  m.def(
      "hessian_eigenvalues",
      [](int n, const py::array_t<double, py::array::c_style | py::array::forcecast>& values) {
        const auto f = field_from(n, values);
        const auto h = mafl::complex_hessian(f);
        py::array_t<double> out({static_cast<py::ssize_t>(f.size()), static_cast<py::ssize_t>(n)});
        auto w = out.mutable_unchecked<2>();
        for (std::size_t i = 0; i < f.size(); ++i)
          for (int k = 0; k < n; ++k) w(i, k) = h.eigenvalues[i][k];
        return out;
      },
      py::arg("n"), py::arg("phi"));

  m.def(
      "entropy_p",
      [](int n, const py::array_t<double, py::array::c_style | py::array::forcecast>& F, double p) {
        return mafl::entropy_p(field_from(n, F), p);
      },
      py::arg("n"), py::arg("F"), py::arg("p"));

  m.def(
      "degiorgi",
      [](std::vector<double> s, std::vector<double> phi, double b0, double delta0, double r_max,
         std::optional<double> E) {
        mafl::DeGiorgiInput in;
        in.s = std::move(s);
        in.Phi = std::move(phi);
        in.B0 = b0;
        in.delta0 = delta0;
        in.r_max = r_max;
        in.E = E;
        return mafl::degiorgi_s_infinity(in).to_json().dump();
      },
      py::arg("s"), py::arg("phi"), py::arg("b0"), py::arg("delta0"), py::arg("r_max"), py::arg("E") = py::none());

  m.def(
      "abp",
      [](const std::string& patch_json, std::optional<double> c_dim) {
        const auto patch = mafl::Patch::from_json(json::parse(patch_json));
        return mafl::abp_check(patch, c_dim.value_or(mafl::abp_default_constant(patch.m))).to_json().dump();
      },
      py::arg("patch_json"), py::arg("c_dim") = py::none());
}
