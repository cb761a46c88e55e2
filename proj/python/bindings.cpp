#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qgsw/continuation.hpp"
#include "qgsw/contour.hpp"
#include "qgsw/errors.hpp"
#include "qgsw/runner.hpp"
#include "qgsw/special_functions.hpp"
#include "qgsw/spectrum.hpp"

namespace py = pybind11;
using namespace qgsw;

namespace {

spectrum::Branch to_branch(const std::string& s) {
  if (s == "plus" || s == "+") return spectrum::Branch::Plus;
  if (s == "minus" || s == "-") return spectrum::Branch::Minus;
  throw py::value_error("sign must be 'plus' or 'minus'");
}

py::dict point_dict(const continuation::BranchPoint& p) {
  py::dict d;
  d["s"] = p.s;
  d["omega"] = p.omega;
  d["residual"] = p.residual;
  d["iterations"] = p.iterations;
  d["node_count"] = p.node_count;
  d["f1"] = p.f1.coefficients();
  d["f2"] = p.f2.coefficients();
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Spectrum and bifurcating branches of doubly-connected QGSW V-states";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);
  py::register_exception<RangeError>(m, "RangeError", PyExc_OverflowError);
  py::register_exception<SearchExhausted>(m, "SearchExhausted", PyExc_RuntimeError);

  m.def("bessel_i", &special::bessel_i, py::arg("n"), py::arg("x"));
  m.def("bessel_k", &special::bessel_k, py::arg("n"), py::arg("x"));
  m.def("product_ik", py::overload_cast<int, double>(&special::product_ik), py::arg("n"),
        py::arg("x"));
  m.def("product_ik_integral", &special::product_ik_integral, py::arg("n"), py::arg("x"));
  m.def("beltrami_k0", &special::beltrami_k0, py::arg("a"), py::arg("b"), py::arg("theta"),
        py::arg("terms") = 60);

  m.def("lambda_coupling", &spectrum::lambda_coupling, py::arg("n"), py::arg("lam"), py::arg("b"));
  m.def("omega_rankine", &spectrum::omega_rankine, py::arg("n"), py::arg("x"));
  m.def("discriminant", &spectrum::discriminant, py::arg("n"), py::arg("lam"), py::arg("b"));
  m.def("spectral_matrix",
        [](int n, double lam, double b, double omega) {
          const auto s = spectrum::spectral_matrix(n, lam, b, omega);
          return std::vector<std::vector<double>>{{s.m11, s.m12}, {s.m21, s.m22}};
        },
        py::arg("n"), py::arg("lam"), py::arg("b"), py::arg("omega"));
  m.def("eigenvalues",
        [](int n, double lam, double b) -> py::object {
          const auto e = spectrum::eigenvalues(n, lam, b);
          if (!e) return py::none();
          py::dict d;
          d["minus"] = e->omega_minus;
          d["plus"] = e->omega_plus;
          d["discriminant"] = e->discriminant;
          d["B"] = e->B;
          d["C"] = e->C;
          d["degenerate"] = e->degenerate;
          return d;
        },
        py::arg("n"), py::arg("lam"), py::arg("b"));
  m.def("omega_limits",
        [](double lam, double b) {
          const auto l = spectrum::omega_limits(lam, b);
          return py::make_tuple(l.minus, l.plus);
        },
        py::arg("lam"), py::arg("b"));
  m.def("find_threshold",
        [](double lam, double b, int window) {
          const auto t = spectrum::find_threshold(lam, b, window);
          return py::make_tuple(t.n0, t.n);
        },
        py::arg("lam"), py::arg("b"), py::arg("window") = 50);
  m.def("euler_eigenvalues",
        [](int n, double b) -> py::object {
          const auto e = spectrum::euler_eigenvalues(n, b);
          if (!e) return py::none();
          return py::make_tuple(e->minus, e->plus);
        },
        py::arg("n"), py::arg("b"));
  m.def("kernel_vector",
        [](int mm, double lam, double b, const std::string& sign) {
          const auto v = spectrum::kernel_vector(mm, lam, b, to_branch(sign));
          return py::make_tuple(v[0], v[1]);
        },
        py::arg("m"), py::arg("lam"), py::arg("b"), py::arg("sign"));
  m.def("transversality_check",
        [](int mm, double lam, double b, const std::string& sign) {
          return spectrum::transversality_check(mm, lam, b, to_branch(sign));
        },
        py::arg("m"), py::arg("lam"), py::arg("b"), py::arg("sign"));

  m.def("g_functional",
        [](double lam, double b, double omega, std::vector<double> f1, std::vector<double> f2,
           int node_count) {
          const auto g = contour::g_functional(lam, b, omega, contour::FourierBoundary(1.0, f1),
                                               contour::FourierBoundary(b, f2),
                                               contour::QuadratureGrid(node_count));
          return py::make_tuple(g.g1, g.g2);
        },
        py::arg("lam"), py::arg("b"), py::arg("omega"), py::arg("f1") = std::vector<double>{},
        py::arg("f2") = std::vector<double>{}, py::arg("node_count") = 256);
  m.def("linearization_check",
        [](int n, double lam, double b, double omega, double eps, int node_count) {
          const auto r = contour::linearization_check(n, lam, b, omega, eps,
                                                      contour::QuadratureGrid(node_count));
          py::dict d;
          d["recovered"] = std::vector<std::vector<double>>{
              {r.recovered[0][0], r.recovered[0][1]}, {r.recovered[1][0], r.recovered[1][1]}};
          d["max_deviation"] = r.max_deviation;
          d["leakage"] = r.leakage;
          return d;
        },
        py::arg("n"), py::arg("lam"), py::arg("b"), py::arg("omega"), py::arg("epsilon") = 1e-6,
        py::arg("node_count") = 256);

  m.def("trace_branch",
        [](double lam, double b, int mm, const std::string& sign, double s_max, int steps,
           int trunc, int node_count) {
          continuation::SolverOptions opts;
          opts.trunc = trunc;
          continuation::BranchTrace t;
          {
            py::gil_scoped_release release;
            t = continuation::trace_branch(lam, b, mm, to_branch(sign), s_max, steps,
                                           contour::QuadratureGrid(node_count), opts);
          }
          py::list pts;
          for (const auto& p : t.points) pts.append(point_dict(p));
          py::dict d;
          d["omega_bifurcation"] = t.omega_bifurcation;
          d["points"] = pts;
          d["complete"] = t.complete;
          d["termination"] = t.termination;
          d["omega_extrapolated"] =
              t.points.size() >= 2 ? py::object(py::float_(continuation::extrapolate_omega(t.points)))
                                   : py::object(py::none());
          return d;
        },
        py::arg("lam"), py::arg("b"), py::arg("m"), py::arg("sign"), py::arg("s_max") = 5e-3,
        py::arg("steps") = 8, py::arg("trunc") = 16, py::arg("node_count") = 256);

  m.def("run",
        [](const std::string& config_json) {
          const auto config = cli::apply_json_config(config_json);
          cli::RunResult r;
          {
            py::gil_scoped_release release;
            r = cli::run(config);
          }
          py::dict files;
          for (const auto& f : r.files) files[py::str(f.name)] = f.content;
          return py::make_tuple(r.exit_code, files, r.message);
        },
        py::arg("config_json"),
        "Runs a CLI command described by a JSON config; returns (exit_code, files, message).");
}
