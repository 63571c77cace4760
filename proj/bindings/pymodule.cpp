#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "freemult/brownian.hpp"
#include "freemult/convolution.hpp"
#include "freemult/entropy.hpp"
#include "freemult/errors.hpp"
#include "freemult/experiments.hpp"
#include "freemult/levy_hinchin.hpp"
#include "freemult/measure.hpp"
#include "freemult/recovery.hpp"
#include "freemult/transforms.hpp"

namespace py = pybind11;
using namespace freemult;

PYBIND11_MODULE(_freemult, m) {
    m.doc() = "multiplicative free/Boolean convolutions on the circle and "
              "positive half-line";

    py::register_exception<ValidationError>(m, "FreemultValidationError",
                                            PyExc_ValueError);
    py::register_exception<NumericError>(m, "FreemultNumericError",
                                         PyExc_ArithmeticError);

    py::enum_<Space>(m, "Space")
        .value("circle", Space::circle)
        .value("halfline", Space::halfline);

    py::class_<Atom>(m, "Atom")
        .def(py::init<double, double>(), py::arg("pos"), py::arg("mass"))
        .def_readwrite("pos", &Atom::pos)
        .def_readwrite("mass", &Atom::mass)
        .def("__repr__", [](const Atom& a) {
            return "Atom(pos=" + format_double(a.pos) +
                   ", mass=" + format_double(a.mass) + ")";
        });

    py::class_<Measure>(m, "Measure")
        .def_readonly("space", &Measure::space)
        .def_readonly("atoms", &Measure::atoms)
        .def_readonly("label", &Measure::label)
        .def_property_readonly("nodes",
                               [](const Measure& mu) {
                                   return mu.has_density() ? mu.density->nodes
                                                           : std::vector<double>{};
                               })
        .def_property_readonly("values",
                               [](const Measure& mu) {
                                   return mu.has_density() ? mu.density->values
                                                           : std::vector<double>{};
                               })
        .def("total_mass", &Measure::total_mass)
        .def("to_json", [](const Measure& mu) { return serialize_measure(mu); })
        .def_static("from_json",
                    [](const std::string& text) { return parse_measure(text); })
        .def_static("point_mass", &Measure::point_mass, py::arg("space"),
                    py::arg("pos"), py::arg("label") = "")
        .def_static("haar", &Measure::haar, py::arg("grid_size") = 2048)
        .def_static("from_density", &Measure::from_density, py::arg("space"),
                    py::arg("nodes"), py::arg("values"), py::arg("label") = "",
                    py::arg("renormalize") = false);

    m.def("moment", [](const Measure& mu, int k) { return moment(mu, k); },
          py::arg("mu"), py::arg("k"));
    m.def("log_mean_b", &log_mean_b, py::arg("mu"));
    m.def("scale_measure", &scale_measure, py::arg("mu"), py::arg("b"));

    m.def("psi", [](const Measure& mu, cplx z) { return psi(mu, z); });
    m.def("eta", [](const Measure& mu, cplx z) { return eta(mu, z); });
    m.def("b_transform", [](const Measure& mu, cplx z) { return b_transform(mu, z); });

    // closed-form Brownian marginals
    m.def("chi_support", &chi_support, py::arg("t"));
    m.def("chi_density", &chi_density, py::arg("t"), py::arg("x"));
    m.def("lambda_support", [](double t) {
        auto s = lambda_support(t);
        return py::make_tuple(s.theta0, s.theta1, s.full_circle);
    });
    m.def("lambda_density", &lambda_density, py::arg("t"), py::arg("theta"));
    m.def("chi_measure", &chi_measure, py::arg("t"), py::arg("grid_size") = 2048);
    m.def("lambda_measure", &lambda_measure, py::arg("t"),
          py::arg("grid_size") = 2048);
    m.def("brownian_sigma", [](const std::string& family, double t, cplx z) {
        return brownian_sigma(
            family == "chi" ? BrownianFamily::chi : BrownianFamily::lambda, t, z);
    });

    // convolutions
    auto unwrap = [](ConvolutionResult&& r) { return std::move(r.measure); };
    m.def("free_convolve",
          [unwrap](const Measure& a, const Measure& b, int grid) {
              return unwrap(a.space == Space::circle ? free_convolve_circle(a, b, grid)
                                                     : free_convolve_halfline(a, b, grid));
          },
          py::arg("a"), py::arg("b"), py::arg("grid_size") = 2048);
    m.def("boolean_convolve",
          [unwrap](const Measure& a, const Measure& b, int grid) {
              return unwrap(a.space == Space::circle
                                ? boolean_convolve_circle(a, b, grid)
                                : boolean_convolve_halfline(a, b, grid));
          },
          py::arg("a"), py::arg("b"), py::arg("grid_size") = 2048);
    m.def("free_power",
          [unwrap](const Measure& mu, int k, int grid) {
              return unwrap(free_power(mu, k, grid));
          },
          py::arg("mu"), py::arg("k"), py::arg("grid_size") = 2048);
    m.def("boolean_power",
          [unwrap](const Measure& mu, int k, int grid) {
              return unwrap(boolean_power(mu, k, grid));
          },
          py::arg("mu"), py::arg("k"), py::arg("grid_size") = 2048);

    m.def("make_infdiv_law",
          [unwrap](const std::string& params_json, int grid) {
              return unwrap(
                  [&] {
                      InfdivLaw law = make_infdiv_law(parse_params(params_json), grid);
                      ConvolutionResult r;
                      r.measure = std::move(law.measure);
                      return r;
                  }());
          },
          py::arg("params_json"), py::arg("grid_size") = 2048);

    m.def("free_entropy",
          [](const Measure& mu) { return free_entropy(mu).value; }, py::arg("mu"));

    m.def("run_experiment",
          [](const std::string& name, double t, double mean,
             const std::vector<int>& ns, int grid) {
              Config cfg;
              cfg.circle_grid = grid;
              cfg.halfline_grid = grid;
              ExperimentReport rep;
              if (name == "haar") {
                  Measure mu;
                  mu.space = Space::circle;
                  mu.atoms = {Atom{0.0, 0.5 * (1.0 + mean)},
                              Atom{kPi, 0.5 * (1.0 - mean)}};
                  mu.validate();
                  rep = run_haar_superconvergence(mu, ns, cfg);
              } else if (name == "lambda") {
                  rep = run_lambda_superconvergence(t, ns, LambdaFamily::two_atom, cfg);
              } else if (name == "chi") {
                  rep = run_chi_superconvergence(t, ns, 0.05, cfg);
              } else if (name == "bp") {
                  rep = run_bercovici_pata(0.0, SigmaMeasure::point(1.0, 0.5 * t), ns,
                                           cfg);
              } else {
                  throw ValidationError("unknown experiment: " + name);
              }
              return rep.to_json();
          },
          py::arg("name"), py::arg("t") = 1.0, py::arg("mean") = 0.9, py::arg("ns"),
          py::arg("grid_size") = 512);
}
