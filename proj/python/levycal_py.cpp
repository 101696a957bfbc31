#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "levycal/config.hpp"
#include "levycal/errors.hpp"
#include "levycal/io.hpp"

namespace py = pybind11;
using namespace levycal;

PYBIND11_MODULE(_levycal, m) {
    m.doc() = "Spectral calibration of exponential Levy models";

    static py::exception<Error> exc(m, "LevycalError");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            exc(e.what());
        }
    });

    py::class_<MertonParams>(m, "MertonParams")
        .def(py::init<>())
        .def(py::init([](double sigma, double lambda, double eta, double v) { return MertonParams{sigma, lambda, eta, v}; }),
             py::arg("sigma"), py::arg("lam"), py::arg("eta"), py::arg("v"))
        .def_readwrite("sigma", &MertonParams::sigma)
        .def_readwrite("lam", &MertonParams::lambda)
        .def_readwrite("eta", &MertonParams::eta)
        .def_readwrite("v", &MertonParams::v);

    py::class_<LevyTriplet>(m, "LevyTriplet")
        .def_static("black_scholes", &LevyTriplet::black_scholes)
        .def_static("merton", &LevyTriplet::merton)
        .def_readonly("sigma2", &LevyTriplet::sigma2)
        .def_readonly("gamma", &LevyTriplet::gamma)
        .def_readonly("lam", &LevyTriplet::lambda);

    m.def("merton_gamma", &merton_gamma);
    m.def("psi_true", &psi_true);
    m.def("mu_density", py::overload_cast<double, const MertonParams&>(&mu_density));
    m.def("merton_call_series", &merton_call_series, py::arg("params"), py::arg("S"), py::arg("r"), py::arg("T"),
          py::arg("K"));
    m.def("option_curve",
          [](const LevyTriplet& t, double T, const std::vector<double>& xs) { return option_curve(t, T, xs); });

    py::class_<ObservationSample>(m, "ObservationSample")
        .def(py::init([](double x, double O, double delta) { return ObservationSample{x, O, delta}; }))
        .def_readwrite("x", &ObservationSample::x)
        .def_readwrite("O", &ObservationSample::O)
        .def_readwrite("delta", &ObservationSample::delta);

    py::class_<WeightFamily>(m, "WeightFamily")
        .def_readonly("s", &WeightFamily::s)
        .def_readonly("a", &WeightFamily::a)
        .def_readonly("b", &WeightFamily::b)
        .def_readonly("c", &WeightFamily::c)
        .def_readonly("p", &WeightFamily::p)
        .def_readonly("q", &WeightFamily::q)
        .def("w_sigma", &WeightFamily::w_sigma)
        .def("w_gamma", &WeightFamily::w_gamma)
        .def("w_lambda", &WeightFamily::w_lambda)
        .def("w0", &WeightFamily::w0);
    m.def("build_weights", &build_weights);

    py::enum_<CutoffPolicy>(m, "CutoffPolicy")
        .value("Fixed", CutoffPolicy::Fixed)
        .value("Auto", CutoffPolicy::Auto)
        .value("Oracle", CutoffPolicy::Oracle);

    py::class_<CalibrationConfig>(m, "CalibrationConfig")
        .def(py::init<>())
        .def_readwrite("policy", &CalibrationConfig::policy)
        .def_readwrite("U", &CalibrationConfig::U)
        .def_readwrite("N_quad", &CalibrationConfig::N_quad)
        .def_property(
            "s", [](const CalibrationConfig& c) { return c.bounds.s; }, [](CalibrationConfig& c, int s) { c.bounds.s = s; });

    py::class_<TripletEstimate>(m, "TripletEstimate")
        .def_readonly("sigma2", &TripletEstimate::sigma2)
        .def_readonly("gamma", &TripletEstimate::gamma)
        .def_readonly("lam", &TripletEstimate::lambda);

    py::class_<CalibrationResult>(m, "CalibrationResult")
        .def_readonly("est", &CalibrationResult::est)
        .def_readonly("U", &CalibrationResult::U)
        .def_readonly("mu_x", &CalibrationResult::mu_x)
        .def_readonly("mu_hat", &CalibrationResult::mu_hat);

    m.def(
        "calibrate",
        [](const std::vector<ObservationSample>& s, double T, const CalibrationConfig& cfg, const std::vector<double>& grid) {
            return calibrate(s, T, cfg, grid);
        },
        py::arg("samples"), py::arg("T"), py::arg("cfg"), py::arg("mu_grid") = std::vector<double>{});

    py::class_<SimConfig>(m, "SimConfig")
        .def(py::init<>())
        .def_readwrite("merton", &SimConfig::merton)
        .def_readwrite("n", &SimConfig::n)
        .def_readwrite("reps", &SimConfig::reps)
        .def_readwrite("seed", &SimConfig::seed)
        .def_readwrite("alpha", &SimConfig::alpha)
        .def_readwrite("workers", &SimConfig::workers)
        .def_readwrite("track_mu", &SimConfig::track_mu)
        .def_readwrite("rel_noise", &SimConfig::rel_noise)
        .def_readwrite("calib", &SimConfig::calib);

    m.def("gen_samples", [](const SimConfig& c, int rep) { return quotes_to_samples(gen_dataset(c, rep)); });
    m.def("coverage_json", [](const SimConfig& c) { return coverage_json(run_coverage(c)); });
    m.def("normal_quantile", &normal_quantile);
}
