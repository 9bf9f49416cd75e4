// Python bindings for the detector, state-evolution engine and threshold
// machinery.

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lama/detector.hpp"
#include "lama/simulator.hpp"
#include "lama/studies.hpp"
#include "lama/thresholds.hpp"

namespace py = pybind11;
using namespace lama;

PYBIND11_MODULE(_core, m) {
  m.doc() = "LAMA large-MIMO detection: AMP detector, state evolution, "
            "recovery thresholds and Monte-Carlo tools";

  py::register_exception<validation_error>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<numerical_error>(m, "NumericalError", PyExc_RuntimeError);

  py::enum_<Field>(m, "Field")
      .value("real", Field::real)
      .value("complex", Field::complex_);

  py::class_<Constellation>(m, "Constellation")
      .def_static("make_standard", &Constellation::make_standard, py::arg("name"),
                  py::arg("field") = Field::complex_)
      .def_static("from_file", &Constellation::from_file, py::arg("path"),
                  py::arg("field") = Field::complex_)
      .def_static("custom", &Constellation::custom, py::arg("name"), py::arg("field"),
                  py::arg("points"), py::arg("priors"))
      .def_property_readonly("name", &Constellation::name)
      .def_property_readonly("field", &Constellation::field)
      .def_property_readonly("points", &Constellation::points)
      .def_property_readonly("priors", &Constellation::priors)
      .def_property_readonly("es", &Constellation::es)
      .def_property_readonly("separable", &Constellation::separable)
      .def("moments",
           [](const Constellation& c) {
             const auto m_ = c.moments();
             return py::make_tuple(m_.mean, m_.variance, m_.energy);
           })
      .def("real_part_alphabet", &Constellation::real_part_alphabet,
           py::return_value_policy::reference_internal)
      .def("__len__", &Constellation::size)
      .def("__repr__", [](const Constellation& c) {
        return "<Constellation " + c.name() + ">";
      });

  m.def("standard_constellation_names", &standard_constellation_names);

  // denoiser
  m.def("weights", &weights, py::arg("z"), py::arg("tau"), py::arg("c"));
  m.def("posterior_mean", &posterior_mean, py::arg("z"), py::arg("tau"), py::arg("c"));
  m.def("posterior_variance", &posterior_variance, py::arg("z"), py::arg("tau"),
        py::arg("c"));
  m.def("hard_decision", &hard_decision, py::arg("z"), py::arg("tau"), py::arg("c"));
  m.def("variance_identity_check", &variance_identity_check, py::arg("z"), py::arg("tau"),
        py::arg("c"), py::arg("step"));

  // state evolution
  py::class_<QuadratureSpec>(m, "QuadratureSpec")
      .def(py::init<>())
      .def_readwrite("nodes_per_dim", &QuadratureSpec::nodes_per_dim)
      .def_readwrite("abs_tol", &QuadratureSpec::abs_tol)
      .def_readwrite("rel_tol", &QuadratureSpec::rel_tol);

  py::enum_<PsiRoute>(m, "PsiRoute")
      .value("auto_route", PsiRoute::auto_route)
      .value("complex_full", PsiRoute::complex_full)
      .value("real_reduction", PsiRoute::real_reduction);

  py::class_<SEParams>(m, "SEParams")
      .def(py::init<>())
      .def_readwrite("beta", &SEParams::beta)
      .def_readwrite("n0", &SEParams::n0)
      .def_readwrite("n0post", &SEParams::n0post)
      .def_readwrite("constellation", &SEParams::constellation)
      .def_readwrite("quad", &SEParams::quad);

  py::class_<SEState>(m, "SEState")
      .def(py::init<>())
      .def_readwrite("sigma2", &SEState::sigma2)
      .def_readwrite("gamma2", &SEState::gamma2)
      .def_readwrite("t", &SEState::t);

  py::class_<SETrace>(m, "SETrace")
      .def_readonly("states", &SETrace::states)
      .def_readonly("converged", &SETrace::converged);

  m.def("psi", &psi, py::arg("sigma2"), py::arg("gamma2"), py::arg("c"), py::arg("quad"),
        py::arg("route") = PsiRoute::auto_route);
  m.def("phi", &phi, py::arg("sigma2"), py::arg("gamma2"), py::arg("c"), py::arg("quad"),
        py::arg("route") = PsiRoute::auto_route);
  m.def("se_step", &se_step);
  m.def("se_initial_state", &se_initial_state);
  m.def("se_run", &se_run, py::arg("params"), py::arg("max_iters"), py::arg("conv_tol"));
  m.def("g_function", &g_function, py::arg("sigma2"), py::arg("params"));

  py::class_<FixedPointReport>(m, "FixedPointReport")
      .def_readonly("roots", &FixedPointReport::roots)
      .def_readonly("largest", &FixedPointReport::largest)
      .def_readonly("smallest", &FixedPointReport::smallest)
      .def_readonly("eta", &FixedPointReport::eta)
      .def_readonly("count", &FixedPointReport::count)
      .def_readonly("grid_warning", &FixedPointReport::grid_warning);

  m.def("fixed_points", &fixed_points, py::arg("params"), py::arg("grid_lo") = 0.0,
        py::arg("grid_hi") = 0.0, py::arg("grid_points") = 2000,
        py::arg("check_resolution") = true);

  py::enum_<SerMethod>(m, "SerMethod")
      .value("closed_form", SerMethod::closed_form)
      .value("monte_carlo", SerMethod::monte_carlo);

  m.def("awgn_ser", &awgn_ser, py::arg("sigma2"), py::arg("c"), py::arg("method"),
        py::arg("mc_samples") = 400000, py::arg("seed") = 1);
  m.def("achievable_rate", &achievable_rate, py::arg("sigma2"), py::arg("c"),
        py::arg("quad"));

  // thresholds
  py::class_<ThresholdValue>(m, "ThresholdValue")
      .def_readonly("beta", &ThresholdValue::beta)
      .def_readonly("argmin_sigma2", &ThresholdValue::argmin_sigma2);

  m.def("ert", &ert, py::arg("c"), py::arg("quad"), py::arg("route") = PsiRoute::auto_route);
  m.def("mrt", &mrt, py::arg("c"), py::arg("quad"), py::arg("route") = PsiRoute::auto_route);
  m.def("n0_min", &n0_min, py::arg("beta"), py::arg("c"), py::arg("quad"),
        py::arg("route") = PsiRoute::auto_route);
  m.def("n0_max", &n0_max, py::arg("beta"), py::arg("c"), py::arg("quad"),
        py::arg("route") = PsiRoute::auto_route);

  py::class_<ThresholdReport>(m, "ThresholdReport")
      .def_readonly("constellation", &ThresholdReport::constellation)
      .def_readonly("beta_min", &ThresholdReport::beta_min)
      .def_readonly("beta_max", &ThresholdReport::beta_max)
      .def_readonly("n0_min_at_beta_min", &ThresholdReport::n0_min_at_beta_min)
      .def_readonly("n0_max_at_beta_max", &ThresholdReport::n0_max_at_beta_max);

  m.def("threshold_report", &threshold_report, py::arg("c"), py::arg("quad"),
        py::arg("route") = PsiRoute::auto_route);

  py::enum_<Regime>(m, "Regime")
      .value("optimal", Regime::optimal)
      .value("conditional", Regime::conditional)
      .value("suboptimal", Regime::suboptimal);

  py::class_<RegimeReport>(m, "RegimeReport")
      .def_readonly("regime", &RegimeReport::regime)
      .def_readonly("conditional_band", &RegimeReport::conditional_band)
      .def_readonly("beta_min", &RegimeReport::beta_min)
      .def_readonly("beta_max", &RegimeReport::beta_max)
      .def_readonly("n0_min", &RegimeReport::n0_min)
      .def_readonly("n0_max", &RegimeReport::n0_max)
      .def_readonly("root_count", &RegimeReport::root_count);

  m.def("classify_regime", &classify_regime, py::arg("beta"), py::arg("n0"), py::arg("c"),
        py::arg("quad"), py::arg("beta_min_hint") = std::nullopt,
        py::arg("beta_max_hint") = std::nullopt);

  // detector
  py::enum_<StopRule>(m, "StopRule")
      .value("fixed_iters", StopRule::fixed_iters)
      .value("tau_non_improving", StopRule::tau_non_improving);

  py::enum_<VarianceMode>(m, "VarianceMode")
      .value("analytic_g", VarianceMode::analytic_g)
      .value("residual_estimator", VarianceMode::residual_estimator);

  py::class_<LamaConfig>(m, "LamaConfig")
      .def(py::init<>())
      .def_readwrite("n0post", &LamaConfig::n0post)
      .def_readwrite("max_iters", &LamaConfig::max_iters)
      .def_readwrite("stop_rule", &LamaConfig::stop_rule)
      .def_readwrite("variance_mode", &LamaConfig::variance_mode);

  py::class_<LamaState>(m, "LamaState")
      .def_readonly("shat", &LamaState::shat)
      .def_readonly("r", &LamaState::r)
      .def_readonly("z", &LamaState::z)
      .def_readonly("tau", &LamaState::tau)
      .def_readonly("t", &LamaState::t);

  py::class_<LamaTraceRow>(m, "LamaTraceRow")
      .def_readonly("t", &LamaTraceRow::t)
      .def_readonly("tau", &LamaTraceRow::tau)
      .def_readonly("gamma2", &LamaTraceRow::gamma2)
      .def_readonly("sigma2_hat", &LamaTraceRow::sigma2_hat)
      .def_readonly("ser", &LamaTraceRow::ser);

  py::class_<LamaResult>(m, "LamaResult")
      .def_readonly("trace", &LamaResult::trace)
      .def_readonly("decision_indices", &LamaResult::decision_indices)
      .def_readonly("detected", &LamaResult::detected)
      .def_readonly("stopped_early", &LamaResult::stopped_early);

  m.def("lama_init", &lama_init<cplx>, py::arg("y"), py::arg("H"), py::arg("c"),
        py::arg("cfg"));
  m.def("lama_step", &lama_step<cplx>, py::arg("state"), py::arg("y"), py::arg("H"),
        py::arg("c"), py::arg("cfg"));
  m.def(
      "lama_run",
      [](const VecT<cplx>& y, const MatT<cplx>& H, const Constellation& c,
         const LamaConfig& cfg, std::optional<VecT<cplx>> s0) {
        return lama_run<cplx>(y, H, c, cfg, s0 ? &*s0 : nullptr);
      },
      py::arg("y"), py::arg("H"), py::arg("c"), py::arg("cfg"),
      py::arg("s0") = std::nullopt);
  m.def("matched_filter", &matched_filter<cplx>, py::arg("y"), py::arg("H"));
  m.def("mmse_detect", &mmse_detect, py::arg("y"), py::arg("H"), py::arg("c"),
        py::arg("n0"));

  m.def("n0_from_snr_db", &n0_from_snr_db, py::arg("snr_db"), py::arg("beta"),
        py::arg("es"));
  m.def("snr_db_from_n0", &snr_db_from_n0, py::arg("n0"), py::arg("beta"), py::arg("es"));
  m.def("awgn_snr_db_for_ser", &awgn_snr_db_for_ser, py::arg("c"), py::arg("beta"),
        py::arg("target_ser"));

#ifdef VERSION_INFO
#define STRINGIFY(x) #x
#define MACRO_STRINGIFY(x) STRINGIFY(x)
  m.attr("__version__") = MACRO_STRINGIFY(VERSION_INFO);
#else
  m.attr("__version__") = "dev";
#endif
}
