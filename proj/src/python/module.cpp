#include "scsens/calibration.hpp"
#include "scsens/error.hpp"
#include "scsens/kernels.hpp"
#include "scsens/metrics.hpp"
#include "scsens/panel.hpp"
#include "scsens/parallel.hpp"
#include "scsens/plots.hpp"
#include "scsens/robustness.hpp"
#include "scsens/scm.hpp"
#include "scsens/sensitivity.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

namespace py = pybind11;
using namespace scsens;

namespace {

MetricKind to_metric(const py::object& m) {
  if (py::isinstance<py::str>(m)) return parse_metric(m.cast<std::string>());
  return m.cast<MetricKind>();
}

template <class F>
std::string to_text(F&& fn) {
  std::ostringstream s;
  fn(s);
  return s.str();
}

}  // namespace

PYBIND11_MODULE(scsens, m) {
  m.doc() = "Sensitivity analysis for synthetic control estimates";

  // Messages start with the error kind, e.g. "Infeasible: ...".
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);

  py::class_<SolveSettings>(m, "SolveSettings")
      .def(py::init<>())
      .def_readwrite("feas_tol", &SolveSettings::feas_tol)
      .def_readwrite("opt_tol", &SolveSettings::opt_tol)
      .def_readwrite("max_iters", &SolveSettings::max_iters)
      .def_readwrite("bisect_tol", &SolveSettings::bisect_tol);

  py::enum_<MetricKind>(m, "MetricKind")
      .value("UnconstrainedWeight", MetricKind::UnconstrainedWeight)
      .value("ConstrainedWeight", MetricKind::ConstrainedWeight)
      .value("ConstrainedError", MetricKind::ConstrainedError)
      .value("UnconstrainedWeightMulti", MetricKind::UnconstrainedWeightMulti)
      .def_property_readonly("code", [](MetricKind k) { return std::string(metric_code(k)); });

  py::class_<Panel>(m, "Panel")
      .def(py::init([](std::vector<std::string> units, std::vector<long> periods, Eigen::MatrixXd outcomes,
                       std::string treated, std::size_t t0_index, std::optional<std::size_t> target_index) {
             return make_panel(std::move(units), std::move(periods), std::move(outcomes), std::move(treated), t0_index,
                               target_index);
           }),
           py::arg("units"), py::arg("periods"), py::arg("outcomes"), py::arg("treated_unit"), py::arg("t0_index"),
           py::arg("target_index") = py::none())
      .def_static("from_csv", &load_csv, py::arg("path"), py::arg("treated_unit"), py::arg("first_treated_period"),
                  py::arg("target_period") = py::none())
      .def_readonly("units", &Panel::units)
      .def_readonly("periods", &Panel::periods)
      .def_readonly("outcomes", &Panel::outcomes)
      .def_readonly("treated_unit", &Panel::treated_unit)
      .def_readonly("t0_index", &Panel::t0_index)
      .def_readonly("target_index", &Panel::target_index)
      .def("controls", &Panel::controls)
      .def("with_target", &with_target, py::arg("target_period"))
      .def("to_csv", [](const Panel& p, const std::filesystem::path& path) { save_csv(p, path); }, py::arg("path"));

  py::class_<ScFit>(m, "ScFit")
      .def_property_readonly("unit", [](const ScFit& f) { return f.view.placebo_treated; })
      .def_property_readonly("donors", [](const ScFit& f) { return f.view.donors; })
      .def_readonly("weights", &ScFit::weights)
      .def_readonly("pre_error", &ScFit::pre_error)
      .def_readonly("predicted_trend", &ScFit::predicted_trend)
      .def_readonly("target_residual", &ScFit::target_residual)
      .def_readonly("perfect_prefit", &ScFit::perfect_prefit)
      .def_readonly("on_simplex", &ScFit::on_simplex)
      .def_readonly("converged", &ScFit::converged)
      .def_property_readonly("tau_hat", [](const ScFit& f) { return effect(f).tau_hat; });

  m.def("fit", [](const Panel& p, const std::string& unit, const SolveSettings& s) { return fit(donor_view(p, unit), s); },
        py::arg("panel"), py::arg("unit"), py::arg("settings") = SolveSettings{});
  m.def("fit_treated", &fit_treated, py::arg("panel"), py::arg("settings") = SolveSettings{});
  m.def("placebo_fits", &placebo_fits, py::arg("panel"), py::arg("exclude") = py::none(),
        py::arg("settings") = SolveSettings{});
  m.def(
      "with_external_weights",
      [](const Panel& p, const Eigen::VectorXd& w, double intercept, const SolveSettings& s) {
        return with_external_weights(donor_view(p, p.treated_unit), w, intercept, s);
      },
      py::arg("panel"), py::arg("weights"), py::arg("intercept") = 0.0, py::arg("settings") = SolveSettings{});

  py::class_<MisspecError>(m, "MisspecError")
      .def_readonly("value", &MisspecError::value)
      .def_readonly("metric", &MisspecError::metric)
      .def_readonly("unit", &MisspecError::unit);

  py::class_<PlaceboBound>(m, "PlaceboBound")
      .def_readonly("unit", &PlaceboBound::unit)
      .def_property_readonly("error", [](const PlaceboBound& b) { return b.error.value; })
      .def_readonly("percentile_rank", &PlaceboBound::percentile_rank)
      .def_readonly("lo", &PlaceboBound::lo)
      .def_readonly("hi", &PlaceboBound::hi)
      .def_readonly("plottable", &PlaceboBound::plottable);

  py::class_<SensitivityReport>(m, "SensitivityReport")
      .def_readonly("metric", &SensitivityReport::metric)
      .def_readonly("treated_unit", &SensitivityReport::treated_unit)
      .def_readonly("target_period", &SensitivityReport::target_period)
      .def_readonly("contrast", &SensitivityReport::contrast)
      .def_readonly("tau_hat", &SensitivityReport::tau_hat)
      .def_readonly("placebo", &SensitivityReport::placebo)
      .def_property_readonly("b0", [](const SensitivityReport& r) { return r.b0.value; })
      .def_readonly("j0", &SensitivityReport::j0)
      .def_readonly("nu", &SensitivityReport::nu)
      .def_readonly("notices", &SensitivityReport::notices)
      .def("to_json", [](const SensitivityReport& r) { return to_json(r).dump(2); })
      .def_static("from_json", [](const std::string& s) { return report_from_json(nlohmann::json::parse(s)); })
      .def("bounds_csv", [](const SensitivityReport& r) { return to_text([&](std::ostream& o) { write_bounds_csv(r, o); }); })
      .def("svg", [](const SensitivityReport& r) { return bounds_svg({r}); });

  m.def(
      "analyze",
      [](const Panel& p, const py::object& metric, const std::string& contrast, const SolveSettings& s) {
        return analyze_contrast(p, to_metric(metric), ContrastSpec::preset(contrast, p), s);
      },
      py::arg("panel"), py::arg("metric") = "uw", py::arg("contrast") = "point", py::arg("settings") = SolveSettings{});
  m.def("n_ratio", &n_ratio, py::arg("panel"), py::arg("unit"));

  py::class_<CoverageCurve>(m, "CoverageCurve")
      .def_readonly("metric", &CoverageCurve::metric)
      .def_property_readonly("cutoffs",
                             [](const CoverageCurve& c) {
                               std::vector<double> v;
                               for (const auto& pt : c.points) v.push_back(pt.cutoff);
                               return v;
                             })
      .def_property_readonly("coverage",
                             [](const CoverageCurve& c) {
                               std::vector<double> v;
                               for (const auto& pt : c.points) v.push_back(pt.coverage);
                               return v;
                             })
      .def_readonly("per_unit_min_rank", &CoverageCurve::per_unit_min_rank)
      .def_readonly("inner_placebos", &CoverageCurve::inner_placebos)
      .def("svg", [](const CoverageCurve& c) { return coverage_svg({c}); });

  m.def(
      "coverage",
      [](const Panel& p, const py::object& metric, const SolveSettings& s) { return coverage(p, to_metric(metric), s); },
      py::arg("panel"), py::arg("metric") = "uw", py::arg("settings") = SolveSettings{});

  py::class_<LeaveUnitOut>(m, "LeaveUnitOut")
      .def_readonly("unit", &LeaveUnitOut::unit)
      .def_readonly("periods", &LeaveUnitOut::periods)
      .def_readonly("observed", &LeaveUnitOut::observed)
      .def_property_readonly("base_trend", [](const LeaveUnitOut& r) { return r.base.predicted_trend; })
      .def_property_readonly("dropped_units",
                             [](const LeaveUnitOut& r) {
                               std::vector<std::string> v;
                               for (const auto& run : r.runs) v.push_back(run.dropped_unit);
                               return v;
                             })
      .def_readonly("band_lower", &LeaveUnitOut::band_lower)
      .def_readonly("band_upper", &LeaveUnitOut::band_upper)
      .def_readonly("target_inside_band", &LeaveUnitOut::target_inside_band);

  m.def("leave_unit_out", &leave_unit_out, py::arg("panel"), py::arg("unit"), py::arg("settings") = SolveSettings{});

  py::class_<BackdateResult>(m, "BackdateResult")
      .def_readonly("unit", &BackdateResult::unit)
      .def_readonly("backdate_periods", &BackdateResult::backdate_periods)
      .def_property_readonly("trend", [](const BackdateResult& r) { return r.fit_on_truncated.predicted_trend; })
      .def_readonly("validation_periods", &BackdateResult::validation_periods)
      .def_readonly("validation_errors", &BackdateResult::validation_errors)
      .def_readonly("post_periods", &BackdateResult::post_periods)
      .def_readonly("post_errors", &BackdateResult::post_errors);

  m.def("backdate", &backdate, py::arg("panel"), py::arg("unit"), py::arg("k"), py::arg("settings") = SolveSettings{});

  m.def("project_simplex", &project_simplex, py::arg("v"));
  m.def(
      "simplex_ls",
      [](const Eigen::MatrixXd& X, const Eigen::VectorXd& x, const SolveSettings& s) {
        const LsSolution r = simplex_ls(X, x, s);
        return py::make_tuple(r.weights, r.objective);
      },
      py::arg("X"), py::arg("x"), py::arg("settings") = SolveSettings{});

  m.def("set_workers", &set_workers, py::arg("n"));
  m.def("workers", &workers);
}
