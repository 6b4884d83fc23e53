#include "scsens/sensitivity.hpp"

#include "scsens/error.hpp"
#include "scsens/parallel.hpp"
#include "sensitivity_core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>

namespace scsens {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::Index post_start(const DonorView& v) { return static_cast<Eigen::Index>(v.t0_index + 1); }

// c0' applied to every donor's post-treatment path.
Eigen::VectorXd donor_functional(const DonorView& v, const Eigen::VectorXd& c0) {
  const Eigen::Index len = v.donor_paths.rows() - post_start(v);
  return v.donor_paths.bottomRows(len).transpose() * c0;
}

double own_functional(const DonorView& v, const Eigen::VectorXd& c) {
  const Eigen::Index len = v.unit_path.size() - post_start(v);
  return c.dot(v.unit_path.tail(len));
}

nlohmann::ordered_json number_json(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double json_number(const nlohmann::json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    throw Error(ErrorKind::InvalidArgument, "unexpected number text '" + s + "' in report");
  }
  return j.get<double>();
}

}  // namespace

ContrastSpec ContrastSpec::point(const Panel& panel) {
  const auto len = static_cast<Eigen::Index>(panel.num_post_periods());
  ContrastSpec c;
  c.name = "point";
  c.c1 = Eigen::VectorXd::Zero(len);
  c.c1(static_cast<Eigen::Index>(panel.target_index - panel.t0_index - 1)) = 1.0;
  c.c0 = -c.c1;
  return c;
}

ContrastSpec ContrastSpec::average(const Panel& panel) {
  const auto len = static_cast<Eigen::Index>(panel.num_post_periods());
  ContrastSpec c;
  c.name = "average";
  c.c1 = Eigen::VectorXd::Constant(len, 1.0 / static_cast<double>(len));
  c.c0 = -c.c1;
  return c;
}

ContrastSpec ContrastSpec::slope(const Panel& panel) {
  const auto len = static_cast<Eigen::Index>(panel.num_post_periods());
  if (len < 2) throw Error(ErrorKind::TooFewPeriods, "slope contrast needs at least two post-treatment periods");
  ContrastSpec c;
  c.name = "slope";
  c.c1 = Eigen::VectorXd::Zero(len);
  c.c1(len - 1) = 1.0 / static_cast<double>(len - 1);
  c.c1(0) = -1.0 / static_cast<double>(len - 1);
  c.c0 = -c.c1;
  return c;
}

ContrastSpec ContrastSpec::preset(std::string_view name, const Panel& panel) {
  if (name == "point") return point(panel);
  if (name == "average") return average(panel);
  if (name == "slope") return slope(panel);
  throw Error(ErrorKind::InvalidArgument, "unknown contrast '" + std::string(name) + "' (expected point, average, slope)");
}

void ContrastSpec::validate(std::size_t num_post_periods) const {
  const auto n = static_cast<Eigen::Index>(num_post_periods);
  if (c1.size() != n || c0.size() != n)
    throw Error(ErrorKind::DimensionMismatch, "contrast '" + name + "' must have " + std::to_string(n) +
                                                  " entries per arm");
  if (!c1.allFinite() || !c0.allFinite())
    throw Error(ErrorKind::InvalidArgument, "contrast '" + name + "' has non-finite entries");
}

namespace detail {

Extremes PreparedAnalysis::effect_bounds(double cap) const {
  if (std::isinf(cap)) return {-kInf, kInf};  // an infinite error never rules anything out
  const Extremes e = functional_extremes(report.metric, treated, functional, cap, settings);
  return {report.treated_outcome + e.lo, report.treated_outcome + e.hi};
}

PreparedAnalysis prepare_analysis(const Panel& panel, MetricKind metric, const ContrastSpec& contrast,
                                  const SolveSettings& settings, const ScFit* treated_fit) {
  settings.validate();
  panel.validate();
  contrast.validate(panel.num_post_periods());

  PreparedAnalysis out;
  out.settings = settings;
  out.treated = treated_fit ? *treated_fit : fit_treated(panel, settings);
  if (out.treated.view.placebo_treated != panel.treated_unit)
    throw Error(ErrorKind::InvalidArgument, "supplied fit is for " + out.treated.view.placebo_treated +
                                                ", not the treated unit " + panel.treated_unit);
  const auto placebos = placebo_fits(panel, std::nullopt, settings);

  auto& rep = out.report;
  rep.treated_unit = panel.treated_unit;
  rep.target_period = panel.periods[panel.target_index];
  rep.contrast = contrast.name;

  bool perfect = out.treated.perfect_prefit;
  for (const auto& f : placebos) perfect = perfect || f.perfect_prefit;
  if (metric == MetricKind::UnconstrainedWeight && perfect) {
    metric = MetricKind::UnconstrainedWeightMulti;
    rep.notices.emplace_back(
        "perfect pre-treatment fit detected; synthetic control weights may not be unique, switching to uw-multi");
  }
  rep.metric = metric;

  out.functional = donor_functional(out.treated.view, contrast.c0);
  rep.treated_outcome = own_functional(out.treated.view, contrast.c1);
  rep.tau_hat = rep.treated_outcome + out.functional.dot(out.treated.weights);

  std::vector<MisspecError> errors(placebos.size());
  parallel_for(placebos.size(), [&](std::size_t i) {
    const auto& v = placebos[i].view;
    errors[i] = misspec_distance(metric, placebos[i], {donor_functional(v, contrast.c0), own_functional(v, contrast.c0)},
                                 settings);
  });
  rep.b0 = misspec_distance(metric, out.treated, {out.functional, -rep.treated_outcome}, settings);

  std::sort(errors.begin(), errors.end(), error_less);
  const double J = static_cast<double>(errors.size());
  rep.placebo.resize(errors.size());
  for (std::size_t i = 0; i < errors.size(); ++i) {
    auto& p = rep.placebo[i];
    p.unit = errors[i].unit;
    p.error = errors[i];
    p.percentile_rank = static_cast<double>(i + 1) / J;
    p.lo = -kInf;
    p.hi = kInf;
    p.plottable = false;
  }
  const std::size_t count = count_at_or_below(rep.placebo, rep.b0);
  rep.j0 = count + 1;
  rep.nu = static_cast<double>(count) / J;
  return out;
}

}  // namespace detail

std::size_t count_at_or_below(const std::vector<PlaceboBound>& sorted, const MisspecError& b0) {
  return static_cast<std::size_t>(std::count_if(sorted.begin(), sorted.end(),
                                                [&](const PlaceboBound& p) { return p.error.value <= b0.value; }));
}

SensitivityReport analyze_contrast(const Panel& panel, MetricKind metric, const ContrastSpec& contrast,
                                   const SolveSettings& settings, const AnalyzeOptions& options) {
  auto prepared = detail::prepare_analysis(panel, metric, contrast, settings, options.treated_fit);
  auto& rep = prepared.report;
  if (options.compute_bounds) {
    parallel_for(rep.placebo.size(), [&](std::size_t i) {
      auto& p = rep.placebo[i];
      const Extremes b = prepared.effect_bounds(p.error.value);
      p.lo = b.lo;
      p.hi = b.hi;
      p.plottable = std::isfinite(b.lo) && std::isfinite(b.hi);
    });
  }
  return std::move(rep);
}

SensitivityReport analyze(const Panel& panel, MetricKind metric, const SolveSettings& settings,
                          const AnalyzeOptions& options) {
  return analyze_contrast(panel, metric, ContrastSpec::point(panel), settings, options);
}

double n_ratio(const Panel& panel, std::string_view unit) {
  const auto j = panel.unit_index(unit);
  if (j == panel.treated_index()) throw Error(ErrorKind::InvalidArgument, "n_ratio is defined for control units");
  const auto t = static_cast<Eigen::Index>(panel.target_index);
  double all = 0.0;
  for (std::size_t i = 0; i < panel.num_units(); ++i) {
    if (i == panel.treated_index()) continue;
    const double y = panel.outcomes(static_cast<Eigen::Index>(i), t);
    all += y * y;
  }
  const double yj = panel.outcomes(static_cast<Eigen::Index>(j), t);
  const double rest = all - yj * yj;
  if (!(rest > 0.0))
    throw Error(ErrorKind::ZeroNormal, "outcomes of the controls other than " + std::string(unit) + " are all zero");
  return std::sqrt(all / rest);
}

nlohmann::ordered_json to_json(const SensitivityReport& r) {
  nlohmann::ordered_json j;
  j["metric"] = metric_code(r.metric);
  j["treated_unit"] = r.treated_unit;
  j["target_period"] = r.target_period;
  j["contrast"] = r.contrast;
  j["tau_hat"] = number_json(r.tau_hat);
  j["treated_outcome"] = number_json(r.treated_outcome);
  j["B0"] = number_json(r.b0.value);
  j["j0"] = r.j0;
  j["nu"] = r.nu;
  j["num_placebos"] = r.placebo.size();
  auto rows = nlohmann::ordered_json::array();
  for (const auto& p : r.placebo) {
    nlohmann::ordered_json row;
    row["unit"] = p.unit;
    row["B"] = number_json(p.error.value);
    row["percentile_rank"] = p.percentile_rank;
    row["lo"] = number_json(p.lo);
    row["hi"] = number_json(p.hi);
    row["plottable"] = p.plottable;
    rows.push_back(std::move(row));
  }
  j["placebo"] = std::move(rows);
  j["notices"] = r.notices;
  return j;
}

SensitivityReport report_from_json(const nlohmann::json& j) {
  try {
    SensitivityReport r;
    r.metric = parse_metric(j.at("metric").get<std::string>());
    r.treated_unit = j.at("treated_unit").get<std::string>();
    r.target_period = j.at("target_period").get<long>();
    r.contrast = j.at("contrast").get<std::string>();
    r.tau_hat = json_number(j.at("tau_hat"));
    r.treated_outcome = json_number(j.at("treated_outcome"));
    r.b0 = {json_number(j.at("B0")), r.metric, r.treated_unit};
    r.j0 = j.at("j0").get<std::size_t>();
    r.nu = j.at("nu").get<double>();
    for (const auto& row : j.at("placebo")) {
      PlaceboBound p;
      p.unit = row.at("unit").get<std::string>();
      p.error = {json_number(row.at("B")), r.metric, p.unit};
      p.percentile_rank = row.at("percentile_rank").get<double>();
      p.lo = json_number(row.at("lo"));
      p.hi = json_number(row.at("hi"));
      p.plottable = row.at("plottable").get<bool>();
      r.placebo.push_back(std::move(p));
    }
    r.notices = j.at("notices").get<std::vector<std::string>>();
    if (j.at("num_placebos").get<std::size_t>() != r.placebo.size())
      throw Error(ErrorKind::InvalidArgument, "report placebo count does not match its rows");
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("malformed report: ") + e.what());
  }
}

std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_bounds_csv(const SensitivityReport& r, std::ostream& out) {
  out << "percentile_rank,unit,error,lo,hi,plottable\n";
  for (const auto& p : r.placebo) {
    out << format_number(p.percentile_rank) << ',' << csv_field(p.unit) << ',' << format_number(p.error.value) << ','
        << format_number(p.lo) << ',' << format_number(p.hi) << ',' << (p.plottable ? "true" : "false") << '\n';
  }
}

}  // namespace scsens
