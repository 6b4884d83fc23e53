#pragma once

#include "scsens/metrics.hpp"
#include "scsens/panel.hpp"
#include "scsens/scm.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace scsens {

/// Linear contrast of post-treatment outcomes:
/// tau_c = c1' Y_treated,post(1) + c0' Y_treated,post(0).
/// Both vectors run over periods t0_index+1 .. last.
struct ContrastSpec {
  std::string name = "point";
  Eigen::VectorXd c1;
  Eigen::VectorXd c0;

  /// Effect at the panel's target period.
  static ContrastSpec point(const Panel& panel);
  /// Average effect over all post-treatment periods.
  static ContrastSpec average(const Panel& panel);
  /// Effect on the average per-period slope between the first and last
  /// post-treatment periods.
  static ContrastSpec slope(const Panel& panel);
  /// point | average | slope
  static ContrastSpec preset(std::string_view name, const Panel& panel);

  void validate(std::size_t num_post_periods) const;
};

struct PlaceboBound {
  std::string unit;
  MisspecError error;
  double percentile_rank = 0.0;  // (position + 1) / J in ascending error order
  double lo = 0.0;               // effect bounds at this error level
  double hi = 0.0;
  bool plottable = true;  // false when the bounds are infinite
};

struct SensitivityReport {
  MetricKind metric = MetricKind::UnconstrainedWeight;
  std::string treated_unit;
  long target_period = 0;
  std::string contrast = "point";
  double tau_hat = 0.0;
  double treated_outcome = 0.0;     // c1' Y_treated,post (Y_treated at the target for the point contrast)
  std::vector<PlaceboBound> placebo;  // ascending by (error, unit)
  MisspecError b0;
  std::size_t j0 = 1;  // B_{j0} <= B0 < B_{j0+1}, placebo ranks counted from 2
  double nu = 0.0;     // (j0 - 1) / J
  std::vector<std::string> notices;

  std::size_t num_placebos() const { return placebo.size(); }
};

struct AnalyzeOptions {
  /// Use these weights for the treated unit instead of solving for them
  /// (see with_external_weights). Placebo units always use synthetic control.
  const ScFit* treated_fit = nullptr;
  /// Skip the per-unit bound computation (errors, B0 and nu only).
  bool compute_bounds = true;
};

/// Placebo error distribution, B0, nu and the bounds at every placebo error.
SensitivityReport analyze(const Panel& panel, MetricKind metric, const SolveSettings& settings = {},
                          const AnalyzeOptions& options = {});

/// Same pipeline for a linear contrast of post-treatment outcomes.
SensitivityReport analyze_contrast(const Panel& panel, MetricKind metric, const ContrastSpec& contrast,
                                   const SolveSettings& settings = {}, const AnalyzeOptions& options = {});

/// ||Y_controls,T*|| / ||Y_controls without unit,T*||, the factor that turns
/// a placebo residual into a bound half-width. Always >= 1.
double n_ratio(const Panel& panel, std::string_view unit);

/// Number of placebo errors <= B0 (that is, j0 - 1).
std::size_t count_at_or_below(const std::vector<PlaceboBound>& sorted, const MisspecError& b0);

nlohmann::ordered_json to_json(const SensitivityReport& report);
SensitivityReport report_from_json(const nlohmann::json& j);

/// percentile_rank,unit,error,lo,hi,plottable
void write_bounds_csv(const SensitivityReport& report, std::ostream& out);

/// Shortest round-trip text for a double; "inf" / "-inf" for infinities.
std::string format_number(double v);

}  // namespace scsens
