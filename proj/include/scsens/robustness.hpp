#pragma once

#include "scsens/panel.hpp"
#include "scsens/scm.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <string>
#include <vector>

namespace scsens {

struct LeaveUnitOutResult {
  std::string dropped_unit;
  ScFit refit;
  Eigen::VectorXd trend;  // refit.predicted_trend
};

/// Refits after dropping each positively weighted donor, and the pointwise
/// envelope of those trends together with the full-pool trend.
struct LeaveUnitOut {
  std::string unit;
  std::vector<long> periods;
  Eigen::VectorXd observed;
  ScFit base;
  std::vector<LeaveUnitOutResult> runs;
  Eigen::VectorXd band_lower;
  Eigen::VectorXd band_upper;
  std::size_t target_index = 0;
  bool target_inside_band = false;  // observed target outcome within the band
};

/// `as_treated` may be the treated unit or any control (placebo run; the
/// treated unit is then kept out of the donor pool).
LeaveUnitOut leave_unit_out(const Panel& panel, std::string_view as_treated, const SolveSettings& settings = {});

struct BackdateResult {
  std::string unit;
  std::size_t backdate_periods = 0;  // k
  ScFit fit_on_truncated;            // fitted on periods 0 .. t0_index - k
  std::vector<long> validation_periods;
  Eigen::VectorXd validation_errors;  // predicted - observed on the k held-out pre-periods
  std::vector<long> post_periods;
  Eigen::VectorXd post_predictions;
  Eigen::VectorXd post_errors;  // predicted - observed after treatment
};

BackdateResult backdate(const Panel& panel, std::string_view as_treated, std::size_t k,
                        const SolveSettings& settings = {});

/// period,observed,base,lower,upper
void write_envelope_csv(const LeaveUnitOut& result, std::ostream& out);
/// period,observed,predicted,residual for the validation periods
void write_validation_csv(const BackdateResult& result, const Panel& panel, std::ostream& out);

}  // namespace scsens
