#pragma once

#include "scsens/sensitivity.hpp"

namespace scsens::detail {

/// Everything analyze needs after the placebo errors and B0 are known.
struct PreparedAnalysis {
  SensitivityReport report;  // placebo bounds not yet filled in
  ScFit treated;
  Eigen::VectorXd functional;  // contrast functional per donor of the treated view
  SolveSettings settings;

  /// Effect bounds when the treated weights may be off by `cap`.
  Extremes effect_bounds(double cap) const;
};

PreparedAnalysis prepare_analysis(const Panel& panel, MetricKind metric, const ContrastSpec& contrast,
                                  const SolveSettings& settings, const ScFit* treated_fit);

}  // namespace scsens::detail
