#pragma once

#include "scsens/metrics.hpp"
#include "scsens/panel.hpp"

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace scsens {

struct CoveragePoint {
  double cutoff = 0.0;    // percentile-rank cutoff p
  double coverage = 0.0;  // share of placebo-treated units whose bounds at p contain 0
};

struct CoverageCurve {
  MetricKind metric = MetricKind::UnconstrainedWeight;
  std::vector<CoveragePoint> points;  // p = 0, 1/J', ..., 1 with J' = inner placebo count
  /// Smallest cutoff at which 0 enters each unit's bounds (+inf if never).
  std::vector<std::pair<std::string, double>> per_unit_min_rank;
  std::size_t inner_placebos = 0;  // J - 1
};

/// Casts every control unit as treated (with the real treated unit removed
/// from the panel) and records where a zero effect becomes plausible.
CoverageCurve coverage(const Panel& panel, MetricKind metric, const SolveSettings& settings = {});

/// cutoff,coverage
void write_coverage_csv(const CoverageCurve& curve, std::ostream& out);

}  // namespace scsens
