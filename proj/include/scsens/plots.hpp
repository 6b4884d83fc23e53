#pragma once

#include "scsens/calibration.hpp"
#include "scsens/panel.hpp"
#include "scsens/robustness.hpp"
#include "scsens/sensitivity.hpp"

#include <string>
#include <vector>

namespace scsens {

/// Bounds against percentile rank, one colour per report: dotted line at the
/// estimate, a bar per placebo error level, and a shaded band where zero
/// first becomes plausible.
std::string bounds_svg(const std::vector<SensitivityReport>& reports);

/// Coverage curves with the 45-degree reference line.
std::string coverage_svg(const std::vector<CoverageCurve>& curves);

/// Observed trend, full-pool synthetic trend and leave-unit-out envelope.
std::string envelope_svg(const LeaveUnitOut& result);

/// Observed trend against the backdated synthetic trend; the held-out
/// periods are marked with vertical lines.
std::string backdate_svg(const BackdateResult& result, const Panel& panel);

}  // namespace scsens
