#include "scsens/calibration.hpp"

#include "scsens/error.hpp"
#include "scsens/parallel.hpp"
#include "scsens/sensitivity.hpp"
#include "sensitivity_core.hpp"

#include <cmath>
#include <limits>
#include <ostream>

namespace scsens {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct UnitOutcome {
  double min_rank = kInf;
  std::size_t placebos = 0;
};

UnitOutcome first_zero_rank(const Panel& panel, const std::string& unit, MetricKind metric,
                            const SolveSettings& settings) {
  const Panel inner = placebo_panel(panel, unit);
  const auto prepared = detail::prepare_analysis(inner, metric, ContrastSpec::point(inner), settings, nullptr);
  const auto& rep = prepared.report;
  UnitOutcome out;
  out.placebos = rep.placebo.size();
  if (rep.b0.value <= 0.0) {
    out.min_rank = 0.0;
    return out;
  }
  auto contains_zero = [&](std::size_t i) {
    const Extremes b = prepared.effect_bounds(rep.placebo[i].error.value);
    return b.lo <= 0.0 && 0.0 <= b.hi;
  };
  // Bounds are nested along the sorted errors, so the first rank covering
  // zero can be bisected.
  std::size_t lo = 0, hi = rep.placebo.size();
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (contains_zero(mid))
      hi = mid;
    else
      lo = mid + 1;
  }
  if (lo < rep.placebo.size()) out.min_rank = rep.placebo[lo].percentile_rank;
  return out;
}

}  // namespace

CoverageCurve coverage(const Panel& panel, MetricKind metric, const SolveSettings& settings) {
  panel.validate();
  if (panel.num_controls() < 3)
    throw Error(ErrorKind::TooFewUnits, "coverage needs at least three control units");
  const auto controls = panel.controls();
  std::vector<UnitOutcome> outcomes(controls.size());
  parallel_for(controls.size(),
               [&](std::size_t i) { outcomes[i] = first_zero_rank(panel, controls[i], metric, settings); });

  CoverageCurve curve;
  curve.metric = metric;
  curve.inner_placebos = outcomes.front().placebos;
  for (std::size_t i = 0; i < controls.size(); ++i) curve.per_unit_min_rank.emplace_back(controls[i], outcomes[i].min_rank);

  const std::size_t J = curve.inner_placebos;
  const double units = static_cast<double>(controls.size());
  for (std::size_t k = 0; k <= J; ++k) {
    const double p = static_cast<double>(k) / static_cast<double>(J);
    std::size_t covered = 0;
    for (const auto& o : outcomes)
      if (o.min_rank <= p + 1e-12) ++covered;
    curve.points.push_back({p, static_cast<double>(covered) / units});
  }
  return curve;
}

void write_coverage_csv(const CoverageCurve& curve, std::ostream& out) {
  out << "cutoff,coverage\n";
  for (const auto& pt : curve.points) out << format_number(pt.cutoff) << ',' << format_number(pt.coverage) << '\n';
}

}  // namespace scsens
