#include "scsens/robustness.hpp"

#include "scsens/error.hpp"
#include "scsens/parallel.hpp"
#include "scsens/sensitivity.hpp"

#include <ostream>

namespace scsens {

LeaveUnitOut leave_unit_out(const Panel& panel, std::string_view as_treated, const SolveSettings& settings) {
  LeaveUnitOut out;
  out.unit = std::string(as_treated);
  out.periods = panel.periods;
  out.target_index = panel.target_index;
  const DonorView view = donor_view(panel, as_treated);
  out.observed = view.unit_path;
  out.base = fit(view, settings);

  std::vector<std::string> dropped;
  for (std::size_t k = 0; k < view.num_donors(); ++k)
    if (out.base.weights(static_cast<Eigen::Index>(k)) > settings.feas_tol) dropped.push_back(view.donors[k]);

  out.runs.resize(dropped.size());
  parallel_for(dropped.size(), [&](std::size_t i) {
    auto& run = out.runs[i];
    run.dropped_unit = dropped[i];
    run.refit = fit(donor_view(panel, as_treated, dropped[i]), settings);
    run.trend = run.refit.predicted_trend;
  });

  out.band_lower = out.base.predicted_trend;
  out.band_upper = out.base.predicted_trend;
  for (const auto& run : out.runs) {
    out.band_lower = out.band_lower.cwiseMin(run.trend);
    out.band_upper = out.band_upper.cwiseMax(run.trend);
  }
  const auto t = static_cast<Eigen::Index>(panel.target_index);
  out.target_inside_band = out.band_lower(t) <= out.observed(t) && out.observed(t) <= out.band_upper(t);
  return out;
}

BackdateResult backdate(const Panel& panel, std::string_view as_treated, std::size_t k,
                        const SolveSettings& settings) {
  if (k < 1) throw Error(ErrorKind::TooFewPeriods, "backdating must hold out at least one pre-treatment period");
  if (panel.t0_index + 1 < k + 2)
    throw Error(ErrorKind::TooFewPeriods, "holding out " + std::to_string(k) + " of " +
                                              std::to_string(panel.t0_index + 1) +
                                              " pre-treatment periods leaves fewer than two to fit on");
  const DonorView full = donor_view(panel, as_treated);
  const DonorView cut = make_view(full.placebo_treated, full.donors, full.unit_path, full.donor_paths,
                                  panel.t0_index - k, panel.target_index);

  BackdateResult out;
  out.unit = std::string(as_treated);
  out.backdate_periods = k;
  out.fit_on_truncated = fit(cut, settings);
  out.fit_on_truncated.view.donor_rows = full.donor_rows;

  const auto& trend = out.fit_on_truncated.predicted_trend;
  const auto first_held = static_cast<Eigen::Index>(panel.t0_index + 1 - k);
  const auto kk = static_cast<Eigen::Index>(k);
  out.validation_errors = trend.segment(first_held, kk) - full.unit_path.segment(first_held, kk);
  for (Eigen::Index i = 0; i < kk; ++i) out.validation_periods.push_back(panel.periods[static_cast<std::size_t>(first_held + i)]);

  const auto first_post = static_cast<Eigen::Index>(panel.t0_index + 1);
  const auto len = static_cast<Eigen::Index>(panel.num_post_periods());
  out.post_predictions = trend.tail(len);
  out.post_errors = out.post_predictions - full.unit_path.tail(len);
  for (Eigen::Index i = 0; i < len; ++i) out.post_periods.push_back(panel.periods[static_cast<std::size_t>(first_post + i)]);
  return out;
}

void write_envelope_csv(const LeaveUnitOut& r, std::ostream& out) {
  out << "period,observed,base,lower,upper\n";
  for (std::size_t i = 0; i < r.periods.size(); ++i) {
    const auto t = static_cast<Eigen::Index>(i);
    out << r.periods[i] << ',' << format_number(r.observed(t)) << ',' << format_number(r.base.predicted_trend(t))
        << ',' << format_number(r.band_lower(t)) << ',' << format_number(r.band_upper(t)) << '\n';
  }
}

void write_validation_csv(const BackdateResult& r, const Panel& panel, std::ostream& out) {
  out << "period,observed,predicted,residual\n";
  const auto row = static_cast<Eigen::Index>(panel.unit_index(r.unit));
  for (std::size_t i = 0; i < r.validation_periods.size(); ++i) {
    const auto t = static_cast<Eigen::Index>(panel.period_index(r.validation_periods[i]));
    out << r.validation_periods[i] << ',' << format_number(panel.outcomes(row, t)) << ','
        << format_number(r.fit_on_truncated.predicted_trend(t)) << ','
        << format_number(r.validation_errors(static_cast<Eigen::Index>(i))) << '\n';
  }
}

}  // namespace scsens
