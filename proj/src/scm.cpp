#include "scsens/scm.hpp"

#include "scsens/error.hpp"
#include "scsens/parallel.hpp"

#include <cmath>

namespace scsens {

namespace {

void finish(ScFit& f, const SolveSettings& settings) {
  const auto& v = f.view;
  f.predicted_trend = v.donor_paths * f.weights;
  f.pre_error = (v.x_target - v.X_donors * f.weights).norm();
  f.target_residual = f.predicted_target() - v.y_target;
  f.perfect_prefit = f.pre_error < settings.feas_tol;
}

}  // namespace

ScFit fit(const DonorView& view, const SolveSettings& settings) {
  if (view.num_donors() == 0) throw Error(ErrorKind::TooFewUnits, "unit " + view.placebo_treated + " has no donors");
  const LsSolution sol = simplex_ls(view.X_donors, view.x_target, settings);
  ScFit f;
  f.view = view;
  f.weights = sol.weights;
  f.gap = sol.gap;
  f.iterations = sol.iterations;
  f.converged = sol.converged;
  finish(f, settings);
  return f;
}

ScFit fit_treated(const Panel& panel, const SolveSettings& settings) {
  return fit(donor_view(panel, panel.treated_unit), settings);
}

std::vector<ScFit> placebo_fits(const Panel& panel, const std::optional<std::string>& exclude,
                                const SolveSettings& settings) {
  std::vector<std::string> units;
  for (const auto& u : panel.controls())
    if (!exclude || u != *exclude) units.push_back(u);
  if (exclude) panel.unit_index(*exclude);
  std::vector<ScFit> fits(units.size());
  parallel_for(units.size(), [&](std::size_t i) { fits[i] = fit(donor_view(panel, units[i], exclude), settings); });
  return fits;
}

EffectEstimate effect(const ScFit& fit) {
  return {-fit.target_residual, fit.view.target_index, static_cast<long>(fit.view.target_index)};
}

EffectEstimate effect(const ScFit& fit, const Panel& panel) {
  EffectEstimate e = effect(fit);
  e.target_period = panel.periods.at(e.target_index);
  return e;
}

ScFit with_external_weights(const DonorView& view, const Eigen::VectorXd& weights, double intercept,
                            const SolveSettings& settings) {
  const auto n = static_cast<Eigen::Index>(view.num_donors());
  if (weights.size() != n && weights.size() != n + 1)
    throw Error(ErrorKind::DimensionMismatch, "expected " + std::to_string(n) + " weights (or " +
                                                  std::to_string(n + 1) + " with intercept), got " +
                                                  std::to_string(weights.size()));
  if (!weights.allFinite() || !std::isfinite(intercept))
    throw Error(ErrorKind::InvalidArgument, "external weights must be finite");

  Eigen::VectorXd w = weights;
  if (weights.size() == n + 1 && intercept != 0.0)
    throw Error(ErrorKind::InvalidArgument, "intercept given both as a weight and as a separate value");
  if (weights.size() == n && intercept != 0.0) {
    w.conservativeResize(n + 1);
    w(n) = intercept;
  }

  ScFit f;
  if (w.size() == n + 1) {
    auto donors = view.donors;
    donors.emplace_back(kInterceptDonor);
    Eigen::MatrixXd paths(view.donor_paths.rows(), n + 1);
    paths << view.donor_paths, Eigen::VectorXd::Ones(view.donor_paths.rows());
    f.view = make_view(view.placebo_treated, std::move(donors), view.unit_path, std::move(paths), view.t0_index,
                       view.target_index);
    f.view.donor_rows = view.donor_rows;
  } else {
    f.view = view;
  }
  f.weights = w;
  f.external = true;
  const auto donor_part = w.head(n);  // the intercept is not a simplex coordinate
  f.on_simplex = n > 0 && donor_part.minCoeff() >= -settings.feas_tol && std::abs(donor_part.sum() - 1.0) <= settings.feas_tol;
  finish(f, settings);
  return f;
}

}  // namespace scsens
