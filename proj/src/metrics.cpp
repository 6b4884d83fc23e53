#include "scsens/metrics.hpp"

#include "scsens/error.hpp"

#include <cmath>
#include <limits>

namespace scsens {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_normal(const Eigen::VectorXd& normal, const std::string& unit) {
  if (!(normal.norm() > 0.0))
    throw Error(ErrorKind::ZeroNormal, "donor outcomes at the target are all zero for unit " + unit);
}

// Best simplex pre-treatment error of the fit's view. External weights do
// not define it, so it is solved for.
double optimal_pre_error(const ScFit& fit, const SolveSettings& settings) {
  if (!fit.external) return fit.pre_error;
  return simplex_ls(fit.view.X_donors, fit.view.x_target, settings).objective;
}

// Range of functional' w over the simplex least-squares optimal set, taken as
// the weights whose error is within 1e-12 (relative) of the optimum. With a
// positive optimum the set widens like the square root of that slack, so it
// must stay far below opt_tol; a perfect fit gets feas_tol of absolute room.
Extremes optimal_set_range(const ScFit& fit, const Eigen::VectorXd& functional, const SolveSettings& settings) {
  const double e_star = optimal_pre_error(fit, settings);
  const double cap = e_star * (1.0 + 1e-12) + (e_star < settings.feas_tol ? settings.feas_tol : 0.0);
  return extremize_linear_under_error_cap(functional, fit.view.X_donors, fit.view.x_target, cap, settings, e_star);
}

}  // namespace

std::string_view metric_code(MetricKind kind) {
  switch (kind) {
    case MetricKind::UnconstrainedWeight: return "uw";
    case MetricKind::ConstrainedWeight: return "cw";
    case MetricKind::ConstrainedError: return "ce";
    case MetricKind::UnconstrainedWeightMulti: return "uw-multi";
  }
  return "?";
}

std::string_view metric_name(MetricKind kind) {
  switch (kind) {
    case MetricKind::UnconstrainedWeight: return "unconstrained weight space";
    case MetricKind::ConstrainedWeight: return "constrained weight space";
    case MetricKind::ConstrainedError: return "constrained error space";
    case MetricKind::UnconstrainedWeightMulti: return "unconstrained weight space (multiple solutions)";
  }
  return "?";
}

MetricKind parse_metric(std::string_view code) {
  for (auto k : {MetricKind::UnconstrainedWeight, MetricKind::ConstrainedWeight, MetricKind::ConstrainedError,
                 MetricKind::UnconstrainedWeightMulti})
    if (metric_code(k) == code) return k;
  throw Error(ErrorKind::InvalidArgument, "unknown metric '" + std::string(code) + "' (expected uw, cw, ce, uw-multi)");
}

bool MisspecError::is_infinite() const { return std::isinf(value); }

bool error_less(const MisspecError& a, const MisspecError& b) {
  if (a.value != b.value) return a.value < b.value;
  return a.unit < b.unit;
}

MisspecError misspec_distance(MetricKind kind, const ScFit& fit, const TargetHyperplane& target,
                              const SolveSettings& settings) {
  const auto& v = fit.view;
  if (target.normal.size() != fit.weights.size())
    throw Error(ErrorKind::DimensionMismatch, "target functional does not match the donors of " + v.placebo_treated);
  MisspecError out{0.0, kind, v.placebo_treated};
  switch (kind) {
    case MetricKind::UnconstrainedWeight:
      require_normal(target.normal, v.placebo_treated);
      out.value = hyperplane_project(fit.weights, target).distance;
      break;
    case MetricKind::ConstrainedWeight:
      require_normal(target.normal, v.placebo_treated);
      try {
        out.value = project_simplex_hyperplane(fit.weights, target, settings).distance;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::Infeasible) throw;
        out.value = kInf;
      }
      break;
    case MetricKind::ConstrainedError: {
      const double e_star = optimal_pre_error(fit, settings);
      if (e_star < settings.feas_tol)
        throw Error(ErrorKind::UndefinedMetric,
                    "constrained error metric needs a non-zero pre-treatment error; unit " + v.placebo_treated +
                        " is fitted perfectly (use uw-multi)");
      try {
        const double e_plane = simplex_ls_on_hyperplane(v.X_donors, v.x_target, target, settings).objective;
        out.value = std::max(0.0, e_plane / e_star - 1.0);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::Infeasible) throw;
        out.value = kInf;
      }
      break;
    }
    case MetricKind::UnconstrainedWeightMulti: {
      require_normal(target.normal, v.placebo_treated);
      const Extremes r = optimal_set_range(fit, target.normal, settings);
      const double miss = std::max({0.0, r.lo - target.offset, target.offset - r.hi});
      out.value = miss / target.normal.norm();
      break;
    }
  }
  return out;
}

Extremes functional_extremes(MetricKind kind, const ScFit& fit, const Eigen::VectorXd& functional, double cap,
                             const SolveSettings& settings) {
  const auto& v = fit.view;
  if (functional.size() != fit.weights.size())
    throw Error(ErrorKind::DimensionMismatch, "functional does not match the donors of " + v.placebo_treated);
  if (std::isnan(cap) || cap < 0.0) throw Error(ErrorKind::InvalidArgument, "misspecification cap must be >= 0");
  switch (kind) {
    case MetricKind::UnconstrainedWeight:
      if (std::isinf(cap)) return {-kInf, kInf};
      return ball_linear_extremes(functional, fit.weights, cap);
    case MetricKind::ConstrainedWeight: {
      if (std::isinf(cap)) return {functional.minCoeff(), functional.maxCoeff()};
      const double lo = min_linear_on_ball_simplex(functional, fit.weights, cap, settings).value;
      const double hi = -min_linear_on_ball_simplex(-functional, fit.weights, cap, settings).value;
      return {lo, hi};
    }
    case MetricKind::ConstrainedError: {
      if (std::isinf(cap)) return {functional.minCoeff(), functional.maxCoeff()};
      const double e_star = optimal_pre_error(fit, settings);
      if (e_star < settings.feas_tol)
        throw Error(ErrorKind::UndefinedMetric, "constrained error metric is undefined for perfectly fitted unit " +
                                                    v.placebo_treated);
      return extremize_linear_under_error_cap(functional, v.X_donors, v.x_target, (1.0 + cap) * e_star, settings,
                                              e_star);
    }
    case MetricKind::UnconstrainedWeightMulti: {
      if (std::isinf(cap)) return {-kInf, kInf};
      const Extremes r = optimal_set_range(fit, functional, settings);
      const double spread = cap * functional.norm();
      return {r.lo - spread, r.hi + spread};
    }
  }
  return {};
}

MisspecError placebo_error(MetricKind kind, const ScFit& fit, const SolveSettings& settings) {
  return misspec_distance(kind, fit, {fit.view.y_donors_target, fit.view.y_target}, settings);
}

Extremes counterfactual_extremes(MetricKind kind, const ScFit& treated_fit, const MisspecError& cap,
                                 const SolveSettings& settings) {
  if (cap.metric != kind) throw Error(ErrorKind::InvalidArgument, "cap was measured with a different metric");
  return functional_extremes(kind, treated_fit, treated_fit.view.y_donors_target, cap.value, settings);
}

MisspecError nullifying_error(MetricKind kind, const ScFit& treated_fit, const SolveSettings& settings) {
  return placebo_error(kind, treated_fit, settings);
}

}  // namespace scsens
