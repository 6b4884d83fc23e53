#pragma once

#include "scsens/kernels.hpp"
#include "scsens/scm.hpp"

#include <string>
#include <string_view>

namespace scsens {

/// How far a set of synthetic control weights is from weights that predict
/// the target exactly.
enum class MetricKind {
  UnconstrainedWeight,       // l2 distance to the hyperplane
  ConstrainedWeight,         // l2 distance to simplex ∩ hyperplane
  ConstrainedError,          // relative extra pre-treatment error on simplex ∩ hyperplane
  UnconstrainedWeightMulti,  // l2 distance from the whole optimal weight set to the hyperplane
};

/// Short CLI codes: uw, cw, ce, uw-multi.
std::string_view metric_code(MetricKind kind);
std::string_view metric_name(MetricKind kind);
MetricKind parse_metric(std::string_view code);

struct MisspecError {
  double value = 0.0;  // in [0, +inf]
  MetricKind metric = MetricKind::UnconstrainedWeight;
  std::string unit;

  bool is_infinite() const;
};

/// Orders by value (+inf last), then by unit id.
bool error_less(const MisspecError& a, const MisspecError& b);

/// Distance from fit.weights to the weights reproducing `target`, where
/// target.normal holds one coefficient per donor of the fit's view. This is
/// the general form; the functions below use the donors' target-period
/// outcomes and the unit's own target outcome.
MisspecError misspec_distance(MetricKind kind, const ScFit& fit, const TargetHyperplane& target,
                              const SolveSettings& settings = {});

/// Extremes of functional' w over the weights within `cap` of the fit.
/// `functional` has one coefficient per donor of the fit's view.
Extremes functional_extremes(MetricKind kind, const ScFit& fit, const Eigen::VectorXd& functional, double cap,
                             const SolveSettings& settings = {});

/// B_j for a placebo fit: hyperplane {Y_donors' w = y_target}.
MisspecError placebo_error(MetricKind kind, const ScFit& fit, const SolveSettings& settings = {});

/// Smallest and largest plausible counterfactual outcome of the treated unit
/// at the target period when the weights may be off by `cap`.
Extremes counterfactual_extremes(MetricKind kind, const ScFit& treated_fit, const MisspecError& cap,
                                 const SolveSettings& settings = {});

/// B0: the error under which a zero effect becomes plausible, i.e. the
/// distance to weights predicting the observed treated outcome.
MisspecError nullifying_error(MetricKind kind, const ScFit& treated_fit, const SolveSettings& settings = {});

}  // namespace scsens
