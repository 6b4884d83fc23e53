#pragma once

#include "scsens/kernels.hpp"
#include "scsens/panel.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace scsens {

/// Synthetic control fit of one unit against its donor pool.
struct ScFit {
  DonorView view;
  Eigen::VectorXd weights;          // one per donor in view.donors
  double pre_error = 0.0;           // ||x - X w||
  Eigen::VectorXd predicted_trend;  // donor_paths * weights, all periods
  double target_residual = 0.0;     // predicted - observed at the target period
  bool perfect_prefit = false;
  bool on_simplex = true;  // false for external weights off the simplex
  bool external = false;   // weights supplied by the caller, not solved
  double gap = 0.0;
  int iterations = 0;
  bool converged = true;

  double predicted_target() const { return predicted_trend(static_cast<Eigen::Index>(view.target_index)); }
};

struct EffectEstimate {
  double tau_hat = 0.0;
  std::size_t target_index = 0;
  long target_period = 0;
};

/// Outcomes-only synthetic control: weights minimise the pre-treatment
/// error over the simplex.
ScFit fit(const DonorView& view, const SolveSettings& settings = {});

/// Fit of the panel's treated unit against all control units.
ScFit fit_treated(const Panel& panel, const SolveSettings& settings = {});

/// One fit per control unit (except `exclude`), each against the remaining
/// controls, in panel order.
std::vector<ScFit> placebo_fits(const Panel& panel, const std::optional<std::string>& exclude = std::nullopt,
                                const SolveSettings& settings = {});

/// tau_hat = observed - predicted at the target period.
EffectEstimate effect(const ScFit& fit);
EffectEstimate effect(const ScFit& fit, const Panel& panel);

/// Wraps weights produced elsewhere (difference-in-differences, penalised
/// estimators, ...). A non-zero intercept, or a weight vector one longer than
/// the donor list, adds a constant donor whose outcomes are all one.
ScFit with_external_weights(const DonorView& view, const Eigen::VectorXd& weights, double intercept = 0.0,
                            const SolveSettings& settings = {});

inline constexpr const char* kInterceptDonor = "(intercept)";

}  // namespace scsens
