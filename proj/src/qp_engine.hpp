#pragma once

// Away-step Frank-Wolfe for convex quadratics over the simplex, optionally
// intersected with one hyperplane. Internal to the kernels module.

#include "scsens/kernels.hpp"

#include <Eigen/Dense>

#include <optional>

namespace scsens::detail {

/// minimize 0.5 w'Qw + p'w over {w >= 0, 1'w = 1 [, y'w = t]}.
struct QpProblem {
  Eigen::MatrixXd Q;
  Eigen::VectorXd p;
  std::optional<TargetHyperplane> plane;
  /// Added to the objective only when forming the relative stopping rule
  /// gap <= opt_tol * (1 + |f + f_offset|).
  double f_offset = 0.0;
};

struct QpResult {
  Eigen::VectorXd w;
  double f = 0.0;  // 0.5 w'Qw + p'w (without f_offset)
  double gap = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Throws Error(Infeasible) when the feasible polytope is empty.
QpResult solve_qp(const QpProblem& problem, const SolveSettings& settings,
                  const Eigen::VectorXd* warm_start = nullptr);

/// True iff {w in simplex : y'w = t} is non-empty, using the same equality
/// tolerance as the solver.
bool plane_meets_simplex(const TargetHyperplane& plane);

}  // namespace scsens::detail
