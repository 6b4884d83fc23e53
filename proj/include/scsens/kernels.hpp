#pragma once

#include <Eigen/Dense>

#include <functional>

namespace scsens {

struct SolveSettings {
  double feas_tol = 1e-9;    // constraint feasibility
  double opt_tol = 1e-8;     // relative objective / gap convergence
  int max_iters = 100'000;
  double bisect_tol = 1e-10;  // relative bracket width for multiplier bisection

  void validate() const;
};

/// The affine set {w : normal' w = offset}.
struct TargetHyperplane {
  Eigen::VectorXd normal;
  double offset = 0.0;
};

struct Extremes {
  double lo = 0.0;
  double hi = 0.0;
};

/// Result of a least-squares fit over (a subset of) the probability simplex.
struct LsSolution {
  Eigen::VectorXd weights;
  double objective = 0.0;  // ||x - X w||_2
  double gap = 0.0;        // Frank-Wolfe duality gap of 0.5 ||x - X w||^2
  int iterations = 0;
  bool converged = true;
};

struct Projection {
  Eigen::VectorXd weights;
  double distance = 0.0;
};

struct LinearMin {
  double value = 0.0;
  Eigen::VectorXd argmin;
};

/// Euclidean projection onto {w >= 0, sum w = 1}.
Eigen::VectorXd project_simplex(const Eigen::VectorXd& v);

/// min ||x - X w||_2 over the simplex, by away-step Frank-Wolfe with exact
/// line search. Terminates when the duality gap of 0.5||x - Xw||^2 is at most
/// opt_tol * (1 + objective).
LsSolution simplex_ls(const Eigen::MatrixXd& X, const Eigen::VectorXd& x, const SolveSettings& settings = {});

/// Closed-form projection of w0 onto an (unconstrained) hyperplane.
Projection hyperplane_project(const Eigen::VectorXd& w0, const TargetHyperplane& h);

/// Min and max of c'w over the ball ||w - center|| <= radius.
Extremes ball_linear_extremes(const Eigen::VectorXd& c, const Eigen::VectorXd& center, double radius);

/// min c'w over {||w - center|| <= radius} intersected with the simplex.
///
/// Uses the Lagrangian form: for multiplier m > 0 the minimiser of
/// c'w + m/2 ||w - center||^2 over the simplex is P(center - c/m), whose
/// distance to center is non-increasing in m. The multiplier is bisected
/// until that distance meets the radius. Maximisation: negate c.
LinearMin min_linear_on_ball_simplex(const Eigen::VectorXd& c, const Eigen::VectorXd& center, double radius,
                                     const SolveSettings& settings = {});

/// Euclidean projection of w0 onto simplex ∩ hyperplane. Throws Infeasible
/// when the offset lies outside [min normal, max normal].
Projection project_simplex_hyperplane(const Eigen::VectorXd& w0, const TargetHyperplane& h,
                                      const SolveSettings& settings = {});

/// min ||x - X w||_2 over simplex ∩ hyperplane. Throws Infeasible when the
/// intersection is empty.
LsSolution simplex_ls_on_hyperplane(const Eigen::MatrixXd& X, const Eigen::VectorXd& x, const TargetHyperplane& h,
                                    const SolveSettings& settings = {});

/// Extremes of c'w over {w in simplex : ||x - X w||_2 <= cap}.
/// Throws Infeasible when cap is below the simplex least-squares optimum.
/// `min_error` may pass a precomputed optimum to skip the inner solve.
Extremes extremize_linear_under_error_cap(const Eigen::VectorXd& c, const Eigen::MatrixXd& X,
                                          const Eigen::VectorXd& x, double cap, const SolveSettings& settings = {},
                                          double min_error = -1.0);

/// Exhaustive search on the barycentric grid of the simplex (dim <= 4).
/// Used as a brute-force reference for the iterative solvers. An empty
/// constraint accepts every grid point.
struct GridResult {
  double value = 0.0;
  Eigen::VectorXd argmin;
  long evaluated = 0;
};

GridResult grid_oracle(const std::function<double(const Eigen::VectorXd&)>& objective,
                       const std::function<bool(const Eigen::VectorXd&)>& constraint, int dim, double step);

}  // namespace scsens
