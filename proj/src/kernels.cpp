#include "scsens/kernels.hpp"

#include "qp_engine.hpp"
#include "scsens/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace scsens {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_ls_shapes(const MatrixXd& X, const VectorXd& x) {
  if (X.cols() < 1) throw Error(ErrorKind::DimensionMismatch, "donor matrix has no columns");
  if (X.rows() != x.size())
    throw Error(ErrorKind::DimensionMismatch, "donor matrix has " + std::to_string(X.rows()) +
                                                  " rows but target has " + std::to_string(x.size()));
}

detail::QpProblem ls_problem(const MatrixXd& X, const VectorXd& x) {
  detail::QpProblem prob;
  prob.Q = X.transpose() * X;
  prob.p = -(X.transpose() * x);
  prob.f_offset = 0.5 * x.squaredNorm();
  return prob;
}

LsSolution to_ls(const detail::QpResult& r, const MatrixXd& X, const VectorXd& x) {
  LsSolution out;
  out.weights = r.w;
  out.objective = (x - X * r.w).norm();
  out.gap = r.gap;
  out.iterations = r.iterations;
  out.converged = r.converged;
  return out;
}

// Indices where c attains its minimum.
std::vector<Index> argmin_face(const VectorXd& c) {
  const double lo = c.minCoeff();
  const double tol = 1e-15 * std::max(1.0, c.cwiseAbs().maxCoeff());
  std::vector<Index> face;
  for (Index k = 0; k < c.size(); ++k)
    if (c(k) <= lo + tol) face.push_back(k);
  return face;
}

// Smallest c'w over {w in simplex : ||x - Xw|| <= cap}.
double min_under_cap(const VectorXd& c, const MatrixXd& X, const VectorXd& x, double cap,
                     const SolveSettings& settings) {
  // Tight on purpose: near the optimum the feasible set grows like the square
  // root of any slack allowed here.
  const double tol = 1e-12 * cap;
  const auto face = argmin_face(c);
  {
    MatrixXd Xf(X.rows(), static_cast<Index>(face.size()));
    for (std::size_t k = 0; k < face.size(); ++k) Xf.col(static_cast<Index>(k)) = X.col(face[k]);
    const LsSolution on_face = simplex_ls(Xf, x, settings);
    if (on_face.objective <= cap + tol) return c.minCoeff();
  }

  // Penalty path: w(eta) minimises 0.5||x - Xw||^2 + eta c'w. Its residual is
  // non-decreasing and c'w non-increasing in eta; find where the residual
  // meets the cap.
  detail::QpProblem prob = ls_problem(X, x);
  const VectorXd base_p = prob.p;
  VectorXd warm;
  struct Point {
    double residual;
    double value;
    VectorXd w;
  };
  auto solve = [&](double eta) {
    prob.p = base_p + eta * c;
    const auto r = detail::solve_qp(prob, settings, warm.size() ? &warm : nullptr);
    warm = r.w;
    return Point{(x - X * r.w).norm(), c.dot(r.w), r.w};
  };

  const double c_scale = std::max(c.cwiseAbs().maxCoeff(), 1e-300);
  const double scale = std::max(prob.Q.diagonal().maxCoeff(), 1e-300) / c_scale;
  double hi = scale;
  Point p_hi = solve(hi);
  double lo = hi;
  Point p_lo = p_hi;
  if (p_hi.residual <= cap + tol) {
    for (int k = 0; k < 60 && p_hi.residual <= cap + tol; ++k) {
      lo = hi;
      p_lo = p_hi;
      hi *= 10.0;
      p_hi = solve(hi);
    }
    if (p_hi.residual <= cap + tol) return p_hi.value;
  } else {
    warm.resize(0);
    bool found = false;
    for (int k = 0; k < 40; ++k) {
      hi = lo;
      p_hi = p_lo;
      lo /= 10.0;
      p_lo = solve(lo);
      if (p_lo.residual <= cap + tol) {
        found = true;
        break;
      }
    }
    // Cap (numerically) at the optimum: the path's small-eta end is the
    // least-squares solution with ties broken toward smaller c'w.
    if (!found) return p_lo.value;
  }

  warm = p_lo.w;
  for (int it = 0; it < 200 && hi / lo - 1.0 > 1e-7; ++it) {
    const double mid = std::sqrt(lo * hi);
    const Point pm = solve(mid);
    if (pm.residual <= cap + tol) {
      lo = mid;
      p_lo = pm;
    } else {
      hi = mid;
      p_hi = pm;
      warm = p_lo.w;
    }
  }
  return p_lo.value;
}

}  // namespace

void SolveSettings::validate() const {
  if (!(feas_tol > 0) || !(opt_tol > 0) || !(bisect_tol > 0))
    throw Error(ErrorKind::InvalidArgument, "solver tolerances must be positive");
  if (max_iters <= 0) throw Error(ErrorKind::InvalidArgument, "max_iters must be positive");
}

VectorXd project_simplex(const VectorXd& v) {
  if (v.size() < 1) throw Error(ErrorKind::DimensionMismatch, "cannot project an empty vector");
  std::vector<double> u(v.data(), v.data() + v.size());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    cumsum += u[k];
    const double t = (cumsum - 1.0) / static_cast<double>(k + 1);
    if (u[k] - t > 0.0) theta = t;
  }
  VectorXd w = (v.array() - theta).cwiseMax(0.0);
  const double s = w.sum();
  if (s > 0.0) w /= s;
  return w;
}

LsSolution simplex_ls(const MatrixXd& X, const VectorXd& x, const SolveSettings& settings) {
  check_ls_shapes(X, x);
  if (X.cols() == 1) {
    LsSolution out;
    out.weights = VectorXd::Ones(1);
    out.objective = (x - X.col(0)).norm();
    return out;
  }
  return to_ls(detail::solve_qp(ls_problem(X, x), settings), X, x);
}

Projection hyperplane_project(const VectorXd& w0, const TargetHyperplane& h) {
  if (h.normal.size() != w0.size()) throw Error(ErrorKind::DimensionMismatch, "hyperplane normal has wrong length");
  const double nn = h.normal.squaredNorm();
  if (!(nn > 0.0)) throw Error(ErrorKind::ZeroNormal, "hyperplane normal is zero");
  const double excess = h.normal.dot(w0) - h.offset;
  return {w0 - (excess / nn) * h.normal, std::abs(excess) / std::sqrt(nn)};
}

Extremes ball_linear_extremes(const VectorXd& c, const VectorXd& center, double radius) {
  if (c.size() != center.size()) throw Error(ErrorKind::DimensionMismatch, "ball center has wrong length");
  if (!(radius >= 0.0)) throw Error(ErrorKind::InvalidArgument, "radius must be non-negative");
  const double mid = c.dot(center);
  const double norm = c.norm();
  if (norm == 0.0) return {mid, mid};
  return {mid - radius * norm, mid + radius * norm};
}

LinearMin min_linear_on_ball_simplex(const VectorXd& c, const VectorXd& center, double radius,
                                     const SolveSettings& settings) {
  if (c.size() != center.size()) throw Error(ErrorKind::DimensionMismatch, "ball center has wrong length");
  if (c.size() < 1) throw Error(ErrorKind::DimensionMismatch, "empty weight vector");
  if (!(radius >= 0.0)) throw Error(ErrorKind::InvalidArgument, "radius must be non-negative");

  const VectorXd nearest = project_simplex(center);
  const double gap = (nearest - center).norm();
  if (gap > radius + settings.feas_tol) throw Error(ErrorKind::Infeasible, "ball does not meet the simplex");
  if (radius == 0.0) return {c.dot(center), center};

  // The unconstrained optimum is the face where c is smallest; use its point
  // nearest to center if the ball reaches it.
  const auto face = argmin_face(c);
  {
    VectorXd sub(static_cast<Index>(face.size()));
    for (std::size_t k = 0; k < face.size(); ++k) sub(static_cast<Index>(k)) = center(face[k]);
    const VectorXd proj = project_simplex(sub);
    VectorXd w = VectorXd::Zero(c.size());
    for (std::size_t k = 0; k < face.size(); ++k) w(face[k]) = proj(static_cast<Index>(k));
    if ((w - center).norm() <= radius + settings.feas_tol) return {c.dot(w), w};
  }

  auto at = [&](double m) { return project_simplex(center - c / m); };
  auto dist = [&](const VectorXd& w) { return (w - center).norm(); };

  double lo = c.norm() / radius;
  VectorXd w_lo = at(lo);
  double hi = lo;
  VectorXd w_hi = w_lo;
  int iters = 0;
  if (dist(w_lo) <= radius) {
    while (dist(w_lo) <= radius) {
      if (++iters > settings.max_iters || lo < 1e-300)
        throw Error(ErrorKind::NoConvergence, "multiplier bracket search did not terminate");
      hi = lo;
      w_hi = w_lo;
      lo /= 2.0;
      w_lo = at(lo);
    }
  } else {
    while (dist(w_hi) > radius) {
      if (++iters > settings.max_iters || hi > 1e300) return {c.dot(nearest), nearest};
      lo = hi;
      w_lo = w_hi;
      hi *= 2.0;
      w_hi = at(hi);
    }
  }
  while (hi / lo - 1.0 > settings.bisect_tol) {
    if (++iters > settings.max_iters)
      throw Error(ErrorKind::NoConvergence, "multiplier bisection exceeded max_iters");
    const double mid = std::sqrt(lo * hi);
    const VectorXd w = at(mid);
    if (dist(w) <= radius) {
      hi = mid;
      w_hi = w;
    } else {
      lo = mid;
    }
  }
  return {c.dot(w_hi), w_hi};
}

Projection project_simplex_hyperplane(const VectorXd& w0, const TargetHyperplane& h, const SolveSettings& settings) {
  if (h.normal.size() != w0.size()) throw Error(ErrorKind::DimensionMismatch, "hyperplane normal has wrong length");
  detail::QpProblem prob;
  prob.Q = MatrixXd::Identity(w0.size(), w0.size());
  prob.p = -w0;
  prob.plane = h;
  prob.f_offset = 0.5 * w0.squaredNorm();
  const auto r = detail::solve_qp(prob, settings);
  if (!r.converged) throw Error(ErrorKind::NoConvergence, "projection onto simplex and hyperplane did not converge");
  return {r.w, (r.w - w0).norm()};
}

LsSolution simplex_ls_on_hyperplane(const MatrixXd& X, const VectorXd& x, const TargetHyperplane& h,
                                    const SolveSettings& settings) {
  check_ls_shapes(X, x);
  if (h.normal.size() != X.cols()) throw Error(ErrorKind::DimensionMismatch, "hyperplane normal has wrong length");
  detail::QpProblem prob = ls_problem(X, x);
  prob.plane = h;
  return to_ls(detail::solve_qp(prob, settings), X, x);
}

Extremes extremize_linear_under_error_cap(const VectorXd& c, const MatrixXd& X, const VectorXd& x, double cap,
                                          const SolveSettings& settings, double min_error) {
  check_ls_shapes(X, x);
  if (c.size() != X.cols()) throw Error(ErrorKind::DimensionMismatch, "objective has wrong length");
  if (std::isnan(cap)) throw Error(ErrorKind::InvalidArgument, "error cap is NaN");
  if (cap == kInf) return {c.minCoeff(), c.maxCoeff()};
  const double e_star = min_error >= 0.0 ? min_error : simplex_ls(X, x, settings).objective;
  if (cap < e_star - settings.feas_tol * (1.0 + e_star))
    throw Error(ErrorKind::Infeasible, "error cap is below the best achievable pre-treatment error");
  cap = std::max(cap, e_star);
  if (X.cols() == 1) return {c(0), c(0)};
  const double lo = min_under_cap(c, X, x, cap, settings);
  const double hi = -min_under_cap(-c, X, x, cap, settings);
  return {std::min(lo, hi), std::max(lo, hi)};
}

GridResult grid_oracle(const std::function<double(const VectorXd&)>& objective,
                       const std::function<bool(const VectorXd&)>& constraint, int dim, double step) {
  if (dim > 4) throw Error(ErrorKind::DimensionTooLarge, "grid oracle supports at most 4 dimensions");
  if (dim < 1) throw Error(ErrorKind::InvalidArgument, "grid dimension must be positive");
  if (!(step > 0.0) || step > 1.0) throw Error(ErrorKind::InvalidArgument, "grid step must lie in (0, 1]");
  const long n = std::lround(1.0 / step);

  GridResult best;
  best.value = kInf;
  VectorXd w(dim);
  std::vector<long> counts(static_cast<std::size_t>(dim), 0);
  bool any = false;

  // Enumerate all compositions of n into dim non-negative parts.
  auto visit = [&](auto&& self, int k, long remaining) -> void {
    if (k == dim - 1) {
      counts[static_cast<std::size_t>(k)] = remaining;
      for (int i = 0; i < dim; ++i) w(i) = static_cast<double>(counts[static_cast<std::size_t>(i)]) / n;
      ++best.evaluated;
      if (constraint && !constraint(w)) return;
      const double v = objective(w);
      if (!any || v < best.value) {
        any = true;
        best.value = v;
        best.argmin = w;
      }
      return;
    }
    for (long m = 0; m <= remaining; ++m) {
      counts[static_cast<std::size_t>(k)] = m;
      self(self, k + 1, remaining - m);
    }
  };
  visit(visit, 0, n);
  if (!any) throw Error(ErrorKind::Infeasible, "no grid point satisfies the constraints");
  return best;
}

}  // namespace scsens
