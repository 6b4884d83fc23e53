#include "qp_engine.hpp"

#include "scsens/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace scsens::detail {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// A vertex of the feasible polytope: e_i, or a e_i + (1-a) e_j when the
// hyperplane cuts the edge between e_i and e_j.
struct Atom {
  Index i = 0;
  Index j = -1;
  double a = 1.0;

  bool is_vertex() const { return j < 0; }
  bool same(const Atom& o) const { return i == o.i && j == o.j; }

  double dot(const VectorXd& g) const { return is_vertex() ? g(i) : a * g(i) + (1.0 - a) * g(j); }

  void add_to(VectorXd& v, double scale) const {
    if (is_vertex()) {
      v(i) += scale;
    } else {
      v(i) += scale * a;
      v(j) += scale * (1.0 - a);
    }
  }

  double quad(const MatrixXd& Q, const VectorXd& p) const {
    if (is_vertex()) return 0.5 * Q(i, i) + p(i);
    const double b = 1.0 - a;
    return 0.5 * (a * a * Q(i, i) + 2.0 * a * b * Q(i, j) + b * b * Q(j, j)) + a * p(i) + b * p(j);
  }
};

double plane_tolerance(const TargetHyperplane& h) {
  double scale = std::max(1.0, std::abs(h.offset));
  if (h.normal.size() > 0) scale = std::max(scale, h.normal.cwiseAbs().maxCoeff());
  return 1e-12 * scale;
}

class Polytope {
 public:
  Polytope(Index n, const std::optional<TargetHyperplane>& plane) : n_(n), plane_(plane) {
    if (!plane_) return;
    if (plane_->normal.size() != n) throw Error(ErrorKind::DimensionMismatch, "hyperplane normal has wrong length");
    const double tol = plane_tolerance(*plane_);
    for (Index k = 0; k < n; ++k) {
      const double d = plane_->normal(k) - plane_->offset;
      if (std::abs(d) <= tol)
        equal_.push_back(k);
      else if (d < 0)
        lower_.push_back(k);
      else
        upper_.push_back(k);
    }
    if (equal_.empty() && (lower_.empty() || upper_.empty()))
      throw Error(ErrorKind::Infeasible, "hyperplane does not meet the simplex");
  }

  bool has_plane() const { return plane_.has_value(); }

  Atom pair(Index lo, Index hi) const {
    const auto& y = plane_->normal;
    return {lo, hi, (y(hi) - plane_->offset) / (y(hi) - y(lo))};
  }

  template <class Score>
  Atom best(Score score) const {
    Atom arg;
    double best_val = std::numeric_limits<double>::infinity();
    auto consider = [&](const Atom& at) {
      const double v = score(at);
      if (v < best_val) {
        best_val = v;
        arg = at;
      }
    };
    if (!plane_) {
      for (Index k = 0; k < n_; ++k) consider(Atom{k, -1, 1.0});
      return arg;
    }
    for (Index k : equal_) consider(Atom{k, -1, 1.0});
    for (Index lo : lower_)
      for (Index hi : upper_) consider(pair(lo, hi));
    return arg;
  }

  Atom lmo(const VectorXd& g) const {
    return best([&](const Atom& at) { return at.dot(g); });
  }

  Atom best_start(const MatrixXd& Q, const VectorXd& p) const {
    return best([&](const Atom& at) { return at.quad(Q, p); });
  }

  bool feasible(const VectorXd& w, double tol) const {
    if (w.size() != n_ || w.minCoeff() < -tol || std::abs(w.sum() - 1.0) > tol) return false;
    if (plane_ && std::abs(plane_->normal.dot(w) - plane_->offset) > tol * (1.0 + plane_->normal.cwiseAbs().maxCoeff()))
      return false;
    return true;
  }

  // Writes w as a convex combination of atoms.
  void decompose(const VectorXd& w, std::vector<Atom>& atoms, std::vector<double>& alpha) const {
    atoms.clear();
    alpha.clear();
    if (!plane_) {
      for (Index k = 0; k < n_; ++k)
        if (w(k) > 0.0) {
          atoms.push_back({k, -1, 1.0});
          alpha.push_back(w(k));
        }
    } else {
      const auto& y = plane_->normal;
      const double t = plane_->offset;
      for (Index k : equal_)
        if (w(k) > 0.0) {
          atoms.push_back({k, -1, 1.0});
          alpha.push_back(w(k));
        }
      // Match the mass below the plane against the mass above it; each
      // matched unit of "excess" w_k |y_k - t| is carried by one edge atom.
      std::vector<std::pair<Index, double>> below, above;
      for (Index k : lower_)
        if (w(k) > 0.0) below.emplace_back(k, w(k) * (t - y(k)));
      for (Index k : upper_)
        if (w(k) > 0.0) above.emplace_back(k, w(k) * (y(k) - t));
      std::size_t a = 0, b = 0;
      while (a < below.size() && b < above.size()) {
        const double flow = std::min(below[a].second, above[b].second);
        const Index lo = below[a].first, hi = above[b].first;
        const double g = (t - y(lo)) * (y(hi) - t) / (y(hi) - y(lo));
        if (flow > 0.0) {
          atoms.push_back(pair(lo, hi));
          alpha.push_back(flow / g);
        }
        below[a].second -= flow;
        above[b].second -= flow;
        if (below[a].second <= 0.0) ++a;
        if (b < above.size() && above[b].second <= 0.0) ++b;
      }
    }
    double total = 0.0;
    for (double v : alpha) total += v;
    if (atoms.empty() || !(total > 0.0)) {
      atoms = {lmo(VectorXd::Zero(n_))};
      alpha = {1.0};
      return;
    }
    for (double& v : alpha) v /= total;
  }

  Index size() const { return n_; }
  const std::optional<TargetHyperplane>& plane() const { return plane_; }

 private:
  Index n_;
  std::optional<TargetHyperplane> plane_;
  std::vector<Index> equal_, lower_, upper_;
};

class Solver {
 public:
  Solver(const QpProblem& prob, const SolveSettings& settings)
      : prob_(prob), settings_(settings), poly_(prob.p.size(), prob.plane) {}

  QpResult run(const VectorXd* warm_start) {
    const Index n = prob_.p.size();
    if (warm_start && warm_start->size() == n && poly_.feasible(*warm_start, 1e-9)) {
      VectorXd w0 = warm_start->cwiseMax(0.0);
      poly_.decompose(w0, atoms_, alpha_);
    } else {
      atoms_ = {poly_.best_start(prob_.Q, prob_.p)};
      alpha_ = {1.0};
    }
    rebuild();

    QpResult out;
    bool just_polished = false;
    int it = 0;
    for (; it < settings_.max_iters; ++it) {
      const VectorXd g = Qw_ + prob_.p;
      const Atom s = poly_.lmo(g);
      const double gw = g.dot(w_);
      const double gap = gw - s.dot(g);
      const double f = objective();
      out.gap = gap;
      if (gap <= settings_.opt_tol * (1.0 + std::abs(f + prob_.f_offset))) {
        if (!just_polished) {
          just_polished = true;
          if (polish()) continue;
        }
        out.converged = true;
        break;
      }
      if (it % 20 == 19 && !just_polished) {
        just_polished = true;
        if (polish()) continue;
      }
      just_polished = false;

      std::size_t away = 0;
      double away_val = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < atoms_.size(); ++k) {
        const double v = atoms_[k].dot(g);
        if (v > away_val) {
          away_val = v;
          away = k;
        }
      }
      const double away_gap = away_val - gw;

      VectorXd d = -w_;
      double step_max = 1.0;
      const bool fw_step = gap >= away_gap || alpha_.size() == 1;
      if (fw_step) {
        s.add_to(d, 1.0);
      } else {
        d = w_;
        atoms_[away].add_to(d, -1.0);
        step_max = alpha_[away] / (1.0 - alpha_[away]);
      }
      const VectorXd Qd = prob_.Q * d;
      const double dQd = d.dot(Qd);
      const double gd = g.dot(d);
      double step = dQd > 0.0 ? std::min(step_max, -gd / dQd) : step_max;
      step = std::max(step, 0.0);
      if (step == 0.0) {
        // Stalled on round-off; a polish or the next gap check decides.
        if (!just_polished) {
          just_polished = true;
          if (polish()) continue;
        }
        out.converged = gap <= 1e3 * settings_.opt_tol * (1.0 + std::abs(f + prob_.f_offset));
        break;
      }

      if (fw_step) {
        if (step >= 1.0 - 1e-15) {
          atoms_ = {s};
          alpha_ = {1.0};
        } else {
          for (double& a : alpha_) a *= (1.0 - step);
          auto found = std::find_if(atoms_.begin(), atoms_.end(), [&](const Atom& at) { return at.same(s); });
          if (found != atoms_.end())
            alpha_[static_cast<std::size_t>(found - atoms_.begin())] += step;
          else {
            atoms_.push_back(s);
            alpha_.push_back(step);
          }
        }
      } else {
        for (double& a : alpha_) a *= (1.0 + step);
        alpha_[away] -= step;
        if (step >= step_max * (1.0 - 1e-12)) alpha_[away] = 0.0;
      }
      prune();
      w_ += step * d;
      Qw_ += step * Qd;
      if (it % 50 == 49) rebuild();
    }
    out.iterations = it;
    if (!out.converged) {
      // Report the gap at the final iterate.
      const VectorXd g = Qw_ + prob_.p;
      out.gap = g.dot(w_) - poly_.lmo(g).dot(g);
    }
    out.w = w_;
    out.f = objective();
    return out;
  }

 private:
  double objective() const { return 0.5 * w_.dot(Qw_) + prob_.p.dot(w_); }

  double objective_of(const VectorXd& w) const { return 0.5 * w.dot(prob_.Q * w) + prob_.p.dot(w); }

  void prune() {
    std::size_t keep = 0;
    for (std::size_t k = 0; k < atoms_.size(); ++k) {
      if (alpha_[k] > 0.0) {
        atoms_[keep] = atoms_[k];
        alpha_[keep] = alpha_[k];
        ++keep;
      }
    }
    atoms_.resize(keep);
    alpha_.resize(keep);
    if (atoms_.empty()) {
      atoms_ = {poly_.lmo(VectorXd::Zero(poly_.size()))};
      alpha_ = {1.0};
    }
  }

  void rebuild() {
    double total = 0.0;
    for (double a : alpha_) total += a;
    w_ = VectorXd::Zero(poly_.size());
    for (std::size_t k = 0; k < atoms_.size(); ++k) {
      alpha_[k] /= total;
      atoms_[k].add_to(w_, alpha_[k]);
    }
    Qw_ = prob_.Q * w_;
  }

  // Active-set refinement: minimise the quadratic on the affine hull of the
  // current support, walking back to the boundary whenever the affine
  // minimiser leaves the orthant. Exact once the optimal support is found.
  bool polish() {
    const Index m = poly_.has_plane() ? 2 : 1;
    VectorXd cur = w_;
    const double f_start = objective_of(cur);
    std::vector<Index> S;
    for (Index k = 0; k < cur.size(); ++k)
      if (cur(k) > 0.0) S.push_back(k);
    bool moved = false;
    for (std::size_t round = 0; round <= static_cast<std::size_t>(cur.size()) && !S.empty(); ++round) {
      const auto s = static_cast<Index>(S.size());
      MatrixXd K = MatrixXd::Zero(s + m, s + m);
      VectorXd rhs(s + m);
      for (Index a = 0; a < s; ++a) {
        for (Index b = 0; b < s; ++b) K(a, b) = prob_.Q(S[a], S[b]);
        K(a, s) = K(s, a) = 1.0;
        rhs(a) = -prob_.p(S[a]);
      }
      rhs(s) = 1.0;
      if (m == 2) {
        for (Index a = 0; a < s; ++a) K(a, s + 1) = K(s + 1, a) = poly_.plane()->normal(S[a]);
        rhs(s + 1) = poly_.plane()->offset;
      }
      Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(K);
      const VectorXd z = cod.solve(rhs);
      const double resid = (K * z - rhs).norm();
      if (!z.allFinite() || resid > 1e-9 * (rhs.norm() + K.norm() * z.norm())) break;
      const VectorXd zs = z.head(s);
      if (zs.minCoeff() >= 0.0) {
        VectorXd cand = VectorXd::Zero(cur.size());
        for (Index a = 0; a < s; ++a) cand(S[a]) = zs(a);
        if (objective_of(cand) <= objective_of(cur) + 1e-14 * (1.0 + std::abs(objective_of(cur)))) {
          cur = cand;
          moved = true;
        }
        break;
      }
      double ratio = 1.0;
      for (Index a = 0; a < s; ++a) {
        if (zs(a) < 0.0) ratio = std::min(ratio, cur(S[a]) / (cur(S[a]) - zs(a)));
      }
      std::vector<Index> next;
      for (Index a = 0; a < s; ++a) {
        const Index k = S[a];
        const double v = cur(k) + ratio * (zs(a) - cur(k));
        const bool blocking = zs(a) < 0.0 && cur(k) / (cur(k) - zs(a)) <= ratio;
        if (blocking || v <= 0.0) {
          cur(k) = 0.0;
        } else {
          cur(k) = v;
          next.push_back(k);
        }
      }
      moved = true;
      S.swap(next);
    }
    if (!moved) return false;
    cur = cur.cwiseMax(0.0);
    if (!poly_.feasible(cur, 1e-9)) return false;
    if (objective_of(cur) > f_start + 1e-14 * (1.0 + std::abs(f_start))) return false;
    poly_.decompose(cur, atoms_, alpha_);
    rebuild();
    return true;
  }

  const QpProblem& prob_;
  const SolveSettings& settings_;
  Polytope poly_;
  std::vector<Atom> atoms_;
  std::vector<double> alpha_;
  VectorXd w_;
  VectorXd Qw_;
};

}  // namespace

bool plane_meets_simplex(const TargetHyperplane& plane) {
  if (plane.normal.size() == 0) return false;
  const double tol = plane_tolerance(plane);
  return plane.offset >= plane.normal.minCoeff() - tol && plane.offset <= plane.normal.maxCoeff() + tol;
}

QpResult solve_qp(const QpProblem& problem, const SolveSettings& settings, const Eigen::VectorXd* warm_start) {
  if (problem.p.size() == 0) throw Error(ErrorKind::DimensionMismatch, "empty problem");
  if (problem.Q.rows() != problem.p.size() || problem.Q.cols() != problem.p.size())
    throw Error(ErrorKind::DimensionMismatch, "quadratic term has wrong shape");
  Solver solver(problem, settings);
  return solver.run(warm_start);
}

}  // namespace scsens::detail
