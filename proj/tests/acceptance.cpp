// One pass/fail line per acceptance criterion. Exit status: 0 all pass,
// 77 only data-dependent criteria failed because the data file is absent,
// 1 otherwise.

#include "scsens/calibration.hpp"
#include "scsens/error.hpp"
#include "scsens/kernels.hpp"
#include "scsens/robustness.hpp"
#include "scsens/sensitivity.hpp"
#include "support.hpp"

#include <CLI11.hpp>
#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

using namespace scsens;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Outcome {
  bool pass = false;
  std::string detail;
  bool data_missing = false;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double rel_diff(double a, double b) {
  if (a == b) return 0.0;
  return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

// Closed-form placebo distance against a minimum-norm linear solve, and the
// norm-ratio interval against the generic bound path.
Outcome closed_form_equivalence() {
  const auto t0 = Clock::now();
  std::mt19937 rng(2024);
  std::uniform_int_distribution<int> J_dist(3, 10), T_dist(4, 12);
  double worst_distance = 0.0, worst_interval = 0.0;
  for (int inst = 0; inst < 1000; ++inst) {
    const int J = J_dist(rng), T0 = T_dist(rng);
    const Panel p = testing::factor_panel(static_cast<std::uint32_t>(rng()), J, T0, 2, 1.5);
    const ScFit treated = fit_treated(p);
    const double y1 = treated.view.y_target;
    const double tau = effect(treated).tau_hat;
    for (const auto& f : placebo_fits(p)) {
      const auto& v = f.view;
      const MatrixXd row = v.y_donors_target.transpose();
      const VectorXd rhs = VectorXd::Constant(1, v.y_target - v.y_donors_target.dot(f.weights));
      const VectorXd step = row.completeOrthogonalDecomposition().solve(rhs);
      const MisspecError b = placebo_error(MetricKind::UnconstrainedWeight, f);
      worst_distance = std::max(worst_distance, rel_diff(step.norm(), b.value));

      const Extremes cf = counterfactual_extremes(MetricKind::UnconstrainedWeight, treated, b);
      const double half = std::abs(f.target_residual) * n_ratio(p, v.placebo_treated);
      worst_interval = std::max({worst_interval, rel_diff(y1 - cf.hi, tau - half), rel_diff(y1 - cf.lo, tau + half)});
    }
  }
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = worst_distance <= 1e-8 && worst_interval <= 1e-8 && secs < 30;
  o.detail = "max distance diff " + fmt(worst_distance) + ", max interval diff " + fmt(worst_interval) + ", " +
             fmt(secs) + " s";
  return o;
}

// Iterative kernels against exhaustive search on the step-1e-3 barycentric grid.
Outcome grid_oracle_equivalence() {
  const auto t0 = Clock::now();
  std::mt19937 rng(77);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  std::uniform_int_distribution<int> T_dist(4, 12);
  constexpr double step = 1e-3;
  double worst = 0.0;
  std::string worst_kernel = "none";
  auto note = [&](double diff, const char* kernel) {
    if (diff > worst) {
      worst = diff;
      worst_kernel = kernel;
    }
  };
  int instances = 0;
  for (int J : {2, 3}) {
    for (int inst = 0; inst < 100; ++inst, ++instances) {
      const int T0 = T_dist(rng);
      MatrixXd X(T0, J);
      VectorXd x(T0), y(J);
      for (int i = 0; i < T0; ++i) {
        x(i) = u(rng);
        for (int j = 0; j < J; ++j) X(i, j) = u(rng);
      }
      for (int j = 0; j < J; ++j) y(j) = u(rng);
      const auto err = [&](const VectorXd& w) { return (x - X * w).norm(); };
      const auto lin = [&](const VectorXd& w) { return y.dot(w); };
      const auto neg = [&](const VectorXd& w) { return -y.dot(w); };

      const LsSolution ls = simplex_ls(X, x);
      note(std::abs(ls.objective - grid_oracle(err, nullptr, J, step).value), "simplex_ls");

      const double radius = 0.05 + 0.3 * u(rng) / 10.0;
      const auto in_ball = [&](const VectorXd& w) { return (w - ls.weights).norm() <= radius; };
      note(std::abs(min_linear_on_ball_simplex(y, ls.weights, radius).value - grid_oracle(lin, in_ball, J, step).value),
           "min_linear_on_ball_simplex");

      const double t = y.minCoeff() + (0.2 + 0.6 * u(rng) / 10.0) * (y.maxCoeff() - y.minCoeff());
      const double band = 0.5 * step * (y.maxCoeff() - y.minCoeff());
      const auto on_plane = [&](const VectorXd& w) { return std::abs(y.dot(w) - t) <= band; };
      note(std::abs(simplex_ls_on_hyperplane(X, x, {y, t}).objective - grid_oracle(err, on_plane, J, step).value),
           "simplex_ls_on_hyperplane");

      const double cap = 1.1 * ls.objective;
      const auto capped = [&](const VectorXd& w) { return err(w) <= cap; };
      const Extremes ex = extremize_linear_under_error_cap(y, X, x, cap);
      note(std::abs(ex.lo - grid_oracle(lin, capped, J, step).value), "extremize_linear_under_error_cap");
      note(std::abs(ex.hi + grid_oracle(neg, capped, J, step).value), "extremize_linear_under_error_cap");
    }
  }
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = worst <= 1e-2 && secs < 120;
  o.detail = std::to_string(instances) + " instances, max diff " + fmt(worst) + " (" + worst_kernel + "), " +
             fmt(secs) + " s";
  return o;
}

struct Prop99 {
  std::optional<Panel> panel;
  std::string problem;
};

Prop99 load_prop99(const std::string& path) {
  Prop99 d;
  if (!std::filesystem::exists(path)) {
    d.problem = "data unavailable: " + path + " not found";
    return d;
  }
  try {
    d.panel = load_csv(path, "California", 1989, 2000);
  } catch (const Error& e) {
    d.problem = std::string("cannot load ") + path + ": " + e.what();
  }
  return d;
}

Outcome missing(const Prop99& d) { return {false, d.problem, true}; }

Outcome prop99_reproduction(const Prop99& d) {
  if (!d.panel) return missing(d);
  const auto t0 = Clock::now();
  struct Target {
    MetricKind metric;
    std::size_t j0;
  };
  bool ok = true;
  std::string detail;
  for (const Target& t : {Target{MetricKind::UnconstrainedWeight, 37}, Target{MetricKind::ConstrainedWeight, 36},
                          Target{MetricKind::ConstrainedError, 37}}) {
    const SensitivityReport r = analyze(*d.panel, t.metric, {}, {nullptr, false});
    const long diff = static_cast<long>(r.j0) - static_cast<long>(t.j0);
    ok = ok && std::abs(diff) <= 1 && r.num_placebos() == 38;
    detail += std::string(metric_code(t.metric)) + " j0=" + std::to_string(r.j0) + " (nu " + fmt(r.nu) + ", want " +
              std::to_string(t.j0) + "±1); ";
  }
  const double secs = seconds_since(t0);
  return {ok && secs < 60, detail + fmt(secs) + " s"};
}

Outcome prop99_leave_unit_out(const Prop99& d) {
  if (!d.panel) return missing(d);
  const auto t0 = Clock::now();
  const auto controls = d.panel->controls();
  std::size_t outside = 0;
  for (const auto& c : controls) outside += leave_unit_out(*d.panel, c).target_inside_band ? 0 : 1;
  const double secs = seconds_since(t0);
  const long diff = static_cast<long>(outside) - 29;
  return {std::abs(diff) <= 1 && controls.size() == 38 && secs < 120,
          std::to_string(outside) + " of " + std::to_string(controls.size()) +
              " outside their envelope (want 29±1), " + fmt(secs) + " s"};
}

Outcome prop99_infinities(const Prop99& d) {
  if (!d.panel) return missing(d);
  const Panel& p = *d.panel;
  const auto t = static_cast<Eigen::Index>(p.target_index);
  std::string lo_unit, hi_unit;
  double lo = kInf, hi = -kInf;
  for (const auto& c : p.controls()) {
    const double y = p.outcomes(static_cast<Eigen::Index>(p.unit_index(c)), t);
    if (y < lo) lo = y, lo_unit = c;
    if (y > hi) hi = y, hi_unit = c;
  }
  const SensitivityReport r = analyze(p, MetricKind::ConstrainedError, {}, {nullptr, false});
  std::vector<std::string> infinite;
  for (const auto& b : r.placebo)
    if (b.error.is_infinite()) infinite.push_back(b.unit);
  std::sort(infinite.begin(), infinite.end());
  std::vector<std::string> want{lo_unit, hi_unit};
  std::sort(want.begin(), want.end());
  std::string got;
  for (const auto& u : infinite) got += (got.empty() ? "" : ", ") + u;
  return {infinite == want, "infinite errors for {" + got + "}, extremes are {" + want[0] + ", " + want[1] + "}"};
}

// Coverage at cutoff p: the curve is a step function on achievable ranks.
double coverage_at(const CoverageCurve& c, double p) {
  double v = 0.0;
  for (const auto& pt : c.points)
    if (pt.cutoff <= p + 1e-12) v = pt.coverage;
  return v;
}

Outcome prop99_coverage(const Prop99& d) {
  if (!d.panel) return missing(d);
  const auto t0 = Clock::now();
  bool ok = true;
  std::string detail;
  for (const auto m : {MetricKind::UnconstrainedWeight, MetricKind::ConstrainedWeight, MetricKind::ConstrainedError}) {
    const CoverageCurve c = coverage(*d.panel, m);
    if (m == MetricKind::UnconstrainedWeight) {
      double worst = kInf;
      for (const auto& pt : c.points) worst = std::min(worst, pt.coverage - pt.cutoff);
      ok = ok && worst >= -0.05;
      detail += "uw min(coverage - p) " + fmt(worst) + "; ";
    }
    detail += std::string(metric_code(m)) + " at .25/.5/.75:";
    for (const double p : {0.25, 0.5, 0.75}) {
      const double v = coverage_at(c, p);
      ok = ok && std::abs(v - p) <= 0.15;
      detail += " " + fmt(v);
    }
    detail += "; ";
  }
  const double secs = seconds_since(t0);
  return {ok && secs < 300, detail + fmt(secs) + " s"};
}

Outcome property_suite() {
  std::vector<std::string> failed;
  auto expect = [&](bool cond, const std::string& name) {
    if (!cond && std::find(failed.begin(), failed.end(), name) == failed.end()) failed.push_back(name);
  };

  for (std::uint32_t seed = 1; seed <= 5; ++seed) {
    const Panel p = testing::factor_panel(seed, 12, 12, 3, -2.0);
    const auto t = static_cast<Eigen::Index>(p.target_index);
    const double norm = p.outcomes.col(t).tail(12).norm();
    for (const auto m : {MetricKind::UnconstrainedWeight, MetricKind::ConstrainedWeight, MetricKind::ConstrainedError,
                         MetricKind::UnconstrainedWeightMulti}) {
      const SensitivityReport r = analyze(p, m);
      for (std::size_t i = 1; i < r.placebo.size(); ++i)
        expect(r.placebo[i].lo <= r.placebo[i - 1].lo + 1e-9 && r.placebo[i].hi >= r.placebo[i - 1].hi - 1e-9,
               "nesting");
      if (m != MetricKind::UnconstrainedWeight) continue;
      for (const auto& b : r.placebo) {
        expect(rel_diff((b.lo + b.hi) / 2, r.tau_hat) <= 1e-12, "uw symmetry");
        expect(rel_diff(b.hi - b.lo, 2 * b.error.value * norm) <= 1e-12, "uw width");
      }
    }

    Panel q = p;
    q.outcomes *= 2.75;
    for (const auto m : {MetricKind::UnconstrainedWeight, MetricKind::ConstrainedWeight}) {
      const SensitivityReport a = analyze(p, m), b = analyze(q, m);
      bool same = a.nu == b.nu && rel_diff(b.tau_hat, 2.75 * a.tau_hat) <= 1e-7;
      for (std::size_t i = 0; i < a.placebo.size(); ++i)
        same = same && a.placebo[i].unit == b.placebo[i].unit &&
               (!a.placebo[i].plottable || (rel_diff(b.placebo[i].lo, 2.75 * a.placebo[i].lo) <= 1e-5 &&
                                            rel_diff(b.placebo[i].hi, 2.75 * a.placebo[i].hi) <= 1e-5));
      expect(same, "scale equivariance");
    }

    const ScFit base = fit_treated(p);
    for (Eigen::Index k = 0; k < base.weights.size(); ++k) {
      if (base.weights(k) != 0.0) continue;
      const ScFit smaller = fit_treated(testing::drop_unit(p, base.view.donors[static_cast<std::size_t>(k)]));
      expect(rel_diff(smaller.pre_error, base.pre_error) <= 1e-7 &&
                 std::abs(smaller.target_residual - base.target_residual) <= 1e-5 * (1 + std::abs(base.target_residual)),
             "zero-weight drop");
      break;
    }

    ContrastSpec point;
    const auto L = static_cast<Eigen::Index>(p.num_post_periods());
    point.c1 = VectorXd::Unit(L, L - 1);
    point.c0 = -point.c1;
    for (const auto m : {MetricKind::UnconstrainedWeight, MetricKind::ConstrainedWeight}) {
      const SensitivityReport a = analyze(p, m), b = analyze_contrast(p, m, point);
      bool same = a.j0 == b.j0 && rel_diff(a.tau_hat, b.tau_hat) <= 1e-12;
      for (std::size_t i = 0; i < a.placebo.size(); ++i)
        same = same && a.placebo[i].unit == b.placebo[i].unit &&
               (a.placebo[i].error.value == b.placebo[i].error.value ||
                rel_diff(a.placebo[i].error.value, b.placebo[i].error.value) <= 1e-9);
      expect(same, "point contrast");
    }
  }

  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(1.0, 10.0);
  double max_dev_500 = 0.0;
  for (const int J : {5, 50, 500}) {
    MatrixXd y(J + 1, 5);
    for (Eigen::Index i = 0; i <= J; ++i)
      for (Eigen::Index t = 0; t < 5; ++t) y(i, t) = u(rng);
    const Panel p = testing::small_panel(y, 3);
    double dev = 0.0;
    for (const auto& c : p.controls()) {
      const double n = n_ratio(p, c);
      expect(n >= 1.0, "N_j >= 1");
      dev = std::max(dev, n - 1.0);
    }
    if (J == 500) max_dev_500 = dev;
  }
  expect(max_dev_500 < 0.05, "N_j -> 1");

  {
    std::normal_distribution<double> n01;
    MatrixXd y(9, 14);
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
      const double level = 20.0 + 4.0 * n01(rng);
      for (Eigen::Index t = 0; t < y.cols(); ++t) y(i, t) = level - 0.4 * t + (t < 9 ? n01(rng) : 0.0);
    }
    const Panel p = testing::small_panel(y, 8);
    const SensitivityReport r = analyze_contrast(p, MetricKind::UnconstrainedWeight, ContrastSpec::slope(p));
    expect(std::abs(r.tau_hat) <= 1e-10 && std::abs(r.b0.value) <= 1e-8, "telescoping slope");
  }

  std::string detail = "nesting, uw symmetry/width, N_j >= 1, N_j -> 1 (J=500 max dev " + fmt(max_dev_500) +
                       "), scale equivariance, zero-weight drop, point contrast, telescoping slope";
  if (!failed.empty()) {
    detail = "failed:";
    for (const auto& f : failed) detail += " [" + f + "]";
  }
  return {failed.empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::string data = SCSENS_DEFAULT_DATA;
  app.add_option("--data", data, "long-format smoking panel (unit,period,outcome)");
  CLI11_PARSE(app, argc, argv);

  const Prop99 prop99 = load_prop99(data);
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "closed-form vs solver equivalence", closed_form_equivalence},
      {2, "grid oracle equivalence", grid_oracle_equivalence},
      {3, "smoking panel headline ranks", [&] { return prop99_reproduction(prop99); }},
      {4, "smoking panel leave-unit-out sweep", [&] { return prop99_leave_unit_out(prop99); }},
      {5, "constrained error infinities", [&] { return prop99_infinities(prop99); }},
      {6, "coverage calibration", [&] { return prop99_coverage(prop99); }},
      {7, "property suite", property_suite},
  };

  bool other_failure = false, data_failure = false;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << "criterion " << c.id << " [" << (o.pass ? "PASS" : "FAIL") << "] " << c.name << ": " << o.detail
              << std::endl;
    if (!o.pass) (o.data_missing ? data_failure : other_failure) = true;
  }
  std::cout << "criterion 8 [EXCLUDED] subjective backdating classification rates are not reproducible" << std::endl;
  if (other_failure) return 1;
  return data_failure ? 77 : 0;
}
