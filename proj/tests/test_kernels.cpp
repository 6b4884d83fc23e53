#include "scsens/error.hpp"
#include "scsens/kernels.hpp"

#include <doctest.h>

#include <random>

using namespace scsens;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// Fixed J=6, T0=8 instance; expected values from an independent conic solver.
struct Fixture {
  MatrixXd X{8, 6};
  VectorXd x{8};
  VectorXd y{6};
  Fixture() {
    X << 10.00, 10.90, 9.18, 7.33, 8.64, 7.03,  //
        10.18, 14.02, 8.52, 8.14, 11.47, 11.07,  //
        10.32, 7.21, 9.91, 12.09, 5.97, 8.63,    //
        4.30, 6.13, 4.47, 9.29, 6.20, 10.81,     //
        10.47, 9.44, 2.45, 8.38, 9.85, 10.34,    //
        5.41, 8.57, 7.06, 7.57, 13.18, 7.58,     //
        9.90, 12.65, 8.25, 9.66, 10.33, 10.19,   //
        6.32, 10.23, 14.08, 5.36, 12.58, 10.36;
    x << 9.68, 12.59, 8.90, 4.63, 10.07, 8.20, 10.72, 9.09;
    y << 19.67, 23.34, 27.19, 16.62, 21.02, 17.68;
  }
};

SolveSettings tight() {
  SolveSettings s;
  s.opt_tol = 1e-12;
  return s;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::Io;
}

}  // namespace

TEST_CASE("simplex projection") {
  CHECK(project_simplex(VectorXd::Constant(3, 1.0 / 3)).isApprox(VectorXd::Constant(3, 1.0 / 3)));
  const VectorXd p = project_simplex((VectorXd(3) << 0.6, 0.1, -0.2).finished());
  CHECK(p(0) == doctest::Approx(0.75));
  CHECK(p(1) == doctest::Approx(0.25));
  CHECK(p(2) == 0.0);
  const VectorXd q = project_simplex((VectorXd(2) << 5.0, -5.0).finished());
  CHECK(q(0) == 1.0);
  CHECK(q(1) == 0.0);
}

TEST_CASE("simplex least squares matches the reference optimum") {
  const Fixture f;
  const LsSolution s = simplex_ls(f.X, f.x, tight());
  CHECK(s.converged);
  CHECK(s.objective == doctest::Approx(1.282590533500).epsilon(1e-9));
  const VectorXd expected = (VectorXd(6) << 0.44660487, 0.36376591, 0, 0, 0.18962922, 0).finished();
  CHECK((s.weights - expected).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(s.weights.sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.weights.minCoeff() >= 0.0);
}

TEST_CASE("simplex least squares small cases") {
  const LsSolution s = simplex_ls(MatrixXd::Identity(2, 2), VectorXd::Ones(2));
  CHECK(s.weights(0) == doctest::Approx(0.5));
  CHECK(s.objective == doctest::Approx(0.7071067812));
  const LsSolution one = simplex_ls(MatrixXd::Ones(3, 1), VectorXd::Zero(3));
  CHECK(one.weights(0) == 1.0);
  CHECK(one.objective == doctest::Approx(std::sqrt(3.0)));
  CHECK(kind_of([] { simplex_ls(MatrixXd::Ones(3, 2), VectorXd::Ones(2)); }) == ErrorKind::DimensionMismatch);
}

TEST_CASE("least squares on the target hyperplane matches the reference optimum") {
  const Fixture f;
  const LsSolution s = simplex_ls_on_hyperplane(f.X, f.x, {f.y, 18.68}, tight());
  CHECK(s.objective == doctest::Approx(4.147572911310).epsilon(1e-7));
  CHECK(f.y.dot(s.weights) == doctest::Approx(18.68).epsilon(1e-10));
  CHECK(kind_of([&] { simplex_ls_on_hyperplane(f.X, f.x, {f.y, 30.0}); }) == ErrorKind::Infeasible);
}

TEST_CASE("extremes under an error cap match the reference optimum") {
  const Fixture f;
  const double e = simplex_ls(f.X, f.x, tight()).objective;
  const Extremes ex = extremize_linear_under_error_cap(f.y, f.X, f.x, 1.1 * e, tight());
  CHECK(ex.lo == doctest::Approx(20.888602801462).epsilon(1e-7));
  CHECK(ex.hi == doctest::Approx(21.829256072412).epsilon(1e-7));
  const Extremes inf = extremize_linear_under_error_cap(f.y, f.X, f.x, INFINITY);
  CHECK(inf.lo == f.y.minCoeff());
  CHECK(inf.hi == f.y.maxCoeff());
  CHECK(kind_of([&] { extremize_linear_under_error_cap(f.y, f.X, f.x, 0.5 * e); }) == ErrorKind::Infeasible);
}

TEST_CASE("linear extremes on ball and simplex match the reference optimum") {
  const Fixture f;
  const VectorXd w = simplex_ls(f.X, f.x, tight()).weights;
  const double lo = min_linear_on_ball_simplex(f.y, w, 0.15, tight()).value;
  const double hi = -min_linear_on_ball_simplex(-f.y, w, 0.15, tight()).value;
  CHECK(lo == doctest::Approx(20.459482330558).epsilon(1e-7));
  CHECK(hi == doctest::Approx(22.116532041159).epsilon(1e-7));

  const VectorXd c = (VectorXd(3) << 1, 2, 3).finished();
  const LinearMin m = min_linear_on_ball_simplex(c, VectorXd::Constant(3, 1.0 / 3), 0.2);
  CHECK(m.value == doctest::Approx(2.0 - 0.2 * std::sqrt(2.0)).epsilon(1e-9));
  CHECK((m.argmin - VectorXd::Constant(3, 1.0 / 3)).norm() == doctest::Approx(0.2).epsilon(1e-8));
  CHECK(min_linear_on_ball_simplex(c, VectorXd::Constant(3, 1.0 / 3), 0.0).value == doctest::Approx(2.0));
  CHECK(min_linear_on_ball_simplex(c, VectorXd::Constant(3, 1.0 / 3), 10.0).value == doctest::Approx(1.0));
}

TEST_CASE("projection onto simplex and hyperplane matches the reference optimum") {
  const Fixture f;
  const VectorXd w0 = (VectorXd(6) << 0.1, 0.5, 0.2, 0, 0.1, 0.1).finished();
  const Projection p = project_simplex_hyperplane(w0, {f.y, 18.68}, tight());
  CHECK(p.distance == doctest::Approx(0.561086577599).epsilon(1e-7));
  CHECK(p.weights.minCoeff() >= 0.0);
  CHECK(kind_of([&] { project_simplex_hyperplane(w0, {f.y, 40.0}); }) == ErrorKind::Infeasible);
}

TEST_CASE("unconstrained hyperplane projection and ball extremes are closed form") {
  const VectorXd n = (VectorXd(2) << 3, 4).finished();
  const Projection p = hyperplane_project(VectorXd::Zero(2), {n, 10.0});
  CHECK(p.distance == doctest::Approx(2.0));
  CHECK(n.dot(p.weights) == doctest::Approx(10.0));
  CHECK(kind_of([] { hyperplane_project(VectorXd::Ones(2), {VectorXd::Zero(2), 1.0}); }) == ErrorKind::ZeroNormal);
  const Extremes e = ball_linear_extremes(n, VectorXd::Ones(2), 0.5);
  CHECK(e.lo == doctest::Approx(4.5));
  CHECK(e.hi == doctest::Approx(9.5));
}

TEST_CASE("grid oracle enumerates the barycentric grid") {
  const GridResult g = grid_oracle([](const VectorXd& w) { return w(0); }, nullptr, 3, 0.5);
  CHECK(g.evaluated == 6);
  CHECK(g.value == 0.0);
  CHECK(kind_of([] { grid_oracle([](const VectorXd&) { return 0.0; }, nullptr, 5, 0.1); }) ==
        ErrorKind::DimensionTooLarge);
  CHECK(kind_of([] {
          grid_oracle([](const VectorXd&) { return 0.0; }, [](const VectorXd&) { return false; }, 2, 0.1);
        }) == ErrorKind::Infeasible);
}

TEST_CASE("iterative solvers agree with the grid oracle on random three-donor problems") {
  std::mt19937 rng(17);
  std::normal_distribution<double> n01;
  for (int trial = 0; trial < 25; ++trial) {
    const int t0 = 4 + trial % 5;
    MatrixXd X(t0, 3);
    VectorXd x(t0), y(3);
    for (int i = 0; i < t0; ++i) {
      x(i) = n01(rng);
      for (int j = 0; j < 3; ++j) X(i, j) = n01(rng);
    }
    for (int j = 0; j < 3; ++j) y(j) = n01(rng);
    auto err = [&](const VectorXd& w) { return (x - X * w).norm(); };
    const double step = 2e-3;
    const LsSolution ls = simplex_ls(X, x);
    CHECK(ls.objective <= grid_oracle(err, nullptr, 3, step).value + 1e-12);
    CHECK(ls.objective >= grid_oracle(err, nullptr, 3, step).value - 1e-2);

    const double cap = 1.2 * ls.objective + 0.05;
    const auto within = [&](const VectorXd& w) { return err(w) <= cap; };
    const Extremes ex = extremize_linear_under_error_cap(y, X, x, cap);
    const double grid_lo = grid_oracle([&](const VectorXd& w) { return y.dot(w); }, within, 3, step).value;
    const double grid_hi = -grid_oracle([&](const VectorXd& w) { return -y.dot(w); }, within, 3, step).value;
    CHECK(ex.lo <= grid_lo + 1e-12);
    CHECK(ex.hi >= grid_hi - 1e-12);
    CHECK(std::abs(ex.lo - grid_lo) < 1e-2);
    CHECK(std::abs(ex.hi - grid_hi) < 1e-2);
  }
}

TEST_CASE("settings are validated") {
  SolveSettings s;
  s.feas_tol = -1;
  CHECK_THROWS_AS(s.validate(), Error);
  s = {};
  s.max_iters = 0;
  CHECK_THROWS_AS(s.validate(), Error);
}

TEST_CASE("projection boundary cases and grid reference") {
  CHECK(project_simplex((VectorXd(2) << 0.5, 0.5).finished()) == (VectorXd(2) << 0.5, 0.5).finished());
  CHECK(project_simplex((VectorXd(2) << 2, 0).finished()) == (VectorXd(2) << 1, 0).finished());
  const VectorXd v = (VectorXd(3) << 0.6, 0.1, -0.2).finished();
  const GridResult g = grid_oracle([&](const VectorXd& w) { return (w - v).squaredNorm(); }, nullptr, 3, 1e-4);
  CHECK((project_simplex(v) - g.argmin).cwiseAbs().maxCoeff() < 1e-3);
}

TEST_CASE("least squares interpolation and single donor") {
  MatrixXd X(4, 3);
  X << 1, 0, 2, 0, 1, 5, 3, 1, 0, 2, 2, 2;
  const LsSolution s = simplex_ls(X, X.col(1), tight());
  CHECK((s.weights - VectorXd::Unit(3, 1)).norm() < 1e-6);
  CHECK(s.objective < 1e-6);
  const LsSolution one = simplex_ls(X.col(0), X.col(2));
  CHECK(one.weights.size() == 1);
  CHECK(one.weights(0) == 1.0);
}

TEST_CASE("hyperplane projection reference values") {
  const Projection p = hyperplane_project((VectorXd(2) << 1, 0).finished(), {(VectorXd(2) << 2, 4).finished(), 4.0});
  CHECK(p.distance == doctest::Approx(2.0 / std::sqrt(20.0)));
  const VectorXd w0 = (VectorXd(2) << 1, 0.5).finished();
  const Projection same = hyperplane_project(w0, {(VectorXd(2) << 2, 4).finished(), 4.0});
  CHECK(same.distance == 0.0);
  CHECK(same.weights == w0);
}

TEST_CASE("ball extremes reference values") {
  const VectorXd c = (VectorXd(2) << 3, 4).finished();
  const VectorXd center = (VectorXd(2) << 2, 1).finished();  // c'center = 10
  const Extremes e = ball_linear_extremes(c, center, 2.0);
  CHECK(e.lo == doctest::Approx(0.0));
  CHECK(e.hi == doctest::Approx(20.0));
  const Extremes z = ball_linear_extremes(c, center, 0.0);
  CHECK(z.lo == 10.0);
  CHECK(z.hi == 10.0);
  const Extremes flat = ball_linear_extremes(VectorXd::Zero(2), center, 7.0);
  CHECK(flat.lo == 0.0);
  CHECK(flat.hi == 0.0);
}

TEST_CASE("hyperplane constrained least squares at the edge of the donor range") {
  const Fixture f;
  Eigen::Index k;
  const double top = f.y.maxCoeff(&k);
  const LsSolution s = simplex_ls_on_hyperplane(f.X, f.x, {f.y, top});
  CHECK((s.weights - VectorXd::Unit(6, k)).norm() < 1e-9);
  CHECK(s.objective == doctest::Approx((f.x - f.X.col(k)).norm()));
}

TEST_CASE("error cap at the optimum collapses the extremes") {
  const Fixture f;
  const LsSolution s = simplex_ls(f.X, f.x, tight());
  const Extremes ex = extremize_linear_under_error_cap(f.y, f.X, f.x, s.objective, tight());
  CHECK(ex.lo == doctest::Approx(f.y.dot(s.weights)).epsilon(1e-5));
  CHECK(ex.hi == doctest::Approx(f.y.dot(s.weights)).epsilon(1e-5));
}

TEST_CASE("grid oracle at unit step visits the vertices") {
  const VectorXd c = (VectorXd(3) << 4, -1, 2).finished();
  const GridResult g = grid_oracle([&](const VectorXd& w) { return c.dot(w); }, nullptr, 3, 1.0);
  CHECK(g.evaluated == 3);
  CHECK(g.value == -1.0);
  CHECK(g.argmin == VectorXd::Unit(3, 1));
}

TEST_CASE("error-cap extremes at 1.1 times the optimum match the grid within 2e-3") {
  std::mt19937 rng(23);
  std::normal_distribution<double> n01;
  MatrixXd X(6, 3);
  VectorXd x(6), y(3);
  for (int i = 0; i < 6; ++i) {
    x(i) = n01(rng);
    for (int j = 0; j < 3; ++j) X(i, j) = n01(rng);
  }
  for (int j = 0; j < 3; ++j) y(j) = n01(rng);
  const double cap = 1.1 * simplex_ls(X, x, tight()).objective;
  const auto within = [&](const VectorXd& w) { return (x - X * w).norm() <= cap; };
  const Extremes ex = extremize_linear_under_error_cap(y, X, x, cap);
  CHECK(std::abs(ex.lo - grid_oracle([&](const VectorXd& w) { return y.dot(w); }, within, 3, 1e-3).value) < 2e-3);
  CHECK(std::abs(ex.hi + grid_oracle([&](const VectorXd& w) { return -y.dot(w); }, within, 3, 1e-3).value) < 2e-3);
}

TEST_CASE("grid reference reproduces simplex least squares at step level") {
  const LsSolution s = simplex_ls(MatrixXd::Identity(2, 2), VectorXd::Ones(2));
  const GridResult g = grid_oracle([](const VectorXd& w) { return (VectorXd::Ones(2) - w).norm(); }, nullptr, 2, 1e-5);
  CHECK(std::abs(g.value - s.objective) < 1e-9);
  CHECK((g.argmin - s.weights).cwiseAbs().maxCoeff() < 1e-5);
}
