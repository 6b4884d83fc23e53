#pragma once

#include "scsens/panel.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace scsens::testing {

/// Low-rank factor panel: unit 0 ("T") is treated from period index
/// `pre` onwards with an additive `effect`; the others are "C00", "C01", ...
inline Panel factor_panel(std::uint32_t seed, int controls, int pre, int post, double effect = 0.0,
                          double noise = 0.3) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  const int units = controls + 1, periods = pre + post;
  Eigen::MatrixXd factors(periods, 3);
  for (int f = 0; f < 3; ++f) {
    double level = 0.0;
    for (int t = 0; t < periods; ++t) {
      level += n01(rng);
      factors(t, f) = level;
    }
  }
  Eigen::MatrixXd y(units, periods);
  for (int i = 0; i < units; ++i) {
    Eigen::Vector3d load(n01(rng), n01(rng), n01(rng));
    for (int t = 0; t < periods; ++t) y(i, t) = 50.0 + 5.0 * factors.row(t).dot(load) + noise * n01(rng);
  }
  for (int t = pre; t < periods; ++t) y(0, t) += effect;

  std::vector<std::string> names{"T"};
  for (int i = 0; i < controls; ++i) names.push_back((i < 10 ? "C0" : "C") + std::to_string(i));
  std::vector<long> years;
  for (int t = 0; t < periods; ++t) years.push_back(1970 + t);
  return make_panel(names, years, y, "T", static_cast<std::size_t>(pre - 1));
}

inline Panel small_panel(const Eigen::MatrixXd& y, std::size_t t0_index,
                         std::optional<std::size_t> target = std::nullopt) {
  std::vector<std::string> names{"T"};
  for (Eigen::Index i = 1; i < y.rows(); ++i) names.push_back("C" + std::to_string(i));
  std::vector<long> years;
  for (Eigen::Index t = 0; t < y.cols(); ++t) years.push_back(2000 + t);
  return make_panel(names, years, y, "T", t0_index, target);
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("scsens_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace scsens::testing

namespace scsens::testing {

/// Same panel without one unit.
inline Panel drop_unit(const Panel& p, const std::string& unit) {
  const auto skip = static_cast<Eigen::Index>(p.unit_index(unit));
  std::vector<std::string> names;
  Eigen::MatrixXd y(p.outcomes.rows() - 1, p.outcomes.cols());
  for (Eigen::Index i = 0, r = 0; i < p.outcomes.rows(); ++i) {
    if (i == skip) continue;
    names.push_back(p.units[static_cast<std::size_t>(i)]);
    y.row(r++) = p.outcomes.row(i);
  }
  return make_panel(names, p.periods, y, p.treated_unit, p.t0_index, p.target_index);
}

}  // namespace scsens::testing
