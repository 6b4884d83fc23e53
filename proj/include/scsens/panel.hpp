#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace scsens {

/// Balanced unit-by-period outcome table with a single treated unit.
///
/// Period indices are 0-based. Periods 0..=t0_index are pre-treatment;
/// the treated unit is exposed in every later period. target_index is the
/// post-treatment period whose effect is studied (T* in the usual notation).
struct Panel {
  std::vector<std::string> units;
  std::vector<long> periods;
  Eigen::MatrixXd outcomes;  // rows = units, cols = periods
  std::string treated_unit;
  std::size_t t0_index = 0;
  std::size_t target_index = 0;

  std::size_t num_units() const { return units.size(); }
  std::size_t num_periods() const { return periods.size(); }
  std::size_t num_controls() const { return units.size() - 1; }
  std::size_t num_pre_periods() const { return t0_index + 1; }
  std::size_t num_post_periods() const { return periods.size() - t0_index - 1; }

  std::size_t unit_index(std::string_view unit) const;
  std::size_t period_index(long period) const;
  std::size_t treated_index() const { return unit_index(treated_unit); }

  /// Control units in panel order.
  std::vector<std::string> controls() const;

  /// Throws scsens::Error if any invariant is violated.
  void validate() const;
};

/// Builds and validates a panel from its parts.
Panel make_panel(std::vector<std::string> units, std::vector<long> periods, Eigen::MatrixXd outcomes,
                 std::string treated_unit, std::size_t t0_index, std::optional<std::size_t> target_index = {});

/// Parses a long-format `unit,period,outcome` table.
///
/// Units keep their order of first appearance; periods are sorted ascending.
/// t0_index is the period immediately before first_treated_period and the
/// target defaults to the last period.
Panel read_csv(std::istream& in, std::string_view treated, long first_treated_period,
               std::optional<long> target_period = {});

Panel load_csv(const std::filesystem::path& path, std::string_view treated, long first_treated_period,
               std::optional<long> target_period = {});

/// Writes the panel in the same long format, unit-major, with shortest
/// round-trip formatting for outcomes.
void write_csv(const Panel& panel, std::ostream& out);
void save_csv(const Panel& panel, const std::filesystem::path& path);

/// A CSV field, quoted when it contains a comma, quote or newline.
std::string csv_field(std::string_view text);

/// Same data with a different target period.
Panel with_target(const Panel& panel, long target_period);

/// Removes the treated unit and re-designates `new_treated` as treated.
/// Used for placebo-of-placebo runs where the real treated unit must not
/// enter any donor pool.
Panel placebo_panel(const Panel& panel, std::string_view new_treated);

/// One unit cast as "treated" against the remaining units as donors.
///
/// Donors exclude the panel's treated unit, `placebo_treated` itself and the
/// optional excluded unit, and always keep panel order so weight vectors from
/// different calls line up.
struct DonorView {
  std::string placebo_treated;
  std::vector<std::string> donors;
  std::vector<std::size_t> donor_rows;  // panel row of each donor
  std::size_t t0_index = 0;
  std::size_t target_index = 0;

  Eigen::VectorXd unit_path;    // all periods of placebo_treated
  Eigen::MatrixXd donor_paths;  // periods x donors

  Eigen::VectorXd x_target;         // pre-treatment outcomes of placebo_treated
  Eigen::MatrixXd X_donors;         // pre-treatment outcomes of donors (columns)
  Eigen::VectorXd y_donors_target;  // donors at target_index
  double y_target = 0.0;

  std::size_t num_donors() const { return donors.size(); }
};

DonorView donor_view(const Panel& panel, std::string_view as_treated,
                     const std::optional<std::string>& exclude = std::nullopt);

/// Builds a view directly from matrices; used for external-weight estimators
/// and tests. Columns of donor_paths are donors, rows are periods.
DonorView make_view(std::string placebo_treated, std::vector<std::string> donors, Eigen::VectorXd unit_path,
                    Eigen::MatrixXd donor_paths, std::size_t t0_index, std::size_t target_index);

}  // namespace scsens
