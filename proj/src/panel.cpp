#include "scsens/panel.hpp"

#include "scsens/error.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>

namespace scsens {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool parse_long(std::string_view s, long& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && !s.empty();
}

bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && !s.empty();
}

std::string quote_if_needed(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return std::string(s);
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

}  // namespace

std::size_t Panel::unit_index(std::string_view unit) const {
  auto it = std::find(units.begin(), units.end(), unit);
  if (it == units.end()) throw Error(ErrorKind::UnknownUnit, "unit '" + std::string(unit) + "' not in panel");
  return static_cast<std::size_t>(it - units.begin());
}

std::size_t Panel::period_index(long period) const {
  auto it = std::lower_bound(periods.begin(), periods.end(), period);
  if (it == periods.end() || *it != period)
    throw Error(ErrorKind::UnknownPeriod, "period " + std::to_string(period) + " not in panel");
  return static_cast<std::size_t>(it - periods.begin());
}

std::vector<std::string> Panel::controls() const {
  std::vector<std::string> out;
  out.reserve(units.size());
  for (const auto& u : units)
    if (u != treated_unit) out.push_back(u);
  return out;
}

void Panel::validate() const {
  if (static_cast<std::size_t>(outcomes.rows()) != units.size() ||
      static_cast<std::size_t>(outcomes.cols()) != periods.size())
    throw Error(ErrorKind::DimensionMismatch, "outcome matrix shape does not match units x periods");
  for (std::size_t i = 1; i < periods.size(); ++i)
    if (periods[i] <= periods[i - 1]) throw Error(ErrorKind::BadPeriodOrder, "periods must be strictly increasing");
  if (std::count(units.begin(), units.end(), treated_unit) != 1)
    throw Error(ErrorKind::UnknownUnit, "treated unit '" + treated_unit + "' must appear exactly once");
  {
    auto sorted = units;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw Error(ErrorKind::NonRectangular, "duplicate unit identifier");
  }
  if (units.size() < 3) throw Error(ErrorKind::TooFewUnits, "need at least two control units");
  if (t0_index < 1) throw Error(ErrorKind::TooFewPrePeriods, "need at least two pre-treatment periods");
  if (t0_index + 1 >= periods.size())
    throw Error(ErrorKind::TooFewPeriods, "need at least one post-treatment period");
  if (target_index <= t0_index || target_index >= periods.size())
    throw Error(ErrorKind::InvalidArgument, "target period must be post-treatment");
  if (!outcomes.allFinite()) throw Error(ErrorKind::MissingCell, "outcomes contain non-finite values");
}

Panel make_panel(std::vector<std::string> units, std::vector<long> periods, Eigen::MatrixXd outcomes,
                 std::string treated_unit, std::size_t t0_index, std::optional<std::size_t> target_index) {
  Panel p;
  p.units = std::move(units);
  p.periods = std::move(periods);
  p.outcomes = std::move(outcomes);
  p.treated_unit = std::move(treated_unit);
  p.t0_index = t0_index;
  p.target_index = target_index.value_or(p.periods.empty() ? 0 : p.periods.size() - 1);
  p.validate();
  return p;
}

Panel read_csv(std::istream& in, std::string_view treated, long first_treated_period,
               std::optional<long> target_period) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::Io, "empty input");
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // UTF-8 BOM
  {
    auto header = split_csv_line(line);
    if (header.size() != 3 || trim(header[0]) != "unit" || trim(header[1]) != "period" ||
        trim(header[2]) != "outcome")
      throw Error(ErrorKind::Io, "header must be exactly 'unit,period,outcome'");
  }

  struct Row {
    std::size_t unit;
    long period;
    double value;
    std::size_t line;
  };
  std::vector<std::string> units;
  std::unordered_map<std::string, std::size_t> unit_pos;
  std::vector<Row> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto f = split_csv_line(line);
    if (f.size() != 3) throw Error(ErrorKind::Io, "line " + std::to_string(line_no) + ": expected 3 fields");
    std::string unit(trim(f[0]));
    long period = 0;
    double value = 0.0;
    if (!parse_long(f[1], period))
      throw Error(ErrorKind::BadPeriodOrder,
                  "line " + std::to_string(line_no) + ": period '" + f[1] + "' is not an integer");
    if (!parse_double(f[2], value))
      throw Error(ErrorKind::MissingCell, "line " + std::to_string(line_no) + ": outcome '" + f[2] +
                                              "' for unit " + unit + " is not a number");
    auto [it, inserted] = unit_pos.emplace(unit, units.size());
    if (inserted) units.push_back(unit);
    rows.push_back({it->second, period, value, line_no});
  }
  if (rows.empty()) throw Error(ErrorKind::Io, "no data rows");

  std::vector<long> periods;
  periods.reserve(rows.size());
  for (const auto& r : rows) periods.push_back(r.period);
  std::sort(periods.begin(), periods.end());
  periods.erase(std::unique(periods.begin(), periods.end()), periods.end());

  const auto n_units = static_cast<Eigen::Index>(units.size());
  const auto n_periods = static_cast<Eigen::Index>(periods.size());
  Eigen::MatrixXd outcomes(n_units, n_periods);
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> seen =
      Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(n_units, n_periods, false);
  for (const auto& r : rows) {
    auto col = std::lower_bound(periods.begin(), periods.end(), r.period) - periods.begin();
    auto row = static_cast<Eigen::Index>(r.unit);
    if (seen(row, col))
      throw Error(ErrorKind::NonRectangular, "line " + std::to_string(r.line) + ": duplicate row for unit " +
                                                 units[r.unit] + ", period " + std::to_string(r.period));
    seen(row, col) = true;
    outcomes(row, col) = r.value;
  }
  for (Eigen::Index i = 0; i < n_units; ++i)
    for (Eigen::Index j = 0; j < n_periods; ++j)
      if (!seen(i, j))
        throw Error(ErrorKind::MissingCell, "no outcome for unit " + units[static_cast<std::size_t>(i)] +
                                                ", period " + std::to_string(periods[static_cast<std::size_t>(j)]));

  if (!unit_pos.contains(std::string(treated)))
    throw Error(ErrorKind::UnknownUnit, "treated unit '" + std::string(treated) + "' not in data");

  auto first_it = std::lower_bound(periods.begin(), periods.end(), first_treated_period);
  if (first_it == periods.end() || *first_it != first_treated_period)
    throw Error(ErrorKind::UnknownPeriod, "first treated period " + std::to_string(first_treated_period) +
                                              " not in data");
  auto first_idx = static_cast<std::size_t>(first_it - periods.begin());
  if (first_idx < 2)
    throw Error(ErrorKind::TooFewPrePeriods, "first treated period " + std::to_string(first_treated_period) +
                                                 " leaves fewer than two pre-treatment periods");

  std::optional<std::size_t> target_idx;
  if (target_period) {
    auto t_it = std::lower_bound(periods.begin(), periods.end(), *target_period);
    if (t_it == periods.end() || *t_it != *target_period)
      throw Error(ErrorKind::UnknownPeriod, "target period " + std::to_string(*target_period) + " not in data");
    target_idx = static_cast<std::size_t>(t_it - periods.begin());
  }
  return make_panel(std::move(units), std::move(periods), std::move(outcomes), std::string(treated), first_idx - 1,
                    target_idx);
}

Panel load_csv(const std::filesystem::path& path, std::string_view treated, long first_treated_period,
               std::optional<long> target_period) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  return read_csv(in, treated, first_treated_period, target_period);
}

void write_csv(const Panel& panel, std::ostream& out) {
  out << "unit,period,outcome\n";
  for (std::size_t i = 0; i < panel.units.size(); ++i) {
    const auto name = quote_if_needed(panel.units[i]);
    for (std::size_t j = 0; j < panel.periods.size(); ++j)
      out << name << ',' << panel.periods[j] << ','
          << format_double(panel.outcomes(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) << '\n';
  }
}

std::string csv_field(std::string_view text) { return quote_if_needed(text); }

void save_csv(const Panel& panel, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
  write_csv(panel, out);
}

Panel with_target(const Panel& panel, long target_period) {
  Panel p = panel;
  p.target_index = panel.period_index(target_period);
  p.validate();
  return p;
}

Panel placebo_panel(const Panel& panel, std::string_view new_treated) {
  const auto drop = panel.treated_index();
  const auto keep = panel.unit_index(new_treated);
  if (keep == drop) throw Error(ErrorKind::InvalidArgument, "placebo unit must be a control unit");
  Panel p;
  p.periods = panel.periods;
  p.t0_index = panel.t0_index;
  p.target_index = panel.target_index;
  p.treated_unit = std::string(new_treated);
  p.outcomes.resize(panel.outcomes.rows() - 1, panel.outcomes.cols());
  Eigen::Index r = 0;
  for (std::size_t i = 0; i < panel.units.size(); ++i) {
    if (i == drop) continue;
    p.units.push_back(panel.units[i]);
    p.outcomes.row(r++) = panel.outcomes.row(static_cast<Eigen::Index>(i));
  }
  p.validate();
  return p;
}

DonorView make_view(std::string placebo_treated, std::vector<std::string> donors, Eigen::VectorXd unit_path,
                    Eigen::MatrixXd donor_paths, std::size_t t0_index, std::size_t target_index) {
  if (static_cast<std::size_t>(donor_paths.cols()) != donors.size() || donor_paths.rows() != unit_path.size())
    throw Error(ErrorKind::DimensionMismatch, "donor matrix does not match donor list / unit path");
  if (target_index >= static_cast<std::size_t>(unit_path.size()) || t0_index >= target_index)
    throw Error(ErrorKind::InvalidArgument, "bad period indices for donor view");
  DonorView v;
  v.placebo_treated = std::move(placebo_treated);
  v.donors = std::move(donors);
  v.t0_index = t0_index;
  v.target_index = target_index;
  v.unit_path = std::move(unit_path);
  v.donor_paths = std::move(donor_paths);
  const auto pre = static_cast<Eigen::Index>(t0_index + 1);
  const auto tgt = static_cast<Eigen::Index>(target_index);
  v.x_target = v.unit_path.head(pre);
  v.X_donors = v.donor_paths.topRows(pre);
  v.y_donors_target = v.donor_paths.row(tgt).transpose();
  v.y_target = v.unit_path(tgt);
  return v;
}

DonorView donor_view(const Panel& panel, std::string_view as_treated, const std::optional<std::string>& exclude) {
  const auto self = panel.unit_index(as_treated);
  const auto treated = panel.treated_index();
  std::optional<std::size_t> excluded;
  if (exclude) {
    excluded = panel.unit_index(*exclude);
    if (*excluded == self) throw Error(ErrorKind::InvalidArgument, "cannot exclude the unit cast as treated");
  }
  std::vector<std::string> donors;
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < panel.units.size(); ++i) {
    if (i == self || i == treated || (excluded && i == *excluded)) continue;
    donors.push_back(panel.units[i]);
    rows.push_back(i);
  }
  if (donors.empty()) throw Error(ErrorKind::TooFewUnits, "donor pool is empty");
  Eigen::MatrixXd paths(panel.outcomes.cols(), static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k)
    paths.col(static_cast<Eigen::Index>(k)) = panel.outcomes.row(static_cast<Eigen::Index>(rows[k])).transpose();
  auto view = make_view(std::string(as_treated), std::move(donors),
                        panel.outcomes.row(static_cast<Eigen::Index>(self)).transpose(), std::move(paths),
                        panel.t0_index, panel.target_index);
  view.donor_rows = std::move(rows);
  return view;
}

}  // namespace scsens
