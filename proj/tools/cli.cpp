#include "cli.hpp"

#include "scsens/calibration.hpp"
#include "scsens/error.hpp"
#include "scsens/parallel.hpp"
#include "scsens/plots.hpp"
#include "scsens/robustness.hpp"
#include "scsens/scm.hpp"
#include "scsens/sensitivity.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

namespace scsens::cli {

namespace fs = std::filesystem;

namespace {

struct RunConfig {
  std::string input;
  std::string treated;
  long first_treated = 0;
  std::optional<long> target_period;
  std::string out_dir = ".";
  unsigned workers = 0;
  SolveSettings settings;

  std::string metrics = "uw";
  std::string contrast = "point";
  std::string unit;  // leave-unit-out / backdate subject; defaults to the treated unit
  bool sweep = false;
  int k = 6;
};

void add_common(CLI::App* app, RunConfig& cfg) {
  app->add_option("-i,--input", cfg.input, "long-format CSV with columns unit,period,outcome")->required();
  app->add_option("--treated", cfg.treated, "treated unit id")->required();
  app->add_option("--first-treated-period", cfg.first_treated, "first period in which the unit is treated")->required();
  app->add_option("--target-period", cfg.target_period, "post-treatment period studied (default: last period)");
  app->add_option("-o,--out", cfg.out_dir, "output directory");
  app->add_option("--workers", cfg.workers, "worker threads (default: all cores)");
  app->add_option("--feas-tol", cfg.settings.feas_tol, "constraint feasibility tolerance");
  app->add_option("--opt-tol", cfg.settings.opt_tol, "relative optimality tolerance");
  app->add_option("--max-iters", cfg.settings.max_iters, "iteration cap for iterative solvers");
  app->add_option("--bisect-tol", cfg.settings.bisect_tol, "relative bracket width for multiplier bisection");
}

std::vector<MetricKind> parse_metrics(const std::string& list) {
  std::vector<MetricKind> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(parse_metric(item));
  }
  if (out.empty()) throw Error(ErrorKind::InvalidArgument, "no metric given");
  return out;
}

Panel load(const RunConfig& cfg) {
  try {
    return load_csv(cfg.input, cfg.treated, cfg.first_treated, cfg.target_period);
  } catch (const Error& e) {
    throw Error(e.kind(), cfg.input + ": " + std::string(e.what()).substr(to_string(e.kind()).size() + 2));
  }
}

class Outputs {
 public:
  explicit Outputs(const std::string& dir, std::ostream& log) : dir_(dir), log_(log) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create output directory '" + dir_.string() + "': " + ec.message());
  }

  void write(const std::string& name, const std::string& content) {
    const fs::path p = dir_ / name;
    std::ofstream f(p, std::ios::binary);
    f << content;
    if (!f) throw Error(ErrorKind::Io, "cannot write '" + p.string() + "'");
    log_ << "wrote " << p.string() << '\n';
  }

  template <class F>
  void write_with(const std::string& name, F&& fn) {
    std::ostringstream s;
    fn(s);
    write(name, s.str());
  }

 private:
  fs::path dir_;
  std::ostream& log_;
};

std::string suffixed(const std::string& stem, const std::string& ext, MetricKind m, bool many) {
  return many ? stem + "_" + std::string(metric_code(m)) + ext : stem + ext;
}

int cmd_fit(const RunConfig& cfg, std::ostream& out) {
  const Panel panel = load(cfg);
  const ScFit f = fit_treated(panel, cfg.settings);
  const EffectEstimate e = effect(f, panel);
  Outputs files(cfg.out_dir, out);

  nlohmann::ordered_json j;
  j["treated_unit"] = panel.treated_unit;
  j["target_period"] = e.target_period;
  j["tau_hat"] = e.tau_hat;
  j["pre_error"] = f.pre_error;
  j["perfect_prefit"] = f.perfect_prefit;
  j["converged"] = f.converged;
  nlohmann::ordered_json w;
  for (std::size_t k = 0; k < f.view.num_donors(); ++k) w[f.view.donors[k]] = f.weights(static_cast<Eigen::Index>(k));
  j["weights"] = w;
  files.write("fit.json", j.dump(2) + "\n");
  files.write_with("trend.csv", [&](std::ostream& s) {
    s << "period,observed,synthetic\n";
    for (std::size_t t = 0; t < panel.num_periods(); ++t) {
      const auto i = static_cast<Eigen::Index>(t);
      s << panel.periods[t] << ',' << format_number(f.view.unit_path(i)) << ','
        << format_number(f.predicted_trend(i)) << '\n';
    }
  });
  out << "tau_hat " << format_number(e.tau_hat) << " at " << e.target_period << ", pre-treatment error "
      << format_number(f.pre_error) << '\n';
  if (f.perfect_prefit) out << "note: perfect pre-treatment fit; weights may not be unique (see --metric uw-multi)\n";
  return kOk;
}

int cmd_analyze(const RunConfig& cfg, std::ostream& out) {
  const auto metrics = parse_metrics(cfg.metrics);
  const Panel panel = load(cfg);
  const ContrastSpec contrast = ContrastSpec::preset(cfg.contrast, panel);
  std::vector<SensitivityReport> reports;
  for (auto m : metrics) reports.push_back(analyze_contrast(panel, m, contrast, cfg.settings));

  Outputs files(cfg.out_dir, out);
  const bool many = metrics.size() > 1;
  for (std::size_t i = 0; i < metrics.size(); ++i) {
    const auto& r = reports[i];
    files.write(suffixed("report", ".json", metrics[i], many), to_json(r).dump(2) + "\n");
    files.write_with(suffixed("bounds", ".csv", metrics[i], many), [&](std::ostream& s) { write_bounds_csv(r, s); });
    for (const auto& n : r.notices) out << "note: " << n << '\n';
    out << metric_code(r.metric) << ": tau_hat " << format_number(r.tau_hat) << ", B0 " << format_number(r.b0.value)
        << ", zero plausible above " << (r.j0 - 1) << " of " << r.num_placebos() << " placebo errors (nu "
        << format_number(r.nu) << ")\n";
  }
  files.write("bounds.svg", bounds_svg(reports));
  return kOk;
}

int cmd_coverage(const RunConfig& cfg, std::ostream& out) {
  const auto metrics = parse_metrics(cfg.metrics);
  const Panel panel = load(cfg);
  std::vector<CoverageCurve> curves;
  for (auto m : metrics) curves.push_back(coverage(panel, m, cfg.settings));
  Outputs files(cfg.out_dir, out);
  const bool many = metrics.size() > 1;
  for (std::size_t i = 0; i < metrics.size(); ++i) {
    files.write_with(suffixed("coverage", ".csv", metrics[i], many),
                     [&](std::ostream& s) { write_coverage_csv(curves[i], s); });
    files.write_with(suffixed("coverage_units", ".csv", metrics[i], many), [&](std::ostream& s) {
      s << "unit,min_rank\n";
      for (const auto& [u, r] : curves[i].per_unit_min_rank) s << csv_field(u) << ',' << format_number(r) << '\n';
    });
  }
  files.write("coverage.svg", coverage_svg(curves));
  return kOk;
}

int cmd_leave_unit_out(const RunConfig& cfg, std::ostream& out) {
  const Panel panel = load(cfg);
  const std::string unit = cfg.unit.empty() ? panel.treated_unit : cfg.unit;
  const LeaveUnitOut r = leave_unit_out(panel, unit, cfg.settings);
  Outputs files(cfg.out_dir, out);
  files.write_with("envelope.csv", [&](std::ostream& s) { write_envelope_csv(r, s); });
  files.write("envelope.svg", envelope_svg(r));
  out << unit << ": " << r.runs.size() << " refits, target outcome " << (r.target_inside_band ? "inside" : "outside")
      << " the envelope\n";

  if (cfg.sweep) {
    const auto controls = panel.controls();
    std::vector<LeaveUnitOut> runs(controls.size());
    parallel_for(controls.size(), [&](std::size_t i) { runs[i] = leave_unit_out(panel, controls[i], cfg.settings); });
    std::size_t outside = 0;
    files.write_with("envelope_sweep.csv", [&](std::ostream& s) {
      s << "unit,observed,lower,upper,inside\n";
      const auto t = static_cast<Eigen::Index>(panel.target_index);
      for (const auto& run : runs) {
        outside += run.target_inside_band ? 0 : 1;
        s << csv_field(run.unit) << ',' << format_number(run.observed(t)) << ',' << format_number(run.band_lower(t)) << ','
          << format_number(run.band_upper(t)) << ',' << (run.target_inside_band ? "true" : "false") << '\n';
      }
    });
    out << "placebo sweep: " << outside << " of " << runs.size() << " control units outside their envelope\n";
  }
  return kOk;
}

int cmd_backdate(const RunConfig& cfg, std::ostream& out) {
  const Panel panel = load(cfg);
  const std::string unit = cfg.unit.empty() ? panel.treated_unit : cfg.unit;
  if (cfg.k < 1) throw Error(ErrorKind::TooFewPeriods, "--k must be at least 1");
  const BackdateResult r = backdate(panel, unit, static_cast<std::size_t>(cfg.k), cfg.settings);
  const ScFit full = fit(donor_view(panel, unit), cfg.settings);
  Outputs files(cfg.out_dir, out);
  files.write_with("validation.csv", [&](std::ostream& s) { write_validation_csv(r, panel, s); });
  files.write_with("backdate_trend.csv", [&](std::ostream& s) {
    s << "period,observed,backdated,full\n";
    for (std::size_t t = 0; t < panel.num_periods(); ++t) {
      const auto i = static_cast<Eigen::Index>(t);
      s << panel.periods[t] << ',' << format_number(full.view.unit_path(i)) << ','
        << format_number(r.fit_on_truncated.predicted_trend(i)) << ',' << format_number(full.predicted_trend(i))
        << '\n';
    }
  });
  files.write("backdate.svg", backdate_svg(r, panel));
  const auto t = static_cast<Eigen::Index>(panel.target_index);
  out << unit << ": validation RMSE "
      << format_number(std::sqrt(r.validation_errors.squaredNorm() / static_cast<double>(r.validation_errors.size())))
      << ", target residual backdated " << format_number(r.fit_on_truncated.predicted_trend(t) - full.view.unit_path(t))
      << " vs full " << format_number(full.target_residual) << '\n';
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sensitivity analysis for synthetic control estimates"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto* fit_cmd = app.add_subcommand("fit", "fit the synthetic control and write weights and trends");
  add_common(fit_cmd, cfg);

  auto* analyze_cmd = app.add_subcommand("analyze", "placebo misspecification errors and effect bounds");
  add_common(analyze_cmd, cfg);
  analyze_cmd->add_option("--metric", cfg.metrics, "comma list of uw, cw, ce, uw-multi");
  analyze_cmd->add_option("--contrast", cfg.contrast, "point, average or slope");

  auto* cov_cmd = app.add_subcommand("coverage", "placebo-of-placebo coverage of the zero effect");
  add_common(cov_cmd, cfg);
  cov_cmd->add_option("--metric", cfg.metrics, "comma list of uw, cw, ce, uw-multi");

  auto* luo_cmd = app.add_subcommand("leave-unit-out", "refit after dropping each weighted donor");
  add_common(luo_cmd, cfg);
  luo_cmd->add_option("--unit", cfg.unit, "unit cast as treated (default: the treated unit)");
  luo_cmd->add_flag("--placebo-sweep", cfg.sweep, "also run every control unit as a placebo");

  auto* back_cmd = app.add_subcommand("backdate", "fit on early pre-treatment periods, validate on the rest");
  add_common(back_cmd, cfg);
  back_cmd->add_option("--unit", cfg.unit, "unit cast as treated (default: the treated unit)");
  back_cmd->add_option("--k", cfg.k, "number of held-out pre-treatment periods");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }

  try {
    cfg.settings.validate();
    set_workers(cfg.workers);
    if (*fit_cmd) return cmd_fit(cfg, out);
    if (*analyze_cmd) return cmd_analyze(cfg, out);
    if (*cov_cmd) return cmd_coverage(cfg, out);
    if (*luo_cmd) return cmd_leave_unit_out(cfg, out);
    if (*back_cmd) return cmd_backdate(cfg, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return is_numerical(e.kind()) ? kNumericalError : kInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
  return kInputError;
}

}  // namespace scsens::cli
