#include "scsens/plots.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

namespace scsens {

namespace {

constexpr double kWidth = 720, kHeight = 440;
constexpr double kLeft = 70, kRight = 160, kTop = 30, kBottom = 50;
const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string fixed(double v, int digits = 2) {
  if (v == 0.0) v = 0.0;  // no "-0.00"
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, digits);
  std::string s(buf, res.ptr);
  if (s == "-0.00" || s == "-0.000") s.erase(0, 1);
  return s;
}

std::string escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Round numbers for tick marks.
std::vector<double> ticks(double lo, double hi, int target = 6) {
  const double span = hi - lo;
  if (!(span > 0)) return {lo};
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  std::vector<double> out;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * span; t += step) out.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
  return out;
}

class Canvas {
 public:
  Canvas(double x0, double x1, double y0, double y1) : x0_(x0), x1_(x1), y0_(y0), y1_(y1) {
    if (!(x1_ > x0_)) x1_ = x0_ + 1;
    if (!(y1_ > y0_)) {
      y0_ -= 1;
      y1_ += 1;
    }
    out_ << R"(<svg xmlns="http://www.w3.org/2000/svg" width=")" << kWidth << R"(" height=")" << kHeight
         << R"(" viewBox="0 0 )" << kWidth << ' ' << kHeight << R"(" font-family="sans-serif" font-size="12">)" << '\n';
    out_ << R"(<rect width="100%" height="100%" fill="white"/>)" << '\n';
  }

  double sx(double x) const { return kLeft + (x - x0_) / (x1_ - x0_) * (kWidth - kLeft - kRight); }
  double sy(double y) const { return kHeight - kBottom - (y - y0_) / (y1_ - y0_) * (kHeight - kTop - kBottom); }
  double y_lo() const { return y0_; }
  double y_hi() const { return y1_; }

  void axes(const std::string& xlabel, const std::string& ylabel, int x_digits, int y_digits) {
    const double left = sx(x0_), right = sx(x1_), bottom = sy(y0_), top = sy(y1_);
    out_ << "<g stroke=\"#999\" stroke-width=\"0.5\">\n";
    for (double t : ticks(y0_, y1_)) out_ << line(left, sy(t), right, sy(t)) << '\n';
    out_ << "</g>\n";
    out_ << R"(<rect class="frame" x=")" << fixed(left) << R"(" y=")" << fixed(top) << R"(" width=")" << fixed(right - left)
         << R"(" height=")" << fixed(bottom - top) << R"(" fill="none" stroke="black"/>)" << '\n';
    for (double t : ticks(x0_, x1_))
      out_ << text(sx(t), bottom + 16, fixed(t, x_digits), "middle") << '\n';
    for (double t : ticks(y0_, y1_)) out_ << text(left - 6, sy(t) + 4, fixed(t, y_digits), "end") << '\n';
    out_ << text((left + right) / 2, kHeight - 12, xlabel, "middle") << '\n';
    const std::string mid = fixed((top + bottom) / 2);
    out_ << "<text x=\"16\" y=\"" << mid << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << mid << ")\">"
         << escape(ylabel) << "</text>\n";
  }

  static std::string line(double xa, double ya, double xb, double yb) {
    return "<line x1=\"" + fixed(xa) + "\" y1=\"" + fixed(ya) + "\" x2=\"" + fixed(xb) + "\" y2=\"" + fixed(yb) + "\"/>";
  }

  static std::string text(double x, double y, const std::string& s, const char* anchor = "start") {
    return "<text x=\"" + fixed(x) + "\" y=\"" + fixed(y) + "\" text-anchor=\"" + anchor + "\">" + escape(s) + "</text>";
  }

  void raw(const std::string& s) { out_ << s << '\n'; }

  void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& style) {
    out_ << "<polyline fill=\"none\" " << style << " points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i)
      out_ << (i ? " " : "") << fixed(sx(pts[i].first)) << ',' << fixed(sy(pts[i].second));
    out_ << "\"/>\n";
  }

  void legend(std::size_t row, const std::string& color, const std::string& label, const std::string& dash = "") {
    const double x = kWidth - kRight + 12, y = kTop + 14 + 18 * static_cast<double>(row);
    out_ << "<line x1=\"" << fixed(x) << "\" y1=\"" << fixed(y - 4) << "\" x2=\"" << fixed(x + 22) << "\" y2=\""
         << fixed(y - 4) << "\" stroke=\"" << color << "\" stroke-width=\"2\"" << dash << "/>\n";
    out_ << text(x + 28, y, label) << '\n';
  }

  std::string finish() {
    out_ << "</svg>\n";
    return out_.str();
  }

 private:
  double x0_, x1_, y0_, y1_;
  std::ostringstream out_;
};

void grow(double& lo, double& hi, double v) {
  if (!std::isfinite(v)) return;
  lo = std::min(lo, v);
  hi = std::max(hi, v);
}

void pad(double& lo, double& hi) {
  const double span = hi - lo;
  const double m = span > 0 ? 0.05 * span : std::max(1.0, std::abs(lo) * 0.1);
  lo -= m;
  hi += m;
}

std::vector<std::pair<double, double>> series(const std::vector<long>& periods, const Eigen::VectorXd& v) {
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < periods.size(); ++i)
    pts.emplace_back(static_cast<double>(periods[i]), v(static_cast<Eigen::Index>(i)));
  return pts;
}

}  // namespace

std::string bounds_svg(const std::vector<SensitivityReport>& reports) {
  double lo = 0.0, hi = 0.0;
  for (const auto& r : reports) {
    grow(lo, hi, r.tau_hat);
    for (const auto& p : r.placebo)
      if (p.plottable) {
        grow(lo, hi, p.lo);
        grow(lo, hi, p.hi);
      }
  }
  pad(lo, hi);
  Canvas c(0.0, 1.0, lo, hi);

  // Zero-plausibility bands first so markers draw over them.
  for (std::size_t k = 0; k < reports.size(); ++k) {
    const auto& r = reports[k];
    if (r.placebo.empty()) continue;
    const double J = static_cast<double>(r.placebo.size());
    const double a = r.nu, b = std::min(1.0, r.nu + 1.0 / J);
    const std::string color = kColors[k % std::size(kColors)];
    c.raw("<rect class=\"zero-band\" x=\"" + fixed(c.sx(a)) + "\" y=\"" + fixed(c.sy(hi)) + "\" width=\"" +
          fixed(std::max(1.0, c.sx(b) - c.sx(a))) + "\" height=\"" + fixed(c.sy(lo) - c.sy(hi)) + "\" fill=\"" +
          (reports.size() == 1 ? std::string("#d62728") : color) + "\" fill-opacity=\"0.15\"/>");
  }
  c.axes("percentile rank of placebo misspecification error", "treatment effect bounds", 1, 1);
  c.raw("<g stroke=\"black\" stroke-width=\"1\">" + Canvas::line(c.sx(0), c.sy(0), c.sx(1), c.sy(0)) + "</g>");

  for (std::size_t k = 0; k < reports.size(); ++k) {
    const auto& r = reports[k];
    const std::string color = kColors[k % std::size(kColors)];
    c.raw("<g class=\"estimate\" stroke=\"" + color + "\" stroke-width=\"1.5\" stroke-dasharray=\"2,3\">" +
          Canvas::line(c.sx(0), c.sy(r.tau_hat), c.sx(1), c.sy(r.tau_hat)) + "</g>");
    std::string marks = "<g class=\"bounds\" stroke=\"" + color + "\" stroke-width=\"1.5\">";
    // Offset overlaid metrics slightly so the bars stay readable.
    const double shift = (static_cast<double>(k) - (static_cast<double>(reports.size()) - 1) / 2) * 3.0;
    for (const auto& p : r.placebo) {
      if (!p.plottable) continue;
      const double x = c.sx(p.percentile_rank) + shift;
      marks += Canvas::line(x, c.sy(p.lo), x, c.sy(p.hi));
      marks += Canvas::line(x - 3, c.sy(p.lo), x + 3, c.sy(p.lo));
      marks += Canvas::line(x - 3, c.sy(p.hi), x + 3, c.sy(p.hi));
    }
    c.raw(marks + "</g>");
    c.legend(k, color, std::string(metric_code(r.metric)) + " (nu=" + fixed(r.nu, 3) + ")");
  }
  return c.finish();
}

std::string coverage_svg(const std::vector<CoverageCurve>& curves) {
  Canvas c(0.0, 1.0, 0.0, 1.0);
  c.axes("percentile rank cutoff", "share of placebo units covering zero", 1, 1);
  c.polyline({{0.0, 0.0}, {1.0, 1.0}}, "class=\"diagonal\" stroke=\"black\" stroke-width=\"1\" stroke-dasharray=\"6,4\"");
  for (std::size_t k = 0; k < curves.size(); ++k) {
    const std::string color = kColors[k % std::size(kColors)];
    std::vector<std::pair<double, double>> pts;
    for (const auto& p : curves[k].points) pts.emplace_back(p.cutoff, p.coverage);
    c.polyline(pts, "class=\"coverage\" stroke=\"" + color + "\" stroke-width=\"2\"");
    c.legend(k, color, std::string(metric_code(curves[k].metric)));
  }
  return c.finish();
}

std::string envelope_svg(const LeaveUnitOut& r) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (Eigen::Index t = 0; t < r.observed.size(); ++t) {
    grow(lo, hi, r.observed(t));
    grow(lo, hi, r.band_lower(t));
    grow(lo, hi, r.band_upper(t));
  }
  pad(lo, hi);
  Canvas c(static_cast<double>(r.periods.front()), static_cast<double>(r.periods.back()), lo, hi);

  std::vector<std::pair<double, double>> band = series(r.periods, r.band_upper);
  const auto lower = series(r.periods, r.band_lower);
  band.insert(band.end(), lower.rbegin(), lower.rend());
  std::string poly = "<polygon class=\"envelope\" fill=\"#ff7f0e\" fill-opacity=\"0.25\" stroke=\"none\" points=\"";
  for (std::size_t i = 0; i < band.size(); ++i)
    poly += (i ? " " : "") + fixed(c.sx(band[i].first)) + "," + fixed(c.sy(band[i].second));
  c.raw(poly + "\"/>");
  c.axes("period", "outcome", 0, 1);
  for (const auto& run : r.runs)
    c.polyline(series(r.periods, run.trend), "stroke=\"#ff7f0e\" stroke-width=\"0.8\" stroke-opacity=\"0.6\"");
  c.polyline(series(r.periods, r.base.predicted_trend), "stroke=\"#ff7f0e\" stroke-width=\"2\"");
  c.polyline(series(r.periods, r.observed), "stroke=\"#1f77b4\" stroke-width=\"2\"");
  c.legend(0, "#1f77b4", r.unit);
  c.legend(1, "#ff7f0e", "synthetic");
  c.legend(2, "#ff7f0e", "leave-one-out", " stroke-opacity=\"0.5\"");
  return c.finish();
}

std::string backdate_svg(const BackdateResult& r, const Panel& panel) {
  const Eigen::VectorXd observed = panel.outcomes.row(static_cast<Eigen::Index>(panel.unit_index(r.unit))).transpose();
  const auto& predicted = r.fit_on_truncated.predicted_trend;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (Eigen::Index t = 0; t < observed.size(); ++t) {
    grow(lo, hi, observed(t));
    grow(lo, hi, predicted(t));
  }
  pad(lo, hi);
  Canvas c(static_cast<double>(panel.periods.front()), static_cast<double>(panel.periods.back()), lo, hi);
  c.axes("period", "outcome", 0, 1);
  const double first = static_cast<double>(r.validation_periods.front()) - 0.5;
  const double last = static_cast<double>(r.validation_periods.back()) + 0.5;
  c.raw("<g class=\"holdout\" stroke=\"black\" stroke-width=\"1\">" + Canvas::line(c.sx(first), c.sy(hi), c.sx(first), c.sy(lo)) +
        Canvas::line(c.sx(last), c.sy(hi), c.sx(last), c.sy(lo)) + "</g>");
  c.polyline(series(panel.periods, predicted), "stroke=\"#9467bd\" stroke-width=\"2\"");
  c.polyline(series(panel.periods, observed), "stroke=\"black\" stroke-width=\"2\"");
  c.legend(0, "black", r.unit);
  c.legend(1, "#9467bd", "backdated synthetic");
  return c.finish();
}

}  // namespace scsens
