#include "dtcl/report.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace dtcl {

std::string format_number(double v) {
  if (!std::isfinite(v)) throw NumericError("refusing to write a non-finite value");
  if (v == 0.0) return "0";  // no "-0"
  return fmt::format("{}", v);
}

void write_windows_header(std::ostream& out) {
  out << "window,policy,seed,i_t,m_t,rho,gamma,infer_cost,retrain_cost,acc_device,retrain_samples\n";
}

void write_window_rows(std::ostream& out, std::span<const WindowRecord> records, std::uint64_t seed) {
  std::string line;
  for (const auto& r : records) {
    line = fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", r.window, to_string(r.policy), seed,
                       r.i_t ? 1 : 0, r.m_t ? 1 : 0, format_number(r.decision.rho),
                       format_number(r.decision.gamma), format_number(r.infer_cost),
                       format_number(r.retrain_cost), format_number(r.acc_device),
                       format_number(r.retrain_samples));
    out << line;
  }
}

void write_summary_header(std::ostream& out) {
  out << "policy,seed,mean_cost,mean_gamma_first_half,mean_gamma_second_half,drift_count\n";
}

void write_summary_row(std::ostream& out, const SimSummary& s) {
  out << fmt::format("{},{},{},{},{},{}\n", to_string(s.policy), s.seed, format_number(s.mean_cost),
                     format_number(s.mean_gamma_first_half), format_number(s.mean_gamma_second_half),
                     s.drift_count);
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
  out << "p_dr0,policy,mean_cost,std_cost,n_seeds\n";
  for (const auto& r : rows)
    out << fmt::format("{},{},{},{},{}\n", format_number(r.p_dr0), to_string(r.policy),
                       format_number(r.mean_cost), format_number(r.std_cost), r.n_seeds);
}

namespace {

constexpr double kWidth = 720, kHeight = 440;
constexpr double kLeft = 80, kRight = 160, kTop = 40, kBottom = 60;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) { return fmt::format("{:.2f}", v); }

}  // namespace

std::string render_svg(const LineChart& chart) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : chart.series)
    for (auto [x, y] : s.points) {
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;

  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto sx = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
  auto sy = [&](double y) { return kTop + (1.0 - (y - y0) / (y1 - y0)) * ph; };

  std::string svg = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
      kWidth, kHeight, num(kLeft + pw / 2), escape(chart.title));
  svg += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
                     kLeft, kTop, pw, ph);
  for (int i = 0; i <= 4; ++i) {
    const double fx = x0 + (x1 - x0) * i / 4.0, fy = y0 + (y1 - y0) * i / 4.0;
    svg += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{:.4g}</text>\n", num(sx(fx)),
                       num(kTop + ph + 18), fx);
    svg += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{:.4g}</text>\n", num(kLeft - 6),
                       num(sy(fy) + 4), fy);
  }
  svg += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", num(kLeft + pw / 2),
                     num(kHeight - 16), escape(chart.x_label));
  svg += fmt::format(
      "<text x=\"18\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {})\">{}</text>\n",
      num(kTop + ph / 2), num(kTop + ph / 2), escape(chart.y_label));

  for (std::size_t k = 0; k < chart.series.size(); ++k) {
    const auto& s = chart.series[k];
    const char* color = kPalette[k % std::size(kPalette)];
    std::string pts;
    for (auto [x, y] : s.points) pts += num(sx(x)) + "," + num(sy(y)) + " ";
    if (!pts.empty()) pts.pop_back();
    svg += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
                       color, pts);
    if (chart.markers)
      for (auto [x, y] : s.points)
        svg += fmt::format("<circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"{}\"/>\n", num(sx(x)), num(sy(y)),
                           color);
    const double ly = kTop + 16 + 18.0 * k;
    svg += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\" stroke-width=\"2\"/>\n",
                       num(kLeft + pw + 12), num(ly), num(kLeft + pw + 36), num(ly), color);
    svg += fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", num(kLeft + pw + 42), num(ly + 4),
                       escape(s.name));
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace dtcl
