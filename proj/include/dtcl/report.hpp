#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "dtcl/sim.hpp"

namespace dtcl {

/// Shortest decimal that round-trips to `v`. Throws NumericError on NaN/Inf
/// so no non-finite cell is ever written.
std::string format_number(double v);

void write_windows_header(std::ostream& out);
void write_window_rows(std::ostream& out, std::span<const WindowRecord> records, std::uint64_t seed);

void write_summary_header(std::ostream& out);
void write_summary_row(std::ostream& out, const SimSummary& s);

struct SweepRow {
  double p_dr0 = 0.0;
  PolicyKind policy = PolicyKind::proposed;
  double mean_cost = 0.0;  // mean over seeds of the per-run mean cost
  double std_cost = 0.0;   // sample standard deviation over seeds
  int n_seeds = 0;
};

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);

struct ChartSeries {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

struct LineChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<ChartSeries> series;
  bool markers = false;
};

/// Self-contained SVG line chart.
std::string render_svg(const LineChart& chart);

}  // namespace dtcl
