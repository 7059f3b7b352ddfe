#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace tresca {

/// Side-by-side heatmaps on a shared colour scale; NaN cells are left grey.
/// Rows are the y axis (fault position), columns the x axis (time).
struct HeatmapPanel {
  std::string title;
  Eigen::MatrixXd values;
};

void write_heatmaps_svg(std::ostream& os, const std::vector<HeatmapPanel>& panels,
                        double x_lo, double x_hi, double y_lo, double y_hi,
                        const std::string& x_label, const std::string& y_label);

struct Series {
  std::string label;
  std::vector<double> x, y; ///< NaN y values break the line
  bool markers = false;
};

/// Line chart; log_x plots log10 of x (x must be positive).
void write_lines_svg(std::ostream& os, const std::vector<Series>& series, const std::string& title,
                     const std::string& x_label, const std::string& y_label, bool log_x = false);

} // namespace tresca
