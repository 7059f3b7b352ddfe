#include "tresca/plot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

namespace tresca {

namespace {

using Index = Eigen::Index;

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
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

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

// viridis-like ramp through five anchors
std::string colour(double s) {
  static const double anchors[5][3] = {
      {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}};
  s = std::clamp(s, 0.0, 1.0) * 4.0;
  const int k = std::min(int(s), 3);
  const double f = s - k;
  char buf[8];
  int rgb[3];
  for (int c = 0; c < 3; ++c)
    rgb[c] = int(std::lround(anchors[k][c] + f * (anchors[k + 1][c] - anchors[k][c])));
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
  return buf;
}

} // namespace

void write_heatmaps_svg(std::ostream& os, const std::vector<HeatmapPanel>& panels, double x_lo,
                        double x_hi, double y_lo, double y_hi, const std::string& x_label,
                        const std::string& y_label) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& p : panels)
    for (Index i = 0; i < p.values.size(); ++i)
      if (std::isfinite(p.values.data()[i])) {
        lo = std::min(lo, p.values.data()[i]);
        hi = std::max(hi, p.values.data()[i]);
      }
  if (!(hi > lo)) {
    lo = std::isfinite(lo) ? lo - 0.5 : 0.0;
    hi = lo + 1.0;
  }

  const int pw = 320, ph = 240, margin = 60, bar = 70;
  const int width = margin + int(panels.size()) * (pw + margin) + bar, height = ph + 2 * margin;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t k = 0; k < panels.size(); ++k) {
    const auto& v = panels[k].values;
    const int x0 = margin + int(k) * (pw + margin), y0 = margin;
    os << "<text x=\"" << x0 + pw / 2 << "\" y=\"" << y0 - 10 << "\" text-anchor=\"middle\">"
       << escape(panels[k].title) << "</text>\n";
    const double cw = double(pw) / double(std::max<Index>(v.cols(), 1));
    const double chh = double(ph) / double(std::max<Index>(v.rows(), 1));
    for (Index r = 0; r < v.rows(); ++r)
      for (Index c = 0; c < v.cols(); ++c) {
        const double val = v(r, c);
        const std::string fill = std::isfinite(val) ? colour((val - lo) / (hi - lo)) : "#cccccc";
        // row 0 at the bottom
        os << "<rect x=\"" << fmt(x0 + c * cw) << "\" y=\"" << fmt(y0 + ph - (r + 1) * chh)
           << "\" width=\"" << fmt(cw + 0.05) << "\" height=\"" << fmt(chh + 0.05) << "\" fill=\""
           << fill << "\"/>\n";
      }
    os << "<rect x=\"" << x0 << "\" y=\"" << y0 << "\" width=\"" << pw << "\" height=\"" << ph
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    os << "<text x=\"" << x0 << "\" y=\"" << y0 + ph + 16 << "\">" << fmt(x_lo) << "</text>\n";
    os << "<text x=\"" << x0 + pw << "\" y=\"" << y0 + ph + 16 << "\" text-anchor=\"end\">"
       << fmt(x_hi) << "</text>\n";
    os << "<text x=\"" << x0 + pw / 2 << "\" y=\"" << y0 + ph + 32 << "\" text-anchor=\"middle\">"
       << escape(x_label) << "</text>\n";
    os << "<text x=\"" << x0 - 4 << "\" y=\"" << y0 + ph << "\" text-anchor=\"end\">" << fmt(y_lo)
       << "</text>\n";
    os << "<text x=\"" << x0 - 4 << "\" y=\"" << y0 + 10 << "\" text-anchor=\"end\">" << fmt(y_hi)
       << "</text>\n";
    os << "<text transform=\"translate(" << x0 - 40 << "," << y0 + ph / 2
       << ") rotate(-90)\" text-anchor=\"middle\">" << escape(y_label) << "</text>\n";
  }
  // colour bar
  const int bx = width - bar + 10;
  for (int s = 0; s < 50; ++s)
    os << "<rect x=\"" << bx << "\" y=\"" << margin + ph - (s + 1) * ph / 50 << "\" width=\"14\" height=\""
       << ph / 50 + 1 << "\" fill=\"" << colour((s + 0.5) / 50.0) << "\"/>\n";
  os << "<text x=\"" << bx + 18 << "\" y=\"" << margin + ph << "\">" << fmt(lo) << "</text>\n";
  os << "<text x=\"" << bx + 18 << "\" y=\"" << margin + 10 << "\">" << fmt(hi) << "</text>\n";
  os << "</svg>\n";
}

void write_lines_svg(std::ostream& os, const std::vector<Series>& series, const std::string& title,
                     const std::string& x_label, const std::string& y_label, bool log_x) {
  const auto tx = [log_x](double x) { return log_x ? std::log10(x) : x; };
  double xl = std::numeric_limits<double>::infinity(), xh = -xl, yl = xl, yh = -xl;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.y[i]) || (log_x && !(s.x[i] > 0)))
        continue;
      xl = std::min(xl, tx(s.x[i]));
      xh = std::max(xh, tx(s.x[i]));
      yl = std::min(yl, s.y[i]);
      yh = std::max(yh, s.y[i]);
    }
  if (!(xh > xl)) {
    xl = std::isfinite(xl) ? xl - 0.5 : 0.0;
    xh = xl + 1.0;
  }
  if (!(yh > yl)) {
    yl = std::isfinite(yl) ? yl - 0.5 : 0.0;
    yh = yl + 1.0;
  }
  const double pad = 0.05 * (yh - yl);
  yl -= pad;
  yh += pad;

  const int width = 640, height = 400, ml = 70, mr = 150, mt = 40, mb = 50;
  const int pw = width - ml - mr, ph = height - mt - mb;
  const auto px = [&](double x) { return ml + (tx(x) - xl) / (xh - xl) * pw; };
  const auto py = [&](double y) { return mt + ph - (y - yl) / (yh - yl) * ph; };

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << ml + pw / 2 << "\" y=\"" << mt - 15 << "\" text-anchor=\"middle\">"
     << escape(title) << "</text>\n";
  os << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double fx = xl + (xh - xl) * k / 4.0, fy = yl + (yh - yl) * k / 4.0;
    const double gx = ml + pw * k / 4.0, gy = mt + ph - ph * k / 4.0;
    os << "<text x=\"" << fmt(gx) << "\" y=\"" << mt + ph + 16 << "\" text-anchor=\"middle\">"
       << (log_x ? "1e" + fmt(fx) : fmt(fx)) << "</text>\n";
    os << "<text x=\"" << ml - 6 << "\" y=\"" << fmt(gy + 4) << "\" text-anchor=\"end\">" << fmt(fy)
       << "</text>\n";
  }
  os << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 12 << "\" text-anchor=\"middle\">"
     << escape(x_label) << "</text>\n";
  os << "<text transform=\"translate(18," << mt + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
     << escape(y_label) << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* c = kPalette[k % std::size(kPalette)];
    std::string path;
    bool pen = false;
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.y[i]) || (log_x && !(s.x[i] > 0))) {
        pen = false;
        continue;
      }
      path += (pen ? " L" : " M") + fmt(px(s.x[i])) + " " + fmt(py(s.y[i]));
      pen = true;
      if (s.markers)
        os << "<circle cx=\"" << fmt(px(s.x[i])) << "\" cy=\"" << fmt(py(s.y[i]))
           << "\" r=\"3\" fill=\"" << c << "\"/>\n";
    }
    if (!path.empty())
      os << "<path d=\"" << path << "\" fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.5\"/>\n";
    os << "<text x=\"" << ml + pw + 10 << "\" y=\"" << mt + 14 + 18 * int(k) << "\" fill=\"" << c
       << "\">" << escape(s.label) << "</text>\n";
  }
  os << "</svg>\n";
}

} // namespace tresca
