#include "ibs/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "ibs/error.hpp"

namespace ibs {

namespace {

// %.3g tick labels; plenty for axis annotation.
std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

std::string coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void expand(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    if (lo > hi) {  // nothing plotted
      lo = 0.0;
      hi = 1.0;
    }
    if (lo == hi) {
      lo -= 0.5;
      hi += 0.5;
    }
    const double margin = 0.05 * (hi - lo);
    lo -= margin;
    hi += margin;
  }
};

const char* kTextStyle = "font-family='sans-serif'";

void xml_escape(std::ostream& out, const std::string& s) {
  for (char c : s) {
    switch (c) {
      case '&': out << "&amp;"; break;
      case '<': out << "&lt;"; break;
      case '>': out << "&gt;"; break;
      default: out << c;
    }
  }
}

}  // namespace

Figure::Figure(std::string title, std::string x_label, std::string y_label,
               int width, int height)
    : title_(std::move(title)),
      x_label_(std::move(x_label)),
      y_label_(std::move(y_label)),
      width_(width),
      height_(height) {}

void Figure::add_scatter(const Eigen::MatrixXd& points, const std::string& color,
                         const std::string& label, double radius) {
  if (points.cols() != 2) throw shape_error("scatter points must have 2 columns");
  scatters_.push_back({points, color, label, radius});
}

void Figure::add_line(const std::vector<double>& xs, const std::vector<double>& ys,
                      const std::string& color, const std::string& label,
                      double stroke_width) {
  if (xs.size() != ys.size()) throw shape_error("line coordinate counts differ");
  lines_.push_back({xs, ys, color, label, stroke_width});
}

void Figure::add_vline(double x, const std::string& color, double stroke_width) {
  ref_lines_.push_back({true, x, color, stroke_width});
}

void Figure::add_hline(double y, const std::string& color, double stroke_width) {
  ref_lines_.push_back({false, y, color, stroke_width});
}

void Figure::write(const std::filesystem::path& path) const {
  Range rx, ry;
  for (const Scatter& s : scatters_)
    for (Eigen::Index i = 0; i < s.points.rows(); ++i) {
      rx.expand(s.points(i, 0));
      ry.expand(s.points(i, 1));
    }
  for (const Line& l : lines_)
    for (std::size_t i = 0; i < l.xs.size(); ++i) {
      rx.expand(l.xs[i]);
      ry.expand(l.ys[i]);
    }
  for (const RefLine& r : ref_lines_)
    (r.vertical ? rx : ry).expand(r.value);
  rx.pad();
  ry.pad();

  const double ml = 64, mr = 18, mt = 40, mb = 48;  // margins
  const double pw = width_ - ml - mr, ph = height_ - mt - mb;
  auto px = [&](double x) { return ml + (x - rx.lo) / (rx.hi - rx.lo) * pw; };
  auto py = [&](double y) { return mt + (ry.hi - y) / (ry.hi - ry.lo) * ph; };

  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open " + path.string() + " for writing");

  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width_
      << "' height='" << height_ << "' viewBox='0 0 " << width_ << " "
      << height_ << "'>\n";
  out << "<rect width='" << width_ << "' height='" << height_
      << "' fill='white'/>\n";

  // Axes box and ticks.
  out << "<rect x='" << coord(ml) << "' y='" << coord(mt) << "' width='"
      << coord(pw) << "' height='" << coord(ph)
      << "' fill='none' stroke='#333333' stroke-width='1'/>\n";
  const int n_ticks = 5;
  for (int i = 0; i < n_ticks; ++i) {
    const double fx = rx.lo + (rx.hi - rx.lo) * i / (n_ticks - 1);
    const double fy = ry.lo + (ry.hi - ry.lo) * i / (n_ticks - 1);
    out << "<line x1='" << coord(px(fx)) << "' y1='" << coord(mt + ph)
        << "' x2='" << coord(px(fx)) << "' y2='" << coord(mt + ph + 5)
        << "' stroke='#333333'/>\n";
    out << "<text x='" << coord(px(fx)) << "' y='" << coord(mt + ph + 18)
        << "' font-size='11' text-anchor='middle' " << kTextStyle << ">"
        << tick_label(fx) << "</text>\n";
    out << "<line x1='" << coord(ml - 5) << "' y1='" << coord(py(fy))
        << "' x2='" << coord(ml) << "' y2='" << coord(py(fy))
        << "' stroke='#333333'/>\n";
    out << "<text x='" << coord(ml - 8) << "' y='" << coord(py(fy) + 4)
        << "' font-size='11' text-anchor='end' " << kTextStyle << ">"
        << tick_label(fy) << "</text>\n";
  }

  // Labels and title.
  out << "<text x='" << coord(ml + pw / 2) << "' y='" << coord(height_ - 10)
      << "' font-size='13' text-anchor='middle' " << kTextStyle << ">";
  xml_escape(out, x_label_);
  out << "</text>\n";
  out << "<text x='14' y='" << coord(mt + ph / 2)
      << "' font-size='13' text-anchor='middle' " << kTextStyle
      << " transform='rotate(-90 14 " << coord(mt + ph / 2) << ")'>";
  xml_escape(out, y_label_);
  out << "</text>\n";
  out << "<text x='" << coord(ml + pw / 2) << "' y='24' font-size='15' "
      << "text-anchor='middle' " << kTextStyle << ">";
  xml_escape(out, title_);
  out << "</text>\n";

  // Clip plotted content to the axes box.
  out << "<clipPath id='plot'><rect x='" << coord(ml) << "' y='" << coord(mt)
      << "' width='" << coord(pw) << "' height='" << coord(ph)
      << "'/></clipPath>\n<g clip-path='url(#plot)'>\n";

  for (const RefLine& r : ref_lines_) {
    if (r.vertical)
      out << "<line x1='" << coord(px(r.value)) << "' y1='" << coord(mt)
          << "' x2='" << coord(px(r.value)) << "' y2='" << coord(mt + ph);
    else
      out << "<line x1='" << coord(ml) << "' y1='" << coord(py(r.value))
          << "' x2='" << coord(ml + pw) << "' y2='" << coord(py(r.value));
    out << "' stroke='" << r.color << "' stroke-width='" << r.stroke_width
        << "' stroke-dasharray='5,3'/>\n";
  }

  for (const Line& l : lines_) {
    out << "<polyline fill='none' stroke='" << l.color << "' stroke-width='"
        << l.stroke_width << "' points='";
    for (std::size_t i = 0; i < l.xs.size(); ++i)
      out << coord(px(l.xs[i])) << ',' << coord(py(l.ys[i])) << ' ';
    out << "'/>\n";
  }

  for (const Scatter& s : scatters_) {
    out << "<g fill='" << s.color << "' fill-opacity='0.75'>\n";
    for (Eigen::Index i = 0; i < s.points.rows(); ++i)
      out << "<circle cx='" << coord(px(s.points(i, 0))) << "' cy='"
          << coord(py(s.points(i, 1))) << "' r='" << s.radius << "'/>\n";
    out << "</g>\n";
  }
  out << "</g>\n";

  // Legend for labeled layers, top-right corner.
  double ly = mt + 14;
  auto legend_entry = [&](const std::string& color, const std::string& label,
                          bool line) {
    if (label.empty()) return;
    const double lx = ml + pw - 150;
    if (line)
      out << "<line x1='" << coord(lx) << "' y1='" << coord(ly - 4) << "' x2='"
          << coord(lx + 16) << "' y2='" << coord(ly - 4) << "' stroke='"
          << color << "' stroke-width='2'/>\n";
    else
      out << "<circle cx='" << coord(lx + 8) << "' cy='" << coord(ly - 4)
          << "' r='4' fill='" << color << "'/>\n";
    out << "<text x='" << coord(lx + 22) << "' y='" << coord(ly)
        << "' font-size='12' " << kTextStyle << ">";
    xml_escape(out, label);
    out << "</text>\n";
    ly += 17;
  };
  for (const Scatter& s : scatters_) legend_entry(s.color, s.label, false);
  for (const Line& l : lines_) legend_entry(l.color, l.label, true);

  out << "</svg>\n";
  if (!out) throw io_error("write failed for " + path.string());
}

void write_bar_chart(const std::filesystem::path& path, const std::string& title,
                     const std::vector<std::string>& series_names,
                     const std::vector<std::string>& series_colors,
                     const std::vector<BarGroup>& groups) {
  if (series_names.size() != series_colors.size())
    throw config_error("series names and colors must pair up");
  for (const BarGroup& g : groups)
    if (g.values.size() != series_names.size())
      throw shape_error("bar group value count does not match series count");

  const int width = 900, height = 480;
  const double ml = 64, mr = 18, mt = 40, mb = 56;
  const double pw = width - ml - mr, ph = height - mt - mb;

  Range ry;
  ry.expand(0.0);
  for (const BarGroup& g : groups)
    for (double v : g.values) ry.expand(v);
  ry.pad();
  auto py = [&](double y) { return mt + (ry.hi - y) / (ry.hi - ry.lo) * ph; };

  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open " + path.string() + " for writing");

  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width
      << "' height='" << height << "' viewBox='0 0 " << width << " " << height
      << "'>\n<rect width='" << width << "' height='" << height
      << "' fill='white'/>\n";
  out << "<text x='" << coord(ml + pw / 2) << "' y='24' font-size='15' "
      << "text-anchor='middle' " << kTextStyle << ">";
  xml_escape(out, title);
  out << "</text>\n";

  const int n_ticks = 5;
  for (int i = 0; i < n_ticks; ++i) {
    const double fy = ry.lo + (ry.hi - ry.lo) * i / (n_ticks - 1);
    out << "<line x1='" << coord(ml - 5) << "' y1='" << coord(py(fy)) << "' x2='"
        << coord(ml + pw) << "' y2='" << coord(py(fy))
        << "' stroke='#dddddd'/>\n";
    out << "<text x='" << coord(ml - 8) << "' y='" << coord(py(fy) + 4)
        << "' font-size='11' text-anchor='end' " << kTextStyle << ">"
        << tick_label(fy) << "</text>\n";
  }
  out << "<line x1='" << coord(ml) << "' y1='" << coord(py(0.0)) << "' x2='"
      << coord(ml + pw) << "' y2='" << coord(py(0.0))
      << "' stroke='#333333'/>\n";

  const std::size_t n_groups = std::max<std::size_t>(groups.size(), 1);
  const std::size_t n_series = series_names.size();
  const double group_w = pw / static_cast<double>(n_groups);
  const double bar_w = 0.8 * group_w / std::max<std::size_t>(n_series, 1);
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    const double gx = ml + group_w * (gi + 0.1);
    for (std::size_t si = 0; si < n_series; ++si) {
      const double v = groups[gi].values[si];
      const double top = py(std::max(v, 0.0));
      const double bottom = py(std::min(v, 0.0));
      out << "<rect x='" << coord(gx + bar_w * si) << "' y='" << coord(top)
          << "' width='" << coord(bar_w) << "' height='"
          << coord(std::max(bottom - top, 0.5)) << "' fill='"
          << series_colors[si] << "'/>\n";
    }
    out << "<text x='" << coord(gx + 0.4 * group_w) << "' y='"
        << coord(mt + ph + 16) << "' font-size='10' text-anchor='middle' "
        << kTextStyle << ">";
    xml_escape(out, groups[gi].label);
    out << "</text>\n";
  }

  double lx = ml + 8;
  for (std::size_t si = 0; si < n_series; ++si) {
    out << "<rect x='" << coord(lx) << "' y='" << coord(mt + 4)
        << "' width='12' height='12' fill='" << series_colors[si] << "'/>\n";
    out << "<text x='" << coord(lx + 16) << "' y='" << coord(mt + 14)
        << "' font-size='12' " << kTextStyle << ">";
    xml_escape(out, series_names[si]);
    out << "</text>\n";
    lx += 20 + 8.0 * series_names[si].size();
  }

  out << "</svg>\n";
  if (!out) throw io_error("write failed for " + path.string());
}

}  // namespace ibs
