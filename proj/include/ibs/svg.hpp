#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <vector>

namespace ibs {

// Minimal static SVG plotting: scatter, polyline and reference-line layers
// on one auto-scaled axes box with ticks and a legend. Data is buffered and
// rendered on write().
class Figure {
 public:
  Figure(std::string title, std::string x_label, std::string y_label,
         int width = 760, int height = 560);

  // points: one row per sample, exactly 2 columns.
  void add_scatter(const Eigen::MatrixXd& points, const std::string& color,
                   const std::string& label, double radius = 2.5);
  void add_line(const std::vector<double>& xs, const std::vector<double>& ys,
                const std::string& color, const std::string& label,
                double stroke_width = 1.5);
  void add_vline(double x, const std::string& color, double stroke_width = 1.0);
  void add_hline(double y, const std::string& color, double stroke_width = 1.0);

  void write(const std::filesystem::path& path) const;

 private:
  struct Scatter {
    Eigen::MatrixXd points;
    std::string color, label;
    double radius;
  };
  struct Line {
    std::vector<double> xs, ys;
    std::string color, label;
    double stroke_width;
  };
  struct RefLine {
    bool vertical;
    double value;
    std::string color;
    double stroke_width;
  };

  std::string title_, x_label_, y_label_;
  int width_, height_;
  std::vector<Scatter> scatters_;
  std::vector<Line> lines_;
  std::vector<RefLine> ref_lines_;
};

// Grouped bar chart: one group per label, one bar per series within a group.
struct BarGroup {
  std::string label;
  std::vector<double> values;  // one per series
};

void write_bar_chart(const std::filesystem::path& path, const std::string& title,
                     const std::vector<std::string>& series_names,
                     const std::vector<std::string>& series_colors,
                     const std::vector<BarGroup>& groups);

}  // namespace ibs
