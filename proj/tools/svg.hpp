#pragma once

#include <string>
#include <vector>

namespace chainqfi::cli {

struct Series {
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  std::string label;
  double width = 1.5;
  bool dashed = false;
};

struct Markers {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> yerr;  // empty for none
  std::string color = "#000000";
  std::string label;
};

struct Area {
  std::vector<double> x;
  std::vector<double> y;  // filled down to y = 0 (or the axis floor)
  std::string color = "#00bcd4";
  double opacity = 0.35;
  std::string label;
};

struct Cell {
  double x0, x1, y0, y1, value;
};

/// Minimal deterministic line/area/heat-map panel.
class SvgPlot {
 public:
  SvgPlot(std::string title, std::string xlabel, std::string ylabel);

  void log_x(bool on = true) { log_x_ = on; }
  void log_y(bool on = true) { log_y_ = on; }
  void x_range(double lo, double hi);
  void y_range(double lo, double hi);

  void add(Series s) { series_.push_back(std::move(s)); }
  void add(Markers m) { markers_.push_back(std::move(m)); }
  void add(Area a) { areas_.push_back(std::move(a)); }
  void add_cells(std::vector<Cell> cells) { cells_ = std::move(cells); }
  void add_vline(double x, std::string label, std::string color = "#888888");
  void add_note(std::string text) { notes_.push_back(std::move(text)); }

  /// A generation timestamp comment is embedded unless deterministic.
  std::string render(bool deterministic) const;

 private:
  struct VLine {
    double x;
    std::string label;
    std::string color;
  };
  void autoscale(double& xlo, double& xhi, double& ylo, double& yhi) const;

  std::string title_, xlabel_, ylabel_;
  bool log_x_ = false, log_y_ = false;
  bool fixed_x_ = false, fixed_y_ = false;
  double xlo_ = 0, xhi_ = 1, ylo_ = 0, yhi_ = 1;
  std::vector<Series> series_;
  std::vector<Markers> markers_;
  std::vector<Area> areas_;
  std::vector<Cell> cells_;
  std::vector<VLine> vlines_;
  std::vector<std::string> notes_;
};

}  // namespace chainqfi::cli
