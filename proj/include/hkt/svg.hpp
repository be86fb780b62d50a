#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace hkt::svg {

// Minimal self-contained SVG line chart; every plot in this project is a
// derived view of a CSV that carries the same series.
class LineChart {
 public:
  LineChart(std::string title, std::string x_label, std::string y_label)
      : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)) {}

  void add_series(std::string name, std::vector<double> x, std::vector<double> y);
  void write(const std::filesystem::path& path) const;

 private:
  struct Series {
    std::string name;
    std::vector<double> x, y;
  };
  std::string title_, x_label_, y_label_;
  std::vector<Series> series_;
};

}  // namespace hkt::svg
