#ifndef SAMPLED_PMP_SVG_HPP
#define SAMPLED_PMP_SVG_HPP

#include <string>
#include <vector>

namespace sampled_pmp::svg {

/// Minimal line/marker plot rendered to a fixed 800x500 SVG document.
class Plot {
 public:
  Plot(std::string title, std::string x_label, std::string y_label);

  void add_curve(std::vector<double> x, std::vector<double> y, std::string color);
  /// Zero-order hold: value y[i] on [x[i], x[i+1]); x has one more entry than y.
  void add_steps(std::vector<double> edges, std::vector<double> y, std::string color);
  void add_crosses(std::vector<double> x, std::vector<double> y, std::string color);

  std::string render() const;

  static constexpr int kWidth = 800;
  static constexpr int kHeight = 500;

 private:
  struct Series {
    enum class Kind { kCurve, kSteps, kCrosses } kind;
    std::vector<double> x;
    std::vector<double> y;
    std::string color;
  };

  std::string title_, x_label_, y_label_;
  std::vector<Series> series_;
};

/// Roughly `target` evenly spaced round tick values covering [lo, hi].
std::vector<double> nice_ticks(double lo, double hi, int target = 6);

}  // namespace sampled_pmp::svg

#endif  // SAMPLED_PMP_SVG_HPP
