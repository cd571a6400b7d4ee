#include "sampled_pmp/svg.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <limits>
#include <sstream>

#include "sampled_pmp/io.hpp"

namespace sampled_pmp::svg {

namespace {

constexpr double kLeft = 70.0, kRight = 30.0, kTop = 40.0, kBottom = 60.0;

std::string fmt(double v) {
  char buf[48];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 2);
  return std::string(buf, res.ptr);
}

std::string tick_label(double v) {
  if (std::abs(v) < 1e-12) v = 0.0;
  return io::format_general(v);
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::vector<double> nice_ticks(double lo, double hi, int target) {
  if (!(hi > lo)) {
    lo -= 1.0;
    hi += 1.0;
  }
  const double raw = (hi - lo) / std::max(1, target);
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double norm = raw / mag;
  const double step = (norm < 1.5 ? 1.0 : norm < 3.0 ? 2.0 : norm < 7.0 ? 5.0 : 10.0) * mag;
  std::vector<double> out;
  for (double v = std::ceil(lo / step - 1e-9) * step; v <= hi + 1e-9 * step; v += step) {
    out.push_back(v);
  }
  return out;
}

Plot::Plot(std::string title, std::string x_label, std::string y_label)
    : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)) {}

void Plot::add_curve(std::vector<double> x, std::vector<double> y, std::string color) {
  series_.push_back({Series::Kind::kCurve, std::move(x), std::move(y), std::move(color)});
}

void Plot::add_steps(std::vector<double> edges, std::vector<double> y, std::string color) {
  series_.push_back({Series::Kind::kSteps, std::move(edges), std::move(y), std::move(color)});
}

void Plot::add_crosses(std::vector<double> x, std::vector<double> y, std::string color) {
  series_.push_back({Series::Kind::kCrosses, std::move(x), std::move(y), std::move(color)});
}

std::string Plot::render() const {
  double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
  double y_lo = x_lo, y_hi = -x_lo;
  for (const auto& s : series_) {
    for (double v : s.x) x_lo = std::min(x_lo, v), x_hi = std::max(x_hi, v);
    for (double v : s.y) y_lo = std::min(y_lo, v), y_hi = std::max(y_hi, v);
  }
  if (!std::isfinite(x_lo)) x_lo = 0.0, x_hi = 1.0;
  if (!std::isfinite(y_lo)) y_lo = -1.0, y_hi = 1.0;
  const double pad = 0.1 * std::max(y_hi - y_lo, 1e-3);
  y_lo -= pad;
  y_hi += pad;
  if (!(x_hi > x_lo)) x_hi = x_lo + 1.0;

  const double w = kWidth - kLeft - kRight, h = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x_lo) / (x_hi - x_lo) * w; };
  auto py = [&](double y) { return kTop + (y_hi - y) / (y_hi - y_lo) * h; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
     << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
     << "font-family=\"sans-serif\" font-size=\"16\">" << escape(title_) << "</text>\n";

  // Axes, ticks and grid.
  os << "<g stroke=\"black\" stroke-width=\"1\">\n";
  os << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(kTop + h) << "\" x2=\""
     << fmt(kLeft + w) << "\" y2=\"" << fmt(kTop + h) << "\"/>\n";
  os << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(kTop) << "\" x2=\"" << fmt(kLeft)
     << "\" y2=\"" << fmt(kTop + h) << "\"/>\n";
  os << "</g>\n<g font-family=\"sans-serif\" font-size=\"12\">\n";
  for (double t : nice_ticks(x_lo, x_hi)) {
    const double x = px(t);
    os << "<line x1=\"" << fmt(x) << "\" y1=\"" << fmt(kTop + h) << "\" x2=\"" << fmt(x)
       << "\" y2=\"" << fmt(kTop + h + 5) << "\" stroke=\"black\"/>";
    os << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(kTop + h + 20)
       << "\" text-anchor=\"middle\">" << tick_label(t) << "</text>\n";
  }
  for (double t : nice_ticks(y_lo, y_hi)) {
    const double y = py(t);
    os << "<line x1=\"" << fmt(kLeft - 5) << "\" y1=\"" << fmt(y) << "\" x2=\"" << fmt(kLeft)
       << "\" y2=\"" << fmt(y) << "\" stroke=\"black\"/>";
    os << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(y) << "\" x2=\"" << fmt(kLeft + w)
       << "\" y2=\"" << fmt(y) << "\" stroke=\"#dddddd\"/>";
    os << "<text x=\"" << fmt(kLeft - 8) << "\" y=\"" << fmt(y + 4)
       << "\" text-anchor=\"end\">" << tick_label(t) << "</text>\n";
  }
  os << "<text x=\"" << fmt(kLeft + w / 2) << "\" y=\"" << kHeight - 15
     << "\" text-anchor=\"middle\">" << escape(x_label_) << "</text>\n";
  os << "<text x=\"18\" y=\"" << fmt(kTop + h / 2) << "\" text-anchor=\"middle\" "
     << "transform=\"rotate(-90 18 " << fmt(kTop + h / 2) << ")\">" << escape(y_label_)
     << "</text>\n</g>\n";

  for (const auto& s : series_) {
    switch (s.kind) {
      case Series::Kind::kCurve: {
        os << "<polyline fill=\"none\" stroke=\"" << s.color
           << "\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
          os << (i ? " " : "") << fmt(px(s.x[i])) << ',' << fmt(py(s.y[i]));
        }
        os << "\"/>\n";
        break;
      }
      case Series::Kind::kSteps: {
        os << "<polyline fill=\"none\" stroke=\"" << s.color
           << "\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < s.y.size(); ++i) {
          os << (i ? " " : "") << fmt(px(s.x[i])) << ',' << fmt(py(s.y[i])) << ' '
             << fmt(px(s.x[i + 1])) << ',' << fmt(py(s.y[i]));
        }
        os << "\"/>\n";
        break;
      }
      case Series::Kind::kCrosses: {
        os << "<g stroke=\"" << s.color << "\" stroke-width=\"1.5\">\n";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
          const double x = px(s.x[i]), y = py(s.y[i]);
          os << "<path d=\"M" << fmt(x - 4) << ' ' << fmt(y - 4) << "L" << fmt(x + 4) << ' '
             << fmt(y + 4) << "M" << fmt(x - 4) << ' ' << fmt(y + 4) << "L" << fmt(x + 4)
             << ' ' << fmt(y - 4) << "\"/>\n";
        }
        os << "</g>\n";
        break;
      }
    }
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace sampled_pmp::svg
