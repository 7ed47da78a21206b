#include "subjaudit/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "subjaudit/error.hpp"

namespace subjaudit {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 30.0;
constexpr double kTop = 50.0;
constexpr double kBottom = 80.0;

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", x);
  return buf;
}

std::string tick_label(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", x);
  return buf;
}

// Round step (1, 2 or 5 times a power of ten) giving about five ticks.
double nice_step(double range) {
  if (!(range > 0.0)) return 1.0;
  const double raw = range / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double f = raw / mag;
  return (f <= 1.0 ? 1.0 : f <= 2.0 ? 2.0 : f <= 5.0 ? 5.0 : 10.0) * mag;
}

void header(std::ostringstream& out, const std::string& title) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << num(kWidth / 2) << "\" y=\"28\" text-anchor=\"middle\" font-size=\"16\">"
      << xml_escape(title) << "</text>\n";
}

}  // namespace

const std::vector<std::string>& palette() {
  static const std::vector<std::string> colors{"#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
                                               "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac"};
  return colors;
}

std::string xml_escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (const char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string bar_chart_svg(const std::string& title, const std::string& y_label, std::span<const Bar> bars) {
  std::ostringstream out;
  header(out, title);
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  double top = 0.0;
  for (const auto& b : bars) {
    if (b.value && std::isfinite(*b.value)) top = std::max(top, *b.value);
  }
  const double step = nice_step(top > 0.0 ? top : 1.0);
  const double y_max = std::max(step, std::ceil(top / step) * step);
  const auto y_of = [&](double v) { return kTop + plot_h * (1.0 - v / y_max); };

  for (double t = 0.0; t <= y_max + step * 1e-9; t += step) {
    out << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(y_of(t)) << "\" x2=\"" << num(kLeft + plot_w)
        << "\" y2=\"" << num(y_of(t)) << "\" stroke=\"#dddddd\"/>\n";
    out << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(y_of(t) + 4) << "\" text-anchor=\"end\">"
        << tick_label(t) << "</text>\n";
  }
  out << "<text transform=\"translate(18," << num(kTop + plot_h / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
      << xml_escape(y_label) << "</text>\n";

  const double slot = bars.empty() ? plot_w : plot_w / static_cast<double>(bars.size());
  for (std::size_t i = 0; i < bars.size(); ++i) {
    const double x = kLeft + slot * static_cast<double>(i);
    const double cx = x + slot / 2;
    const auto& color = palette()[i % palette().size()];
    if (bars[i].value && std::isfinite(*bars[i].value)) {
      const double v = *bars[i].value;
      out << "<rect x=\"" << num(x + slot * 0.15) << "\" y=\"" << num(y_of(v)) << "\" width=\"" << num(slot * 0.7)
          << "\" height=\"" << num(kTop + plot_h - y_of(v)) << "\" fill=\"" << color << "\"/>\n";
      out << "<text x=\"" << num(cx) << "\" y=\"" << num(y_of(v) - 4) << "\" text-anchor=\"middle\">"
          << tick_label(v) << "</text>\n";
    } else {
      out << "<text x=\"" << num(cx) << "\" y=\"" << num(kTop + plot_h - 6) << "\" text-anchor=\"middle\">n/a</text>\n";
    }
    out << "<text x=\"" << num(cx) << "\" y=\"" << num(kTop + plot_h + 18) << "\" text-anchor=\"middle\">"
        << xml_escape(bars[i].label) << "</text>\n";
  }
  out << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kTop + plot_h) << "\" x2=\"" << num(kLeft + plot_w)
      << "\" y2=\"" << num(kTop + plot_h) << "\" stroke=\"black\"/>\n";
  out << "</svg>\n";
  return out.str();
}

std::string scatter_svg(const std::string& title, const DenseMatrix& points, std::span<const std::string> labels) {
  if (points.cols != 2 || labels.size() != points.rows) {
    throw InvalidArgument("scatter_svg: need n x 2 points and n labels");
  }
  std::map<std::string, std::size_t> color_of;
  for (const auto& l : labels) color_of.emplace(l, 0);
  std::size_t next = 0;
  for (auto& [l, c] : color_of) c = next++;

  std::ostringstream out;
  header(out, title);
  const double legend_w = 150.0;
  const double plot_w = kWidth - kLeft - kRight - legend_w;
  const double plot_h = kHeight - kTop - kBottom + 40.0;

  double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
  if (points.rows > 0) {
    x0 = x1 = points(0, 0);
    y0 = y1 = points(0, 1);
    for (std::size_t i = 1; i < points.rows; ++i) {
      x0 = std::min(x0, points(i, 0));
      x1 = std::max(x1, points(i, 0));
      y0 = std::min(y0, points(i, 1));
      y1 = std::max(y1, points(i, 1));
    }
  }
  const double sx = x1 > x0 ? plot_w / (x1 - x0) : 1.0;
  const double sy = y1 > y0 ? plot_h / (y1 - y0) : 1.0;

  out << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(plot_w) << "\" height=\""
      << num(plot_h) << "\" fill=\"none\" stroke=\"#999999\"/>\n";
  for (std::size_t i = 0; i < points.rows; ++i) {
    const double px = kLeft + (points(i, 0) - x0) * sx;
    const double py = kTop + plot_h - (points(i, 1) - y0) * sy;
    out << "<circle cx=\"" << num(px) << "\" cy=\"" << num(py) << "\" r=\"2\" fill=\""
        << palette()[color_of[labels[i]] % palette().size()] << "\" fill-opacity=\"0.7\"/>\n";
  }
  double ly = kTop + 10.0;
  const double lx = kLeft + plot_w + 20.0;
  for (const auto& [label, c] : color_of) {
    out << "<circle cx=\"" << num(lx) << "\" cy=\"" << num(ly) << "\" r=\"5\" fill=\""
        << palette()[c % palette().size()] << "\"/>\n";
    out << "<text x=\"" << num(lx + 10) << "\" y=\"" << num(ly + 4) << "\">" << xml_escape(label) << "</text>\n";
    ly += 18.0;
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace subjaudit
