#include "behavior_codec/svg.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "behavior_codec/error.hpp"
#include "behavior_codec/io.hpp"

namespace behavior_codec {

namespace {

constexpr const char* kTargetColor = "#1f77b4";
constexpr const char* kElicitedColor = "#2ca02c";

std::string escape(std::string_view text) {
  std::string out;
  for (char c : text) {
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

std::string header(int width, int height, const std::string& title) {
  std::string s = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n",
      width, height);
  s += fmt::format("<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"#ffffff\"/>\n", width, height);
  s += fmt::format("<text x=\"{:.2f}\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n", width / 2.0,
                   escape(title));
  return s;
}

// Roughly five round tick values covering [lo, hi].
std::vector<double> ticks(double lo, double hi) {
  const double span = hi - lo;
  if (span <= 0.0) return {lo};
  const double raw = span / 5.0;
  const double magnitude = std::pow(10.0, std::floor(std::log10(raw)));
  double step = magnitude;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * magnitude;
    if (step >= raw) break;
  }
  std::vector<double> out;
  for (double t = std::ceil(lo / step) * step; t <= hi + step * 1e-9; t += step) out.push_back(t);
  return out;
}

void require_finite(double v) {
  if (!std::isfinite(v)) throw Error(ErrorKind::PreconditionViolation, "plot data must be finite");
}

}  // namespace

std::string render_histogram(const EmpiricalDistribution& target, const EmpiricalDistribution& elicited,
                             const std::string& title) {
  if (target.empty() || elicited.empty()) throw Error(ErrorKind::EmptyData, "histogram needs two non-empty distributions");
  constexpr int width = 640;
  constexpr int height = 400;
  constexpr double left = 60.0;
  constexpr double right = 20.0;
  constexpr double top = 40.0;
  constexpr double bottom = 50.0;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;

  const int lo = std::min(target.support().front(), elicited.support().front());
  const int hi = std::max(target.support().back(), elicited.support().back());
  double peak = 0.0;
  for (double m : target.masses()) peak = std::max(peak, m);
  for (double m : elicited.masses()) peak = std::max(peak, m);
  const double slots = hi - lo + 1;
  const double bar_w = plot_w / slots;
  auto x_of = [&](double v) { return left + (v - lo) * bar_w; };
  auto y_of = [&](double m) { return top + plot_h * (1.0 - m / peak); };

  std::string s = header(width, height, title);
  s += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{2:.2f}\" y2=\"{1:.2f}\" stroke=\"#000000\"/>\n", left,
                   top + plot_h, left + plot_w);
  s += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" stroke=\"#000000\"/>\n", left,
                   top, top + plot_h);
  auto bars = [&](const EmpiricalDistribution& d, const char* color, const char* cls) {
    for (std::size_t i = 0; i < d.size(); ++i) {
      const double y = y_of(d.masses()[i]);
      s += fmt::format(
          "<rect class=\"{}\" x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"{}\" "
          "fill-opacity=\"0.55\"/>\n",
          cls, x_of(d.support()[i]), y, bar_w, top + plot_h - y, color);
    }
  };
  bars(target, kTargetColor, "target");
  bars(elicited, kElicitedColor, "elicited");
  for (double t : ticks(lo, hi)) {
    const double x = x_of(t) + bar_w / 2.0;
    s += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{}</text>\n", x, top + plot_h + 18.0,
                     format_number(t));
  }
  for (double t : ticks(0.0, peak)) {
    s += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\">{:.2f}</text>\n", left - 6.0, y_of(t) + 4.0,
                     t);
  }
  s += fmt::format("<text x=\"{:.2f}\" y=\"{}\" text-anchor=\"middle\">decision</text>\n", left + plot_w / 2.0,
                   height - 10);
  s += fmt::format("<rect x=\"{:.2f}\" y=\"30\" width=\"12\" height=\"12\" fill=\"{}\"/>\n", left + plot_w - 110.0,
                   kTargetColor);
  s += fmt::format("<text x=\"{:.2f}\" y=\"40\">target</text>\n", left + plot_w - 94.0);
  s += fmt::format("<rect x=\"{:.2f}\" y=\"48\" width=\"12\" height=\"12\" fill=\"{}\"/>\n", left + plot_w - 110.0,
                   kElicitedColor);
  s += fmt::format("<text x=\"{:.2f}\" y=\"58\">elicited</text>\n", left + plot_w - 94.0);
  s += "</svg>\n";
  return s;
}

void emit_histogram(const std::filesystem::path& path, const EmpiricalDistribution& target,
                    const EmpiricalDistribution& elicited, const std::string& title) {
  write_text_atomic(path, render_histogram(target, elicited, title));
}

std::string render_heatmap(std::span<const std::string> labels, const std::vector<std::vector<double>>& values,
                           const std::string& title) {
  const std::size_t n = labels.size();
  if (n == 0) throw Error(ErrorKind::EmptyData, "heatmap needs at least one row");
  if (values.size() != n) throw Error(ErrorKind::DimensionError, "heatmap needs one row per label");
  double lo = INFINITY;
  double hi = -INFINITY;
  for (const auto& row : values) {
    if (row.size() != n) throw Error(ErrorKind::DimensionError, "heatmap matrix must be square");
    for (double v : row) {
      if (std::isnan(v)) continue;
      require_finite(v);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  constexpr double cell = 60.0;
  constexpr double left = 110.0;
  constexpr double top = 110.0;
  const int width = static_cast<int>(left + cell * static_cast<double>(n) + 20.0);
  const int height = static_cast<int>(top + cell * static_cast<double>(n) + 20.0);
  std::string s = header(width, height, title);
  for (std::size_t r = 0; r < n; ++r) {
    s += fmt::format("<text class=\"row-label\" x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\">{}</text>\n", left - 6.0,
                     top + cell * (static_cast<double>(r) + 0.5) + 4.0, escape(labels[r]));
    const double cx = left + cell * (static_cast<double>(r) + 0.5);
    s += fmt::format(
        "<text class=\"col-label\" x=\"{0:.2f}\" y=\"{1:.2f}\" text-anchor=\"start\" "
        "transform=\"rotate(-45 {0:.2f} {1:.2f})\">{2}</text>\n",
        cx, top - 8.0, escape(labels[r]));
  }
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      const double v = values[r][c];
      std::string fill = "#cccccc";
      std::string text = "n/a";
      bool dark = false;
      if (!std::isnan(v)) {
        const double f = hi > lo ? (v - lo) / (hi - lo) : 1.0;
        const auto channel = [&](int from, int to) { return static_cast<int>(std::lround(from + (to - from) * f)); };
        fill = fmt::format("#{:02x}{:02x}{:02x}", channel(247, 8), channel(251, 48), channel(255, 107));
        text = fmt::format("{:.2f}", v);
        dark = f > 0.5;
      }
      const double x = left + cell * static_cast<double>(c);
      const double y = top + cell * static_cast<double>(r);
      s += fmt::format("<rect class=\"cell\" x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"{}\"/>\n",
                       x, y, cell, cell, fill);
      s += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\" fill=\"{}\">{}</text>\n", x + cell / 2.0,
                       y + cell / 2.0 + 4.0, dark ? "#ffffff" : "#000000", text);
    }
  }
  s += "</svg>\n";
  return s;
}

void emit_heatmap(const std::filesystem::path& path, std::span<const std::string> labels,
                  const std::vector<std::vector<double>>& values, const std::string& title) {
  write_text_atomic(path, render_heatmap(labels, values, title));
}

std::string render_bars(std::span<const std::string> labels, std::span<const double> values, const std::string& title) {
  if (labels.empty()) throw Error(ErrorKind::EmptyData, "bar chart needs at least one bar");
  if (labels.size() != values.size()) throw Error(ErrorKind::DimensionError, "one value per label is required");
  double extent = 0.0;
  for (double v : values) {
    require_finite(v);
    extent = std::max(extent, std::abs(v));
  }
  if (extent == 0.0) extent = 1.0;
  constexpr double row = 18.0;
  constexpr double label_w = 140.0;
  constexpr double half = 200.0;
  constexpr double top = 40.0;
  const int width = static_cast<int>(label_w + 2.0 * half + 80.0);
  const int height = static_cast<int>(top + row * static_cast<double>(labels.size()) + 20.0);
  const double axis = label_w + half;
  std::string s = header(width, height, title);
  s += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" stroke=\"#000000\"/>\n", axis,
                   top, top + row * static_cast<double>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double y = top + row * static_cast<double>(i);
    const double len = half * std::abs(values[i]) / extent;
    const double x = values[i] >= 0.0 ? axis : axis - len;
    s += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\">{}</text>\n", label_w - 6.0, y + 13.0,
                     escape(labels[i]));
    s += fmt::format("<rect class=\"bar\" x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"{}\"/>\n",
                     x, y + 3.0, len, row - 6.0, values[i] >= 0.0 ? kTargetColor : "#d62728");
    s += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\">{:.3f}</text>\n", label_w + 2.0 * half + 6.0, y + 13.0, values[i]);
  }
  s += "</svg>\n";
  return s;
}

void emit_bars(const std::filesystem::path& path, std::span<const std::string> labels, std::span<const double> values,
               const std::string& title) {
  write_text_atomic(path, render_bars(labels, values, title));
}

}  // namespace behavior_codec
