#include <fmt/core.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mcbits/harness.hpp"

namespace mcbits {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                    "#8c564b", "#e377c2", "#17becf", "#7f7f7f"};

double column_value(const BitrateReport& r, const std::string& column) {
  if (column == "net_bps") return r.net_bps;
  if (column == "total_bps") return r.total_bps;
  if (column == "total_first") return r.total_first;
  if (column == "ideal_bps") return r.ideal_bps;
  if (column == "entropy") return r.entropy;
  if (column == "pad_words") return static_cast<double>(r.pad_words);
  throw std::invalid_argument("unknown plot column '" + column + "'");
}

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

}  // namespace

std::string render_svg(const std::vector<BitrateReport>& rows, const PlotSpec& spec) {
  const double left = 72, right = 180, top = 44, bottom = 56;
  const double w = spec.width, h = spec.height;
  const double pw = w - left - right, ph = h - top - bottom;

  std::vector<std::string> coders;
  std::vector<double> entropies;
  double x_lo = INFINITY, x_hi = -INFINITY, y_lo = INFINITY, y_hi = -INFINITY;
  for (const auto& r : rows) {
    if (std::find(coders.begin(), coders.end(), r.coder) == coders.end()) coders.push_back(r.coder);
    if (std::find(entropies.begin(), entropies.end(), r.entropy) == entropies.end()) entropies.push_back(r.entropy);
    const double lx = std::log2(static_cast<double>(r.particles));
    const double y = column_value(r, spec.column);
    x_lo = std::min(x_lo, lx);
    x_hi = std::max(x_hi, lx);
    y_lo = std::min({y_lo, y, r.entropy});
    y_hi = std::max({y_hi, y, r.entropy});
  }
  if (rows.empty()) {
    column_value(BitrateReport{}, spec.column);
    x_lo = 0, x_hi = 1, y_lo = 0, y_hi = 1;
  }
  x_lo = std::floor(x_lo);
  x_hi = std::max(std::ceil(x_hi), x_lo + 1);
  if (y_hi - y_lo < 1e-9) y_lo -= 0.5, y_hi += 0.5;
  const double margin = 0.06 * (y_hi - y_lo);
  y_lo -= margin;
  y_hi += margin;

  auto px = [&](double lx) { return left + (lx - x_lo) / (x_hi - x_lo) * pw; };
  auto py = [&](double y) { return top + (y_hi - y) / (y_hi - y_lo) * ph; };

  std::string svg = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n"
      "<rect width=\"{0}\" height=\"{1}\" fill=\"white\"/>\n",
      spec.width, spec.height);
  if (!spec.title.empty())
    svg += fmt::format("<text x=\"{:.1f}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
                       left + pw / 2, escape(spec.title));
  svg += fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"none\" "
                     "stroke=\"black\"/>\n",
                     left, top, pw, ph);

  for (double k = x_lo; k <= x_hi + 1e-9; k += 1) {
    const double x = px(k);
    svg += fmt::format("<line x1=\"{0:.1f}\" y1=\"{1:.1f}\" x2=\"{0:.1f}\" y2=\"{2:.1f}\" stroke=\"#ddd\"/>\n", x,
                       top, top + ph);
    svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{}</text>\n", x, top + ph + 16,
                       static_cast<long long>(std::llround(std::exp2(k))));
  }
  for (int k = 0; k <= 5; ++k) {
    const double v = y_lo + (y_hi - y_lo) * k / 5.0;
    const double y = py(v);
    svg += fmt::format("<line x1=\"{0:.1f}\" y1=\"{1:.1f}\" x2=\"{2:.1f}\" y2=\"{1:.1f}\" stroke=\"#ddd\"/>\n", left,
                       y, left + pw);
    svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{:.3f}</text>\n", left - 6, y + 4, v);
  }
  svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">N</text>\n", left + pw / 2, h - 14);
  svg += fmt::format("<text x=\"16\" y=\"{0:.1f}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {0:.1f})\">{1}"
                     "</text>\n",
                     top + ph / 2, escape(spec.column));

  for (double e : entropies)
    svg += fmt::format("<line x1=\"{0:.1f}\" y1=\"{1:.1f}\" x2=\"{2:.1f}\" y2=\"{1:.1f}\" stroke=\"black\" "
                       "stroke-dasharray=\"6 4\"/>\n",
                       left, py(e), left + pw);

  for (std::size_t s = 0; s < coders.size(); ++s) {
    const char* color = kPalette[s % std::size(kPalette)];
    std::string points;
    std::string dots;
    for (const auto& r : rows) {
      if (r.coder != coders[s]) continue;
      const double x = px(std::log2(static_cast<double>(r.particles)));
      const double y = py(column_value(r, spec.column));
      points += fmt::format("{}{:.1f},{:.1f}", points.empty() ? "" : " ", x, y);
      dots += fmt::format("<circle cx=\"{:.1f}\" cy=\"{:.1f}\" r=\"3\" fill=\"{}\"/>\n", x, y, color);
    }
    svg += fmt::format("<g class=\"series\" data-coder=\"{}\">\n", escape(coders[s]));
    svg += fmt::format("<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>\n", points, color);
    svg += dots + "</g>\n";
    const double ly = top + 14 + 18 * static_cast<double>(s);
    svg += fmt::format("<line x1=\"{0:.1f}\" y1=\"{1:.1f}\" x2=\"{2:.1f}\" y2=\"{1:.1f}\" stroke=\"{3}\" "
                       "stroke-width=\"2\"/>\n",
                       left + pw + 14, ly, left + pw + 34, color);
    svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\">{}</text>\n", left + pw + 40, ly + 4, escape(coders[s]));
  }
  if (!entropies.empty()) {
    const double ly = top + 14 + 18 * static_cast<double>(coders.size());
    svg += fmt::format("<line x1=\"{0:.1f}\" y1=\"{1:.1f}\" x2=\"{2:.1f}\" y2=\"{1:.1f}\" stroke=\"black\" "
                       "stroke-dasharray=\"6 4\"/>\n",
                       left + pw + 14, ly, left + pw + 34);
    svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\">entropy</text>\n", left + pw + 40, ly + 4);
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace mcbits
