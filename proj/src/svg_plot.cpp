#include "softwrist/svg_plot.hpp"

#include "softwrist/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace softwrist {

namespace {

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

std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

std::string px(double v) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(2);
  os << v;
  return os.str();
}

// Keeps first/last and the extreme values of each bucket so spikes survive.
std::vector<std::size_t> thin(const PlotSeries& s, int max_points) {
  const std::size_t n = std::min(s.x.size(), s.y.size());
  std::vector<std::size_t> idx;
  if (n <= static_cast<std::size_t>(std::max(max_points, 2))) {
    for (std::size_t i = 0; i < n; ++i) idx.push_back(i);
    return idx;
  }
  const std::size_t buckets = static_cast<std::size_t>(max_points / 2);
  for (std::size_t b = 0; b < buckets; ++b) {
    const std::size_t lo = b * n / buckets, hi = (b + 1) * n / buckets;
    std::size_t imin = lo, imax = lo;
    for (std::size_t i = lo; i < hi; ++i) {
      if (s.y[i] < s.y[imin]) imin = i;
      if (s.y[i] > s.y[imax]) imax = i;
    }
    idx.push_back(std::min(imin, imax));
    if (imin != imax) idx.push_back(std::max(imin, imax));
  }
  if (idx.front() != 0) idx.insert(idx.begin(), 0);
  if (idx.back() != n - 1) idx.push_back(n - 1);
  return idx;
}

}  // namespace

std::vector<double> nice_ticks(double lo, double hi, int target_count) {
  if (!(hi > lo)) return {lo};
  const double raw = (hi - lo) / std::max(1, target_count);
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 2.5, 5.0, 10.0}) {
    step = m * mag;
    if (step >= raw) break;
  }
  std::vector<double> ticks;
  for (double k = std::ceil(lo / step - 1e-9); k * step <= hi + 1e-9 * step; k += 1.0) {
    ticks.push_back(k == 0.0 ? 0.0 : k * step);
  }
  return ticks;
}

std::string render_svg(const PlotSpec& spec) {
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : spec.series) {
    const std::size_t n = std::min(s.x.size(), s.y.size());
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  }
  if (!std::isfinite(xmin)) xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
  if (xmax == xmin) xmax = xmin + 1.0;
  if (ymax == ymin) {
    const double pad = ymin == 0.0 ? 1.0 : 0.1 * std::abs(ymin);
    ymin -= pad;
    ymax += pad;
  } else {
    const double pad = 0.05 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;
  }

  const double left = 80, right = 20, top = 40, bottom = 55;
  const double w = spec.width - left - right, h = spec.height - top - bottom;
  auto sx = [&](double x) { return left + (x - xmin) / (xmax - xmin) * w; };
  auto sy = [&](double y) { return top + (1.0 - (y - ymin) / (ymax - ymin)) * h; };

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\"" << spec.height
     << "\" viewBox=\"0 0 " << spec.width << ' ' << spec.height << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << px(left + w / 2) << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
     << "font-size=\"15\">" << escape(spec.title) << "</text>\n";
  os << "<g font-family=\"sans-serif\" font-size=\"11\" stroke=\"none\" fill=\"#333\">\n";
  for (double t : nice_ticks(xmin, xmax)) {
    os << "<line x1=\"" << px(sx(t)) << "\" y1=\"" << px(top) << "\" x2=\"" << px(sx(t)) << "\" y2=\""
       << px(top + h) << "\" stroke=\"#e5e5e5\"/>\n";
    os << "<text x=\"" << px(sx(t)) << "\" y=\"" << px(top + h + 16) << "\" text-anchor=\"middle\">" << num(t)
       << "</text>\n";
  }
  for (double t : nice_ticks(ymin, ymax)) {
    os << "<line x1=\"" << px(left) << "\" y1=\"" << px(sy(t)) << "\" x2=\"" << px(left + w) << "\" y2=\""
       << px(sy(t)) << "\" stroke=\"#e5e5e5\"/>\n";
    os << "<text x=\"" << px(left - 6) << "\" y=\"" << px(sy(t) + 4) << "\" text-anchor=\"end\">" << num(t)
       << "</text>\n";
  }
  os << "</g>\n";
  os << "<rect x=\"" << px(left) << "\" y=\"" << px(top) << "\" width=\"" << px(w) << "\" height=\"" << px(h)
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  os << "<text x=\"" << px(left + w / 2) << "\" y=\"" << px(spec.height - 12.0)
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << escape(spec.x_label)
     << "</text>\n";
  os << "<text x=\"18\" y=\"" << px(top + h / 2) << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
     << "font-size=\"13\" transform=\"rotate(-90 18 " << px(top + h / 2) << ")\">" << escape(spec.y_label)
     << "</text>\n";

  double legend_y = top + 14;
  for (const auto& s : spec.series) {
    os << "<polyline fill=\"none\" stroke=\"" << escape(s.color) << "\" stroke-width=\"1.4\" points=\"";
    bool first = true;
    for (std::size_t i : thin(s, spec.max_points)) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      if (!first) os << ' ';
      os << px(sx(s.x[i])) << ',' << px(sy(s.y[i]));
      first = false;
    }
    os << "\"/>\n";
    if (!s.label.empty()) {
      os << "<line x1=\"" << px(left + w - 130) << "\" y1=\"" << px(legend_y - 4) << "\" x2=\""
         << px(left + w - 110) << "\" y2=\"" << px(legend_y - 4) << "\" stroke=\"" << escape(s.color)
         << "\" stroke-width=\"2\"/>\n";
      os << "<text x=\"" << px(left + w - 104) << "\" y=\"" << px(legend_y)
         << "\" font-family=\"sans-serif\" font-size=\"11\">" << escape(s.label) << "</text>\n";
      legend_y += 16;
    }
  }
  os << "</svg>\n";
  return os.str();
}

void write_svg(const PlotSpec& spec, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write plot " + path);
  out << render_svg(spec);
}

}  // namespace softwrist
