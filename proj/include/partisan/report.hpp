#pragma once

// Static SVG charts. Every chart is written with a CSV sibling holding the
// plotted numbers. Output is a pure function of the spec.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "partisan/embed.hpp"
#include "partisan/error.hpp"

namespace partisan {

enum class ChartKind { kStackedBar, kLine, kScatter, kStackedArea, kBar };

struct Series {
  std::string name;
  std::vector<double> x;  // scatter, or numeric x for line/area; empty for category charts
  std::vector<double> y;
};

struct ChartSpec {
  ChartKind kind = ChartKind::kLine;
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<std::string> categories;  // bar / stacked bar
  std::vector<Series> series;
  std::map<std::string, std::string> color_map;
};

/// Fixed palette; fork addresses red, stayers blue.
inline const std::vector<std::string>& default_palette() {
  static const std::vector<std::string> p = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                             "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  return p;
}

inline const std::map<std::string, std::string>& label_colors() {
  static const std::map<std::string, std::string> m = {{"fork", "#d62728"}, {"stay", "#1f77b4"},
                                                       {"unanimous", "#2ca02c"}, {"low", "#bcbd22"},
                                                       {"medium", "#ff7f0e"}, {"high", "#d62728"}};
  return m;
}

namespace detail {

inline std::string num(double v, int precision = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  std::string s = buf;
  if (s == "-0.00" || s == "-0") s.erase(0, 1);
  return s;
}

inline std::string xml_escape(const std::string& s) {
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

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

inline void validate_chart(const ChartSpec& spec) {
  for (const auto& s : spec.series) {
    switch (spec.kind) {
      case ChartKind::kScatter:
        if (s.x.size() != s.y.size()) throw InconsistentSeries("scatter series '" + s.name + "' x/y length differ");
        break;
      case ChartKind::kBar:
      case ChartKind::kStackedBar:
        if (s.y.size() != spec.categories.size())
          throw InconsistentSeries("series '" + s.name + "' does not match category count");
        break;
      case ChartKind::kLine:
      case ChartKind::kStackedArea:
        if (!s.x.empty() && s.x.size() != s.y.size())
          throw InconsistentSeries("series '" + s.name + "' x/y length differ");
        if (spec.kind == ChartKind::kStackedArea && s.y.size() != spec.series.front().y.size())
          throw InconsistentSeries("stacked area series lengths differ");
        break;
    }
    for (double v : s.y)
      if (!std::isfinite(v)) throw InconsistentSeries("series '" + s.name + "' has non-finite values");
  }
}

struct Frame {
  static constexpr double kWidth = 800, kHeight = 480;
  static constexpr double kLeft = 70, kRight = 170, kTop = 44, kBottom = 64;
  double x0, x1, y0, y1;  // data bounds

  double px(double x) const { return kLeft + (x1 > x0 ? (x - x0) / (x1 - x0) : 0.5) * (kWidth - kLeft - kRight); }
  double py(double y) const {
    return kHeight - kBottom - (y1 > y0 ? (y - y0) / (y1 - y0) : 0.5) * (kHeight - kTop - kBottom);
  }
};

inline void expand(double& lo, double& hi) {
  if (!(lo < hi)) {
    lo -= 0.5;
    hi += 0.5;
  }
}

}  // namespace detail

inline std::string series_color(const ChartSpec& spec, std::size_t index) {
  const auto& name = spec.series[index].name;
  if (auto it = spec.color_map.find(name); it != spec.color_map.end()) return it->second;
  if (auto it = label_colors().find(name); it != label_colors().end()) return it->second;
  return default_palette()[index % default_palette().size()];
}

inline std::string render_chart_svg(const ChartSpec& spec) {
  using detail::Frame;
  using detail::num;
  detail::validate_chart(spec);

  bool empty = spec.series.empty() ||
               std::all_of(spec.series.begin(), spec.series.end(), [](const Series& s) { return s.y.empty(); });

  auto x_of = [&](const Series& s, std::size_t i) { return s.x.empty() ? static_cast<double>(i) : s.x[i]; };

  Frame f{0, 1, 0, 1};
  if (!empty) {
    f.x0 = f.y0 = INFINITY;
    f.x1 = f.y1 = -INFINITY;
    const bool stacked = spec.kind == ChartKind::kStackedBar || spec.kind == ChartKind::kStackedArea;
    const bool categorical = spec.kind == ChartKind::kBar || spec.kind == ChartKind::kStackedBar;
    if (stacked) {
      std::size_t len = spec.series.front().y.size();
      for (std::size_t i = 0; i < len; ++i) {
        double total = 0.0;
        for (const auto& s : spec.series) total += std::max(0.0, s.y[i]);
        f.y1 = std::max(f.y1, total);
      }
      f.y0 = 0.0;
    } else {
      for (const auto& s : spec.series)
        for (double v : s.y) f.y0 = std::min(f.y0, v), f.y1 = std::max(f.y1, v);
      if (spec.kind == ChartKind::kBar) f.y0 = std::min(f.y0, 0.0), f.y1 = std::max(f.y1, 0.0);
    }
    if (categorical) {
      f.x0 = -0.5;
      f.x1 = static_cast<double>(spec.categories.size()) - 0.5;
    } else {
      for (const auto& s : spec.series)
        for (std::size_t i = 0; i < s.y.size(); ++i) f.x0 = std::min(f.x0, x_of(s, i)), f.x1 = std::max(f.x1, x_of(s, i));
    }
    if (spec.kind == ChartKind::kScatter) {
      double pad_x = 0.05 * (f.x1 - f.x0), pad_y = 0.05 * (f.y1 - f.y0);
      f.x0 -= pad_x, f.x1 += pad_x, f.y0 -= pad_y, f.y1 += pad_y;
    }
    detail::expand(f.x0, f.x1);
    detail::expand(f.y0, f.y1);
  }

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << Frame::kWidth << "\" height=\"" << Frame::kHeight
    << "\" viewBox=\"0 0 " << Frame::kWidth << ' ' << Frame::kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << Frame::kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
    << detail::xml_escape(spec.title) << "</text>\n";

  // Axes, ticks and labels.
  const double ax_l = Frame::kLeft, ax_r = Frame::kWidth - Frame::kRight;
  const double ax_b = Frame::kHeight - Frame::kBottom, ax_t = Frame::kTop;
  o << "<g class=\"axes\" stroke=\"black\">\n";
  o << "<line x1=\"" << ax_l << "\" y1=\"" << ax_b << "\" x2=\"" << ax_r << "\" y2=\"" << ax_b << "\"/>\n";
  o << "<line x1=\"" << ax_l << "\" y1=\"" << ax_b << "\" x2=\"" << ax_l << "\" y2=\"" << ax_t << "\"/>\n";
  o << "</g>\n<g class=\"ticks\">\n";
  for (int t = 0; t <= 5; ++t) {
    double v = f.y0 + (f.y1 - f.y0) * t / 5.0;
    double y = f.py(v);
    o << "<line x1=\"" << num(ax_l - 4) << "\" y1=\"" << num(y) << "\" x2=\"" << num(ax_l) << "\" y2=\"" << num(y)
      << "\" stroke=\"black\"/><text x=\"" << num(ax_l - 6) << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">"
      << num(v) << "</text>\n";
  }
  if (spec.kind == ChartKind::kBar || spec.kind == ChartKind::kStackedBar) {
    for (std::size_t c = 0; c < spec.categories.size(); ++c) {
      double x = f.px(static_cast<double>(c));
      o << "<text x=\"" << num(x) << "\" y=\"" << num(ax_b + 16) << "\" text-anchor=\"middle\">"
        << detail::xml_escape(spec.categories[c]) << "</text>\n";
    }
  } else {
    for (int t = 0; t <= 5; ++t) {
      double v = f.x0 + (f.x1 - f.x0) * t / 5.0;
      double x = f.px(v);
      o << "<line x1=\"" << num(x) << "\" y1=\"" << num(ax_b) << "\" x2=\"" << num(x) << "\" y2=\"" << num(ax_b + 4)
        << "\" stroke=\"black\"/><text x=\"" << num(x) << "\" y=\"" << num(ax_b + 16) << "\" text-anchor=\"middle\">"
        << num(v) << "</text>\n";
    }
  }
  o << "</g>\n";
  o << "<text x=\"" << num((ax_l + ax_r) / 2) << "\" y=\"" << num(Frame::kHeight - 16)
    << "\" text-anchor=\"middle\">" << detail::xml_escape(spec.x_label) << "</text>\n";
  o << "<text x=\"18\" y=\"" << num((ax_t + ax_b) / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
    << num((ax_t + ax_b) / 2) << ")\">" << detail::xml_escape(spec.y_label) << "</text>\n";

  if (empty) {
    o << "<text x=\"" << num((ax_l + ax_r) / 2) << "\" y=\"" << num((ax_t + ax_b) / 2)
      << "\" text-anchor=\"middle\" fill=\"#7f7f7f\">no data</text>\n";
  } else {
    o << "<g class=\"data\">\n";
    const std::size_t ns = spec.series.size();
    switch (spec.kind) {
      case ChartKind::kBar: {
        double slot = (f.px(1) - f.px(0)) * 0.8;
        double bw = slot / static_cast<double>(ns);
        for (std::size_t s = 0; s < ns; ++s) {
          for (std::size_t c = 0; c < spec.categories.size(); ++c) {
            double x = f.px(static_cast<double>(c)) - slot / 2 + bw * static_cast<double>(s);
            double y0 = f.py(0.0), y1 = f.py(spec.series[s].y[c]);
            o << "<rect x=\"" << num(x) << "\" y=\"" << num(std::min(y0, y1)) << "\" width=\"" << num(bw)
              << "\" height=\"" << num(std::abs(y0 - y1)) << "\" fill=\"" << series_color(spec, s) << "\"/>\n";
          }
        }
        break;
      }
      case ChartKind::kStackedBar: {
        double bw = (f.px(1) - f.px(0)) * 0.7;
        for (std::size_t c = 0; c < spec.categories.size(); ++c) {
          double base = 0.0;
          for (std::size_t s = 0; s < ns; ++s) {
            double v = std::max(0.0, spec.series[s].y[c]);
            double ytop = f.py(base + v), ybot = f.py(base);
            o << "<rect x=\"" << num(f.px(static_cast<double>(c)) - bw / 2) << "\" y=\"" << num(ytop)
              << "\" width=\"" << num(bw) << "\" height=\"" << num(ybot - ytop) << "\" fill=\""
              << series_color(spec, s) << "\"/>\n";
            base += v;
          }
        }
        break;
      }
      case ChartKind::kLine: {
        for (std::size_t s = 0; s < ns; ++s) {
          const auto& ser = spec.series[s];
          o << "<polyline fill=\"none\" stroke-width=\"2\" stroke=\"" << series_color(spec, s) << "\" points=\"";
          for (std::size_t i = 0; i < ser.y.size(); ++i)
            o << (i ? " " : "") << num(f.px(x_of(ser, i))) << ',' << num(f.py(ser.y[i]));
          o << "\"/>\n";
        }
        break;
      }
      case ChartKind::kStackedArea: {
        const std::size_t len = spec.series.front().y.size();
        std::vector<double> lower(len, 0.0);
        for (std::size_t s = 0; s < ns; ++s) {
          const auto& ser = spec.series[s];
          std::vector<double> upper(len);
          for (std::size_t i = 0; i < len; ++i) upper[i] = lower[i] + std::max(0.0, ser.y[i]);
          o << "<polygon fill-opacity=\"0.85\" fill=\"" << series_color(spec, s) << "\" points=\"";
          for (std::size_t i = 0; i < len; ++i) o << (i ? " " : "") << num(f.px(x_of(ser, i))) << ',' << num(f.py(upper[i]));
          for (std::size_t i = len; i-- > 0;) o << ' ' << num(f.px(x_of(ser, i))) << ',' << num(f.py(lower[i]));
          o << "\"/>\n";
          lower = std::move(upper);
        }
        break;
      }
      case ChartKind::kScatter: {
        for (std::size_t s = 0; s < ns; ++s) {
          const auto& ser = spec.series[s];
          for (std::size_t i = 0; i < ser.y.size(); ++i)
            o << "<circle cx=\"" << num(f.px(ser.x[i])) << "\" cy=\"" << num(f.py(ser.y[i]))
              << "\" r=\"4\" fill-opacity=\"0.8\" fill=\"" << series_color(spec, s) << "\"/>\n";
        }
        break;
      }
    }
    o << "</g>\n";
  }

  // Legend.
  o << "<g class=\"legend\">\n";
  for (std::size_t s = 0; s < spec.series.size(); ++s) {
    double y = Frame::kTop + 18.0 * static_cast<double>(s);
    o << "<rect x=\"" << num(ax_r + 16) << "\" y=\"" << num(y) << "\" width=\"12\" height=\"12\" fill=\""
      << series_color(spec, s) << "\"/><text x=\"" << num(ax_r + 34) << "\" y=\"" << num(y + 10) << "\">"
      << detail::xml_escape(spec.series[s].name) << "</text>\n";
  }
  o << "</g>\n</svg>\n";
  return o.str();
}

/// CSV rendering of the plotted values.
inline std::string render_chart_csv(const ChartSpec& spec) {
  std::ostringstream o;
  auto full = [](double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return std::string(buf);
  };
  if (spec.kind == ChartKind::kScatter) {
    o << "series,x,y\n";
    for (const auto& s : spec.series)
      for (std::size_t i = 0; i < s.y.size(); ++i)
        o << detail::csv_field(s.name) << ',' << full(s.x[i]) << ',' << full(s.y[i]) << '\n';
    return o.str();
  }
  const bool categorical = spec.kind == ChartKind::kBar || spec.kind == ChartKind::kStackedBar;
  o << (categorical ? "category" : "x");
  for (const auto& s : spec.series) o << ',' << detail::csv_field(s.name);
  o << '\n';
  std::size_t len = 0;
  for (const auto& s : spec.series) len = std::max(len, s.y.size());
  for (std::size_t i = 0; i < len; ++i) {
    if (categorical) o << detail::csv_field(spec.categories[i]);
    else o << full(spec.series.empty() || spec.series.front().x.empty() ? static_cast<double>(i) : spec.series.front().x[i]);
    for (const auto& s : spec.series) o << ',' << (i < s.y.size() ? full(s.y[i]) : std::string());
    o << '\n';
  }
  return o.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

/// Writes `path` (SVG) and the same path with a .csv extension.
inline void render_chart(const ChartSpec& spec, const std::filesystem::path& path) {
  auto svg = render_chart_svg(spec);
  write_text_file(path, svg);
  auto csv_path = path;
  csv_path.replace_extension(".csv");
  write_text_file(csv_path, render_chart_csv(spec));
}

/// Scatter of an embedding with one series per distinct label, in label
/// order.
inline ChartSpec mds_scatter_spec(const Embedding& e, const std::vector<std::string>& labels, std::string title) {
  if (labels.size() != e.addresses.size())
    throw LabelMismatch(std::to_string(labels.size()) + " labels for " + std::to_string(e.addresses.size()) +
                        " embedded addresses");
  ChartSpec spec;
  spec.kind = ChartKind::kScatter;
  spec.title = std::move(title);
  spec.x_label = "MDS dimension 1";
  spec.y_label = "MDS dimension 2";
  std::set<std::string> distinct(labels.begin(), labels.end());
  for (const auto& l : distinct) {
    Series s;
    s.name = l;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] != l) continue;
      s.x.push_back(e.coords[i].x);
      s.y.push_back(e.coords[i].y);
    }
    spec.series.push_back(std::move(s));
  }
  return spec;
}

inline void render_mds_scatter(const Embedding& e, const std::vector<std::string>& labels,
                               const std::filesystem::path& path, std::string title = {}) {
  if (title.empty()) title = "Proposal " + std::to_string(e.proposal_id);
  render_chart(mds_scatter_spec(e, labels, std::move(title)), path);
}

}  // namespace partisan
