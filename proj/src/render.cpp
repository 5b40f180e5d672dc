#include "segflow/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>

#include "segflow/session_io.hpp"

namespace segflow::render {

namespace {

std::string num(double v) {
  if (v > -0.005 && v < 0.005) v = 0.0;
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      case '\'':
        out += "&apos;";
        break;
      default:
        out.push_back(c);
    }
  }
  return out;
}

struct Svg {
  std::ostringstream out;

  Svg(int width, int height) {
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width
        << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  }

  void rect(double x, double y, double w, double h, const std::string& fill,
            const std::string& extra = "") {
    out << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(w)
        << "\" height=\"" << num(h) << "\" fill=\"" << fill << "\"" << extra << "/>\n";
  }

  void line(double x1, double y1, double x2, double y2, const std::string& stroke,
            const std::string& extra = "") {
    out << "<line x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(x2)
        << "\" y2=\"" << num(y2) << "\" stroke=\"" << stroke << "\"" << extra << "/>\n";
  }

  void circle(double cx, double cy, double r, const std::string& fill) {
    out << "<circle cx=\"" << num(cx) << "\" cy=\"" << num(cy) << "\" r=\"" << num(r)
        << "\" fill=\"" << fill << "\"/>\n";
  }

  void diamond(double cx, double cy, double r, const std::string& fill) {
    out << "<polygon points=\"" << num(cx) << "," << num(cy - r) << " " << num(cx + r) << ","
        << num(cy) << " " << num(cx) << "," << num(cy + r) << " " << num(cx - r) << ","
        << num(cy) << "\" fill=\"" << fill << "\"/>\n";
  }

  void text(double x, double y, const std::string& content, double size,
            const std::string& fill = "black", const std::string& extra = "") {
    out << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" font-size=\"" << num(size)
        << "\" font-family=\"monospace\" fill=\"" << fill << "\"" << extra << ">"
        << xml_escape(content) << "</text>\n";
  }

  void path(const std::string& d, const std::string& stroke, const std::string& extra = "") {
    out << "<path d=\"" << d << "\" fill=\"none\" stroke=\"" << stroke << "\"" << extra
        << "/>\n";
  }

  std::string finish() {
    out << "</svg>\n";
    return out.str();
  }
};

// Rebuilds the target text to map each keystroke to the word-token index its
// cursor sits in at that moment.
std::vector<int64_t> target_tokens(const SessionLog& s, int64_t& max_token) {
  std::vector<int64_t> tokens;
  tokens.reserve(s.keys.size());
  std::u32string buffer;
  max_token = 0;
  for (const auto& k : s.keys) {
    const std::size_t pos = std::min<std::size_t>(static_cast<std::size_t>(std::max<int64_t>(
                                                      k.cursor, 0)),
                                                  buffer.size());
    int64_t token = 0;
    for (std::size_t i = 0; i < pos; ++i)
      if (buffer[i] == U'_') ++token;
    tokens.push_back(token);
    max_token = std::max(max_token, token);
    const std::u32string chars = utf8_decode(k.text);
    if (k.kind == KeyKind::insertion) {
      buffer.insert(pos, chars);
    } else {
      buffer.erase(pos, std::min(chars.size(), buffer.size() - pos));
    }
  }
  return tokens;
}

std::string first_char_utf8(const std::string& text) {
  const std::u32string cps = utf8_decode(text);
  if (cps.empty()) return "?";
  return utf8_encode(cps.substr(0, 1));
}

}  // namespace

std::string render_progression_graph(const SessionLog& s, const seg::SegmentationTree& tree,
                                     const hof::StateTrack* track,
                                     std::span<const hof::ActivityUnit> aus,
                                     const GraphSpec& spec) {
  int64_t t0 = spec.t0;
  int64_t t1 = spec.t1;
  if (t0 == 0 && t1 == 0) {
    t0 = s.span_start();
    t1 = s.span_end();
  }
  if (t1 <= t0) throw std::invalid_argument("empty time range");

  std::map<std::string, std::string> au_palette;
  for (const auto t : {hof::AuType::t1, hof::AuType::t2, hof::AuType::t4, hof::AuType::t5,
                       hof::AuType::t6, hof::AuType::t8})
    au_palette[hof::au_code(t)] = hof::au_color(t);
  for (const auto& [code, color] : spec.au_colors) au_palette[code] = color;

  const double left = 70, right = 70, top = 26, bottom = 46;
  const double w = spec.width, h = spec.height;
  const double plot_w = w - left - right;
  const double hof_h = 22;                        // state letters + dashed line
  const double bar_h = 30;                        // segment / task / pause bars
  const double au_h = 18;                         // activity unit band
  const double token_top = top + hof_h + bar_h + 8;
  const double token_bottom = h - bottom - au_h - 8;

  const auto x_of = [&](int64_t t) {
    return left + (static_cast<double>(t - t0) / static_cast<double>(t1 - t0)) * plot_w;
  };
  const auto in_range = [&](int64_t t) { return t >= t0 && t <= t1; };

  int64_t max_tt = 0;
  const std::vector<int64_t> tt_token = target_tokens(s, max_tt);
  int64_t max_st = 0;
  for (const auto& f : s.fixations)
    if (f.window == GazeWindow::source) max_st = std::max(max_st, f.token_index);

  const auto y_token = [&](int64_t token, int64_t max_token) {
    const double span = token_bottom - token_top;
    if (max_token <= 0) return token_bottom - span / 2;
    return token_bottom -
           (static_cast<double>(token) / static_cast<double>(max_token)) * span;
  };

  Svg svg(spec.width, spec.height);
  svg.rect(0, 0, w, h, "white");

  // Frame and x axis.
  svg.line(left, token_top - 4, left, h - bottom, "#888");
  svg.line(w - right, token_top - 4, w - right, h - bottom, "#888");
  svg.line(left, h - bottom, w - right, h - bottom, "#444");
  for (int i = 0; i <= 5; ++i) {
    const int64_t t = t0 + (t1 - t0) * i / 5;
    const double x = x_of(t);
    svg.line(x, h - bottom, x, h - bottom + 4, "#444");
    svg.text(x - 14, h - bottom + 16, std::to_string(t), spec.font_size, "#444");
  }
  svg.text(left + plot_w / 2 - 10, h - 8, "ms", spec.font_size + 1, "#444");
  svg.text(6, token_top - 10, "ST", spec.font_size, "#1f5fbf");
  svg.text(w - right + 28, token_top - 10, "TT", spec.font_size, "#2a7d2a");

  // Alignment arcs between the token axes.
  for (const auto& [st, tt] : spec.alignments) {
    svg.line(left, y_token(st, max_st), w - right, y_token(tt, max_tt), "#dddddd",
             " stroke-width=\"0.6\"");
  }

  // State letters above a dashed line.
  if (spec.layers.hof_bands && track != nullptr) {
    const double band_y = top + hof_h;
    svg.line(left, band_y, w - right, band_y, "#333", " stroke-dasharray=\"6,4\"");
    for (const auto& r : track->regions) {
      const int64_t a = std::max(r.start_ms, t0);
      const int64_t b = std::min(r.end_ms, t1);
      if (b <= a) continue;
      svg.line(x_of(a), band_y - 6, x_of(a), band_y + 4, "#333");
      svg.text((x_of(a) + x_of(b)) / 2 - 3, band_y - 6, std::string(1, hof_letter(r.state)),
               spec.font_size + 2, "#333", " font-weight=\"bold\"");
    }
  }

  // Segment bars, pause boxes, task bars.
  const double seg_y = top + hof_h + 6;
  if (spec.layers.tsp_boxes) {
    for (const auto& seg : tree.segments) {
      if (!seg.preceding_pause_ms ||
          static_cast<double>(*seg.preceding_pause_ms) < tree.profile.tsp)
        continue;
      const int64_t a = std::max(seg.start_ms - *seg.preceding_pause_ms, t0);
      const int64_t b = std::min(seg.start_ms, t1);
      if (b <= a) continue;
      svg.rect(x_of(a), seg_y, x_of(b) - x_of(a), 9, "violet", " fill-opacity=\"0.6\"");
    }
  }
  if (spec.layers.segments) {
    for (const auto& seg : tree.segments) {
      const int64_t a = std::max(seg.start_ms, t0);
      const int64_t b = std::min(seg.end_ms, t1);
      if (b < a || seg.end_ms < t0 || seg.start_ms > t1) continue;
      svg.rect(x_of(a), seg_y, std::max(x_of(b) - x_of(a), 1.5), 9, "#9a9a9a");
    }
  }
  if (spec.layers.tasks) {
    for (const auto& task : tree.tasks) {
      const int64_t a = std::max(task.start_ms, t0);
      const int64_t b = std::min(task.end_ms, t1);
      if (b < a || task.end_ms < t0 || task.start_ms > t1) continue;
      svg.rect(x_of(a), seg_y + 12, std::max(x_of(b) - x_of(a), 1.5), 6, "#5a5a5a");
    }
  }

  // Keystrokes on target-token lanes.
  if (spec.layers.keystrokes) {
    for (std::size_t i = 0; i < s.keys.size(); ++i) {
      const auto& k = s.keys[i];
      if (!in_range(k.time_ms)) continue;
      const std::string fill = k.kind == KeyKind::insertion ? "black" : "red";
      svg.text(x_of(k.time_ms) - 2, y_token(tt_token[i], max_tt) + 3, first_char_utf8(k.text),
               spec.font_size, fill);
    }
  }

  // Fixations: source circles on the ST lanes, target diamonds on TT lanes.
  if (spec.layers.fixations) {
    for (const auto& f : s.fixations) {
      if (!in_range(f.time_ms)) continue;
      if (f.window == GazeWindow::source)
        svg.circle(x_of(f.time_ms), y_token(f.token_index, max_st), 2.6, "#1f5fbf");
      else
        svg.diamond(x_of(f.time_ms), y_token(f.token_index, max_tt), 3.0, "#2a7d2a");
    }
  }

  // Activity units.
  if (spec.layers.activity_units && !aus.empty()) {
    const double au_y = h - bottom - au_h;
    for (const auto& u : aus) {
      const int64_t a = std::max(u.start_ms, t0);
      const int64_t b = std::min(u.end_ms, t1);
      if (b <= a) continue;
      svg.rect(x_of(a), au_y, x_of(b) - x_of(a), au_h - 4, au_palette[hof::au_code(u.type)],
               " fill-opacity=\"0.8\"");
    }
  }

  return svg.finish();
}

std::string render_distribution(std::span<const DistSeries> series, DistKind kind,
                                const DistSpec& spec) {
  bool any = false;
  for (const auto& s : series)
    if (s.summary.count > 0) any = true;
  if (!any) throw std::invalid_argument("no data to render");

  static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                   "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  constexpr std::size_t kPaletteSize = sizeof kPalette / sizeof kPalette[0];

  const double left = 64, right = 24, top = 28, bottom = 48;
  const double w = spec.width, h = spec.height;
  const double plot_w = w - left - right;
  const double plot_h = h - top - bottom;

  double xmin = 0, xmax = 0;
  bool first = true;
  for (const auto& s : series) {
    if (s.summary.count == 0) continue;
    double lo = 0, hi = 0;
    if (kind == DistKind::cdf || s.summary.histogram.empty()) {
      lo = s.summary.cdf.front().x;
      hi = s.summary.cdf.back().x;
    } else {
      lo = s.summary.histogram.front().lo;
      hi = s.summary.histogram.back().hi;
    }
    if (!s.summary.kde.empty()) {
      lo = std::min(lo, s.summary.kde.front().x);
      hi = std::max(hi, s.summary.kde.back().x);
    }
    if (first) {
      xmin = lo;
      xmax = hi;
      first = false;
    } else {
      xmin = std::min(xmin, lo);
      xmax = std::max(xmax, hi);
    }
  }
  if (xmax <= xmin) {
    const double pad = std::max(1.0, std::abs(xmin) * 0.05);
    xmin -= pad;
    xmax += pad;
  }

  double ymax = 1.0;
  if (kind == DistKind::density) {
    ymax = 0.0;
    for (const auto& s : series) {
      if (s.summary.count == 0) continue;
      if (!s.summary.kde.empty()) {
        for (const auto& p : s.summary.kde) ymax = std::max(ymax, p.density);
      } else {
        for (const auto& b : s.summary.histogram) {
          const double width = b.hi - b.lo;
          if (width <= 0) continue;
          ymax = std::max(ymax, static_cast<double>(b.count) /
                                    (static_cast<double>(s.summary.count) * width));
        }
      }
    }
    if (ymax <= 0) ymax = 1.0;
    ymax *= 1.05;
  }

  const auto x_of = [&](double v) { return left + (v - xmin) / (xmax - xmin) * plot_w; };
  const auto y_of = [&](double p) { return top + plot_h - (p / ymax) * plot_h; };

  Svg svg(spec.width, spec.height);
  svg.rect(0, 0, w, h, "white");
  svg.line(left, top, left, top + plot_h, "#444");
  svg.line(left, top + plot_h, left + plot_w, top + plot_h, "#444");
  for (int i = 0; i <= 5; ++i) {
    const double v = xmin + (xmax - xmin) * i / 5;
    const double x = x_of(v);
    svg.line(x, top + plot_h, x, top + plot_h + 4, "#444");
    svg.text(x - 14, top + plot_h + 18, report::format_real(v, 4), spec.font_size, "#444");
    const double p = ymax * i / 5;
    const double y = y_of(p);
    svg.line(left - 4, y, left, y, "#444");
    svg.text(8, y + 3, report::format_real(p, 3), spec.font_size, "#444");
  }
  svg.text(left + plot_w / 2 - 10, h - 10, "ms", spec.font_size + 1, "#444");
  svg.text(10, top - 10, kind == DistKind::cdf ? "probability" : "density", spec.font_size + 1,
           "#444");

  std::size_t color_i = 0;
  double legend_y = top + 6;
  for (const auto& s : series) {
    const std::string color = kPalette[color_i % kPaletteSize];
    ++color_i;
    if (s.summary.count == 0) continue;

    if (kind == DistKind::cdf) {
      std::ostringstream d;
      d << "M" << num(x_of(xmin)) << " " << num(y_of(0));
      double prev_f = 0.0;
      for (const auto& p : s.summary.cdf) {
        d << " L" << num(x_of(p.x)) << " " << num(y_of(prev_f));
        d << " L" << num(x_of(p.x)) << " " << num(y_of(p.f));
        prev_f = p.f;
      }
      d << " L" << num(x_of(xmax)) << " " << num(y_of(prev_f));
      svg.path(d.str(), color, " stroke-width=\"1.6\"");
    } else if (!s.summary.kde.empty()) {
      std::ostringstream d;
      bool started = false;
      for (const auto& p : s.summary.kde) {
        d << (started ? " L" : "M") << num(x_of(p.x)) << " " << num(y_of(p.density));
        started = true;
      }
      svg.path(d.str(), color, " stroke-width=\"1.6\"");
    } else {
      for (const auto& b : s.summary.histogram) {
        const double width = b.hi - b.lo;
        if (width <= 0 || b.count == 0) continue;
        const double density =
            static_cast<double>(b.count) / (static_cast<double>(s.summary.count) * width);
        svg.rect(x_of(b.lo), y_of(density), x_of(b.hi) - x_of(b.lo), y_of(0) - y_of(density),
                 color, " fill-opacity=\"0.45\"");
      }
    }

    // Mean solid, median dotted.
    svg.line(x_of(s.summary.mean), top, x_of(s.summary.mean), top + plot_h, color,
             " stroke-width=\"1.2\"");
    svg.line(x_of(s.summary.median), top, x_of(s.summary.median), top + plot_h, color,
             " stroke-width=\"1.2\" stroke-dasharray=\"2,3\"");

    svg.line(left + plot_w - 130, legend_y, left + plot_w - 110, legend_y, color,
             " stroke-width=\"2\"");
    svg.text(left + plot_w - 104, legend_y + 3, s.label, spec.font_size, "#333");
    legend_y += 14;
  }

  return svg.finish();
}

std::vector<std::pair<int64_t, int64_t>> parse_alignment_pairs(const std::string& text) {
  std::vector<std::pair<int64_t, int64_t>> pairs;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#' || line == "st_token\ttt_token") continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos)
      throw io::ParseError(line_no, "expected 2 tab-separated fields");
    try {
      pairs.emplace_back(std::stoll(line.substr(0, tab)), std::stoll(line.substr(tab + 1)));
    } catch (const std::exception&) {
      throw io::ParseError(line_no, "bad token index");
    }
  }
  return pairs;
}

}  // namespace segflow::render
