#include "twkit/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "twkit/theme.hpp"

namespace twkit {

namespace {

using Attrs = std::vector<std::pair<std::string, std::string>>;

std::string escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
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

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", std::fabs(v) < 1e-9 ? 0.0 : v);
  return buf;
}

std::string fixed(double v, int decimals) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s = buf;
  if (s.starts_with("-") && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

class Svg {
 public:
  Svg(double width, double height, const PlotSpec& spec) : width_(width), height_(height) {
    const double shown_w = spec.width > 0.0 ? spec.width : width;
    const double shown_h = spec.height > 0.0 ? spec.height : height;
    out_ << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
         << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt2(shown_w) << "\" height=\"" << fmt2(shown_h)
         << "\" viewBox=\"0 0 " << fmt2(width) << " " << fmt2(height) << "\" font-family=\""
         << theme::kFontFamily << "\">\n";
    element("rect", {{"class", "background"}, {"x", "0"}, {"y", "0"}, {"width", fmt2(width)},
                     {"height", fmt2(height)}, {"fill", std::string(theme::kBackground)}});
  }

  double width() const { return width_; }
  double height() const { return height_; }

  void element(const std::string& tag, const Attrs& attrs) {
    indent();
    out_ << "<" << tag;
    write_attrs(attrs);
    out_ << "/>\n";
  }

  void text(const Attrs& attrs, const std::string& content) {
    indent();
    out_ << "<text";
    write_attrs(attrs);
    out_ << ">" << escape(content) << "</text>\n";
  }

  void open(const std::string& tag, const Attrs& attrs) {
    indent();
    out_ << "<" << tag;
    write_attrs(attrs);
    out_ << ">\n";
    stack_.push_back(tag);
  }

  void close() {
    const std::string tag = stack_.back();
    stack_.pop_back();
    indent();
    out_ << "</" << tag << ">\n";
  }

  std::string finish() {
    while (!stack_.empty()) close();
    out_ << "</svg>\n";
    return out_.str();
  }

 private:
  void indent() { out_ << std::string(2 * (stack_.size() + 1), ' '); }
  void write_attrs(const Attrs& attrs) {
    for (const auto& [k, v] : attrs) out_ << " " << k << "=\"" << escape(v) << "\"";
  }

  double width_;
  double height_;
  std::ostringstream out_;
  std::vector<std::string> stack_;
};

std::string palette_color(const PlotSpec& spec, std::size_t i) {
  if (!spec.palette.empty()) return spec.palette[i % spec.palette.size()];
  return std::string(theme::kPalette[i % theme::kPalette.size()]);
}

void title(Svg& svg, const PlotSpec& spec) {
  if (spec.title.empty()) return;
  svg.text({{"class", "title"},
            {"x", fmt2(svg.width() / 2.0)},
            {"y", fmt2(theme::kMargin + theme::kTitleBand / 2.0)},
            {"text-anchor", "middle"},
            {"dominant-baseline", "middle"},
            {"font-size", fmt2(theme::kTitleSize)},
            {"fill", std::string(theme::kInk)}},
           spec.title);
}

Attrs line_attrs(const std::string& cls, double x1, double y1, double x2, double y2, const std::string& stroke,
                 double width) {
  return {{"class", cls},         {"x1", fmt2(x1)},     {"y1", fmt2(y1)},
          {"x2", fmt2(x2)},       {"y2", fmt2(y2)},     {"stroke", stroke},
          {"stroke-width", fmt2(width)}};
}

struct PanelFrame {
  double x0, x1, y0, y1;  // plot area
  double lo, hi;          // value range
  double slot;

  double y(double v) const { return y1 - (v - lo) / (hi - lo) * (y1 - y0); }
  double cx(std::size_t c) const { return x0 + slot * (static_cast<double>(c) + 0.5); }
};

struct GridLayout {
  std::size_t columns = 1;
  std::size_t rows = 1;
  double width = 0.0;
  double height = 0.0;
};

GridLayout grid_layout(std::size_t panels, const PlotSpec& spec) {
  GridLayout g;
  g.columns = std::min<std::size_t>(static_cast<std::size_t>(theme::kGridColumns), panels);
  g.rows = (panels + g.columns - 1) / g.columns;
  g.width = 2 * theme::kMargin + static_cast<double>(g.columns) * theme::kPanelWidth;
  g.height = 2 * theme::kMargin + theme::kTitleBand + static_cast<double>(g.rows) * theme::kPanelHeight +
             (spec.x_label.empty() ? 0.0 : 20.0);
  return g;
}

PanelFrame draw_panel(Svg& svg, const GridLayout& g, std::size_t index, const std::string& attribute,
                      const std::vector<std::string>& classes, double lo, double hi, const PlotSpec& spec) {
  const double px = theme::kMargin + static_cast<double>(index % g.columns) * theme::kPanelWidth;
  const double py = theme::kMargin + theme::kTitleBand + static_cast<double>(index / g.columns) * theme::kPanelHeight;
  if (!(hi > lo)) {
    lo -= 1.0;
    hi += 1.0;
  }
  const double pad = 0.05 * (hi - lo);
  PanelFrame f{px + theme::kPanelAxisBand, px + theme::kPanelWidth - 10.0, py + theme::kPanelTitleBand,
               py + theme::kPanelHeight - theme::kPanelLabelBand, lo - pad, hi + pad, 0.0};
  f.slot = (f.x1 - f.x0) / static_cast<double>(classes.size());
  const std::string ink(theme::kInk);

  svg.text({{"class", "panel-title"},
            {"x", fmt2((f.x0 + f.x1) / 2.0)},
            {"y", fmt2(py + theme::kPanelTitleBand / 2.0)},
            {"text-anchor", "middle"},
            {"dominant-baseline", "middle"},
            {"font-size", fmt2(theme::kLabelSize)},
            {"fill", ink}},
           attribute);
  svg.element("rect", {{"class", "frame"},
                       {"x", fmt2(f.x0)},
                       {"y", fmt2(f.y0)},
                       {"width", fmt2(f.x1 - f.x0)},
                       {"height", fmt2(f.y1 - f.y0)},
                       {"fill", "none"},
                       {"stroke", ink},
                       {"stroke-width", "0.80"}});
  for (int t = 0; t <= 4; ++t) {
    const double v = f.lo + (f.hi - f.lo) * t / 4.0;
    const double y = f.y(v);
    svg.element("line", line_attrs("grid", f.x0, y, f.x1, y, std::string(theme::kGrid), 0.5));
    svg.text({{"class", "tick"},
              {"x", fmt2(f.x0 - 4.0)},
              {"y", fmt2(y)},
              {"text-anchor", "end"},
              {"dominant-baseline", "middle"},
              {"font-size", fmt2(theme::kTickSize)},
              {"fill", ink}},
             tick_label(v));
  }
  for (std::size_t c = 0; c < classes.size(); ++c) {
    svg.text({{"class", "class-label"},
              {"x", fmt2(f.cx(c))},
              {"y", fmt2(f.y1 + 14.0)},
              {"text-anchor", "middle"},
              {"font-size", fmt2(theme::kTickSize)},
              {"fill", ink}},
             classes[c]);
  }
  if (!spec.y_label.empty()) {
    const double x = px + 10.0;
    const double y = (f.y0 + f.y1) / 2.0;
    svg.text({{"class", "axis-label"},
              {"x", fmt2(x)},
              {"y", fmt2(y)},
              {"text-anchor", "middle"},
              {"transform", "rotate(-90 " + fmt2(x) + " " + fmt2(y) + ")"},
              {"font-size", fmt2(theme::kTickSize)},
              {"fill", ink}},
             spec.y_label);
  }
  return f;
}

void x_label(Svg& svg, const PlotSpec& spec) {
  if (spec.x_label.empty()) return;
  svg.text({{"class", "axis-label"},
            {"x", fmt2(svg.width() / 2.0)},
            {"y", fmt2(svg.height() - theme::kMargin)},
            {"text-anchor", "middle"},
            {"font-size", fmt2(theme::kLabelSize)},
            {"fill", std::string(theme::kInk)}},
           spec.x_label);
}

template <typename Panel>
std::vector<std::string> class_list(const std::vector<Panel>& panels) {
  if (panels.empty()) throw std::invalid_argument("render: no panels");
  std::vector<std::string> classes;
  for (const auto& c : panels.front().classes) classes.push_back(c.cls);
  if (classes.empty()) throw std::invalid_argument("render: panel without classes");
  for (const auto& p : panels) {
    std::vector<std::string> mine;
    for (const auto& c : p.classes) mine.push_back(c.cls);
    if (mine != classes) {
      throw std::invalid_argument("render: panel '" + p.attribute + "' lists different classes");
    }
  }
  return classes;
}

BoxStats box_from_json(const nlohmann::json& j) {
  BoxStats b;
  b.n = j.at("n").get<std::size_t>();
  b.min = j.at("min").get<double>();
  b.q1 = j.at("q1").get<double>();
  b.median = j.at("median").get<double>();
  b.q3 = j.at("q3").get<double>();
  b.max = j.at("max").get<double>();
  b.whisker_low = j.at("whisker_low").get<double>();
  b.whisker_high = j.at("whisker_high").get<double>();
  b.outliers = j.at("outliers").get<std::vector<double>>();
  return b;
}

ViolinStats violin_from_json(const nlohmann::json& j) {
  ViolinStats v;
  v.bandwidth = j.at("bandwidth").get<double>();
  v.min = j.at("min").get<double>();
  v.q1 = j.at("q1").get<double>();
  v.median = j.at("median").get<double>();
  v.q3 = j.at("q3").get<double>();
  v.max = j.at("max").get<double>();
  v.grid = j.at("grid").get<std::vector<double>>();
  v.density = j.at("density").get<std::vector<double>>();
  if (v.grid.size() != v.density.size() || v.grid.size() < 2) {
    throw DataError("stats: violin grid and density must have the same length >= 2");
  }
  return v;
}

}  // namespace

std::string to_string(PlotKind kind) {
  switch (kind) {
    case PlotKind::importance_bar: return "importance";
    case PlotKind::box_grid: return "box";
    case PlotKind::violin_grid: return "violin";
    case PlotKind::heatmap: return "heatmap";
  }
  return "?";
}

PlotKind plot_kind_from_string(const std::string& text) {
  if (text == "importance" || text == "importance_bar") return PlotKind::importance_bar;
  if (text == "box" || text == "box_grid") return PlotKind::box_grid;
  if (text == "violin" || text == "violin_grid") return PlotKind::violin_grid;
  if (text == "heatmap") return PlotKind::heatmap;
  throw std::invalid_argument("unknown plot kind '" + text + "'");
}

std::string fmt2(double v) { return fixed(v, 2); }

std::string heat_color(double v) {
  if (!std::isfinite(v)) v = 0.0;
  v = std::clamp(v, 0.0, 1.0);
  char buf[8];
  int rgb[3];
  for (int i = 0; i < 3; ++i) {
    rgb[i] = static_cast<int>(std::lround(theme::kHeatLow[i] + v * (theme::kHeatHigh[i] - theme::kHeatLow[i])));
  }
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
  return buf;
}

std::string render_importance_bar(const std::vector<AttributeImportance>& importances, const PlotSpec& spec) {
  if (importances.empty()) throw std::invalid_argument("importance plot: no attributes");
  for (const auto& a : importances) {
    if (!(a.weight >= 0.0) || !std::isfinite(a.weight)) {
      throw std::invalid_argument("importance plot: weight of '" + a.attribute + "' must be finite and >= 0");
    }
  }
  auto sorted = importances;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const AttributeImportance& a, const AttributeImportance& b) { return a.weight > b.weight; });
  const double width = theme::kBarWidth;
  const double top = theme::kMargin + theme::kTitleBand;
  const double height = top + static_cast<double>(sorted.size()) * theme::kBarRow + theme::kMargin +
                        (spec.x_label.empty() ? 0.0 : 20.0);
  const double left = theme::kMargin + theme::kBarLabelBand;
  const double plot_width = width - theme::kMargin - theme::kBarValueBand - left;
  const double max_weight = sorted.front().weight;
  const std::string ink(theme::kInk);

  Svg svg(width, height, spec);
  title(svg, spec);
  svg.element("line", line_attrs("axis", left, top, left, top + static_cast<double>(sorted.size()) * theme::kBarRow,
                                  ink, 1.0));
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double y = top + static_cast<double>(i) * theme::kBarRow;
    const double len = max_weight > 0.0 ? sorted[i].weight / max_weight * plot_width : 0.0;
    const double mid = y + theme::kBarRow / 2.0;
    svg.element("rect", {{"class", "bar"},
                         {"data-attribute", sorted[i].attribute},
                         {"x", fmt2(left)},
                         {"y", fmt2(mid - theme::kBarThickness / 2.0)},
                         {"width", fmt2(len)},
                         {"height", fmt2(theme::kBarThickness)},
                         {"fill", spec.palette.empty() ? std::string(theme::kBarColor) : spec.palette.front()}});
    svg.text({{"class", "label"},
              {"x", fmt2(left - 8.0)},
              {"y", fmt2(mid)},
              {"text-anchor", "end"},
              {"dominant-baseline", "middle"},
              {"font-size", fmt2(theme::kLabelSize)},
              {"fill", ink}},
             sorted[i].attribute);
    svg.text({{"class", "value"},
              {"x", fmt2(left + len + 6.0)},
              {"y", fmt2(mid)},
              {"dominant-baseline", "middle"},
              {"font-size", fmt2(theme::kTickSize)},
              {"fill", ink}},
             fixed(sorted[i].weight, 3));
  }
  x_label(svg, spec);
  return svg.finish();
}

std::string render_box_grid(const std::vector<BoxPanel>& panels, const PlotSpec& spec) {
  const auto classes = class_list(panels);
  const auto g = grid_layout(panels.size(), spec);
  Svg svg(g.width, g.height, spec);
  title(svg, spec);
  const std::string ink(theme::kInk);
  for (std::size_t p = 0; p < panels.size(); ++p) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& c : panels[p].classes) {
      if (!c.stats) continue;
      lo = std::min(lo, c.stats->min);
      hi = std::max(hi, c.stats->max);
    }
    if (!std::isfinite(lo)) {
      lo = 0.0;
      hi = 1.0;
    }
    svg.open("g", {{"class", "panel"}, {"data-attribute", panels[p].attribute}});
    const auto f = draw_panel(svg, g, p, panels[p].attribute, classes, lo, hi, spec);
    const double bw = f.slot * theme::kBoxFraction;
    for (std::size_t c = 0; c < classes.size(); ++c) {
      svg.open("g", {{"class", "box"}, {"data-class", classes[c]}});
      const auto& s = panels[p].classes[c].stats;
      if (s) {
        const std::string color = palette_color(spec, c);
        const double cx = f.cx(c);
        if (s->whisker_low < s->q1) {
          svg.element("line", line_attrs("whisker", cx, f.y(s->q1), cx, f.y(s->whisker_low), ink, 1.0));
          svg.element("line", line_attrs("cap", cx - bw / 4, f.y(s->whisker_low), cx + bw / 4, f.y(s->whisker_low), ink, 1.0));
        }
        if (s->whisker_high > s->q3) {
          svg.element("line", line_attrs("whisker", cx, f.y(s->q3), cx, f.y(s->whisker_high), ink, 1.0));
          svg.element("line", line_attrs("cap", cx - bw / 4, f.y(s->whisker_high), cx + bw / 4, f.y(s->whisker_high), ink, 1.0));
        }
        if (s->q3 > s->q1) {
          svg.element("rect", {{"class", "iqr-box"},
                               {"x", fmt2(cx - bw / 2)},
                               {"y", fmt2(f.y(s->q3))},
                               {"width", fmt2(bw)},
                               {"height", fmt2(f.y(s->q1) - f.y(s->q3))},
                               {"fill", color},
                               {"fill-opacity", "0.60"},
                               {"stroke", ink},
                               {"stroke-width", "1.00"}});
          svg.element("line", line_attrs("median", cx - bw / 2, f.y(s->median), cx + bw / 2, f.y(s->median), ink, 2.0));
        } else {
          svg.element("line", line_attrs("value-line", cx - bw / 2, f.y(s->median), cx + bw / 2, f.y(s->median), color, 2.5));
        }
        for (double o : s->outliers) {
          svg.element("circle", {{"class", "outlier"},
                                 {"cx", fmt2(cx)},
                                 {"cy", fmt2(f.y(o))},
                                 {"r", fmt2(theme::kOutlierRadius)},
                                 {"fill", "none"},
                                 {"stroke", color}});
        }
      }
      svg.close();
    }
    svg.close();
  }
  x_label(svg, spec);
  return svg.finish();
}

std::string render_violin_grid(const std::vector<ViolinPanel>& panels, const PlotSpec& spec) {
  const auto classes = class_list(panels);
  const auto g = grid_layout(panels.size(), spec);
  Svg svg(g.width, g.height, spec);
  title(svg, spec);
  const std::string ink(theme::kInk);
  for (std::size_t p = 0; p < panels.size(); ++p) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    double peak = 0.0;
    for (const auto& c : panels[p].classes) {
      if (!c.stats) continue;
      if (c.stats->grid.size() != c.stats->density.size() || c.stats->grid.empty()) {
        throw std::invalid_argument("violin plot: grid and density lengths differ");
      }
      lo = std::min(lo, c.stats->grid.front());
      hi = std::max(hi, c.stats->grid.back());
      for (double d : c.stats->density) {
        if (!(d >= 0.0)) throw std::invalid_argument("violin plot: negative density");
        peak = std::max(peak, d);
      }
    }
    if (!std::isfinite(lo)) {
      lo = 0.0;
      hi = 1.0;
    }
    svg.open("g", {{"class", "panel"}, {"data-attribute", panels[p].attribute}});
    const auto f = draw_panel(svg, g, p, panels[p].attribute, classes, lo, hi, spec);
    const double half = f.slot * theme::kViolinFraction / 2.0;
    for (std::size_t c = 0; c < classes.size(); ++c) {
      svg.open("g", {{"class", "violin"}, {"data-class", classes[c]}});
      const auto& s = panels[p].classes[c].stats;
      if (s) {
        const double cx = f.cx(c);
        std::string points;
        const std::size_t n = s->grid.size();
        auto add = [&](double x, double y) {
          if (!points.empty()) points += ' ';
          points += fmt2(x) + "," + fmt2(y);
        };
        for (std::size_t i = 0; i < n; ++i) {
          add(cx + (peak > 0.0 ? s->density[i] / peak * half : 0.0), f.y(s->grid[i]));
        }
        for (std::size_t i = n; i-- > 0;) {
          add(cx - (peak > 0.0 ? s->density[i] / peak * half : 0.0), f.y(s->grid[i]));
        }
        svg.element("polygon", {{"class", "density"},
                                {"points", points},
                                {"fill", palette_color(spec, c)},
                                {"fill-opacity", "0.70"},
                                {"stroke", ink},
                                {"stroke-width", "0.60"}});
        svg.element("line", line_attrs("range", cx, f.y(s->min), cx, f.y(s->max), ink, 1.0));
        svg.element("line", line_attrs("iqr", cx, f.y(s->q1), cx, f.y(s->q3), ink, theme::kIqrStroke));
        svg.element("circle", {{"class", "median"},
                               {"cx", fmt2(cx)},
                               {"cy", fmt2(f.y(s->median))},
                               {"r", fmt2(theme::kMedianRadius)},
                               {"fill", "#ffffff"},
                               {"stroke", ink},
                               {"stroke-width", "0.60"}});
      }
      svg.close();
    }
    svg.close();
  }
  x_label(svg, spec);
  return svg.finish();
}

std::string render_heatmap(const CorrelationMatrix& matrix, const PlotSpec& spec) {
  const auto n = static_cast<std::size_t>(matrix.values.rows());
  if (n == 0) throw std::invalid_argument("heatmap: empty matrix");
  if (matrix.values.cols() != matrix.values.rows()) throw std::invalid_argument("heatmap: matrix is not square");
  if (matrix.attributes.size() != n) throw std::invalid_argument("heatmap: attribute count does not match the matrix");
  const double x0 = theme::kMargin + theme::kHeatLabelBand;
  const double y0 = theme::kMargin + theme::kTitleBand;
  const double side = static_cast<double>(n) * theme::kCell;
  const double width = x0 + side + theme::kMargin;
  const double height = y0 + side + theme::kHeatLabelBand + theme::kMargin;
  const std::string ink(theme::kInk);
  Svg svg(width, height, spec);
  title(svg, spec);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double v = matrix.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      const double x = x0 + static_cast<double>(j) * theme::kCell;
      const double y = y0 + static_cast<double>(i) * theme::kCell;
      svg.element("rect", {{"class", "cell"},
                           {"data-row", std::to_string(i)},
                           {"data-col", std::to_string(j)},
                           {"x", fmt2(x)},
                           {"y", fmt2(y)},
                           {"width", fmt2(theme::kCell)},
                           {"height", fmt2(theme::kCell)},
                           {"fill", heat_color(v)},
                           {"stroke", "#ffffff"},
                           {"stroke-width", "1.00"}});
      svg.text({{"class", "value"},
                {"data-row", std::to_string(i)},
                {"data-col", std::to_string(j)},
                {"x", fmt2(x + theme::kCell / 2.0)},
                {"y", fmt2(y + theme::kCell / 2.0)},
                {"text-anchor", "middle"},
                {"dominant-baseline", "middle"},
                {"font-size", fmt2(theme::kLabelSize)},
                {"fill", v > theme::kHeatTextFlip ? "#ffffff" : ink}},
               fixed(v, 2));
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double mid = static_cast<double>(i) * theme::kCell + theme::kCell / 2.0;
    svg.text({{"class", "row-label"},
              {"x", fmt2(x0 - 6.0)},
              {"y", fmt2(y0 + mid)},
              {"text-anchor", "end"},
              {"dominant-baseline", "middle"},
              {"font-size", fmt2(theme::kLabelSize)},
              {"fill", ink}},
             matrix.attributes[i]);
    const double lx = x0 + mid;
    const double ly = y0 + side + 8.0;
    svg.text({{"class", "col-label"},
              {"x", fmt2(lx)},
              {"y", fmt2(ly)},
              {"text-anchor", "end"},
              {"transform", "rotate(-45 " + fmt2(lx) + " " + fmt2(ly) + ")"},
              {"font-size", fmt2(theme::kLabelSize)},
              {"fill", ink}},
             matrix.attributes[i]);
  }
  return svg.finish();
}

std::vector<BoxPanel> box_panels(const Table& table, const std::vector<std::string>& attributes) {
  std::vector<BoxPanel> out;
  for (const auto& a : attributes) {
    BoxPanel p{a, {}};
    for (auto& g : group_by_class(table, a)) {
      p.classes.push_back(ClassBox{g.cls, g.values.empty() ? std::nullopt : std::optional(box_stats(g.values))});
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<ViolinPanel> violin_panels(const Table& table, const std::vector<std::string>& attributes) {
  std::vector<ViolinPanel> out;
  for (const auto& a : attributes) {
    ViolinPanel p{a, {}};
    for (auto& g : group_by_class(table, a)) {
      p.classes.push_back(ClassViolin{g.cls, g.values.empty() ? std::nullopt : std::optional(kde(g.values))});
    }
    out.push_back(std::move(p));
  }
  return out;
}

nlohmann::json stats_to_json(const std::vector<BoxPanel>& boxes, const std::vector<ViolinPanel>& violins) {
  if (!boxes.empty() && !violins.empty() && boxes.size() != violins.size()) {
    throw std::invalid_argument("stats: box and violin panel counts differ");
  }
  nlohmann::json panels = nlohmann::json::array();
  const std::size_t n = std::max(boxes.size(), violins.size());
  for (std::size_t p = 0; p < n; ++p) {
    const std::string& attribute = boxes.empty() ? violins[p].attribute : boxes[p].attribute;
    const std::size_t k = boxes.empty() ? violins[p].classes.size() : boxes[p].classes.size();
    nlohmann::json classes = nlohmann::json::array();
    for (std::size_t c = 0; c < k; ++c) {
      nlohmann::json cj;
      cj["class"] = boxes.empty() ? violins[p].classes[c].cls : boxes[p].classes[c].cls;
      if (!boxes.empty()) {
        const auto& s = boxes[p].classes[c].stats;
        cj["box"] = s ? s->to_json() : nlohmann::json();
      }
      if (!violins.empty()) {
        const auto& s = violins[p].classes[c].stats;
        cj["violin"] = s ? s->to_json() : nlohmann::json();
      }
      classes.push_back(cj);
    }
    panels.push_back({{"attribute", attribute}, {"classes", classes}});
  }
  return {{"panels", panels}};
}

std::vector<BoxPanel> box_panels_from_json(const nlohmann::json& j) {
  std::vector<BoxPanel> out;
  for (const auto& pj : j.at("panels")) {
    BoxPanel p{pj.at("attribute").get<std::string>(), {}};
    for (const auto& cj : pj.at("classes")) {
      if (!cj.contains("box")) throw DataError("stats: panel '" + p.attribute + "' has no box statistics");
      const auto& b = cj.at("box");
      p.classes.push_back(ClassBox{cj.at("class").get<std::string>(), b.is_null() ? std::nullopt : std::optional(box_from_json(b))});
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<ViolinPanel> violin_panels_from_json(const nlohmann::json& j) {
  std::vector<ViolinPanel> out;
  for (const auto& pj : j.at("panels")) {
    ViolinPanel p{pj.at("attribute").get<std::string>(), {}};
    for (const auto& cj : pj.at("classes")) {
      if (!cj.contains("violin")) throw DataError("stats: panel '" + p.attribute + "' has no violin statistics");
      const auto& v = cj.at("violin");
      p.classes.push_back(
          ClassViolin{cj.at("class").get<std::string>(), v.is_null() ? std::nullopt : std::optional(violin_from_json(v))});
    }
    out.push_back(std::move(p));
  }
  return out;
}

nlohmann::json importance_to_json(const std::vector<AttributeImportance>& importances) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& a : importances) arr.push_back({{"attribute", a.attribute}, {"weight", a.weight}});
  return {{"importance", arr}};
}

std::vector<AttributeImportance> importance_from_json(const nlohmann::json& j) {
  const auto& arr = j.is_array() ? j : j.at("importance");
  std::vector<AttributeImportance> out;
  for (const auto& a : arr) out.push_back({a.at("attribute").get<std::string>(), a.at("weight").get<double>()});
  return out;
}

CorrelationMatrix correlation_from_json(const nlohmann::json& j) {
  CorrelationMatrix m;
  m.attributes = j.at("attributes").get<std::vector<std::string>>();
  const auto& rows = j.contains("values") ? j.at("values") : j.at("matrix");
  const auto n = static_cast<Eigen::Index>(rows.size());
  m.values = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = rows.at(static_cast<std::size_t>(i));
    if (static_cast<Eigen::Index>(row.size()) != n) throw DataError("correlation: matrix is not square");
    for (Eigen::Index k = 0; k < n; ++k) m.values(i, k) = row.at(static_cast<std::size_t>(k)).get<double>();
  }
  if (static_cast<Eigen::Index>(m.attributes.size()) != n) {
    throw DataError("correlation: attribute count does not match the matrix");
  }
  return m;
}

}  // namespace twkit
