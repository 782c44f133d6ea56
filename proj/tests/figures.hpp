#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "twkit/render.hpp"

namespace twkit::check {

// Hand-made figure inputs shared by the rendering and acceptance suites.

inline BoxStats make_box(std::vector<double> values) { return box_stats(values); }

inline std::vector<BoxPanel> sample_box_panels() {
  return {
      BoxPanel{"height",
               {ClassBox{"RW", make_box({170, 172, 174, 175, 176, 178, 180, 200, 205})},
                ClassBox{"AW", make_box({181, 181, 181})},
                ClassBox{"CS", std::nullopt}}},
      BoxPanel{"robe_num",
               {ClassBox{"RW", make_box({1, 1, 2, 2, 2, 3})},
                ClassBox{"AW", make_box({0, 1, 1, 1, 2, 9})},
                ClassBox{"CS", make_box({2, 3})}}},
  };
}

inline ViolinStats gaussian_violin(double centre, double scale, std::size_t n = 41) {
  ViolinStats v;
  v.bandwidth = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = centre - 3.0 + 6.0 * static_cast<double>(i) / static_cast<double>(n - 1);
    v.grid.push_back(x);
    v.density.push_back(scale * std::exp(-0.5 * (x - centre) * (x - centre)));
  }
  v.min = centre - 2.0;
  v.q1 = centre - 0.7;
  v.median = centre;
  v.q3 = centre + 0.7;
  v.max = centre + 2.0;
  return v;
}

inline std::vector<ViolinPanel> sample_violin_panels() {
  std::vector<double> skewed{1.0, 1.2, 1.3, 1.5, 2.0, 2.2, 3.5, 6.0};
  return {ViolinPanel{"height",
                      {ClassViolin{"RW", gaussian_violin(0.0, 0.4)}, ClassViolin{"AW", gaussian_violin(0.5, 0.2)},
                       ClassViolin{"CS", kde(skewed, std::nullopt, 60)}}}};
}

inline CorrelationMatrix sample_matrix() {
  CorrelationMatrix m;
  m.attributes = {"corps", "position", "headgear", "hairstyle"};
  m.values.resize(4, 4);
  m.values << 1.0, 0.93, 0.21, 0.3, 0.93, 1.0, 0.12, 0.05, 0.21, 0.12, 1.0, 0.87, 0.3, 0.05, 0.87, 1.0;
  return m;
}

inline std::vector<AttributeImportance> sample_importance() {
  return {{"c_id", 0.03}, {"armor_type", 0.41}, {"headgear", 0.22}, {"height", 0.05},
          {"hairstyle", 0.17}, {"weapon", 0.12}};
}

struct GoldenFigure {
  std::string file;  // under tests/golden/
  std::string svg;
};

// One example per figure type, pinned byte for byte by tests/golden/.
inline std::vector<GoldenFigure> golden_figures() {
  return {
      {"importance.svg", render_importance_bar(sample_importance(), {"Attribute importance", "weight", "", 0, 0, {}})},
      {"box.svg", render_box_grid(sample_box_panels(), {"Per-class distributions", "", "value", 0, 0, {}})},
      {"violin.svg", render_violin_grid(sample_violin_panels(), {"Per-class densities", "", "", 0, 0, {}})},
      {"heatmap.svg", render_heatmap(sample_matrix(), {"Attribute association", "", "", 0, 0, {}})},
  };
}

}  // namespace twkit::check
