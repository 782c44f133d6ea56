#pragma once

#include <optional>
#include <string>
#include <vector>

#include "twkit/analyze.hpp"
#include "twkit/classify.hpp"

namespace twkit {

enum class PlotKind { importance_bar, box_grid, violin_grid, heatmap };
std::string to_string(PlotKind kind);
PlotKind plot_kind_from_string(const std::string& text);

/// Title, axis labels and an optional canvas override. A zero width or
/// height keeps the layout's natural size; an empty palette uses the theme.
struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  double width = 0.0;
  double height = 0.0;
  std::vector<std::string> palette;
};

struct ClassBox {
  std::string cls;
  std::optional<BoxStats> stats;  // empty when the class has no values
};

struct BoxPanel {
  std::string attribute;
  std::vector<ClassBox> classes;
};

struct ClassViolin {
  std::string cls;
  std::optional<ViolinStats> stats;
};

struct ViolinPanel {
  std::string attribute;
  std::vector<ClassViolin> classes;
};

/// Horizontal bars, longest first, lengths proportional to weight.
std::string render_importance_bar(const std::vector<AttributeImportance>& importances, const PlotSpec& spec);

/// One panel per attribute; a class whose quartiles coincide is drawn as a
/// line instead of a box. Every panel must list the same classes.
std::string render_box_grid(const std::vector<BoxPanel>& panels, const PlotSpec& spec);

/// Mirrored density silhouettes scaled to a common maximum width per panel,
/// with an interquartile bar, a min-max line and a white median dot.
std::string render_violin_grid(const std::vector<ViolinPanel>& panels, const PlotSpec& spec);

/// n x n cells coloured from the theme colormap with 2-decimal value text.
std::string render_heatmap(const CorrelationMatrix& matrix, const PlotSpec& spec);

/// Colormap used by the heatmap, as "#rrggbb"; v is clamped to [0, 1].
std::string heat_color(double v);

/// Two-decimal fixed formatting used for every coordinate ("-0.00" -> "0.00").
std::string fmt2(double v);

/// Panels built from a table: box stats / KDE of each attribute per class.
std::vector<BoxPanel> box_panels(const Table& table, const std::vector<std::string>& attributes);
std::vector<ViolinPanel> violin_panels(const Table& table, const std::vector<std::string>& attributes);

/// JSON payloads accepted by the plot command; these mirror what the
/// importance, stats and correlate commands write. A stats document holds
/// per-class "box" and/or "violin" entries for each attribute.
nlohmann::json stats_to_json(const std::vector<BoxPanel>& boxes, const std::vector<ViolinPanel>& violins);
std::vector<BoxPanel> box_panels_from_json(const nlohmann::json& j);
std::vector<ViolinPanel> violin_panels_from_json(const nlohmann::json& j);
nlohmann::json importance_to_json(const std::vector<AttributeImportance>& importances);
std::vector<AttributeImportance> importance_from_json(const nlohmann::json& j);
CorrelationMatrix correlation_from_json(const nlohmann::json& j);

}  // namespace twkit
