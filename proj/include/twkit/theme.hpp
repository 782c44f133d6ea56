#pragma once

#include <array>
#include <string_view>

// Layout constants and colours shared by every figure. Text is placed by
// anchor attributes only, so nothing here depends on font metrics.
namespace twkit::theme {

inline constexpr std::string_view kFontFamily = "DejaVu Sans, Arial, sans-serif";
inline constexpr double kTitleSize = 16.0;
inline constexpr double kLabelSize = 11.0;
inline constexpr double kTickSize = 9.0;

inline constexpr std::string_view kBackground = "#ffffff";
inline constexpr std::string_view kInk = "#222222";
inline constexpr std::string_view kGrid = "#dddddd";

// One colour per class, in label order; wraps around for longer lists.
inline constexpr std::array<std::string_view, 8> kPalette{"#4e79a7", "#f28e2b", "#e15759", "#76b7b2",
                                                         "#59a14f", "#edc948", "#b07aa1", "#9c755f"};

inline constexpr std::string_view kBarColor = "#4e79a7";

// Sequential heatmap colormap: value 0 maps to kHeatLow, 1 to kHeatHigh.
inline constexpr std::array<int, 3> kHeatLow{247, 251, 255};
inline constexpr std::array<int, 3> kHeatHigh{8, 48, 107};
inline constexpr double kHeatTextFlip = 0.55;  // white text above this value

inline constexpr double kMargin = 20.0;
inline constexpr double kTitleBand = 40.0;

// Importance bars
inline constexpr double kBarWidth = 720.0;
inline constexpr double kBarLabelBand = 150.0;
inline constexpr double kBarValueBand = 70.0;
inline constexpr double kBarRow = 28.0;
inline constexpr double kBarThickness = 18.0;

// Box and violin grids
inline constexpr int kGridColumns = 3;
inline constexpr double kPanelWidth = 360.0;
inline constexpr double kPanelHeight = 260.0;
inline constexpr double kPanelAxisBand = 44.0;   // left of the plot area
inline constexpr double kPanelLabelBand = 36.0;  // below the plot area
inline constexpr double kPanelTitleBand = 24.0;
inline constexpr double kBoxFraction = 0.55;     // box width / class slot
inline constexpr double kViolinFraction = 0.9;   // max violin width / class slot
inline constexpr double kOutlierRadius = 2.5;
inline constexpr double kMedianRadius = 3.0;
inline constexpr double kIqrStroke = 5.0;

// Heatmap
inline constexpr double kCell = 56.0;
inline constexpr double kHeatLabelBand = 110.0;

}  // namespace twkit::theme
