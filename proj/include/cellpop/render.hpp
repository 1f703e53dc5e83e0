#ifndef CELLPOP_RENDER_HPP
#define CELLPOP_RENDER_HPP

#include "cellpop/color.hpp"
#include "cellpop/model.hpp"
#include "cellpop/stats.hpp"
#include "cellpop/transform.hpp"

#include "json.hpp"

#include <optional>
#include <string>
#include <vector>

/**
 * @file render.hpp
 *
 * @brief Resolution-independent view model of one displayed view.
 *
 * The model carries everything a client needs to draw the heatmap, the rows
 * expanded into bar charts, both side panels and the legend. Geometry is in
 * abstract units: regions are fractions of the whole figure, bands are
 * fractions of their region. Pixel mapping happens in `render_svg` and in
 * clients.
 */

namespace cellpop {

struct GridCell {
    std::size_t row = 0;
    std::size_t col = 0;
    double value = 0;
    CountsMatrix::Count raw_count = 0;
    Rgb color;
};

struct EmbeddedBar {
    std::size_t col = 0;
    std::string col_id;
    double value = 0;
    double length = 0; ///< value / row maximum, in [0, 1]
    Rgb color;
};

struct ExpandedRow {
    std::string row_id;
    std::size_t row = 0;
    double row_max = 0;
    std::vector<EmbeddedBar> bars;
};

struct Segment {
    std::string category;
    double value = 0;
    double start = 0; ///< cumulative value before this segment
    Rgb color;
};

/// One bar / stacked bar / violin, aligned with a displayed row or column.
struct PanelEntry {
    std::string id;
    std::size_t index = 0;
    double total = 0;  ///< bar value, or the sum of the segments
    double length = 0; ///< total relative to the panel maximum
    Rgb color;
    std::vector<Segment> segments;
    std::optional<DensityCurve> density;
    std::optional<double> tick; ///< flat marker when no density can be estimated
};

struct SidePanel {
    PanelKind kind = PanelKind::none;
    double max_total = 0;
    double value_min = 0; ///< common value span of violins
    double value_max = 0;
    std::vector<PanelEntry> entries;
};

struct LegendTick {
    double value = 0;
    double position = 0;
    Rgb color;
};

struct Legend {
    std::string colormap;
    std::vector<ColorAnchor> anchors;
    double vmin = 0;
    double vmax = 0;
    std::vector<LegendTick> ticks; ///< vmin, quartile points of the domain, vmax
    std::string value_label;
};

struct Region {
    double x = 0, y = 0, width = 0, height = 0;
};

struct Band {
    std::string id;
    double offset = 0; ///< fraction of the region
    double extent = 0;
    bool expanded = false;
};

struct Layout {
    std::optional<Region> heatmap;
    std::optional<Region> row_panel;
    std::optional<Region> col_panel;
    Region legend;
    std::vector<Band> row_bands;
    std::vector<Band> col_bands;
};

struct RenderModel {
    Theme theme = Theme::light;
    bool heatmap_visible = true;
    bool empty = false;
    std::string row_axis;
    std::string col_axis;
    std::vector<std::string> row_labels;
    std::vector<std::string> col_labels;
    std::vector<GridCell> grid_cells;
    std::vector<ExpandedRow> expanded_rows;
    SidePanel row_panel;
    SidePanel col_panel;
    Legend legend;
    Layout layout;
    std::vector<std::string> warnings;
};

/// Height of an expanded row relative to a plain heatmap row.
inline constexpr double kExpandedRowWeight = 3.0;

/// Points on each violin's density grid.
inline constexpr std::size_t kViolinGrid = 128;

/// Color scale for the displayed values (domain = their min and max).
ColorScale view_color_scale(const DisplayedView& view, const ViewConfig& config);

/// Throws Error(InconsistentViewConfig) when `view` was not produced from `config`.
RenderModel build_render_model(const DisplayedView& view, const ViewConfig& config);

/// The traditional stacked-bar figure: transposed, heatmap hidden, stacked
/// column panel, per-sample proportions.
ViewConfig preset_stacked_bars(ViewConfig config);

nlohmann::json to_json(const RenderModel& model);

} // namespace cellpop

#endif
