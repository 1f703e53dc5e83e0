#include "cellpop/render.hpp"

#include "cellpop/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace cellpop {

using nlohmann::json;

namespace {

// Fixed figure proportions: a 70% x 70% heatmap body with 30% panel strips,
// and a legend footer below the body.
constexpr double kBodyHeight = 0.9;
constexpr double kMainFraction = 0.7;
constexpr double kStripY = kBodyHeight * (1.0 - kMainFraction);

Rgb neutral_bar(Theme theme) { return theme == Theme::light ? Rgb{0x4a, 0x6f, 0xa5} : Rgb{0x8f, 0xb3, 0xe0}; }

class CategoryColors {
  public:
    CategoryColors(const std::map<std::string, std::string>& overrides) {
        for (const auto& [id, hex] : overrides) {
            if (auto c = parse_hex_color(hex)) overrides_.emplace(id, *c);
        }
    }

    Rgb category(const std::string& id, std::size_t display_index) const {
        auto it = overrides_.find(id);
        if (it != overrides_.end()) return it->second;
        const auto& palette = categorical_palette();
        return palette[display_index % palette.size()];
    }

    Rgb entity(const std::string& id, Rgb fallback) const {
        auto it = overrides_.find(id);
        return it == overrides_.end() ? fallback : it->second;
    }

  private:
    std::unordered_map<std::string, Rgb> overrides_;
};

std::vector<Band> make_bands(const std::vector<std::string>& ids, const std::set<std::string>* expanded) {
    std::vector<double> weights(ids.size(), 1.0);
    double total = 0;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (expanded && expanded->count(ids[i])) weights[i] = kExpandedRowWeight;
        total += weights[i];
    }
    std::vector<Band> bands;
    bands.reserve(ids.size());
    double offset = 0;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const double extent = weights[i] / total;
        bands.push_back({ids[i], offset, extent, weights[i] != 1.0});
        offset += extent;
    }
    return bands;
}

// Values of displayed row r (along columns) or column c (along rows).
std::vector<double> line_values(const DisplayedView& view, bool along_row, std::size_t index) {
    std::vector<double> out;
    if (along_row) {
        out.reserve(view.values.cols());
        for (std::size_t c = 0; c < view.values.cols(); ++c) out.push_back(view.values.at(index, c));
    } else {
        out.reserve(view.values.rows());
        for (std::size_t r = 0; r < view.values.rows(); ++r) out.push_back(view.values.at(r, index));
    }
    return out;
}

SidePanel build_panel(const DisplayedView& view, const ViewConfig& config, bool row_panel, const CategoryColors& colors,
                      std::vector<std::string>& warnings) {
    SidePanel panel;
    panel.kind = row_panel ? config.row_side_panel : config.col_side_panel;
    if (panel.kind == PanelKind::none || view.empty()) return panel;

    const auto& ids = row_panel ? view.row_order : view.col_order;
    const auto& categories = row_panel ? view.col_order : view.row_order;
    const Rgb fallback = neutral_bar(config.theme);

    switch (panel.kind) {
    case PanelKind::bars: {
        const auto totals = axis_totals(view.raw, row_panel ? Axis::samples : Axis::cell_types);
        for (std::size_t i = 0; i < ids.size(); ++i) {
            PanelEntry e;
            e.id = ids[i];
            e.index = i;
            e.total = static_cast<double>(totals[i]);
            e.color = colors.entity(ids[i], fallback);
            panel.entries.push_back(std::move(e));
        }
        break;
    }
    case PanelKind::stacked_bars: {
        if (categories.size() > categorical_palette().size()) {
            warnings.push_back(std::to_string(categories.size()) + " stacked categories exceed the " +
                               std::to_string(categorical_palette().size()) + "-color palette; colors repeat");
        }
        for (std::size_t i = 0; i < ids.size(); ++i) {
            PanelEntry e;
            e.id = ids[i];
            e.index = i;
            e.color = colors.entity(ids[i], fallback);
            const auto values = line_values(view, row_panel, i);
            double cumulative = 0;
            for (std::size_t k = 0; k < categories.size(); ++k) {
                e.segments.push_back({categories[k], values[k], cumulative, colors.category(categories[k], k)});
                cumulative += values[k];
            }
            e.total = cumulative;
            panel.entries.push_back(std::move(e));
        }
        break;
    }
    case PanelKind::violins: {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < ids.size(); ++i) {
            PanelEntry e;
            e.id = ids[i];
            e.index = i;
            e.color = colors.entity(ids[i], fallback);
            const auto values = line_values(view, row_panel, i);
            for (double v : values) e.total += v;
            try {
                e.density = kde(values, kViolinGrid);
                lo = std::min(lo, e.density->grid.front());
                hi = std::max(hi, e.density->grid.back());
            } catch (const Error& err) {
                if (err.code() != ErrorCode::Degenerate && err.code() != ErrorCode::TooFewValues) throw;
                e.tick = values.empty() ? 0.0 : values.front();
                lo = std::min(lo, *e.tick);
                hi = std::max(hi, *e.tick);
            }
            panel.entries.push_back(std::move(e));
        }
        if (lo <= hi) {
            panel.value_min = lo;
            panel.value_max = hi;
        }
        break;
    }
    case PanelKind::none: break;
    }

    for (const auto& e : panel.entries) panel.max_total = std::max(panel.max_total, e.total);
    for (auto& e : panel.entries) e.length = panel.max_total > 0 ? e.total / panel.max_total : 0.0;
    return panel;
}

std::string value_label(const DisplayedView& view) {
    std::string label;
    switch (view.values.base_kind) {
    case ValueKind::raw_count: label = "cell count"; break;
    case ValueKind::row_proportion:
    case ValueKind::col_proportion: label = "proportion per " + std::string(view.values.base_kind == ValueKind::row_proportion ? "sample" : "cell type"); break;
    }
    if (view.values.log_applied) label = "log10(1 + " + label + ")";
    return label;
}

json rgb_json(Rgb c) { return to_hex(c); }

json region_json(const std::optional<Region>& r) {
    if (!r) return nullptr;
    return json{{"x", r->x}, {"y", r->y}, {"width", r->width}, {"height", r->height}};
}

json panel_json(const SidePanel& p) {
    json entries = json::array();
    for (const auto& e : p.entries) {
        json j{{"id", e.id}, {"index", e.index}, {"total", e.total}, {"length", e.length}, {"color", rgb_json(e.color)}};
        if (p.kind == PanelKind::stacked_bars) {
            json segs = json::array();
            for (const auto& s : e.segments) {
                segs.push_back(json{{"category", s.category}, {"value", s.value}, {"start", s.start}, {"color", rgb_json(s.color)}});
            }
            j["segments"] = std::move(segs);
        }
        if (p.kind == PanelKind::violins) {
            if (e.density) {
                j["density"] = json{{"grid", e.density->grid},
                                    {"density", e.density->density},
                                    {"bandwidth", e.density->bandwidth},
                                    {"n", e.density->n}};
            } else {
                j["density"] = nullptr;
            }
            j["tick"] = e.tick ? json(*e.tick) : json(nullptr);
        }
        entries.push_back(std::move(j));
    }
    json out{{"kind", to_string(p.kind)}, {"max_total", p.max_total}, {"entries", std::move(entries)}};
    if (p.kind == PanelKind::violins) {
        out["value_min"] = p.value_min;
        out["value_max"] = p.value_max;
    }
    return out;
}

json bands_json(const std::vector<Band>& bands) {
    json out = json::array();
    for (const auto& b : bands) {
        out.push_back(json{{"id", b.id}, {"offset", b.offset}, {"extent", b.extent}, {"expanded", b.expanded}});
    }
    return out;
}

} // namespace

ColorScale view_color_scale(const DisplayedView& view, const ViewConfig& config) {
    double vmin = 0, vmax = 0;
    if (!view.values.values.empty()) {
        const auto [lo, hi] = std::minmax_element(view.values.values.begin(), view.values.values.end());
        vmin = *lo;
        vmax = *hi;
    }
    return ColorScale(config.heatmap_colormap, colormap_anchors(config.heatmap_colormap), vmin, vmax);
}

RenderModel build_render_model(const DisplayedView& view, const ViewConfig& config) {
    const auto expected_axis = config.transpose ? Axis::cell_types : Axis::samples;
    if (view.row_axis != expected_axis || view.values.rows() != view.row_order.size() ||
        view.values.cols() != view.col_order.size() || view.raw.rows() != view.row_order.size() ||
        view.raw.cols() != view.col_order.size() || view.values.values.size() != view.row_order.size() * view.col_order.size()) {
        throw Error(ErrorCode::InconsistentViewConfig, "displayed view does not match the view configuration");
    }

    RenderModel m;
    m.theme = config.theme;
    m.heatmap_visible = config.heatmap_visible;
    m.empty = view.empty();
    m.row_axis = view.grouped && view.row_axis == Axis::samples ? "groups" : std::string(to_string(view.row_axis));
    m.col_axis = view.grouped && view.row_axis == Axis::cell_types ? "groups" : std::string(to_string(other(view.row_axis)));
    m.row_labels = view.row_order;
    m.col_labels = view.col_order;
    m.warnings = view.warnings;

    const CategoryColors colors(config.category_colors);
    const auto scale = view_color_scale(view, config);

    // Expanded rows: config selection intersected with what is displayed.
    std::set<std::string> expanded;
    for (std::size_t r = 0; r < view.row_order.size(); ++r) {
        if (config.expanded_rows.count(view.row_order[r])) expanded.insert(view.row_order[r]);
    }
    if (!expanded.empty() && view.col_order.size() > categorical_palette().size()) {
        m.warnings.push_back(std::to_string(view.col_order.size()) + " bar categories exceed the " +
                             std::to_string(categorical_palette().size()) + "-color palette; colors repeat");
    }

    const auto nc = view.col_order.size();
    for (std::size_t r = 0; r < view.row_order.size(); ++r) {
        const auto& id = view.row_order[r];
        if (expanded.count(id)) {
            ExpandedRow row;
            row.row_id = id;
            row.row = r;
            for (std::size_t c = 0; c < nc; ++c) row.row_max = std::max(row.row_max, view.values.at(r, c));
            for (std::size_t c = 0; c < nc; ++c) {
                const double v = view.values.at(r, c);
                row.bars.push_back({c, view.col_order[c], v, row.row_max > 0 ? v / row.row_max : 0.0,
                                    colors.category(view.col_order[c], c)});
            }
            m.expanded_rows.push_back(std::move(row));
        } else if (config.heatmap_visible) {
            for (std::size_t c = 0; c < nc; ++c) {
                const double v = view.values.at(r, c);
                m.grid_cells.push_back({r, c, v, view.raw.at(r, c), scale(v)});
            }
        }
    }

    m.row_panel = build_panel(view, config, true, colors, m.warnings);
    m.col_panel = build_panel(view, config, false, colors, m.warnings);

    m.legend.colormap = scale.colormap();
    m.legend.anchors = scale.anchors();
    m.legend.vmin = scale.vmin();
    m.legend.vmax = scale.vmax();
    m.legend.value_label = value_label(view);
    for (int k = 0; k <= 4; ++k) {
        const double pos = k / 4.0;
        const double v = scale.vmin() + pos * (scale.vmax() - scale.vmin());
        m.legend.ticks.push_back({v, pos, scale(v)});
    }

    // Layout in figure fractions.
    const double main_w = kMainFraction;
    if (config.heatmap_visible) m.layout.heatmap = Region{0.0, kStripY, main_w, kBodyHeight - kStripY};
    if (config.row_side_panel != PanelKind::none) {
        m.layout.row_panel = Region{main_w, kStripY, 1.0 - main_w, kBodyHeight - kStripY};
    }
    if (config.col_side_panel != PanelKind::none) {
        m.layout.col_panel = config.heatmap_visible ? Region{0.0, 0.0, main_w, kStripY} : Region{0.0, 0.0, main_w, kBodyHeight};
    }
    m.layout.legend = Region{0.0, kBodyHeight, 1.0, 1.0 - kBodyHeight};
    m.layout.row_bands = make_bands(view.row_order, &expanded);
    m.layout.col_bands = make_bands(view.col_order, nullptr);
    return m;
}

ViewConfig preset_stacked_bars(ViewConfig config) {
    config.transpose = true;
    config.heatmap_visible = false;
    config.col_side_panel = PanelKind::stacked_bars;
    config.normalization = Normalization::row_proportion;
    return config;
}

json to_json(const RenderModel& m) {
    json cells = json::array();
    for (const auto& c : m.grid_cells) {
        cells.push_back(json{{"row", c.row}, {"col", c.col}, {"value", c.value}, {"raw_count", c.raw_count}, {"color", rgb_json(c.color)}});
    }
    json expanded = json::array();
    for (const auto& r : m.expanded_rows) {
        json bars = json::array();
        for (const auto& b : r.bars) {
            bars.push_back(json{{"col", b.col}, {"col_id", b.col_id}, {"value", b.value}, {"length", b.length}, {"color", rgb_json(b.color)}});
        }
        expanded.push_back(json{{"row_id", r.row_id}, {"row", r.row}, {"row_max", r.row_max}, {"bars", std::move(bars)}});
    }
    json anchors = json::array();
    for (const auto& a : m.legend.anchors) anchors.push_back(json{{"position", a.position}, {"color", rgb_json(a.color)}});
    json ticks = json::array();
    for (const auto& t : m.legend.ticks) ticks.push_back(json{{"value", t.value}, {"position", t.position}, {"color", rgb_json(t.color)}});

    return json{
        {"theme", to_string(m.theme)},
        {"heatmap_visible", m.heatmap_visible},
        {"empty", m.empty},
        {"axis_labels", json{{"row_axis", m.row_axis}, {"col_axis", m.col_axis}, {"rows", m.row_labels}, {"cols", m.col_labels}}},
        {"grid_cells", std::move(cells)},
        {"expanded_rows", std::move(expanded)},
        {"row_panel", panel_json(m.row_panel)},
        {"col_panel", panel_json(m.col_panel)},
        {"legend", json{{"colormap", m.legend.colormap},
                        {"anchors", std::move(anchors)},
                        {"vmin", m.legend.vmin},
                        {"vmax", m.legend.vmax},
                        {"ticks", std::move(ticks)},
                        {"value_label", m.legend.value_label}}},
        {"layout_units", json{{"heatmap", region_json(m.layout.heatmap)},
                              {"row_panel", region_json(m.layout.row_panel)},
                              {"col_panel", region_json(m.layout.col_panel)},
                              {"legend", region_json(m.layout.legend)},
                              {"row_bands", bands_json(m.layout.row_bands)},
                              {"col_bands", bands_json(m.layout.col_bands)}}},
        {"warnings", m.warnings},
    };
}

} // namespace cellpop
