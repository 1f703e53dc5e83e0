#include "cellpop/svg.hpp"

#include "cellpop/error.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>

namespace cellpop {

namespace {

constexpr double kMinLabelBand = 6.0;
constexpr int kLegendSteps = 64;

struct Palette {
    Rgb background;
    Rgb text;
    Rgb rule;
};

Palette theme_palette(Theme theme) {
    if (theme == Theme::dark) return {{0x1e, 0x1e, 0x1e}, {0xe6, 0xe6, 0xe6}, {0x5a, 0x5a, 0x5a}};
    return {{0xff, 0xff, 0xff}, {0x22, 0x22, 0x22}, {0xbb, 0xbb, 0xbb}};
}

// Maps figure units to pixels. The body (y in [0, 0.9]) and the legend footer
// are separated by a strip for column labels; a left strip holds row labels.
class Frame {
  public:
    Frame(double w, double h) : w_(w), h_(h) {}

    double x(double u) const { return left() + u * (w_ - left() - 0.02 * w_); }
    double y(double u) const { return top() + (u / 0.9) * (body_bottom() - top()); }
    double legend_y(double u) const { return legend_top() + ((u - 0.9) / 0.1) * (0.98 * h_ - legend_top()); }
    double left() const { return 0.14 * w_; }
    double top() const { return 0.02 * h_; }
    double body_bottom() const { return 0.78 * h_; }
    double legend_top() const { return 0.88 * h_; }

  private:
    double w_, h_;
};

struct PixelRect {
    double x, y, w, h;
};

PixelRect to_pixels(const Frame& f, const Region& r) {
    const double x0 = f.x(r.x), x1 = f.x(r.x + r.width);
    const double y0 = f.y(r.y), y1 = f.y(r.y + r.height);
    return {x0, y0, x1 - x0, y1 - y0};
}

double label_size(double band) { return std::min(12.0, band * 0.8); }

std::string format_tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

void draw_bars_panel(const SidePanel& panel, const PixelRect& px, const std::vector<Band>& bands, bool horizontal,
                     SceneGroup& g) {
    // horizontal: one bar per row band growing rightwards; else per column band growing upwards.
    for (const auto& e : panel.entries) {
        if (e.index >= bands.size()) continue;
        const auto& band = bands[e.index];
        const double pad = 0.1;
        if (horizontal) {
            const double y = px.y + (band.offset + band.extent * pad) * px.h;
            const double h = band.extent * (1 - 2 * pad) * px.h;
            if (panel.kind == PanelKind::stacked_bars) {
                const double scale = panel.max_total > 0 ? px.w / panel.max_total : 0;
                for (const auto& s : e.segments) {
                    g.items.push_back(SceneRect{px.x + s.start * scale, y, s.value * scale, h, s.color, {}, 1});
                }
            } else {
                g.items.push_back(SceneRect{px.x, y, e.length * px.w, h, e.color, {}, 1});
            }
        } else {
            const double x = px.x + (band.offset + band.extent * pad) * px.w;
            const double w = band.extent * (1 - 2 * pad) * px.w;
            const double base = px.y + px.h;
            if (panel.kind == PanelKind::stacked_bars) {
                const double scale = panel.max_total > 0 ? px.h / panel.max_total : 0;
                for (const auto& s : e.segments) {
                    const double len = s.value * scale;
                    g.items.push_back(SceneRect{x, base - s.start * scale - len, w, len, s.color, {}, 1});
                }
            } else {
                const double len = e.length * px.h;
                g.items.push_back(SceneRect{x, base - len, w, len, e.color, {}, 1});
            }
        }
    }
}

void draw_violin_panel(const SidePanel& panel, const PixelRect& px, const std::vector<Band>& bands, bool horizontal,
                       const Palette& pal, SceneGroup& g) {
    const double span = panel.value_max - panel.value_min;
    auto value_pos = [&](double v) { return span > 0 ? (v - panel.value_min) / span : 0.5; };
    for (const auto& e : panel.entries) {
        if (e.index >= bands.size()) continue;
        const auto& band = bands[e.index];
        const double center = band.offset + band.extent / 2;
        const double half = band.extent * 0.45;
        if (e.density) {
            const auto& d = *e.density;
            const double peak = *std::max_element(d.density.begin(), d.density.end());
            ScenePolygon poly;
            poly.fill = e.color;
            auto point = [&](double v, double offset) {
                // offset is across the band, v along the value axis
                if (horizontal) return std::pair{px.x + value_pos(v) * px.w, px.y + (center + offset) * px.h};
                return std::pair{px.x + (center + offset) * px.w, px.y + px.h - value_pos(v) * px.h};
            };
            for (std::size_t i = 0; i < d.grid.size(); ++i) poly.points.push_back(point(d.grid[i], half * d.density[i] / peak));
            for (std::size_t i = d.grid.size(); i-- > 0;) poly.points.push_back(point(d.grid[i], -half * d.density[i] / peak));
            g.items.push_back(std::move(poly));
        } else if (e.tick) {
            const double p = value_pos(*e.tick);
            if (horizontal) {
                const double x = px.x + p * px.w;
                g.items.push_back(SceneLine{x, px.y + (center - half) * px.h, x, px.y + (center + half) * px.h, pal.text, 1.5});
            } else {
                const double y = px.y + px.h - p * px.h;
                g.items.push_back(SceneLine{px.x + (center - half) * px.w, y, px.x + (center + half) * px.w, y, pal.text, 1.5});
            }
        }
    }
}

SceneGroup draw_panel(const std::string& id, const SidePanel& panel, const std::optional<Region>& region,
                      const std::vector<Band>& bands, bool horizontal, const Frame& f, const Palette& pal) {
    SceneGroup g{id, {}};
    if (!region || panel.kind == PanelKind::none) return g;
    const auto px = to_pixels(f, *region);
    if (panel.kind == PanelKind::violins) {
        draw_violin_panel(panel, px, bands, horizontal, pal, g);
    } else {
        draw_bars_panel(panel, px, bands, horizontal, g);
    }
    return g;
}

} // namespace

Scene layout_scene(const RenderModel& model, int width_px, int height_px) {
    if (width_px < kMinCanvas || height_px < kMinCanvas) {
        throw Error(ErrorCode::DegenerateSize, "canvas " + std::to_string(width_px) + "x" + std::to_string(height_px) +
                                                   " is below the " + std::to_string(kMinCanvas) + " px minimum");
    }
    const double W = width_px, H = height_px;
    const Frame f(W, H);
    const auto pal = theme_palette(model.theme);
    const auto& L = model.layout;

    Scene scene;
    scene.width = W;
    scene.height = H;
    scene.background = pal.background;

    SceneGroup frame{"frame", {}};
    frame.items.push_back(SceneRect{f.x(0), f.y(0), f.x(1) - f.x(0), f.y(0.9) - f.y(0), {}, pal.rule, 1});
    if (model.empty) {
        frame.items.push_back(SceneText{(f.x(0) + f.x(1)) / 2, (f.y(0) + f.y(0.9)) / 2, "no data", 16, pal.text,
                                        SceneText::Anchor::middle, false});
        scene.groups.push_back(std::move(frame));
        scene.groups.push_back({"heatmap", {}});
        scene.groups.push_back({"legend", {}});
        scene.groups.push_back({"labels", {}});
        return scene;
    }
    scene.groups.push_back(std::move(frame));

    // Row bands live in the heatmap region, else in the row panel region.
    const std::optional<Region> row_region = L.heatmap ? L.heatmap : L.row_panel;
    const std::optional<Region> col_region = L.heatmap ? L.heatmap : L.col_panel;

    SceneGroup heatmap{"heatmap", {}};
    SceneGroup expanded{"expanded-rows", {}};
    if (L.heatmap) {
        const auto px = to_pixels(f, *L.heatmap);
        for (const auto& c : model.grid_cells) {
            const auto& rb = L.row_bands[c.row];
            const auto& cb = L.col_bands[c.col];
            heatmap.items.push_back(SceneRect{px.x + cb.offset * px.w, px.y + rb.offset * px.h, cb.extent * px.w,
                                              rb.extent * px.h, c.color, {}, 1});
        }
        for (const auto& row : model.expanded_rows) {
            const auto& rb = L.row_bands[row.row];
            const double top = px.y + rb.offset * px.h;
            const double h = rb.extent * px.h;
            const double base = top + h * 0.95;
            for (const auto& b : row.bars) {
                const auto& cb = L.col_bands[b.col];
                const double len = b.length * h * 0.85;
                expanded.items.push_back(SceneRect{px.x + (cb.offset + cb.extent * 0.1) * px.w, base - len,
                                                   cb.extent * 0.8 * px.w, len, b.color, {}, 1});
            }
            expanded.items.push_back(SceneLine{px.x, base, px.x + px.w, base, pal.rule, 1});
        }
    }
    scene.groups.push_back(std::move(heatmap));
    scene.groups.push_back(std::move(expanded));
    scene.groups.push_back(draw_panel("row-panel", model.row_panel, L.row_panel, L.row_bands, true, f, pal));
    scene.groups.push_back(draw_panel("col-panel", model.col_panel, L.col_panel, L.col_bands, false, f, pal));

    SceneGroup legend{"legend", {}};
    {
        const double lx0 = f.x(L.legend.x), lx1 = f.x(L.legend.x + L.legend.width);
        const double ly0 = f.legend_y(L.legend.y), ly1 = f.legend_y(L.legend.y + L.legend.height);
        const PixelRect px{lx0, ly0, lx1 - lx0, ly1 - ly0};
        const double bar_w = px.w * 0.7;
        const double bar_h = px.h * 0.4;
        const double step = bar_w / kLegendSteps;
        const ColorScale scale(model.legend.colormap, model.legend.anchors, 0.0, 1.0);
        for (int i = 0; i < kLegendSteps; ++i) {
            const double pos = (i + 0.5) / kLegendSteps;
            legend.items.push_back(SceneRect{px.x + i * step, px.y, step, bar_h, scale(pos), {}, 1});
        }
        const double size = std::clamp(px.h * 0.35, 6.0, 12.0);
        for (const auto& t : model.legend.ticks) {
            const double x = px.x + t.position * bar_w;
            legend.items.push_back(SceneLine{x, px.y + bar_h, x, px.y + bar_h + px.h * 0.1, pal.text, 1});
            legend.items.push_back(SceneText{x, px.y + bar_h + px.h * 0.1 + size, format_tick(t.value), size, pal.text,
                                             SceneText::Anchor::middle, false});
        }
        legend.items.push_back(SceneText{px.x + bar_w + px.w * 0.02, px.y + bar_h, model.legend.value_label, size,
                                         pal.text, SceneText::Anchor::start, false});
    }
    scene.groups.push_back(std::move(legend));

    SceneGroup labels{"labels", {}};
    if (row_region) {
        const auto px = to_pixels(f, *row_region);
        for (const auto& b : L.row_bands) {
            const double band = b.extent * px.h;
            if (band < kMinLabelBand) continue;
            const double size = label_size(band);
            labels.items.push_back(SceneText{px.x - 4, px.y + (b.offset + b.extent / 2) * px.h + size * 0.35, b.id, size,
                                             pal.text, SceneText::Anchor::end, false});
        }
    }
    if (col_region) {
        const auto px = to_pixels(f, *col_region);
        for (const auto& b : L.col_bands) {
            const double band = b.extent * px.w;
            if (band < kMinLabelBand) continue;
            const double size = label_size(band);
            labels.items.push_back(SceneText{px.x + (b.offset + b.extent / 2) * px.w + size * 0.35, px.y + px.h + 4, b.id,
                                             size, pal.text, SceneText::Anchor::end, true});
        }
    }
    scene.groups.push_back(std::move(labels));
    return scene;
}

// ---------------------------------------------------------------------------

namespace {

void put_number(std::string& out, double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, 3);
    std::string_view s(buf, static_cast<std::size_t>(res.ptr - buf));
    if (s == "-0.000") s = "0.000";
    out += s;
}

void put_attr(std::string& out, const char* name, double v) {
    out += ' ';
    out += name;
    out += "=\"";
    put_number(out, v);
    out += '"';
}

void put_color(std::string& out, const char* name, const std::optional<Rgb>& c) {
    out += ' ';
    out += name;
    out += "=\"";
    out += c ? to_hex(*c) : "none";
    out += '"';
}

void put_escaped(std::string& out, std::string_view text) {
    for (char ch : text) {
        switch (ch) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        case '\'': out += "&apos;"; break;
        default:
            // Control characters other than tab/newline are not allowed in XML 1.0.
            if (static_cast<unsigned char>(ch) < 0x20 && ch != '\t' && ch != '\n') {
                out += ' ';
            } else {
                out += ch;
            }
        }
    }
}

struct ItemWriter {
    std::string& out;

    void operator()(const SceneRect& r) const {
        out += "<rect";
        put_attr(out, "x", r.x);
        put_attr(out, "y", r.y);
        put_attr(out, "width", r.width);
        put_attr(out, "height", r.height);
        put_color(out, "fill", r.fill);
        if (r.stroke) {
            put_color(out, "stroke", r.stroke);
            put_attr(out, "stroke-width", r.stroke_width);
        }
        out += "/>\n";
    }

    void operator()(const ScenePolygon& p) const {
        out += "<polygon points=\"";
        for (std::size_t i = 0; i < p.points.size(); ++i) {
            if (i) out += ' ';
            put_number(out, p.points[i].first);
            out += ',';
            put_number(out, p.points[i].second);
        }
        out += '"';
        put_color(out, "fill", p.fill);
        out += "/>\n";
    }

    void operator()(const SceneLine& l) const {
        out += "<line";
        put_attr(out, "x1", l.x1);
        put_attr(out, "y1", l.y1);
        put_attr(out, "x2", l.x2);
        put_attr(out, "y2", l.y2);
        put_color(out, "stroke", l.stroke);
        put_attr(out, "stroke-width", l.stroke_width);
        out += "/>\n";
    }

    void operator()(const SceneText& t) const {
        static constexpr const char* anchors[] = {"start", "middle", "end"};
        out += "<text";
        put_attr(out, "x", t.x);
        put_attr(out, "y", t.y);
        put_attr(out, "font-size", t.size);
        put_color(out, "fill", t.fill);
        out += " text-anchor=\"";
        out += anchors[static_cast<int>(t.anchor)];
        out += '"';
        if (t.vertical) {
            out += " transform=\"rotate(-90.000 ";
            put_number(out, t.x);
            out += ' ';
            put_number(out, t.y);
            out += ")\"";
        }
        out += '>';
        put_escaped(out, t.text);
        out += "</text>\n";
    }
};

} // namespace

std::string write_svg(const Scene& scene) {
    std::string out;
    out.reserve(4096);
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\"";
    put_attr(out, "width", scene.width);
    put_attr(out, "height", scene.height);
    out += " viewBox=\"0.000 0.000 ";
    put_number(out, scene.width);
    out += ' ';
    put_number(out, scene.height);
    out += "\" font-family=\"sans-serif\">\n";
    ItemWriter{out}(SceneRect{0, 0, scene.width, scene.height, scene.background, {}, 1});
    const ItemWriter writer{out};
    for (const auto& g : scene.groups) {
        out += "<g id=\"";
        put_escaped(out, g.id);
        out += "\">\n";
        for (const auto& item : g.items) std::visit(writer, item);
        out += "</g>\n";
    }
    out += "</svg>\n";
    return out;
}

std::string render_svg(const RenderModel& model, int width_px, int height_px) {
    return write_svg(layout_scene(model, width_px, height_px));
}

} // namespace cellpop
