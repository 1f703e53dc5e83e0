#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "cellpop/error.hpp"
#include "cellpop/raster.hpp"
#include "cellpop/render.hpp"
#include "cellpop/svg.hpp"
#include "cellpop/transform.hpp"

#include "../support/fixtures.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <cmath>
#include <map>
#include <sstream>

using namespace cellpop;
using doctest::Approx;
namespace pt = boost::property_tree;

namespace {

RenderModel model_for(const Dataset& d, const ViewConfig& c) { return build_render_model(apply_view(d, c), c); }

std::map<std::string, double> totals_by_id(const SidePanel& p) {
    std::map<std::string, double> out;
    for (const auto& e : p.entries) out[e.id] = e.total;
    return out;
}

// Rects inside <g id="..."> of a parsed SVG document.
std::size_t rects_in_group(const std::string& svg, const std::string& id) {
    pt::ptree tree;
    std::istringstream in(svg);
    pt::read_xml(in, tree);
    std::size_t n = 0;
    for (const auto& [tag, node] : tree.get_child("svg")) {
        if (tag != "g" || node.get<std::string>("<xmlattr>.id", "") != id) continue;
        for (const auto& [child, _] : node) n += child == "rect" ? 1 : 0;
    }
    return n;
}

double luminance(Rgb c) { return 0.2126 * c.r + 0.7152 * c.g + 0.0722 * c.b; }

} // namespace

TEST_CASE("toy default render model") {
    const auto d = testing::toy_dataset();
    const auto c = default_config(d);
    const auto m = model_for(d, c);
    CHECK_FALSE(m.empty);
    CHECK(m.grid_cells.size() == 9);
    CHECK(m.row_labels == std::vector<std::string>{"S1", "S2", "S3"});
    CHECK(m.row_axis == "samples");
    CHECK(m.col_axis == "cell_types");
    CHECK(totals_by_id(m.row_panel) == std::map<std::string, double>{{"S1", 10}, {"S2", 10}, {"S3", 10}});
    CHECK(totals_by_id(m.col_panel) == std::map<std::string, double>{{"T", 13}, {"B", 8}, {"NK", 9}});
    CHECK(m.col_panel.max_total == 13);

    REQUIRE(m.layout.heatmap);
    CHECK(m.layout.heatmap->x == 0);
    CHECK(m.layout.heatmap->y == Approx(0.27));
    CHECK(m.layout.heatmap->width == Approx(0.7));
    CHECK(m.layout.heatmap->height == Approx(0.63));
    REQUIRE(m.layout.row_panel);
    CHECK(m.layout.row_panel->x == Approx(0.7));
    CHECK(m.layout.legend.y == Approx(0.9));

    REQUIRE(m.legend.ticks.size() == 5);
    CHECK(m.legend.vmin == 0);
    CHECK(m.legend.vmax == 9);
    CHECK(m.legend.ticks[2].value == Approx(4.5));
    CHECK(m.legend.value_label == "cell count");

    const auto j = to_json(m);
    CHECK(j["grid_cells"].size() == 9);
    CHECK(j["axis_labels"]["rows"] == nlohmann::json::array({"S1", "S2", "S3"}));
    CHECK(j.contains("layout_units"));
}

TEST_CASE("expanded row becomes embedded bars") {
    const auto d = testing::toy_dataset();
    auto c = default_config(d);
    c.expanded_rows = {"S3"};
    const auto m = model_for(d, c);
    CHECK(m.grid_cells.size() == 6);
    REQUIRE(m.expanded_rows.size() == 1);
    const auto& row = m.expanded_rows[0];
    CHECK(row.row_id == "S3");
    CHECK(row.row == 2);
    std::map<std::string, double> len;
    for (const auto& b : row.bars) len[b.col_id] = b.length;
    CHECK(len["T"] == 0);
    CHECK(len["B"] == Approx(1.0 / 9));
    CHECK(len["NK"] == 1);

    // Band weights 1, 1, 3.
    REQUIRE(m.layout.row_bands.size() == 3);
    CHECK(m.layout.row_bands[2].extent == Approx(0.6));
    CHECK(m.layout.row_bands[2].expanded);
    CHECK(m.layout.row_bands[1].offset == Approx(0.2));
}

TEST_CASE("stacked-bar preset") {
    const auto d = testing::toy_dataset();
    const auto c = preset_stacked_bars(default_config(d));
    CHECK(c.transpose);
    CHECK_FALSE(c.heatmap_visible);
    const auto v = apply_view(d, c);
    const auto m = build_render_model(v, c);
    CHECK_FALSE(m.layout.heatmap);
    CHECK(m.grid_cells.empty());
    REQUIRE(m.layout.col_panel);
    CHECK(m.layout.col_panel->height == Approx(0.9));
    CHECK(m.col_panel.kind == PanelKind::stacked_bars);
    REQUIRE(m.col_panel.entries.size() == 3);
    for (const auto& e : m.col_panel.entries) {
        double s = 0;
        std::vector<std::string> order;
        for (const auto& seg : e.segments) {
            CHECK(seg.start == Approx(s));
            s += seg.value;
            order.push_back(seg.category);
        }
        CHECK(std::abs(s - 1.0) <= 1e-9);
        CHECK(order == v.row_order);
    }
    // Segments take palette colors by display index unless overridden.
    CHECK(m.col_panel.entries[0].segments[0].color == categorical_palette()[0]);
    auto c2 = c;
    c2.category_colors["NK"] = "#010203";
    const auto m2 = model_for(d, c2);
    for (const auto& seg : m2.col_panel.entries[0].segments) {
        if (seg.category == "NK") CHECK(seg.color == Rgb{1, 2, 3});
    }
}

TEST_CASE("violin panel") {
    const auto d = testing::toy_dataset();
    auto c = default_config(d);
    c.col_side_panel = PanelKind::violins;
    const auto m = model_for(d, c);
    REQUIRE(m.col_panel.entries.size() == 3);
    for (const auto& e : m.col_panel.entries) {
        REQUIRE(e.density);
        CHECK(e.density->grid.size() == kViolinGrid);
        CHECK(m.col_panel.value_min <= e.density->grid.front());
        CHECK(m.col_panel.value_max >= e.density->grid.back());
    }
    // An all-equal column yields a tick instead of a density.
    const Dataset flat(CountsMatrix({"a", "b"}, {"x", "y"}, {4, 1, 4, 2}), MetadataTable(Axis::samples),
                       MetadataTable(Axis::cell_types), "flat");
    auto cf = default_config(flat);
    cf.col_side_panel = PanelKind::violins;
    const auto mf = model_for(flat, cf);
    const auto& x = mf.col_panel.entries[0];
    CHECK(x.id == "x");
    CHECK_FALSE(x.density);
    CHECK(x.tick == 4.0);
}

TEST_CASE("inconsistent view and config") {
    const auto d = testing::toy_dataset();
    auto c = default_config(d);
    const auto v = apply_view(d, c);
    c.transpose = true;
    try {
        build_render_model(v, c);
        FAIL("expected InconsistentViewConfig");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InconsistentViewConfig);
    }
}

TEST_CASE("colors are monotone in value for the default map") {
    const auto d = testing::toy_dataset();
    const auto c = default_config(d);
    const auto v = apply_view(d, c);
    const auto scale = view_color_scale(v, c);
    double prev = luminance(scale(scale.vmin()));
    for (int k = 1; k <= 50; ++k) {
        const double cur = luminance(scale(scale.vmin() + k * (scale.vmax() - scale.vmin()) / 50));
        CHECK(cur != prev);
        prev = cur;
    }
    // Light to dark or dark to light, consistently.
    const double first = luminance(scale(scale.vmin()));
    const double mid = luminance(scale((scale.vmin() + scale.vmax()) / 2));
    const double last = luminance(scale(scale.vmax()));
    const bool monotone = (first < mid && mid < last) || (first > mid && mid > last);
    CHECK(monotone);
}

TEST_CASE("svg is deterministic well-formed XML") {
    const auto d = testing::toy_dataset();
    const auto m = model_for(d, default_config(d));
    const auto a = render_svg(m, 800, 600);
    const auto b = render_svg(model_for(d, default_config(d)), 800, 600);
    CHECK(a == b);
    const bool starts = a.rfind("<svg", 0) == 0 || a.rfind("<?xml", 0) == 0;
    CHECK(starts);
    CHECK(rects_in_group(a, "heatmap") == 9);
    CHECK(a.find("-0.000") == std::string::npos);

    auto c = default_config(d);
    c.expanded_rows = {"S1"};
    CHECK(rects_in_group(render_svg(model_for(d, c), 800, 600), "heatmap") == 6);

    // Larger random matrix: one rect per cell.
    auto g = testing::rng(81);
    const auto big = testing::random_counts(g, 40, 12);
    const Dataset bd(big, MetadataTable(Axis::samples), MetadataTable(Axis::cell_types), "big");
    CHECK(rects_in_group(render_svg(model_for(bd, default_config(bd)), 1200, 900), "heatmap") == 480);
}

TEST_CASE("empty view and degenerate sizes") {
    const auto d = testing::toy_dataset();
    auto c = default_config(d);
    FilterPredicate p;
    p.field = "disease";
    p.op = FilterOp::equals;
    p.values = {std::string("flu")};
    c.filters = {p};
    const auto m = model_for(d, c);
    CHECK(m.empty);
    CHECK(m.grid_cells.empty());
    const auto svg = render_svg(m, 400, 300);
    CHECK(svg.find("no data") != std::string::npos);
    CHECK(rects_in_group(svg, "heatmap") == 0);

    const auto ok = model_for(d, default_config(d));
    try {
        render_svg(ok, 63, 300);
        FAIL("expected DegenerateSize");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DegenerateSize);
    }
    CHECK_NOTHROW(render_svg(ok, 64, 64));
}

TEST_CASE("png output size and stability") {
    const auto d = testing::toy_dataset();
    const auto m = model_for(d, default_config(d));
    const auto png = render_png(m, 1);
    REQUIRE(png.size() > 24);
    auto be32 = [&](std::size_t at) {
        return (static_cast<unsigned>(png[at]) << 24) | (static_cast<unsigned>(png[at + 1]) << 16) |
               (static_cast<unsigned>(png[at + 2]) << 8) | static_cast<unsigned>(png[at + 3]);
    };
    CHECK(png[1] == 'P');
    CHECK(be32(16) == 1200);
    CHECK(be32(20) == 900);
    CHECK(render_png(m, 1) == png);
}
