#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "cellpop/config_json.hpp"
#include "cellpop/error.hpp"
#include "cellpop/model.hpp"

#include "../support/fixtures.hpp"

using namespace cellpop;
using nlohmann::json;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return ErrorCode::Io;
}

bool has_violation(const std::vector<Violation>& vs, const std::string& field) {
    for (const auto& v : vs) {
        if (v.field == field) return true;
    }
    return false;
}

} // namespace

TEST_CASE("CountsMatrix invariants") {
    CHECK(code_of([] { CountsMatrix({"S1", "S1"}, {"T"}, {1, 2}); }) == ErrorCode::DuplicateId);
    CHECK(code_of([] { CountsMatrix({"S1"}, {"T", "T"}, {1, 2}); }) == ErrorCode::DuplicateId);
    CHECK(code_of([] { CountsMatrix({"S1"}, {"T"}, {-1}); }) == ErrorCode::NegativeCount);
    CHECK(code_of([] { CountsMatrix({"S1"}, {"T", "B"}, {1}); }) == ErrorCode::InvalidArgument);

    const auto m = testing::toy_counts();
    CHECK(m.rows() == 3);
    CHECK(m.cols() == 3);
    CHECK(m.at(2, 2) == 9);
    CHECK(*m.row_index("S2") == 1);
    CHECK(*m.col_index("NK") == 2);
    CHECK_FALSE(m.col_index("X").has_value());

    const auto t = m.transposed();
    CHECK(t.row_ids() == m.col_ids());
    CHECK(t.at(0, 1) == m.at(1, 0));
    CHECK(t.transposed() == m);

    CountsMatrix empty({}, {"T"}, {});
    CHECK(empty.empty());
}

TEST_CASE("MetadataTable hierarchy prefix and lookups") {
    using V = std::vector<MetaValue>;
    CHECK(code_of([] {
              MetadataTable(Axis::cell_types, {"T"},
                            {{"level_1", FieldKind::hierarchy_level, 1}, {"level_3", FieldKind::hierarchy_level, 3}},
                            {V{std::string("a")}, V{std::string("c")}});
          }) == ErrorCode::NonContiguousHierarchy);

    // A record may not skip a shallower level.
    CHECK(code_of([] {
              MetadataTable(Axis::cell_types, {"T"},
                            {{"level_1", FieldKind::hierarchy_level, 1}, {"level_2", FieldKind::hierarchy_level, 2}},
                            {V{Missing{}}, V{std::string("t")}});
          }) == ErrorCode::NonContiguousHierarchy);

    CHECK(code_of([] { MetadataTable(Axis::samples, {"S1", "S1"}, {}, {}); }) == ErrorCode::DuplicateId);

    MetadataTable m(Axis::samples, {"S1", "S2"}, {{"age", FieldKind::numeric, 0}}, {V{40.0, Missing{}}});
    CHECK(std::get<double>(m.value("S1", "age")) == 40.0);
    CHECK(is_missing(m.value("S2", "age")));
    CHECK(is_missing(m.value("S9", "age")));
    CHECK(is_missing(m.value("S1", "nope")));

    const auto r = m.reindexed({"S2", "S3", "S1"});
    CHECK(r.ids() == std::vector<std::string>{"S2", "S3", "S1"});
    CHECK(is_missing(r.value("S3", "age")));
    CHECK(std::get<double>(r.value("S1", "age")) == 40.0);
}

TEST_CASE("Dataset requires metadata ids to exist") {
    using V = std::vector<MetaValue>;
    MetadataTable bad(Axis::samples, {"S9"}, {{"d", FieldKind::categorical, 0}}, {V{std::string("x")}});
    CHECK(code_of([&] { Dataset(testing::toy_counts(), bad, MetadataTable(Axis::cell_types), "x"); }) ==
          ErrorCode::UnknownEntity);

    const auto d = testing::toy_dataset();
    CHECK(d.sample_meta().ids() == d.counts().row_ids());
    CHECK(d.cell_type_meta().ids() == d.counts().col_ids());
    CHECK(d.name() == "toy");
}

TEST_CASE("default config and structural equality") {
    const auto d = testing::toy_dataset();
    auto a = default_config(d);
    auto b = default_config(d);
    CHECK(a == b);
    REQUIRE(a.row_sort.size() == 1);
    CHECK(a.row_sort[0].field == SortField::count_total());
    CHECK(a.row_sort[0].direction == Direction::desc);
    b.expanded_rows.insert("S1");
    CHECK_FALSE(a == b);
    b.expanded_rows.clear();
    b.category_colors["T"] = "#ff0000";
    CHECK_FALSE(a == b);
}

TEST_CASE("validate_config") {
    const auto d = testing::toy_dataset();
    auto c = default_config(d);
    CHECK(validate_config(d, c).empty());

    SUBCASE("unknown sort field") {
        c.row_sort = {{SortField::metadata("age"), Direction::asc}};
        CHECK(has_violation(validate_config(d, c), "row_sort[0]"));
    }
    SUBCASE("hierarchy level beyond depth") {
        c.col_sort = {{SortField::hierarchy(2), Direction::asc}};
        CHECK(has_violation(validate_config(d, c), "col_sort[0]"));
    }
    SUBCASE("range filter on categorical field") {
        FilterPredicate p;
        p.field = "disease";
        p.op = FilterOp::range;
        p.range.min = 1;
        c.filters = {p};
        CHECK(has_violation(validate_config(d, c), "filters[0]"));
    }
    SUBCASE("numeric operand for categorical field") {
        FilterPredicate p;
        p.field = "disease";
        p.op = FilterOp::in_set;
        p.values = {1.0};
        c.filters = {p};
        CHECK(has_violation(validate_config(d, c), "filters[0]"));
    }
    SUBCASE("count_total range is allowed on either axis") {
        FilterPredicate p;
        p.axis = Axis::cell_types;
        p.field = kCountTotalField;
        p.op = FilterOp::range;
        p.range.min = 9;
        c.filters = {p};
        CHECK(validate_config(d, c).empty());
    }
    SUBCASE("expanded rows must be displayed") {
        c.expanded_rows = {"S3"};
        CHECK(validate_config(d, c).empty());
        c.expanded_rows = {"T"};
        CHECK(has_violation(validate_config(d, c), "expanded_rows"));
        c.transpose = true;
        CHECK(validate_config(d, c).empty());
    }
    SUBCASE("grouped rows are group labels") {
        c.row_group_by = "disease";
        c.expanded_rows = {"CF"};
        CHECK(validate_config(d, c).empty());
    }
    SUBCASE("zoom windows") {
        c.zoom = Zoom{Window{0, 3}, Window{1, 2}};
        CHECK(validate_config(d, c).empty());
        c.zoom = Zoom{Window{1, 1}, std::nullopt};
        CHECK(has_violation(validate_config(d, c), "zoom.row_window"));
        c.zoom = Zoom{std::nullopt, Window{0, 4}};
        CHECK(has_violation(validate_config(d, c), "zoom.col_window"));
    }
    SUBCASE("colors") {
        c.heatmap_colormap = "jet";
        c.category_colors["T"] = "red";
        const auto v = validate_config(d, c);
        CHECK(has_violation(v, "heatmap_colormap"));
        CHECK(has_violation(v, "category_colors.T"));
    }
    SUBCASE("grouping by numeric field") {
        using V = std::vector<MetaValue>;
        MetadataTable s(Axis::samples, {"S1", "S2", "S3"}, {{"age", FieldKind::numeric, 0}}, {V{1.0, 2.0, 3.0}});
        Dataset d2(testing::toy_counts(), s, MetadataTable(Axis::cell_types), "x");
        auto c2 = default_config(d2);
        c2.row_group_by = "age";
        CHECK(has_violation(validate_config(d2, c2), "row_group_by"));
    }
}

TEST_CASE("config JSON round trip") {
    const auto d = testing::toy_dataset();
    auto c = default_config(d);
    c.normalization = Normalization::row_proportion;
    c.log_applied = true;
    c.transpose = true;
    c.col_sort = {{SortField::hierarchy(1), Direction::asc}, {SortField::alphabetical(), Direction::desc}};
    FilterPredicate in_set;
    in_set.field = "disease";
    in_set.op = FilterOp::in_set;
    in_set.values = {std::string("CF"), std::string("healthy")};
    in_set.missing_policy = MissingPolicy::include;
    FilterPredicate range;
    range.axis = Axis::cell_types;
    range.field = kCountTotalField;
    range.op = FilterOp::range;
    range.range = Range{1.0, std::nullopt, false};
    c.filters = {in_set, range};
    c.row_group_by = "disease";
    c.expanded_rows = {"T"};
    c.row_side_panel = PanelKind::violins;
    c.col_side_panel = PanelKind::stacked_bars;
    c.heatmap_visible = false;
    c.zoom = Zoom{Window{0, 2}, std::nullopt};
    c.theme = Theme::dark;
    c.heatmap_colormap = "blues";
    c.category_colors = {{"T", "#112233"}};

    const auto j = to_json(c);
    CHECK(j["normalization"] == "row_proportion");
    CHECK(j["theme"] == "dark");
    CHECK(j["zoom"]["row_window"] == json::array({0, 2}));
    CHECK(j["zoom"]["col_window"].is_null());
    CHECK(j["col_sort"][0]["field"] == json{{"hierarchy_level", 1}});

    const auto back = merge_config(ViewConfig{}, j);
    CHECK(back == c);
    CHECK(to_json(back).dump() == j.dump());
}

TEST_CASE("merge_config is a shallow merge with null resets") {
    const auto d = testing::toy_dataset();
    auto base = default_config(d);
    base.row_group_by = "disease";
    base.zoom = Zoom{Window{0, 1}, std::nullopt};

    const auto next = merge_config(base, json{{"transpose", true}, {"row_group_by", nullptr}, {"zoom", nullptr}});
    CHECK(next.transpose);
    CHECK_FALSE(next.row_group_by.has_value());
    CHECK_FALSE(next.zoom.has_value());
    CHECK(next.row_sort == base.row_sort);

    // Lists replace wholesale.
    const auto replaced = merge_config(base, json{{"row_sort", json::array()}});
    CHECK(replaced.row_sort.empty());
}

TEST_CASE("merge_config reports every bad key") {
    const auto d = testing::toy_dataset();
    try {
        merge_config(default_config(d), json{{"bogus", 1}, {"transpose", "yes"}, {"normalization", "sqrt"}});
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.code() == ErrorCode::InvalidConfig);
        CHECK(has_violation(e.violations(), "bogus"));
        CHECK(has_violation(e.violations(), "transpose"));
        CHECK(has_violation(e.violations(), "normalization"));
    }
    CHECK_THROWS_AS(merge_config(default_config(d), json::array()), ConfigError);
}
