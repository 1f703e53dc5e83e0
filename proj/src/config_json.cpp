#include "cellpop/config_json.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace cellpop {

using nlohmann::json;

ConfigError::ConfigError(std::vector<Violation> violations)
    : Error(ErrorCode::InvalidConfig,
            [&] {
                std::string msg = "invalid config:";
                for (const auto& v : violations) msg += " [" + v.field + ": " + v.reason + "]";
                return msg;
            }()),
      violations_(std::move(violations)) {}

namespace {

json window_json(const std::optional<Window>& w) {
    if (!w) return nullptr;
    return json::array({w->start, w->end});
}

json filter_value_json(const FilterValue& v) {
    if (const auto* s = std::get_if<std::string>(&v)) return *s;
    return std::get<double>(v);
}

json sort_field_json(const SortField& f) {
    switch (f.kind) {
    case SortField::Kind::count_total: return "count_total";
    case SortField::Kind::alphabetical: return "alphabetical";
    case SortField::Kind::metadata: return json{{"metadata", f.name}};
    case SortField::Kind::hierarchy_level: return json{{"hierarchy_level", f.level}};
    }
    return nullptr;
}

// Parsing helpers collect violations rather than failing fast so that one
// response can list every bad field.
class Reader {
  public:
    std::vector<Violation> violations;

    void fail(const std::string& field, const std::string& reason) { violations.push_back({field, reason}); }

    template <typename Enum, std::size_t N>
    std::optional<Enum> enumeration(const json& j, const std::string& field, const std::array<Enum, N>& options) {
        if (!j.is_string()) {
            fail(field, "expected a string");
            return std::nullopt;
        }
        const auto s = j.get<std::string>();
        for (auto e : options) {
            if (to_string(e) == s) return e;
        }
        fail(field, "unknown value '" + s + "'");
        return std::nullopt;
    }

    std::optional<bool> boolean(const json& j, const std::string& field) {
        if (!j.is_boolean()) {
            fail(field, "expected a boolean");
            return std::nullopt;
        }
        return j.get<bool>();
    }

    std::optional<SortKey> sort_key(const json& j, const std::string& field) {
        if (!j.is_object()) {
            fail(field, "expected an object with 'field' and 'direction'");
            return std::nullopt;
        }
        SortKey key;
        for (const auto& [k, v] : j.items()) {
            if (k != "field" && k != "direction") fail(field + "." + k, "unknown key");
        }
        if (!j.contains("field")) {
            fail(field + ".field", "missing");
            return std::nullopt;
        }
        const auto& f = j.at("field");
        if (f.is_string()) {
            const auto s = f.get<std::string>();
            if (s == "count_total") {
                key.field = SortField::count_total();
            } else if (s == "alphabetical") {
                key.field = SortField::alphabetical();
            } else {
                fail(field + ".field", "unknown sort field '" + s + "'");
                return std::nullopt;
            }
        } else if (f.is_object() && f.size() == 1 && f.contains("metadata") && f.at("metadata").is_string()) {
            key.field = SortField::metadata(f.at("metadata").get<std::string>());
        } else if (f.is_object() && f.size() == 1 && f.contains("hierarchy_level") &&
                   f.at("hierarchy_level").is_number_integer()) {
            key.field = SortField::hierarchy(f.at("hierarchy_level").get<int>());
        } else {
            fail(field + ".field", "expected \"count_total\", \"alphabetical\", {\"metadata\": name} or "
                                   "{\"hierarchy_level\": i}");
            return std::nullopt;
        }
        if (j.contains("direction")) {
            auto d = enumeration(j.at("direction"), field + ".direction", std::array{Direction::asc, Direction::desc});
            if (!d) return std::nullopt;
            key.direction = *d;
        }
        return key;
    }

    std::optional<std::vector<SortKey>> sort_keys(const json& j, const std::string& field) {
        if (!j.is_array()) {
            fail(field, "expected an array");
            return std::nullopt;
        }
        std::vector<SortKey> keys;
        const auto before = violations.size();
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (auto k = sort_key(j[i], field + "[" + std::to_string(i) + "]")) keys.push_back(*k);
        }
        if (violations.size() != before) return std::nullopt;
        return keys;
    }

    std::optional<FilterValue> filter_value(const json& j, const std::string& field) {
        if (j.is_string()) return FilterValue{j.get<std::string>()};
        if (j.is_number()) {
            const double d = j.get<double>();
            if (std::isfinite(d)) return FilterValue{d};
        }
        fail(field, "expected a string or finite number");
        return std::nullopt;
    }

    std::optional<double> bound(const json& j, const std::string& field) {
        if (j.is_number() && std::isfinite(j.get<double>())) return j.get<double>();
        fail(field, "expected a finite number or null");
        return std::nullopt;
    }

    std::optional<FilterPredicate> filter(const json& j, const std::string& field) {
        if (!j.is_object()) {
            fail(field, "expected an object");
            return std::nullopt;
        }
        const auto before = violations.size();
        FilterPredicate p;
        for (const auto& [k, v] : j.items()) {
            if (k != "axis" && k != "field" && k != "op" && k != "operand" && k != "missing_policy") {
                fail(field + "." + k, "unknown key");
            }
        }
        if (j.contains("axis")) {
            if (auto a = enumeration(j.at("axis"), field + ".axis", std::array{Axis::samples, Axis::cell_types})) {
                p.axis = *a;
            }
        }
        if (!j.contains("field") || !j.at("field").is_string() || j.at("field").get<std::string>().empty()) {
            fail(field + ".field", "expected a non-empty string");
        } else {
            p.field = j.at("field").get<std::string>();
        }
        if (!j.contains("op")) {
            fail(field + ".op", "missing");
        } else if (auto op = enumeration(j.at("op"), field + ".op",
                                         std::array{FilterOp::equals, FilterOp::in_set, FilterOp::range})) {
            p.op = *op;
        }
        if (j.contains("missing_policy")) {
            if (auto m = enumeration(j.at("missing_policy"), field + ".missing_policy",
                                     std::array{MissingPolicy::exclude, MissingPolicy::include})) {
                p.missing_policy = *m;
            }
        }
        if (violations.size() != before) return std::nullopt;

        const std::string operand_field = field + ".operand";
        if (!j.contains("operand")) {
            fail(operand_field, "missing");
            return std::nullopt;
        }
        const auto& operand = j.at("operand");
        switch (p.op) {
        case FilterOp::equals:
            if (auto v = filter_value(operand, operand_field)) p.values = {*v};
            break;
        case FilterOp::in_set:
            if (!operand.is_array()) {
                fail(operand_field, "in_set expects an array of values");
                break;
            }
            for (std::size_t i = 0; i < operand.size(); ++i) {
                if (auto v = filter_value(operand[i], operand_field + "[" + std::to_string(i) + "]")) {
                    p.values.push_back(*v);
                }
            }
            break;
        case FilterOp::range:
            if (!operand.is_object()) {
                fail(operand_field, "range expects {\"min\", \"max\", \"inclusive\"}");
                break;
            }
            if (operand.contains("min") && !operand.at("min").is_null()) {
                p.range.min = bound(operand.at("min"), operand_field + ".min");
            }
            if (operand.contains("max") && !operand.at("max").is_null()) {
                p.range.max = bound(operand.at("max"), operand_field + ".max");
            }
            if (operand.contains("inclusive")) {
                if (auto b = boolean(operand.at("inclusive"), operand_field + ".inclusive")) p.range.inclusive = *b;
            }
            if (p.range.min && p.range.max && *p.range.min > *p.range.max) {
                fail(operand_field, "range min exceeds max");
            }
            break;
        }
        if (violations.size() != before) return std::nullopt;
        return p;
    }

    std::optional<Window> window(const json& j, const std::string& field) {
        if (j.is_array() && j.size() == 2 && j[0].is_number_integer() && j[1].is_number_integer()) {
            if (j[0].get<std::int64_t>() < 0 || j[1].get<std::int64_t>() < 0) {
                fail(field, "window bounds must be non-negative");
                return std::nullopt;
            }
            return Window{j[0].get<std::size_t>(), j[1].get<std::size_t>()};
        }
        fail(field, "expected [start, end]");
        return std::nullopt;
    }
};

} // namespace

json to_json(const SortKey& key) {
    return json{{"field", sort_field_json(key.field)}, {"direction", to_string(key.direction)}};
}

json to_json(const FilterPredicate& p) {
    json operand;
    switch (p.op) {
    case FilterOp::equals:
        operand = p.values.empty() ? json(nullptr) : filter_value_json(p.values.front());
        break;
    case FilterOp::in_set:
        operand = json::array();
        for (const auto& v : p.values) operand.push_back(filter_value_json(v));
        break;
    case FilterOp::range:
        operand = json{{"min", p.range.min ? json(*p.range.min) : json(nullptr)},
                       {"max", p.range.max ? json(*p.range.max) : json(nullptr)},
                       {"inclusive", p.range.inclusive}};
        break;
    }
    return json{{"axis", to_string(p.axis)},
                {"field", p.field},
                {"op", to_string(p.op)},
                {"operand", operand},
                {"missing_policy", to_string(p.missing_policy)}};
}

json to_json(const ViewConfig& c) {
    json j;
    j["normalization"] = to_string(c.normalization);
    j["log_applied"] = c.log_applied;
    j["transpose"] = c.transpose;
    j["row_sort"] = json::array();
    for (const auto& k : c.row_sort) j["row_sort"].push_back(to_json(k));
    j["col_sort"] = json::array();
    for (const auto& k : c.col_sort) j["col_sort"].push_back(to_json(k));
    j["filters"] = json::array();
    for (const auto& f : c.filters) j["filters"].push_back(to_json(f));
    j["row_group_by"] = c.row_group_by ? json(*c.row_group_by) : json(nullptr);
    j["expanded_rows"] = json::array();
    for (const auto& id : c.expanded_rows) j["expanded_rows"].push_back(id);
    j["row_side_panel"] = to_string(c.row_side_panel);
    j["col_side_panel"] = to_string(c.col_side_panel);
    j["heatmap_visible"] = c.heatmap_visible;
    if (c.zoom) {
        j["zoom"] = json{{"row_window", window_json(c.zoom->row_window)},
                         {"col_window", window_json(c.zoom->col_window)}};
    } else {
        j["zoom"] = nullptr;
    }
    j["theme"] = to_string(c.theme);
    j["heatmap_colormap"] = c.heatmap_colormap;
    j["category_colors"] = json::object();
    for (const auto& [id, color] : c.category_colors) j["category_colors"][id] = color;
    return j;
}

json to_json(const std::vector<Violation>& violations) {
    json arr = json::array();
    for (const auto& v : violations) arr.push_back(json{{"field", v.field}, {"reason", v.reason}});
    return arr;
}

ViewConfig merge_config(const ViewConfig& base, const json& patch) {
    if (!patch.is_object()) throw ConfigError(std::vector<Violation>{{"<root>", "config document must be a JSON object"}});

    ViewConfig out = base;
    Reader rd;
    constexpr auto panels = std::array{PanelKind::none, PanelKind::bars, PanelKind::stacked_bars, PanelKind::violins};

    for (const auto& [key, value] : patch.items()) {
        if (key == "normalization") {
            if (auto n = rd.enumeration(value, key, std::array{Normalization::none, Normalization::row_proportion,
                                                                Normalization::col_proportion})) {
                out.normalization = *n;
            }
        } else if (key == "log_applied") {
            if (auto b = rd.boolean(value, key)) out.log_applied = *b;
        } else if (key == "transpose") {
            if (auto b = rd.boolean(value, key)) out.transpose = *b;
        } else if (key == "heatmap_visible") {
            if (auto b = rd.boolean(value, key)) out.heatmap_visible = *b;
        } else if (key == "row_sort") {
            if (auto k = rd.sort_keys(value, key)) out.row_sort = *k;
        } else if (key == "col_sort") {
            if (auto k = rd.sort_keys(value, key)) out.col_sort = *k;
        } else if (key == "filters") {
            if (!value.is_array()) {
                rd.fail(key, "expected an array");
                continue;
            }
            std::vector<FilterPredicate> filters;
            for (std::size_t i = 0; i < value.size(); ++i) {
                if (auto f = rd.filter(value[i], key + "[" + std::to_string(i) + "]")) filters.push_back(*f);
            }
            out.filters = std::move(filters);
        } else if (key == "row_group_by") {
            if (value.is_null()) {
                out.row_group_by.reset();
            } else if (value.is_string() && !value.get<std::string>().empty()) {
                out.row_group_by = value.get<std::string>();
            } else {
                rd.fail(key, "expected a field name or null");
            }
        } else if (key == "expanded_rows") {
            if (!value.is_array() || !std::all_of(value.begin(), value.end(), [](const json& e) { return e.is_string(); })) {
                rd.fail(key, "expected an array of row ids");
                continue;
            }
            out.expanded_rows.clear();
            for (const auto& e : value) out.expanded_rows.insert(e.get<std::string>());
        } else if (key == "row_side_panel") {
            if (auto p = rd.enumeration(value, key, panels)) out.row_side_panel = *p;
        } else if (key == "col_side_panel") {
            if (auto p = rd.enumeration(value, key, panels)) out.col_side_panel = *p;
        } else if (key == "zoom") {
            if (value.is_null()) {
                out.zoom.reset();
                continue;
            }
            if (!value.is_object()) {
                rd.fail(key, "expected an object or null");
                continue;
            }
            Zoom z;
            for (const auto& [k, w] : value.items()) {
                if (k == "row_window") {
                    if (!w.is_null()) z.row_window = rd.window(w, "zoom.row_window");
                } else if (k == "col_window") {
                    if (!w.is_null()) z.col_window = rd.window(w, "zoom.col_window");
                } else {
                    rd.fail("zoom." + k, "unknown key");
                }
            }
            if (z.row_window || z.col_window) {
                out.zoom = z;
            } else {
                out.zoom.reset();
            }
        } else if (key == "theme") {
            if (auto t = rd.enumeration(value, key, std::array{Theme::light, Theme::dark})) out.theme = *t;
        } else if (key == "heatmap_colormap") {
            if (value.is_string()) {
                out.heatmap_colormap = value.get<std::string>();
            } else {
                rd.fail(key, "expected a colormap id");
            }
        } else if (key == "category_colors") {
            if (!value.is_object()) {
                rd.fail(key, "expected an object mapping ids to colors");
                continue;
            }
            std::map<std::string, std::string> colors;
            for (const auto& [id, color] : value.items()) {
                if (!color.is_string()) {
                    rd.fail("category_colors." + id, "expected a hex color string");
                    continue;
                }
                colors[id] = color.get<std::string>();
            }
            out.category_colors = std::move(colors);
        } else {
            rd.fail(key, "unknown config field");
        }
    }
    if (!rd.violations.empty()) throw ConfigError(std::move(rd.violations));
    return out;
}

} // namespace cellpop
