#include "cellpop/color.hpp"
#include "cellpop/model.hpp"
#include "cellpop/transform.hpp"

#include <algorithm>
#include <string>

namespace cellpop {

namespace {

void check_sort_keys(const std::vector<SortKey>& keys, const MetadataTable& meta, const std::string& name,
                     std::vector<Violation>& out) {
    for (std::size_t i = 0; i < keys.size(); ++i) {
        const auto& f = keys[i].field;
        const auto where = name + "[" + std::to_string(i) + "]";
        if (f.kind == SortField::Kind::metadata && !meta.field(f.name)) {
            out.push_back({where, "unknown " + std::string(to_string(meta.axis())) + " metadata field '" + f.name + "'"});
        } else if (f.kind == SortField::Kind::hierarchy_level && !meta.hierarchy_field(f.level)) {
            out.push_back({where, "unknown hierarchy level " + std::to_string(f.level) + " (depth " +
                                      std::to_string(meta.hierarchy_depth()) + ")"});
        }
    }
}

bool check_filters(const Dataset& dataset, const std::vector<FilterPredicate>& filters, std::vector<Violation>& out) {
    const auto before = out.size();
    for (std::size_t i = 0; i < filters.size(); ++i) {
        const auto& p = filters[i];
        const auto where = "filters[" + std::to_string(i) + "]";
        const bool by_total = p.field == kCountTotalField;
        const FieldSpec* spec = by_total ? nullptr : dataset.meta(p.axis).field(p.field);
        if (!by_total && !spec) {
            out.push_back({where, "unknown " + std::string(to_string(p.axis)) + " field '" + p.field + "'"});
            continue;
        }
        const bool numeric = by_total || spec->kind == FieldKind::numeric;
        if (p.op == FilterOp::range) {
            if (!numeric) out.push_back({where, "range filter on non-numeric field '" + p.field + "'"});
            continue;
        }
        if (p.op == FilterOp::equals && p.values.size() != 1) {
            out.push_back({where, "equals takes exactly one operand"});
            continue;
        }
        for (const auto& v : p.values) {
            const bool is_number = std::holds_alternative<double>(v);
            if (is_number != numeric) {
                out.push_back({where, std::string("operand kind does not match ") +
                                          (numeric ? "numeric" : "categorical") + " field '" + p.field + "'"});
                break;
            }
        }
    }
    return out.size() == before;
}

} // namespace

std::vector<Violation> validate_config(const Dataset& dataset, const ViewConfig& config) {
    std::vector<Violation> out;
    check_sort_keys(config.row_sort, dataset.sample_meta(), "row_sort", out);
    check_sort_keys(config.col_sort, dataset.cell_type_meta(), "col_sort", out);
    const bool filters_ok = check_filters(dataset, config.filters, out);

    bool group_ok = true;
    if (config.row_group_by) {
        const auto* spec = dataset.sample_meta().field(*config.row_group_by);
        if (!spec) {
            out.push_back({"row_group_by", "unknown samples field '" + *config.row_group_by + "'"});
            group_ok = false;
        } else if (spec->kind == FieldKind::numeric) {
            out.push_back({"row_group_by", "numeric field '" + *config.row_group_by + "' cannot be grouped"});
            group_ok = false;
        }
    }

    if (!is_known_colormap(config.heatmap_colormap)) {
        out.push_back({"heatmap_colormap", "unknown colormap '" + config.heatmap_colormap + "'"});
    }
    for (const auto& [id, color] : config.category_colors) {
        if (!parse_hex_color(color)) {
            out.push_back({"category_colors." + id, "'" + color + "' is not an RGB hex color"});
        }
    }

    // The remaining checks refer to the displayed view, which only exists
    // once filters and grouping resolve.
    if (!filters_ok || !group_ok) return out;
    const auto ids = displayed_ids(dataset, config);

    for (const auto& id : config.expanded_rows) {
        if (std::find(ids.rows.begin(), ids.rows.end(), id) == ids.rows.end()) {
            out.push_back({"expanded_rows", "'" + id + "' is not a displayed row"});
        }
    }
    if (config.zoom) {
        auto check_window = [&](const std::optional<Window>& w, std::size_t extent, const std::string& name) {
            if (!w) return;
            if (w->empty()) {
                out.push_back({"zoom." + name, "empty zoom window"});
            } else if (w->end > extent) {
                out.push_back({"zoom." + name, "zoom window [" + std::to_string(w->start) + ", " +
                                                   std::to_string(w->end) + ") exceeds " + std::to_string(extent) +
                                                   " displayed entries"});
            }
        };
        check_window(config.zoom->row_window, ids.rows.size(), "row_window");
        check_window(config.zoom->col_window, ids.cols.size(), "col_window");
    }
    return out;
}

} // namespace cellpop
