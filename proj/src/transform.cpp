#include "cellpop/transform.hpp"

#include "cellpop/config_json.hpp"
#include "cellpop/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <unordered_map>

namespace cellpop {

namespace {

std::vector<CountsMatrix::Count> row_totals(const CountsMatrix& m) {
    std::vector<CountsMatrix::Count> t(m.rows(), 0);
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (auto v : m.row(r)) t[r] += v;
    }
    return t;
}

std::vector<CountsMatrix::Count> col_totals(const CountsMatrix& m) {
    std::vector<CountsMatrix::Count> t(m.cols(), 0);
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const auto row = m.row(r);
        for (std::size_t c = 0; c < m.cols(); ++c) t[c] += row[c];
    }
    return t;
}

bool value_equals(const MetaValue& v, const FilterValue& operand) {
    if (const auto* s = std::get_if<std::string>(&v)) {
        const auto* o = std::get_if<std::string>(&operand);
        return o && *o == *s;
    }
    if (const auto* d = std::get_if<double>(&v)) {
        const auto* o = std::get_if<double>(&operand);
        return o && *o == *d;
    }
    return false;
}

bool in_range(double x, const Range& range) {
    if (range.inclusive) {
        if (range.min && x < *range.min) return false;
        if (range.max && x > *range.max) return false;
    } else {
        if (range.min && x <= *range.min) return false;
        if (range.max && x >= *range.max) return false;
    }
    return true;
}

bool matches(const FilterPredicate& p, const MetaValue& value) {
    if (is_missing(value)) return p.missing_policy == MissingPolicy::include;
    switch (p.op) {
    case FilterOp::equals: return !p.values.empty() && value_equals(value, p.values.front());
    case FilterOp::in_set:
        return std::any_of(p.values.begin(), p.values.end(), [&](const auto& o) { return value_equals(value, o); });
    case FilterOp::range: {
        const auto* d = std::get_if<double>(&value);
        return d && in_range(*d, p.range);
    }
    }
    return false;
}

std::vector<bool> axis_mask(const Dataset& dataset, Axis axis, const std::vector<FilterPredicate>& predicates) {
    const auto& ids = axis == Axis::samples ? dataset.counts().row_ids() : dataset.counts().col_ids();
    std::vector<bool> keep(ids.size(), true);
    std::vector<CountsMatrix::Count> totals;
    const auto& meta = dataset.meta(axis);
    for (const auto& p : predicates) {
        if (p.axis != axis) continue;
        const bool by_total = p.field == kCountTotalField;
        if (by_total) {
            if (totals.empty()) {
                totals = axis == Axis::samples ? row_totals(dataset.counts()) : col_totals(dataset.counts());
            }
        } else if (!meta.field(p.field)) {
            throw Error(ErrorCode::UnknownField, "unknown " + std::string(to_string(axis)) + " field '" + p.field + "'");
        }
        for (std::size_t i = 0; i < ids.size(); ++i) {
            if (!keep[i]) continue;
            const MetaValue v = by_total ? MetaValue(static_cast<double>(totals[i])) : meta.value(ids[i], p.field);
            keep[i] = matches(p, v);
        }
    }
    return keep;
}

std::string fold_case(const std::string& s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

// Three-way compare of metadata values with missing always ordered last by
// the caller; numbers order before strings if a field ever mixes them.
int compare_present(const MetaValue& a, const MetaValue& b) {
    const auto* da = std::get_if<double>(&a);
    const auto* db = std::get_if<double>(&b);
    if (da && db) return *da < *db ? -1 : (*db < *da ? 1 : 0);
    if (da) return -1;
    if (db) return 1;
    const auto& sa = std::get<std::string>(a);
    const auto& sb = std::get<std::string>(b);
    return sa < sb ? -1 : (sb < sa ? 1 : 0);
}

template <typename T>
std::vector<T> permute(const std::vector<T>& v, const std::vector<std::size_t>& order) {
    std::vector<T> out;
    out.reserve(order.size());
    for (auto i : order) out.push_back(v[i]);
    return out;
}

std::vector<std::size_t> positions(const std::vector<std::string>& ids, const std::vector<std::string>& order) {
    std::unordered_map<std::string_view, std::size_t> index;
    index.reserve(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) index.emplace(ids[i], i);
    std::vector<std::size_t> out;
    out.reserve(order.size());
    for (const auto& id : order) out.push_back(index.at(id));
    return out;
}

} // namespace

// ---------------------------------------------------------------------------

CountsMatrix apply_filters(const Dataset& dataset, const std::vector<FilterPredicate>& predicates) {
    const auto& m = dataset.counts();
    if (predicates.empty()) return m;
    const auto keep_rows = axis_mask(dataset, Axis::samples, predicates);
    const auto keep_cols = axis_mask(dataset, Axis::cell_types, predicates);

    std::vector<std::string> rows, cols;
    std::vector<std::size_t> col_src;
    for (std::size_t c = 0; c < m.cols(); ++c) {
        if (keep_cols[c]) {
            cols.push_back(m.col_ids()[c]);
            col_src.push_back(c);
        }
    }
    std::vector<CountsMatrix::Count> values;
    for (std::size_t r = 0; r < m.rows(); ++r) {
        if (!keep_rows[r]) continue;
        rows.push_back(m.row_ids()[r]);
        const auto row = m.row(r);
        for (auto c : col_src) values.push_back(row[c]);
    }
    if (rows.empty() || cols.empty()) {
        // An empty selection on either axis leaves nothing to display.
        if (rows.empty()) cols.clear();
        if (cols.empty()) rows.clear();
        values.clear();
    }
    return CountsMatrix(std::move(rows), std::move(cols), std::move(values));
}

CountsMatrix group_rows(const CountsMatrix& matrix, const MetadataTable& meta, const std::string& field) {
    const auto* spec = meta.field(field);
    if (!spec) throw Error(ErrorCode::UnknownField, "unknown samples field '" + field + "'");
    if (spec->kind == FieldKind::numeric) {
        throw Error(ErrorCode::NumericFieldNotGroupable, "field '" + field + "' is numeric and cannot be grouped");
    }
    std::vector<std::string> groups;
    std::unordered_map<std::string, std::size_t> index;
    std::vector<std::size_t> group_of(matrix.rows());
    for (std::size_t r = 0; r < matrix.rows(); ++r) {
        const auto& v = meta.value(matrix.row_ids()[r], field);
        const auto* s = std::get_if<std::string>(&v);
        const std::string label = s ? *s : std::string(kUnassignedGroup);
        auto [it, inserted] = index.try_emplace(label, groups.size());
        if (inserted) groups.push_back(label);
        group_of[r] = it->second;
    }
    std::vector<CountsMatrix::Count> values(groups.size() * matrix.cols(), 0);
    for (std::size_t r = 0; r < matrix.rows(); ++r) {
        const auto row = matrix.row(r);
        auto* dst = values.data() + group_of[r] * matrix.cols();
        for (std::size_t c = 0; c < matrix.cols(); ++c) dst[c] += row[c];
    }
    return CountsMatrix(std::move(groups), matrix.col_ids(), std::move(values));
}

ValueMatrix normalize(const CountsMatrix& matrix, Normalization mode) {
    ValueMatrix out;
    out.row_ids = matrix.row_ids();
    out.col_ids = matrix.col_ids();
    out.values.assign(matrix.values().begin(), matrix.values().end());
    const auto nr = matrix.rows();
    const auto nc = matrix.cols();
    switch (mode) {
    case Normalization::none: out.base_kind = ValueKind::raw_count; break;
    case Normalization::row_proportion: {
        out.base_kind = ValueKind::row_proportion;
        const auto totals = row_totals(matrix);
        for (std::size_t r = 0; r < nr; ++r) {
            if (totals[r] == 0) continue;
            const double t = static_cast<double>(totals[r]);
            for (std::size_t c = 0; c < nc; ++c) out.values[r * nc + c] /= t;
        }
        break;
    }
    case Normalization::col_proportion: {
        out.base_kind = ValueKind::col_proportion;
        const auto totals = col_totals(matrix);
        for (std::size_t r = 0; r < nr; ++r) {
            for (std::size_t c = 0; c < nc; ++c) {
                if (totals[c] != 0) out.values[r * nc + c] /= static_cast<double>(totals[c]);
            }
        }
        break;
    }
    }
    return out;
}

ValueMatrix log_scale(ValueMatrix values) {
    for (auto& v : values.values) v = std::log10(1.0 + v);
    values.log_applied = true;
    return values;
}

// ---------------------------------------------------------------------------

std::vector<std::string> sort_axis(const std::vector<std::string>& ids, const std::vector<SortKey>& keys,
                                   const std::vector<CountsMatrix::Count>& totals, const SortContext& ctx) {
    if (totals.size() != ids.size()) throw Error(ErrorCode::InvalidArgument, "totals do not match ids");

    // Resolve each key to one comparable column before sorting.
    struct Resolved {
        SortField::Kind kind;
        Direction direction;
        std::vector<MetaValue> values; // metadata / hierarchy keys
    };
    std::vector<Resolved> resolved;
    std::vector<std::string> folded;
    for (const auto& key : keys) {
        Resolved r{key.field.kind, key.direction, {}};
        if (key.field.kind == SortField::Kind::metadata || key.field.kind == SortField::Kind::hierarchy_level) {
            const FieldSpec* spec = nullptr;
            if (ctx.meta) {
                spec = key.field.kind == SortField::Kind::metadata ? ctx.meta->field(key.field.name)
                                                                   : ctx.meta->hierarchy_field(key.field.level);
            }
            if (!spec) {
                throw Error(ErrorCode::UnknownField,
                            key.field.kind == SortField::Kind::metadata
                                ? "unknown sort field '" + key.field.name + "'"
                                : "unknown hierarchy level " + std::to_string(key.field.level));
            }
            r.values.reserve(ids.size());
            for (const auto& id : ids) {
                if (ctx.grouped_by) {
                    // Group labels only carry the value of the grouping field.
                    if (spec->name == *ctx.grouped_by && id != kUnassignedGroup) {
                        r.values.emplace_back(id);
                    } else {
                        r.values.emplace_back(Missing{});
                    }
                } else {
                    r.values.push_back(ctx.meta->value(id, spec->name));
                }
            }
        } else if (key.field.kind == SortField::Kind::alphabetical && folded.empty()) {
            folded.reserve(ids.size());
            for (const auto& id : ids) folded.push_back(fold_case(id));
        }
        resolved.push_back(std::move(r));
    }

    std::vector<std::size_t> order(ids.size());
    std::iota(order.begin(), order.end(), 0);
    auto less = [&](std::size_t a, std::size_t b) {
        for (const auto& r : resolved) {
            int cmp = 0;
            switch (r.kind) {
            case SortField::Kind::count_total: cmp = totals[a] < totals[b] ? -1 : (totals[b] < totals[a] ? 1 : 0); break;
            case SortField::Kind::alphabetical:
                cmp = folded[a].compare(folded[b]);
                if (cmp == 0) cmp = ids[a].compare(ids[b]);
                cmp = cmp < 0 ? -1 : (cmp > 0 ? 1 : 0);
                break;
            case SortField::Kind::metadata:
            case SortField::Kind::hierarchy_level: {
                const bool ma = is_missing(r.values[a]);
                const bool mb = is_missing(r.values[b]);
                if (ma || mb) {
                    if (ma != mb) return mb; // present before missing, whatever the direction
                    continue;
                }
                cmp = compare_present(r.values[a], r.values[b]);
                break;
            }
            }
            if (cmp != 0) return r.direction == Direction::asc ? cmp < 0 : cmp > 0;
        }
        return ids[a] < ids[b];
    };
    std::stable_sort(order.begin(), order.end(), less);
    return permute(ids, order);
}

std::vector<std::string> sort_axis(const std::vector<std::string>& ids, const std::vector<SortKey>& keys,
                                   const CountsMatrix& matrix, Axis axis, const MetadataTable& meta) {
    const auto all = axis == Axis::samples ? row_totals(matrix) : col_totals(matrix);
    const auto& axis_ids = axis == Axis::samples ? matrix.row_ids() : matrix.col_ids();
    const auto pos = positions(axis_ids, ids);
    return sort_axis(ids, keys, permute(all, pos), SortContext{&meta, std::nullopt});
}

// ---------------------------------------------------------------------------

DisplayedIds displayed_ids(const Dataset& dataset, const ViewConfig& config) {
    auto m = apply_filters(dataset, config.filters);
    if (config.row_group_by && !m.empty()) m = group_rows(m, dataset.sample_meta(), *config.row_group_by);
    DisplayedIds out{m.row_ids(), m.col_ids()};
    if (config.transpose) std::swap(out.rows, out.cols);
    return out;
}

DisplayedView apply_view(const Dataset& dataset, const ViewConfig& config) {
    if (auto violations = validate_config(dataset, config); !violations.empty()) {
        throw ConfigError(std::move(violations));
    }

    CountsMatrix counts = apply_filters(dataset, config.filters);
    const bool grouped = config.row_group_by.has_value() && !counts.empty();
    if (grouped) counts = group_rows(counts, dataset.sample_meta(), *config.row_group_by);

    ValueMatrix values = normalize(counts, config.normalization);
    if (config.log_applied) values = log_scale(std::move(values));

    const auto rtot = row_totals(counts);
    const auto ctot = col_totals(counts);
    const auto row_order = sort_axis(counts.row_ids(), config.row_sort, rtot,
                                     SortContext{&dataset.sample_meta(),
                                                 grouped ? config.row_group_by : std::optional<std::string>{}});
    const auto col_order = sort_axis(counts.col_ids(), config.col_sort, ctot, SortContext{&dataset.cell_type_meta(), {}});

    const auto rpos = positions(counts.row_ids(), row_order);
    const auto cpos = positions(counts.col_ids(), col_order);

    // Reorder (and optionally transpose) in one pass.
    const std::size_t nr = config.transpose ? cpos.size() : rpos.size();
    const std::size_t nc = config.transpose ? rpos.size() : cpos.size();
    std::vector<double> disp_values(nr * nc);
    std::vector<CountsMatrix::Count> disp_raw(nr * nc);
    const auto src_cols = counts.cols();
    for (std::size_t i = 0; i < rpos.size(); ++i) {
        for (std::size_t j = 0; j < cpos.size(); ++j) {
            const std::size_t src = rpos[i] * src_cols + cpos[j];
            const std::size_t dst = config.transpose ? j * nc + i : i * nc + j;
            disp_values[dst] = values.values[src];
            disp_raw[dst] = counts.values()[src];
        }
    }
    std::vector<std::string> rows = config.transpose ? col_order : row_order;
    std::vector<std::string> cols = config.transpose ? row_order : col_order;

    DisplayedView view;
    view.row_axis = config.transpose ? Axis::cell_types : Axis::samples;
    view.grouped = grouped;
    view.full_rows = rows.size();
    view.full_cols = cols.size();
    if (counts.empty()) view.warnings.push_back("filters removed every row or column");

    // Zoom slices the displayed orders.
    Window rw{0, rows.size()}, cw{0, cols.size()};
    if (config.zoom) {
        if (config.zoom->row_window) rw = *config.zoom->row_window;
        if (config.zoom->col_window) cw = *config.zoom->col_window;
    }
    std::vector<double> zv;
    std::vector<CountsMatrix::Count> zr;
    zv.reserve((rw.end - rw.start) * (cw.end - cw.start));
    zr.reserve(zv.capacity());
    for (std::size_t r = rw.start; r < rw.end; ++r) {
        for (std::size_t c = cw.start; c < cw.end; ++c) {
            zv.push_back(disp_values[r * nc + c]);
            zr.push_back(disp_raw[r * nc + c]);
        }
    }
    view.row_order.assign(rows.begin() + static_cast<std::ptrdiff_t>(rw.start),
                          rows.begin() + static_cast<std::ptrdiff_t>(rw.end));
    view.col_order.assign(cols.begin() + static_cast<std::ptrdiff_t>(cw.start),
                          cols.begin() + static_cast<std::ptrdiff_t>(cw.end));

    view.values.row_ids = view.row_order;
    view.values.col_ids = view.col_order;
    view.values.values = std::move(zv);
    view.values.base_kind = values.base_kind;
    view.values.log_applied = values.log_applied;
    view.raw = CountsMatrix(view.row_order, view.col_order, std::move(zr));
    return view;
}

} // namespace cellpop
