#include "cellpop/model.hpp"

#include "cellpop/error.hpp"

#include <algorithm>
#include <unordered_set>

namespace cellpop {

Axis other(Axis axis) noexcept { return axis == Axis::samples ? Axis::cell_types : Axis::samples; }

namespace {

void require_unique(const std::vector<std::string>& ids, std::string_view axis) {
    std::unordered_set<std::string_view> seen;
    seen.reserve(ids.size());
    for (const auto& id : ids) {
        if (!seen.insert(id).second) {
            throw Error(ErrorCode::DuplicateId, "duplicate " + std::string(axis) + " id '" + id + "'");
        }
    }
}

const MetaValue kMissing{Missing{}};

} // namespace

// ---------------------------------------------------------------------------

CountsMatrix::CountsMatrix(std::vector<std::string> row_ids, std::vector<std::string> col_ids, std::vector<Count> values)
    : row_ids_(std::move(row_ids)), col_ids_(std::move(col_ids)), values_(std::move(values)) {
    if (values_.size() != row_ids_.size() * col_ids_.size()) {
        throw Error(ErrorCode::InvalidArgument, "counts grid has " + std::to_string(values_.size()) +
                                                    " entries, expected " + std::to_string(row_ids_.size()) + " x " +
                                                    std::to_string(col_ids_.size()));
    }
    for (const auto& id : row_ids_) {
        if (id.empty()) throw Error(ErrorCode::InvalidArgument, "empty row id");
    }
    for (const auto& id : col_ids_) {
        if (id.empty()) throw Error(ErrorCode::InvalidArgument, "empty column id");
    }
    require_unique(row_ids_, "row");
    require_unique(col_ids_, "column");
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (values_[i] < 0) {
            const auto r = i / col_ids_.size();
            const auto c = i % col_ids_.size();
            throw Error(ErrorCode::NegativeCount, "negative count at (" + row_ids_[r] + ", " + col_ids_[c] + ")");
        }
    }
}

std::optional<std::size_t> CountsMatrix::row_index(const std::string& id) const {
    auto it = std::find(row_ids_.begin(), row_ids_.end(), id);
    if (it == row_ids_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - row_ids_.begin());
}

std::optional<std::size_t> CountsMatrix::col_index(const std::string& id) const {
    auto it = std::find(col_ids_.begin(), col_ids_.end(), id);
    if (it == col_ids_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - col_ids_.begin());
}

CountsMatrix CountsMatrix::transposed() const {
    std::vector<Count> out(values_.size());
    const auto nr = rows();
    const auto nc = cols();
    for (std::size_t r = 0; r < nr; ++r) {
        for (std::size_t c = 0; c < nc; ++c) {
            out[c * nr + r] = values_[r * nc + c];
        }
    }
    CountsMatrix t;
    t.row_ids_ = col_ids_;
    t.col_ids_ = row_ids_;
    t.values_ = std::move(out);
    return t;
}

// ---------------------------------------------------------------------------

MetadataTable::MetadataTable(Axis axis, std::vector<std::string> ids, std::vector<FieldSpec> fields,
                             std::vector<std::vector<MetaValue>> columns)
    : axis_(axis), ids_(std::move(ids)), fields_(std::move(fields)), columns_(std::move(columns)) {
    if (columns_.size() != fields_.size()) {
        throw Error(ErrorCode::InvalidArgument, "metadata has " + std::to_string(fields_.size()) + " fields but " +
                                                    std::to_string(columns_.size()) + " columns");
    }
    for (const auto& col : columns_) {
        if (col.size() != ids_.size()) {
            throw Error(ErrorCode::InvalidArgument, "metadata column length does not match record count");
        }
    }
    require_unique(ids_, to_string(axis_));
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        if (ids_[i].empty()) throw Error(ErrorCode::InvalidArgument, "empty metadata id");
        index_.emplace(ids_[i], i);
    }
    for (std::size_t f = 0; f < fields_.size(); ++f) {
        if (!field_index_.emplace(fields_[f].name, f).second) {
            throw Error(ErrorCode::DuplicateId, "duplicate metadata field '" + fields_[f].name + "'");
        }
    }

    // Hierarchy levels must form the prefix 1..k of the catalog...
    std::vector<int> levels;
    for (const auto& f : fields_) {
        if (f.kind == FieldKind::hierarchy_level) levels.push_back(f.level);
    }
    std::sort(levels.begin(), levels.end());
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (levels[i] != static_cast<int>(i) + 1) {
            throw Error(ErrorCode::NonContiguousHierarchy,
                        "hierarchy level " + std::to_string(i + 1) + " is absent while deeper levels are present");
        }
    }
    // ...and no record may skip a shallower level while holding a deeper one.
    const int depth = static_cast<int>(levels.size());
    for (std::size_t r = 0; r < ids_.size(); ++r) {
        bool gap = false;
        for (int level = 1; level <= depth; ++level) {
            const auto& v = columns_[field_index_.at(hierarchy_field(level)->name)][r];
            if (is_missing(v)) {
                gap = true;
            } else if (gap) {
                throw Error(ErrorCode::NonContiguousHierarchy,
                            "'" + ids_[r] + "' has hierarchy level " + std::to_string(level) +
                                " but is missing a shallower level");
            }
        }
    }
}

const FieldSpec* MetadataTable::field(const std::string& name) const {
    auto it = field_index_.find(name);
    return it == field_index_.end() ? nullptr : &fields_[it->second];
}

const FieldSpec* MetadataTable::hierarchy_field(int level) const {
    for (const auto& f : fields_) {
        if (f.kind == FieldKind::hierarchy_level && f.level == level) return &f;
    }
    return nullptr;
}

int MetadataTable::hierarchy_depth() const noexcept {
    int depth = 0;
    for (const auto& f : fields_) {
        if (f.kind == FieldKind::hierarchy_level) depth = std::max(depth, f.level);
    }
    return depth;
}

const MetaValue& MetadataTable::value(const std::string& id, const std::string& field) const {
    auto r = index_.find(id);
    if (r == index_.end()) return kMissing;
    auto f = field_index_.find(field);
    if (f == field_index_.end()) return kMissing;
    return columns_[f->second][r->second];
}

MetadataTable MetadataTable::reindexed(const std::vector<std::string>& ids) const {
    std::vector<std::vector<MetaValue>> cols(fields_.size(), std::vector<MetaValue>(ids.size(), kMissing));
    for (std::size_t i = 0; i < ids.size(); ++i) {
        auto r = index_.find(ids[i]);
        if (r == index_.end()) continue;
        for (std::size_t f = 0; f < fields_.size(); ++f) cols[f][i] = columns_[f][r->second];
    }
    return MetadataTable(axis_, ids, fields_, std::move(cols));
}

// ---------------------------------------------------------------------------

Dataset::Dataset(CountsMatrix counts, MetadataTable sample_meta, MetadataTable cell_type_meta, std::string name,
                 std::string source_descriptor)
    : counts_(std::move(counts)), name_(std::move(name)), source_(std::move(source_descriptor)) {
    if (counts_.rows() == 0 || counts_.cols() == 0) {
        throw Error(ErrorCode::InvalidArgument, "dataset needs at least one sample and one cell type");
    }
    if (sample_meta.axis() != Axis::samples || cell_type_meta.axis() != Axis::cell_types) {
        throw Error(ErrorCode::InvalidArgument, "metadata axis does not match its role");
    }
    auto check_subset = [](const MetadataTable& meta, const std::vector<std::string>& axis_ids) {
        std::unordered_set<std::string_view> known(axis_ids.begin(), axis_ids.end());
        std::vector<std::string> unknown;
        for (const auto& id : meta.ids()) {
            if (!known.count(id)) unknown.push_back(id);
        }
        if (!unknown.empty()) {
            std::string list;
            for (const auto& id : unknown) list += (list.empty() ? "" : ", ") + id;
            throw Error(ErrorCode::UnknownEntity,
                        "metadata for unknown " + std::string(to_string(meta.axis())) + ": " + list);
        }
    };
    check_subset(sample_meta, counts_.row_ids());
    check_subset(cell_type_meta, counts_.col_ids());
    sample_meta_ = sample_meta.reindexed(counts_.row_ids());
    cell_type_meta_ = cell_type_meta.reindexed(counts_.col_ids());
}

// ---------------------------------------------------------------------------

ViewConfig default_config(const Dataset&) {
    ViewConfig config;
    config.row_sort = {SortKey{SortField::count_total(), Direction::desc}};
    config.col_sort = {SortKey{SortField::count_total(), Direction::desc}};
    return config;
}

std::string_view to_string(Axis axis) noexcept { return axis == Axis::samples ? "samples" : "cell_types"; }

std::string_view to_string(Direction d) noexcept { return d == Direction::asc ? "asc" : "desc"; }

std::string_view to_string(Normalization n) noexcept {
    switch (n) {
    case Normalization::none: return "none";
    case Normalization::row_proportion: return "row_proportion";
    case Normalization::col_proportion: return "col_proportion";
    }
    return "none";
}

std::string_view to_string(PanelKind p) noexcept {
    switch (p) {
    case PanelKind::none: return "none";
    case PanelKind::bars: return "bars";
    case PanelKind::stacked_bars: return "stacked_bars";
    case PanelKind::violins: return "violins";
    }
    return "none";
}

std::string_view to_string(Theme t) noexcept { return t == Theme::light ? "light" : "dark"; }

std::string_view to_string(FilterOp op) noexcept {
    switch (op) {
    case FilterOp::equals: return "equals";
    case FilterOp::in_set: return "in_set";
    case FilterOp::range: return "range";
    }
    return "equals";
}

std::string_view to_string(MissingPolicy p) noexcept { return p == MissingPolicy::exclude ? "exclude" : "include"; }

std::string_view to_string(ValueKind k) noexcept {
    switch (k) {
    case ValueKind::raw_count: return "raw_count";
    case ValueKind::row_proportion: return "row_proportion";
    case ValueKind::col_proportion: return "col_proportion";
    }
    return "raw_count";
}

} // namespace cellpop
