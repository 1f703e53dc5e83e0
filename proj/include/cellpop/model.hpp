#ifndef CELLPOP_MODEL_HPP
#define CELLPOP_MODEL_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

/**
 * @file model.hpp
 *
 * @brief Immutable dataset bundle and the declarative view configuration.
 *
 * A `Dataset` holds one samples x cell types count grid plus optional
 * per-entity metadata on both axes. A `ViewConfig` describes everything about
 * how that dataset is shown; it is a plain value compared structurally.
 */

namespace cellpop {

enum class Axis { samples, cell_types };

Axis other(Axis axis) noexcept;

/**
 * Dense row-major grid of non-negative integer counts with ordered, unique
 * axis identifiers. Rows are samples and columns cell types unless the matrix
 * came out of a transposed view.
 *
 * Zero-extent matrices are representable so that filters removing everything
 * can flow through the pipeline; `Dataset` requires at least one row and column.
 */
class CountsMatrix {
  public:
    using Count = std::int64_t;

    CountsMatrix() = default;

    /// Throws `Error(DuplicateId)` on repeated ids, `Error(NegativeCount)` on
    /// negative entries and `Error(InvalidArgument)` on a size mismatch.
    CountsMatrix(std::vector<std::string> row_ids, std::vector<std::string> col_ids, std::vector<Count> values);

    std::size_t rows() const noexcept { return row_ids_.size(); }
    std::size_t cols() const noexcept { return col_ids_.size(); }
    bool empty() const noexcept { return rows() == 0 || cols() == 0; }

    const std::vector<std::string>& row_ids() const noexcept { return row_ids_; }
    const std::vector<std::string>& col_ids() const noexcept { return col_ids_; }
    std::span<const Count> values() const noexcept { return values_; }

    Count at(std::size_t r, std::size_t c) const noexcept { return values_[r * cols() + c]; }
    std::span<const Count> row(std::size_t r) const noexcept { return {values_.data() + r * cols(), cols()}; }

    std::optional<std::size_t> row_index(const std::string& id) const;
    std::optional<std::size_t> col_index(const std::string& id) const;

    CountsMatrix transposed() const;

    bool operator==(const CountsMatrix& other) const {
        return row_ids_ == other.row_ids_ && col_ids_ == other.col_ids_ && values_ == other.values_;
    }

  private:
    std::vector<std::string> row_ids_;
    std::vector<std::string> col_ids_;
    std::vector<Count> values_;
};

enum class ValueKind { raw_count, row_proportion, col_proportion };

/// Real-valued counterpart of `CountsMatrix` produced by normalization.
/// `log_applied` composes with any base kind.
struct ValueMatrix {
    std::vector<std::string> row_ids;
    std::vector<std::string> col_ids;
    std::vector<double> values;
    ValueKind base_kind = ValueKind::raw_count;
    bool log_applied = false;

    std::size_t rows() const noexcept { return row_ids.size(); }
    std::size_t cols() const noexcept { return col_ids.size(); }
    double at(std::size_t r, std::size_t c) const noexcept { return values[r * cols() + c]; }

    bool operator==(const ValueMatrix&) const = default;
};

// ---------------------------------------------------------------------------
// Metadata

struct Missing {
    bool operator==(const Missing&) const = default;
};

/// A metadata cell: a string, a finite number or missing.
using MetaValue = std::variant<Missing, std::string, double>;

inline bool is_missing(const MetaValue& v) noexcept { return std::holds_alternative<Missing>(v); }

enum class FieldKind { categorical, numeric, hierarchy_level };

struct FieldSpec {
    std::string name;
    FieldKind kind = FieldKind::categorical;
    int level = 0; ///< 1-based, only meaningful for hierarchy_level fields

    bool operator==(const FieldSpec&) const = default;
};

/**
 * Per-entity key/value records for one axis. Storage is column-major: one
 * value vector per catalog field, aligned with `ids()`.
 */
class MetadataTable {
  public:
    explicit MetadataTable(Axis axis = Axis::samples) : axis_(axis) {}

    /// Validates uniqueness of ids, column lengths and the hierarchy prefix rule.
    MetadataTable(Axis axis, std::vector<std::string> ids, std::vector<FieldSpec> fields,
                  std::vector<std::vector<MetaValue>> columns);

    Axis axis() const noexcept { return axis_; }
    const std::vector<std::string>& ids() const noexcept { return ids_; }
    const std::vector<FieldSpec>& fields() const noexcept { return fields_; }
    bool empty() const noexcept { return ids_.empty(); }

    const FieldSpec* field(const std::string& name) const;
    const FieldSpec* hierarchy_field(int level) const;
    int hierarchy_depth() const noexcept;

    bool contains(const std::string& id) const { return index_.count(id) != 0; }

    /// Missing when either the id or the field is unknown.
    const MetaValue& value(const std::string& id, const std::string& field) const;

    /// Same table re-keyed onto `ids`; entities without a record get all-missing values.
    MetadataTable reindexed(const std::vector<std::string>& ids) const;

    bool operator==(const MetadataTable& other) const {
        return axis_ == other.axis_ && ids_ == other.ids_ && fields_ == other.fields_ && columns_ == other.columns_;
    }

  private:
    Axis axis_;
    std::vector<std::string> ids_;
    std::vector<FieldSpec> fields_;
    std::vector<std::vector<MetaValue>> columns_;
    std::unordered_map<std::string, std::size_t> index_;
    std::unordered_map<std::string, std::size_t> field_index_;
};

/// Immutable bundle of counts plus metadata for both axes.
class Dataset {
  public:
    /// Throws `Error(UnknownEntity)` when metadata names ids absent from the
    /// counts, `Error(InvalidArgument)` on an empty matrix or axis mismatch.
    Dataset(CountsMatrix counts, MetadataTable sample_meta, MetadataTable cell_type_meta, std::string name,
            std::string source_descriptor = {});

    const CountsMatrix& counts() const noexcept { return counts_; }
    const MetadataTable& sample_meta() const noexcept { return sample_meta_; }
    const MetadataTable& cell_type_meta() const noexcept { return cell_type_meta_; }
    const MetadataTable& meta(Axis axis) const noexcept {
        return axis == Axis::samples ? sample_meta_ : cell_type_meta_;
    }
    const std::string& name() const noexcept { return name_; }
    const std::string& source_descriptor() const noexcept { return source_; }

  private:
    CountsMatrix counts_;
    MetadataTable sample_meta_;
    MetadataTable cell_type_meta_;
    std::string name_;
    std::string source_;
};

// ---------------------------------------------------------------------------
// View configuration

enum class Direction { asc, desc };

struct SortField {
    enum class Kind { count_total, alphabetical, metadata, hierarchy_level };
    Kind kind = Kind::count_total;
    std::string name; ///< metadata field name
    int level = 0;    ///< hierarchy level

    static SortField count_total() { return {Kind::count_total, {}, 0}; }
    static SortField alphabetical() { return {Kind::alphabetical, {}, 0}; }
    static SortField metadata(std::string n) { return {Kind::metadata, std::move(n), 0}; }
    static SortField hierarchy(int l) { return {Kind::hierarchy_level, {}, l}; }

    bool operator==(const SortField&) const = default;
};

struct SortKey {
    SortField field;
    Direction direction = Direction::asc;

    bool operator==(const SortKey&) const = default;
};

enum class FilterOp { equals, in_set, range };
enum class MissingPolicy { exclude, include };

struct Range {
    std::optional<double> min; ///< unbounded when absent
    std::optional<double> max;
    bool inclusive = true;

    bool operator==(const Range&) const = default;
};

/// Scalar operand for equals / in_set.
using FilterValue = std::variant<std::string, double>;

struct FilterPredicate {
    Axis axis = Axis::samples;
    std::string field; ///< metadata field name or "count_total"
    FilterOp op = FilterOp::equals;
    std::vector<FilterValue> values; ///< one value for equals, a set for in_set
    Range range;
    MissingPolicy missing_policy = MissingPolicy::exclude;

    bool operator==(const FilterPredicate&) const = default;
};

inline constexpr const char* kCountTotalField = "count_total";

enum class Normalization { none, row_proportion, col_proportion };
enum class PanelKind { none, bars, stacked_bars, violins };
enum class Theme { light, dark };

/// Half-open index window [start, end) over a displayed axis order.
struct Window {
    std::size_t start = 0;
    std::size_t end = 0;

    bool empty() const noexcept { return end <= start; }
    bool operator==(const Window&) const = default;
};

struct Zoom {
    std::optional<Window> row_window;
    std::optional<Window> col_window;

    bool operator==(const Zoom&) const = default;
};

/**
 * Declarative description of one view.
 *
 * Sorts, filters, grouping and normalization refer to the data orientation
 * (rows = samples, columns = cell types). Expanded rows, side panels and zoom
 * refer to the displayed orientation, i.e. after an optional transpose.
 */
struct ViewConfig {
    Normalization normalization = Normalization::none;
    bool log_applied = false;
    bool transpose = false;
    std::vector<SortKey> row_sort;
    std::vector<SortKey> col_sort;
    std::vector<FilterPredicate> filters;
    std::optional<std::string> row_group_by;
    std::set<std::string> expanded_rows;
    PanelKind row_side_panel = PanelKind::bars;
    PanelKind col_side_panel = PanelKind::bars;
    bool heatmap_visible = true;
    std::optional<Zoom> zoom;
    Theme theme = Theme::light;
    std::string heatmap_colormap = "default";
    std::map<std::string, std::string> category_colors;

    bool operator==(const ViewConfig&) const = default;
};

ViewConfig default_config(const Dataset& dataset);

struct Violation {
    std::string field;
    std::string reason;

    bool operator==(const Violation&) const = default;
};

/// Empty iff every reference in `config` resolves against `dataset` and the view it displays.
std::vector<Violation> validate_config(const Dataset& dataset, const ViewConfig& config);

std::string_view to_string(Axis axis) noexcept;
std::string_view to_string(Direction d) noexcept;
std::string_view to_string(Normalization n) noexcept;
std::string_view to_string(PanelKind p) noexcept;
std::string_view to_string(Theme t) noexcept;
std::string_view to_string(FilterOp op) noexcept;
std::string_view to_string(MissingPolicy p) noexcept;
std::string_view to_string(ValueKind k) noexcept;

} // namespace cellpop

#endif
