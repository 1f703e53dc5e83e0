#ifndef CELLPOP_TRANSFORM_HPP
#define CELLPOP_TRANSFORM_HPP

#include "cellpop/model.hpp"

#include <string>
#include <vector>

/**
 * @file transform.hpp
 *
 * @brief The view pipeline: filter, group, normalize, log, sort, transpose, zoom.
 *
 * Every stage is a pure function over immutable inputs, so `apply_view` can
 * run concurrently for any number of sessions sharing one `Dataset`.
 */

namespace cellpop {

/// Keeps the rows and columns whose entities satisfy every predicate on their
/// axis. `count_total` predicates see the unfiltered totals. Order is preserved.
CountsMatrix apply_filters(const Dataset& dataset, const std::vector<FilterPredicate>& predicates);

/// Label given to rows whose grouping value is missing.
inline constexpr const char* kUnassignedGroup = "unassigned";

/**
 * Sums rows sharing a value of `field`. Groups appear in first-appearance
 * order of the current rows; missing values collect under "unassigned".
 * Throws Error(UnknownField) or Error(NumericFieldNotGroupable).
 */
CountsMatrix group_rows(const CountsMatrix& matrix, const MetadataTable& meta, const std::string& field);

ValueMatrix normalize(const CountsMatrix& matrix, Normalization mode);

/// x -> log10(1 + x), element-wise.
ValueMatrix log_scale(ValueMatrix values);

/// What the sorted ids are: their metadata and, for grouped rows, the field they were grouped by.
struct SortContext {
    const MetadataTable* meta = nullptr;
    std::optional<std::string> grouped_by;
};

/**
 * Stable lexicographic multi-key sort, returned as a permutation of `ids`.
 *
 * `totals[i]` is the current raw total of `ids[i]`. Missing metadata always
 * sorts last; the final implicit tiebreak is id ascending.
 * Throws Error(UnknownField) for a key that cannot be resolved.
 */
std::vector<std::string> sort_axis(const std::vector<std::string>& ids, const std::vector<SortKey>& keys,
                                   const std::vector<CountsMatrix::Count>& totals, const SortContext& context);

/// Convenience overload taking totals from `matrix` along `axis` (rows = samples).
std::vector<std::string> sort_axis(const std::vector<std::string>& ids, const std::vector<SortKey>& keys,
                                   const CountsMatrix& matrix, Axis axis, const MetadataTable& meta);

struct DisplayedView {
    ValueMatrix values; ///< displayed orientation, zoom applied
    CountsMatrix raw;   ///< raw counts in the same shape and order as `values`
    std::vector<std::string> row_order;
    std::vector<std::string> col_order;
    Axis row_axis = Axis::samples; ///< which entity kind the displayed rows are
    bool grouped = false;          ///< sample entities are group labels
    std::size_t full_rows = 0;     ///< displayed extents before zoom
    std::size_t full_cols = 0;
    std::vector<std::string> warnings;

    bool empty() const noexcept { return row_order.empty() || col_order.empty(); }
    bool operator==(const DisplayedView&) const = default;
};

/// Row and column ids in displayed orientation after filter, group and
/// transpose (unsorted, before zoom). Used for config validation.
struct DisplayedIds {
    std::vector<std::string> rows;
    std::vector<std::string> cols;
};

DisplayedIds displayed_ids(const Dataset& dataset, const ViewConfig& config);

/**
 * Runs the whole pipeline: filter -> group -> normalize -> log -> sort rows ->
 * sort cols -> transpose -> zoom. Throws Error(InvalidConfig) when
 * `validate_config` reports violations.
 */
DisplayedView apply_view(const Dataset& dataset, const ViewConfig& config);

} // namespace cellpop

#endif
