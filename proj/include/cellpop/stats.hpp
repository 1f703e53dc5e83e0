#ifndef CELLPOP_STATS_HPP
#define CELLPOP_STATS_HPP

#include "cellpop/model.hpp"

#include <span>
#include <string>
#include <vector>

namespace cellpop {

/// Per-row (Axis::samples) or per-column (Axis::cell_types) sums of raw counts.
std::vector<CountsMatrix::Count> axis_totals(const CountsMatrix& matrix, Axis axis);

/// Number of rows with a strictly positive count, per column.
std::vector<std::size_t> presence_counts(const CountsMatrix& matrix);

/// Column total over grand total. Throws Error(ZeroGrandTotal) or Error(UnknownEntity).
double fraction_of_total(const CountsMatrix& matrix, const std::string& col_id);

struct DensityCurve {
    std::vector<double> grid;    ///< ascending evaluation points
    std::vector<double> density; ///< same length as grid
    double bandwidth = 0;
    std::size_t n = 0;

    bool operator==(const DensityCurve&) const = default;
};

inline constexpr std::size_t kMinDensityGrid = 64;

/// Silverman's rule of thumb: 0.9 * min(sd, IQR / 1.34) * n^(-1/5), falling
/// back to sd * n^(-1/5) when the robust spread is zero. `sd` uses n - 1.
double silverman_bandwidth(std::span<const double> values);

/**
 * Gaussian kernel density estimate on `grid_size` uniform points spanning
 * [min - 3h, max + 3h].
 *
 * Throws Error(TooFewValues) for fewer than two values, Error(Degenerate)
 * when all values are equal and Error(InvalidArgument) for grids below 64 points.
 */
DensityCurve kde(std::span<const double> values, std::size_t grid_size = 128);

/// Trapezoidal integral of a density curve over its grid.
double trapezoid(const DensityCurve& curve);

struct UniqueTypeSummary {
    struct Entry {
        std::string name;
        std::size_t unique_cell_types = 0;
    };
    std::vector<Entry> entries;
    double mean = 0;
};

/// Number of cell types with a positive column total, per dataset, and their mean.
/// Throws Error(EmptyInput) for an empty list.
UniqueTypeSummary unique_type_summary(const std::vector<const Dataset*>& datasets);

/// CSV: `dataset,name,unique_cell_types`, one line per dataset (1-based
/// ordinal, name, count), then `mean,,<mean to 2 decimals>`.
std::string summary_csv(const UniqueTypeSummary& summary);

} // namespace cellpop

#endif
