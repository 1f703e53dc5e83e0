#include "cellpop/stats.hpp"

#include "cellpop/csv.hpp"
#include "cellpop/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace cellpop {

std::vector<CountsMatrix::Count> axis_totals(const CountsMatrix& matrix, Axis axis) {
    if (axis == Axis::samples) {
        std::vector<CountsMatrix::Count> out(matrix.rows(), 0);
        for (std::size_t r = 0; r < matrix.rows(); ++r) {
            for (auto v : matrix.row(r)) out[r] += v;
        }
        return out;
    }
    std::vector<CountsMatrix::Count> out(matrix.cols(), 0);
    for (std::size_t r = 0; r < matrix.rows(); ++r) {
        const auto row = matrix.row(r);
        for (std::size_t c = 0; c < matrix.cols(); ++c) out[c] += row[c];
    }
    return out;
}

std::vector<std::size_t> presence_counts(const CountsMatrix& matrix) {
    std::vector<std::size_t> out(matrix.cols(), 0);
    for (std::size_t r = 0; r < matrix.rows(); ++r) {
        const auto row = matrix.row(r);
        for (std::size_t c = 0; c < matrix.cols(); ++c) out[c] += row[c] > 0 ? 1 : 0;
    }
    return out;
}

double fraction_of_total(const CountsMatrix& matrix, const std::string& col_id) {
    const auto c = matrix.col_index(col_id);
    if (!c) throw Error(ErrorCode::UnknownEntity, "unknown cell type '" + col_id + "'");
    const auto totals = axis_totals(matrix, Axis::cell_types);
    CountsMatrix::Count grand = 0;
    for (auto t : totals) grand += t;
    if (grand == 0) throw Error(ErrorCode::ZeroGrandTotal, "matrix has no counts");
    return static_cast<double>(totals[*c]) / static_cast<double>(grand);
}

// ---------------------------------------------------------------------------

namespace {

// Linear interpolation between order statistics (the usual "type 7" quantile).
double quantile_sorted(const std::vector<double>& sorted, double p) {
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

} // namespace

double silverman_bandwidth(std::span<const double> values) {
    const auto n = static_cast<double>(values.size());
    double mean = 0;
    for (double v : values) mean += v;
    mean /= n;
    double ss = 0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / (n - 1.0));

    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);

    const double scale = std::pow(n, -0.2);
    const double h = 0.9 * std::min(sd, iqr / 1.34) * scale;
    return h > 0 ? h : sd * scale;
}

DensityCurve kde(std::span<const double> values, std::size_t grid_size) {
    if (values.size() < 2) throw Error(ErrorCode::TooFewValues, "density estimation needs at least two values");
    if (grid_size < kMinDensityGrid) {
        throw Error(ErrorCode::InvalidArgument, "density grid needs at least " + std::to_string(kMinDensityGrid) + " points");
    }
    for (double v : values) {
        if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "density input must be finite");
    }
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    if (lo == hi) throw Error(ErrorCode::Degenerate, "all values are equal");

    DensityCurve curve;
    curve.n = values.size();
    curve.bandwidth = silverman_bandwidth(values);
    const double h = curve.bandwidth;
    const double start = lo - 3.0 * h;
    const double stop = hi + 3.0 * h;
    const double step = (stop - start) / static_cast<double>(grid_size - 1);
    const double norm = 1.0 / (static_cast<double>(curve.n) * h * std::sqrt(2.0 * std::numbers::pi));

    curve.grid.resize(grid_size);
    curve.density.resize(grid_size);
    for (std::size_t i = 0; i < grid_size; ++i) {
        const double g = i + 1 == grid_size ? stop : start + step * static_cast<double>(i);
        double sum = 0;
        for (double x : values) {
            const double z = (g - x) / h;
            sum += std::exp(-0.5 * z * z);
        }
        curve.grid[i] = g;
        curve.density[i] = norm * sum;
    }
    return curve;
}

double trapezoid(const DensityCurve& curve) {
    double area = 0;
    for (std::size_t i = 1; i < curve.grid.size(); ++i) {
        area += 0.5 * (curve.density[i] + curve.density[i - 1]) * (curve.grid[i] - curve.grid[i - 1]);
    }
    return area;
}

// ---------------------------------------------------------------------------

UniqueTypeSummary unique_type_summary(const std::vector<const Dataset*>& datasets) {
    if (datasets.empty()) throw Error(ErrorCode::EmptyInput, "no datasets to summarize");
    UniqueTypeSummary summary;
    double sum = 0;
    for (const auto* d : datasets) {
        const auto totals = axis_totals(d->counts(), Axis::cell_types);
        const auto present = static_cast<std::size_t>(std::count_if(totals.begin(), totals.end(), [](auto t) { return t > 0; }));
        summary.entries.push_back({d->name(), present});
        sum += static_cast<double>(present);
    }
    summary.mean = sum / static_cast<double>(datasets.size());
    return summary;
}

std::string summary_csv(const UniqueTypeSummary& summary) {
    std::string out = "dataset,name,unique_cell_types\n";
    for (std::size_t i = 0; i < summary.entries.size(); ++i) {
        out += std::to_string(i + 1) + "," + csv::escape(summary.entries[i].name) + "," +
               std::to_string(summary.entries[i].unique_cell_types) + "\n";
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", summary.mean);
    out += std::string("mean,,") + buf + "\n";
    return out;
}

} // namespace cellpop
