#ifndef CELLPOP_INGEST_HPP
#define CELLPOP_INGEST_HPP

#include "cellpop/model.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cellpop {

struct CellRow {
    std::string sample_id;
    std::string cell_type_id;

    bool operator==(const CellRow&) const = default;
};

/// Long-format per-cell annotations; row order carries no meaning.
struct CellTable {
    std::vector<CellRow> rows;
};

/// Header: row-axis name then column ids. Each line: row id then one
/// non-negative integer per column.
CountsMatrix parse_counts_csv(std::string_view text);
CountsMatrix parse_counts_csv(std::istream& in);

/// Inverse of parse_counts_csv; `row_axis_name` becomes the first header cell.
std::string write_counts_csv(const CountsMatrix& matrix, std::string_view row_axis_name = "sample");

/// Header must name `sample` and `cell_type` columns; other columns are ignored.
CellTable parse_cells_csv(std::string_view text);

/// Per-(sample, cell type) cardinalities; both axes in first-appearance order.
CountsMatrix aggregate_cell_table(const CellTable& table);

/// Header: id column then field names. A column is numeric iff every
/// non-empty value is a finite decimal; `level_<i>` columns are hierarchy levels.
MetadataTable parse_metadata_csv(std::string_view text, Axis axis);
MetadataTable parse_metadata_csv(std::istream& in, Axis axis);

Dataset assemble_dataset(CountsMatrix counts, std::optional<MetadataTable> sample_meta,
                         std::optional<MetadataTable> cell_type_meta, std::string name,
                         std::string source_descriptor = {});

/// Options for a zarr-backed dataset directory, read from `anndata.json` when present.
struct AnnDataKeys {
    std::string sample_key = "sample";
    std::string type_key = "cell_type";
    std::vector<std::string> metadata_keys;
};

struct LoadedDataset {
    Dataset dataset;
    std::vector<std::string> warnings;
};

/**
 * Loads one dataset from a directory (or a single CSV file).
 *
 * Directory precedence is counts.csv, then cells.csv, then a zarr store (the
 * directory itself or a child directory holding `.zgroup`). Optional
 * samples.csv and cell_types.csv supply metadata. The dataset is named after
 * the directory (or the file stem).
 *
 * Errors are rethrown with the offending file path prefixed to the message.
 */
LoadedDataset load_dataset(const std::filesystem::path& path);

/// True when `dir` holds counts.csv, cells.csv or a zarr store.
bool is_dataset_dir(const std::filesystem::path& dir);

/// Every immediate subdirectory that holds a loadable dataset, sorted by name.
std::vector<std::filesystem::path> discover_datasets(const std::filesystem::path& data_dir);

std::string read_file(const std::filesystem::path& path);

} // namespace cellpop

#endif
