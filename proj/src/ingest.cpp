#include "cellpop/ingest.hpp"

#include "cellpop/csv.hpp"
#include "cellpop/error.hpp"
#include "cellpop/zarr.hpp"

#include "json.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace cellpop {

namespace fs = std::filesystem;

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

std::optional<std::int64_t> parse_int(std::string_view s) {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

std::optional<double> parse_decimal(std::string_view s) {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

std::optional<int> hierarchy_level_of(std::string_view name) {
    constexpr std::string_view prefix = "level_";
    if (name.substr(0, prefix.size()) != prefix) return std::nullopt;
    auto digits = name.substr(prefix.size());
    int level = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), level);
    if (digits.empty() || ec != std::errc{} || ptr != digits.data() + digits.size() || level < 1) return std::nullopt;
    return level;
}

std::string read_stream(std::istream& in) { return {std::istreambuf_iterator<char>(in), {}}; }

} // namespace

// ---------------------------------------------------------------------------

CountsMatrix parse_counts_csv(std::string_view text) {
    const auto records = csv::parse(text);
    if (records.empty()) throw Error(ErrorCode::EmptyFile, "counts file is empty");

    const auto& header = records.front();
    if (header.fields.size() < 2) {
        throw Error(ErrorCode::EmptyHeader, "counts header needs a row-axis name and at least one column id",
                    header.line);
    }
    std::vector<std::string> col_ids(header.fields.begin() + 1, header.fields.end());
    std::unordered_set<std::string_view> seen_cols;
    for (const auto& id : col_ids) {
        if (id.empty()) throw Error(ErrorCode::EmptyHeader, "empty column id in header", header.line);
        if (!seen_cols.insert(id).second) {
            throw Error(ErrorCode::DuplicateId, "duplicate cell_types id '" + id + "'", header.line);
        }
    }
    if (records.size() < 2) throw Error(ErrorCode::EmptyFile, "counts file has no data rows", header.line);

    std::vector<std::string> row_ids;
    std::vector<CountsMatrix::Count> values;
    row_ids.reserve(records.size() - 1);
    values.reserve((records.size() - 1) * col_ids.size());
    std::unordered_set<std::string> seen_rows;

    for (std::size_t i = 1; i < records.size(); ++i) {
        const auto& rec = records[i];
        if (rec.fields.size() != col_ids.size() + 1) {
            throw Error(ErrorCode::RaggedRow,
                        "line " + std::to_string(rec.line) + " has " + std::to_string(rec.fields.size()) +
                            " cells, expected " + std::to_string(col_ids.size() + 1),
                        rec.line);
        }
        const auto& id = rec.fields.front();
        if (id.empty()) throw Error(ErrorCode::InvalidArgument, "empty row id", rec.line);
        if (!seen_rows.insert(id).second) {
            throw Error(ErrorCode::DuplicateId, "duplicate samples id '" + id + "'", rec.line);
        }
        for (std::size_t c = 0; c < col_ids.size(); ++c) {
            const auto& cell = rec.fields[c + 1];
            auto v = parse_int(cell);
            if (!v) {
                throw Error(ErrorCode::NonNumericCell,
                            "non-numeric count '" + cell + "' at (" + id + ", " + col_ids[c] + ")", rec.line);
            }
            if (*v < 0) {
                throw Error(ErrorCode::NegativeCount, "negative count at (" + id + ", " + col_ids[c] + ")", rec.line);
            }
            values.push_back(*v);
        }
        row_ids.push_back(id);
    }
    return CountsMatrix(std::move(row_ids), std::move(col_ids), std::move(values));
}

CountsMatrix parse_counts_csv(std::istream& in) { return parse_counts_csv(read_stream(in)); }

std::string write_counts_csv(const CountsMatrix& matrix, std::string_view row_axis_name) {
    std::string out;
    std::vector<std::string> header{std::string(row_axis_name)};
    header.insert(header.end(), matrix.col_ids().begin(), matrix.col_ids().end());
    out += csv::join(header);
    out += '\n';
    for (std::size_t r = 0; r < matrix.rows(); ++r) {
        out += csv::escape(matrix.row_ids()[r]);
        for (auto v : matrix.row(r)) {
            out += ',';
            out += std::to_string(v);
        }
        out += '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------

CellTable parse_cells_csv(std::string_view text) {
    const auto records = csv::parse(text);
    if (records.empty()) throw Error(ErrorCode::EmptyFile, "cells file is empty");
    const auto& header = records.front();
    std::optional<std::size_t> sample_col, type_col;
    for (std::size_t i = 0; i < header.fields.size(); ++i) {
        if (header.fields[i] == "sample") sample_col = i;
        if (header.fields[i] == "cell_type") type_col = i;
    }
    if (!sample_col || !type_col) {
        throw Error(ErrorCode::MissingKey, "cells header must contain 'sample' and 'cell_type' columns", header.line);
    }
    CellTable table;
    table.rows.reserve(records.size() - 1);
    for (std::size_t i = 1; i < records.size(); ++i) {
        const auto& rec = records[i];
        if (rec.fields.size() != header.fields.size()) {
            throw Error(ErrorCode::RaggedRow,
                        "line " + std::to_string(rec.line) + " has " + std::to_string(rec.fields.size()) +
                            " cells, expected " + std::to_string(header.fields.size()),
                        rec.line);
        }
        const auto& s = rec.fields[*sample_col];
        const auto& t = rec.fields[*type_col];
        if (s.empty() || t.empty()) throw Error(ErrorCode::InvalidArgument, "empty sample or cell_type id", rec.line);
        table.rows.push_back({s, t});
    }
    return table;
}

CountsMatrix aggregate_cell_table(const CellTable& table) {
    if (table.rows.empty()) throw Error(ErrorCode::EmptyTable, "cell table has no rows");

    std::vector<std::string> row_ids, col_ids;
    std::unordered_map<std::string, std::size_t> row_index, col_index;
    std::vector<std::pair<std::size_t, std::size_t>> cells;
    cells.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        if (row.sample_id.empty() || row.cell_type_id.empty()) {
            throw Error(ErrorCode::InvalidArgument, "cell table contains an empty id");
        }
        auto [ri, r_new] = row_index.try_emplace(row.sample_id, row_ids.size());
        if (r_new) row_ids.push_back(row.sample_id);
        auto [ci, c_new] = col_index.try_emplace(row.cell_type_id, col_ids.size());
        if (c_new) col_ids.push_back(row.cell_type_id);
        cells.emplace_back(ri->second, ci->second);
    }
    std::vector<CountsMatrix::Count> values(row_ids.size() * col_ids.size(), 0);
    for (auto [r, c] : cells) ++values[r * col_ids.size() + c];
    return CountsMatrix(std::move(row_ids), std::move(col_ids), std::move(values));
}

// ---------------------------------------------------------------------------

MetadataTable parse_metadata_csv(std::string_view text, Axis axis) {
    const auto records = csv::parse(text);
    if (records.empty()) throw Error(ErrorCode::EmptyHeader, "metadata file has no header");
    const auto& header = records.front();
    if (header.fields.empty() || header.fields.front().empty()) {
        throw Error(ErrorCode::EmptyHeader, "metadata header has no id column", header.line);
    }
    const std::size_t nfields = header.fields.size() - 1;
    std::vector<std::string> names(header.fields.begin() + 1, header.fields.end());
    for (const auto& n : names) {
        if (n.empty()) throw Error(ErrorCode::EmptyHeader, "empty metadata field name", header.line);
    }

    std::vector<std::string> ids;
    std::vector<std::vector<std::string>> raw(nfields);
    std::unordered_set<std::string> seen;
    for (std::size_t i = 1; i < records.size(); ++i) {
        const auto& rec = records[i];
        if (rec.fields.size() != header.fields.size()) {
            throw Error(ErrorCode::RaggedRow,
                        "line " + std::to_string(rec.line) + " has " + std::to_string(rec.fields.size()) +
                            " cells, expected " + std::to_string(header.fields.size()),
                        rec.line);
        }
        const auto& id = rec.fields.front();
        if (id.empty()) throw Error(ErrorCode::InvalidArgument, "empty metadata id", rec.line);
        if (!seen.insert(id).second) {
            throw Error(ErrorCode::DuplicateId, "duplicate " + std::string(to_string(axis)) + " id '" + id + "'",
                        rec.line);
        }
        ids.push_back(id);
        for (std::size_t f = 0; f < nfields; ++f) raw[f].push_back(rec.fields[f + 1]);
    }

    std::vector<FieldSpec> fields;
    std::vector<std::vector<MetaValue>> columns;
    for (std::size_t f = 0; f < nfields; ++f) {
        FieldSpec spec{names[f], FieldKind::categorical, 0};
        if (auto level = hierarchy_level_of(names[f])) {
            spec.kind = FieldKind::hierarchy_level;
            spec.level = *level;
        } else {
            bool any = false;
            bool all_numeric = true;
            for (const auto& v : raw[f]) {
                if (v.empty()) continue;
                any = true;
                if (!parse_decimal(v)) {
                    all_numeric = false;
                    break;
                }
            }
            if (any && all_numeric) spec.kind = FieldKind::numeric;
        }
        std::vector<MetaValue> col;
        col.reserve(raw[f].size());
        for (const auto& v : raw[f]) {
            if (v.empty()) {
                col.emplace_back(Missing{});
            } else if (spec.kind == FieldKind::numeric) {
                col.emplace_back(*parse_decimal(v));
            } else {
                col.emplace_back(v);
            }
        }
        fields.push_back(std::move(spec));
        columns.push_back(std::move(col));
    }
    return MetadataTable(axis, std::move(ids), std::move(fields), std::move(columns));
}

MetadataTable parse_metadata_csv(std::istream& in, Axis axis) { return parse_metadata_csv(read_stream(in), axis); }

Dataset assemble_dataset(CountsMatrix counts, std::optional<MetadataTable> sample_meta,
                         std::optional<MetadataTable> cell_type_meta, std::string name, std::string source_descriptor) {
    return Dataset(std::move(counts), sample_meta ? std::move(*sample_meta) : MetadataTable(Axis::samples),
                   cell_type_meta ? std::move(*cell_type_meta) : MetadataTable(Axis::cell_types), std::move(name),
                   std::move(source_descriptor));
}

// ---------------------------------------------------------------------------

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

namespace {

template <typename F>
auto with_path(const fs::path& path, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const Error& e) {
        throw Error(e.code(), path.string() + (e.line() ? ":" + std::to_string(*e.line()) : "") + ": " + e.what(),
                    e.line());
    }
}

std::optional<fs::path> find_zarr_store(const fs::path& dir) {
    if (zarr::is_group(dir)) return dir;
    std::vector<fs::path> candidates;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_directory() && zarr::is_group(entry.path())) candidates.push_back(entry.path());
    }
    if (candidates.empty()) return std::nullopt;
    std::sort(candidates.begin(), candidates.end());
    return candidates.front();
}

AnnDataKeys read_anndata_keys(const fs::path& dir) {
    AnnDataKeys keys;
    const auto file = dir / "anndata.json";
    if (!fs::exists(file)) return keys;
    with_path(file, [&] {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(read_file(file));
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::InvalidJson, e.what());
        }
        try {
            if (j.contains("sample_key")) keys.sample_key = j.at("sample_key").get<std::string>();
            if (j.contains("type_key")) keys.type_key = j.at("type_key").get<std::string>();
            if (j.contains("metadata_keys")) keys.metadata_keys = j.at("metadata_keys").get<std::vector<std::string>>();
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::InvalidJson, e.what());
        }
        return 0;
    });
    return keys;
}

} // namespace

LoadedDataset load_dataset(const fs::path& path) {
    if (!fs::exists(path)) throw Error(ErrorCode::Io, path.string() + ": no such file or directory");

    std::vector<std::string> warnings;
    if (fs::is_regular_file(path)) {
        const auto text = read_file(path);
        auto counts = with_path(path, [&] {
            return path.filename() == "cells.csv" ? aggregate_cell_table(parse_cells_csv(text)) : parse_counts_csv(text);
        });
        const auto name = path.filename() == "cells.csv" || path.filename() == "counts.csv"
                              ? path.parent_path().filename().string()
                              : path.stem().string();
        return {assemble_dataset(std::move(counts), std::nullopt, std::nullopt, name, path.string()), {}};
    }

    const auto dir = path;
    std::string name = fs::absolute(dir).lexically_normal().filename().string();
    if (name.empty()) name = fs::absolute(dir).lexically_normal().parent_path().filename().string();

    std::optional<CountsMatrix> counts;
    std::optional<MetadataTable> sample_meta;
    std::string source;
    if (fs::exists(dir / "counts.csv")) {
        const auto file = dir / "counts.csv";
        counts = with_path(file, [&] { return parse_counts_csv(read_file(file)); });
        source = "counts.csv";
    } else if (fs::exists(dir / "cells.csv")) {
        const auto file = dir / "cells.csv";
        counts = with_path(file, [&] { return aggregate_cell_table(parse_cells_csv(read_file(file))); });
        source = "cells.csv";
    } else if (auto store = find_zarr_store(dir)) {
        const auto keys = read_anndata_keys(dir);
        auto obs = with_path(*store, [&] {
            return zarr::load_anndata_zarr(*store, keys.sample_key, keys.type_key, keys.metadata_keys);
        });
        counts = with_path(*store, [&] { return aggregate_cell_table(obs.cells); });
        if (!keys.metadata_keys.empty()) sample_meta = std::move(obs.sample_meta);
        warnings = std::move(obs.warnings);
        source = "zarr:" + fs::relative(*store, dir).string();
    } else {
        throw Error(ErrorCode::MissingKey, dir.string() + ": no counts.csv, cells.csv or zarr store");
    }

    if (fs::exists(dir / "samples.csv")) {
        const auto file = dir / "samples.csv";
        sample_meta = with_path(file, [&] { return parse_metadata_csv(read_file(file), Axis::samples); });
    }
    std::optional<MetadataTable> cell_type_meta;
    if (fs::exists(dir / "cell_types.csv")) {
        const auto file = dir / "cell_types.csv";
        cell_type_meta = with_path(file, [&] { return parse_metadata_csv(read_file(file), Axis::cell_types); });
    }
    auto dataset = with_path(dir, [&] {
        return assemble_dataset(std::move(*counts), std::move(sample_meta), std::move(cell_type_meta), name,
                                dir.string() + " (" + source + ")");
    });
    return {std::move(dataset), std::move(warnings)};
}

bool is_dataset_dir(const fs::path& dir) {
    return fs::is_directory(dir) && (fs::exists(dir / "counts.csv") || fs::exists(dir / "cells.csv") || find_zarr_store(dir));
}

std::vector<fs::path> discover_datasets(const fs::path& data_dir) {
    std::vector<fs::path> out;
    if (!fs::is_directory(data_dir)) return out;
    for (const auto& entry : fs::directory_iterator(data_dir)) {
        if (is_dataset_dir(entry.path())) out.push_back(entry.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace cellpop
