#ifndef CELLPOP_ZARR_HPP
#define CELLPOP_ZARR_HPP

#include "cellpop/ingest.hpp"
#include "cellpop/model.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

/**
 * @file zarr.hpp
 *
 * @brief Reader for the subset of zarr v2 used by AnnData `obs` annotations.
 *
 * Supported: C order, compressors none / zlib / gzip, integer, float, bool,
 * fixed-width unicode / bytes and vlen-utf8 object arrays. Anything else
 * (blosc, zstd, F order, zarr v3) is rejected with a typed error.
 */

namespace cellpop::zarr {

enum class DtypeKind { signed_int, unsigned_int, floating, boolean, unicode, bytes, vlen_utf8 };

struct Dtype {
    DtypeKind kind = DtypeKind::signed_int;
    std::size_t item_size = 0; ///< bytes per element; 0 for vlen
    bool big_endian = false;
    std::string text;          ///< as written in .zarray

    bool is_numeric() const noexcept {
        return kind == DtypeKind::signed_int || kind == DtypeKind::unsigned_int || kind == DtypeKind::floating ||
               kind == DtypeKind::boolean;
    }
};

enum class Compressor { none, zlib, gzip };

struct ArrayHeader {
    std::vector<std::size_t> shape;
    std::vector<std::size_t> chunks;
    Dtype dtype;
    Compressor compressor = Compressor::none;
    nlohmann::json fill_value;
    char dimension_separator = '.';

    std::size_t element_count() const noexcept;
    std::size_t chunk_element_count() const noexcept;
};

/// Parses and validates a `.zarray` document. `where` names the array in errors.
ArrayHeader parse_array_header(const nlohmann::json& zarray, const std::string& where);

Dtype parse_dtype(const nlohmann::json& dtype, const nlohmann::json& filters, const std::string& where);

/// Decoded contents of one array, flattened in C order.
using ArrayData = std::variant<std::vector<std::int64_t>, std::vector<double>, std::vector<std::string>>;

/// Inflates a zlib (RFC 1950) or gzip (RFC 1952) stream. Throws Error(CorruptChunk).
std::vector<std::uint8_t> inflate(const std::vector<std::uint8_t>& compressed, Compressor kind, std::size_t size_hint,
                                  const std::string& where);

/// Decodes a vlen-utf8 buffer (u32 count, then u32 length + bytes per item).
std::vector<std::string> decode_vlen_utf8(const std::vector<std::uint8_t>& buffer, const std::string& where);

class Array {
  public:
    /// Throws Error(MissingKey) when `path/.zarray` does not exist.
    explicit Array(std::filesystem::path path);

    const ArrayHeader& header() const noexcept { return header_; }
    const std::filesystem::path& path() const noexcept { return path_; }

    /// Missing chunk files take the fill value.
    ArrayData read() const;

    std::vector<std::int64_t> read_integers() const;
    std::vector<std::string> read_strings() const;

  private:
    std::filesystem::path path_;
    ArrayHeader header_;
};

bool is_array(const std::filesystem::path& path);
bool is_group(const std::filesystem::path& path);

/// `.zattrs` of a node, or an empty object when absent.
nlohmann::json read_attributes(const std::filesystem::path& path);

/// One obs column resolved to per-cell values; `codes` is -1 where the cell has no value.
struct ObsColumn {
    std::vector<std::int64_t> codes;
    std::vector<MetaValue> categories;
    bool numeric = false;
};

/**
 * Reads `obs/<key>` in any of the AnnData encodings: categorical group
 * (codes + categories), legacy categorical (codes array + `obs/__categories/<key>`),
 * plain string array, or plain numeric array.
 */
ObsColumn read_obs_column(const std::filesystem::path& root, const std::string& key);

struct AnnDataObs {
    CellTable cells;
    MetadataTable sample_meta{Axis::samples};
    std::size_t skipped_cells = 0;
    std::vector<std::string> warnings;
};

/**
 * Loads per-cell (sample, cell type) annotations from an AnnData zarr store.
 *
 * Cells whose sample or cell type code is -1 are skipped and counted.
 * Each of `metadata_keys` becomes a sample metadata field holding the majority
 * value across the sample's cells; ties resolve to missing with a warning.
 */
AnnDataObs load_anndata_zarr(const std::filesystem::path& root, const std::string& sample_key,
                             const std::string& type_key, const std::vector<std::string>& metadata_keys = {});

} // namespace cellpop::zarr

#endif
