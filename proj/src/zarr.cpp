#include "cellpop/zarr.hpp"

#include "cellpop/error.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <unordered_map>

namespace cellpop::zarr {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json read_json(const fs::path& path, const std::string& where) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::MissingKey, "missing " + where);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::CorruptChunk, "malformed JSON in " + where + ": " + e.what());
    }
}

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), {}};
}

void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

std::uint64_t load_unsigned(const std::uint8_t* p, std::size_t size, bool big_endian) {
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < size; ++i) {
        const std::size_t shift = big_endian ? (size - 1 - i) : i;
        v |= static_cast<std::uint64_t>(p[i]) << (8 * shift);
    }
    return v;
}

std::uint32_t load_u32le(const std::vector<std::uint8_t>& buf, std::size_t pos) {
    return static_cast<std::uint32_t>(load_unsigned(buf.data() + pos, 4, false));
}

std::string format_number(double v) {
    if (std::floor(v) == v && std::abs(v) < 1e15) return std::to_string(static_cast<long long>(v));
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

// Iterates the C-order positions of one chunk that fall inside the array,
// calling f(flat index in chunk, flat index in array).
template <typename F>
void for_each_chunk_element(const ArrayHeader& h, const std::vector<std::size_t>& chunk_idx, F&& f) {
    const std::size_t rank = h.shape.size();
    std::vector<std::size_t> origin(rank), extent(rank);
    for (std::size_t d = 0; d < rank; ++d) {
        origin[d] = chunk_idx[d] * h.chunks[d];
        extent[d] = std::min(h.chunks[d], h.shape[d] - origin[d]);
    }
    std::vector<std::size_t> local(rank, 0);
    const std::size_t total = [&] {
        std::size_t n = 1;
        for (auto e : extent) n *= e;
        return n;
    }();
    for (std::size_t k = 0; k < total; ++k) {
        std::size_t in_chunk = 0, in_array = 0;
        for (std::size_t d = 0; d < rank; ++d) {
            in_chunk = in_chunk * h.chunks[d] + local[d];
            in_array = in_array * h.shape[d] + origin[d] + local[d];
        }
        f(in_chunk, in_array);
        for (std::size_t d = rank; d-- > 0;) {
            if (++local[d] < extent[d]) break;
            local[d] = 0;
        }
    }
}

} // namespace

// ---------------------------------------------------------------------------

std::size_t ArrayHeader::element_count() const noexcept {
    std::size_t n = 1;
    for (auto s : shape) n *= s;
    return n;
}

std::size_t ArrayHeader::chunk_element_count() const noexcept {
    std::size_t n = 1;
    for (auto c : chunks) n *= c;
    return n;
}

Dtype parse_dtype(const json& dtype, const json& filters, const std::string& where) {
    if (!dtype.is_string()) throw Error(ErrorCode::UnsupportedDtype, where + ": structured dtypes are not supported");
    const auto text = dtype.get<std::string>();
    if (text.size() < 2) throw Error(ErrorCode::UnsupportedDtype, where + ": unsupported dtype '" + text + "'");

    Dtype d;
    d.text = text;
    std::string_view body = text;
    if (body.front() == '<' || body.front() == '>' || body.front() == '|' || body.front() == '=') {
        d.big_endian = body.front() == '>';
        body.remove_prefix(1);
    }
    const char kind = body.front();
    body.remove_prefix(1);
    std::size_t size = 0;
    if (!body.empty()) {
        auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), size);
        if (ec != std::errc{} || ptr != body.data() + body.size()) {
            throw Error(ErrorCode::UnsupportedDtype, where + ": unsupported dtype '" + text + "'");
        }
    }

    bool vlen_filter = false;
    if (filters.is_array()) {
        for (const auto& f : filters) {
            const auto id = f.is_object() && f.contains("id") ? f.at("id").get<std::string>() : std::string("?");
            if (id == "vlen-utf8") {
                vlen_filter = true;
            } else {
                throw Error(ErrorCode::UnsupportedCompressor, where + ": unsupported filter '" + id + "'");
            }
        }
    }

    switch (kind) {
    case 'i':
    case 'u':
        if (size != 1 && size != 2 && size != 4 && size != 8) break;
        d.kind = kind == 'i' ? DtypeKind::signed_int : DtypeKind::unsigned_int;
        d.item_size = size;
        return d;
    case 'f':
        if (size != 4 && size != 8) break;
        d.kind = DtypeKind::floating;
        d.item_size = size;
        return d;
    case 'b':
        if (size != 1) break;
        d.kind = DtypeKind::boolean;
        d.item_size = 1;
        return d;
    case 'U':
        if (size == 0) break;
        d.kind = DtypeKind::unicode;
        d.item_size = 4 * size;
        return d;
    case 'S':
        if (size == 0) break;
        d.kind = DtypeKind::bytes;
        d.item_size = size;
        return d;
    case 'O':
        if (!vlen_filter) {
            throw Error(ErrorCode::UnsupportedDtype, where + ": object dtype without a vlen-utf8 filter");
        }
        d.kind = DtypeKind::vlen_utf8;
        d.item_size = 0;
        return d;
    default: break;
    }
    throw Error(ErrorCode::UnsupportedDtype, where + ": unsupported dtype '" + text + "'");
}

ArrayHeader parse_array_header(const json& z, const std::string& where) {
    if (!z.is_object()) throw Error(ErrorCode::CorruptChunk, where + ": .zarray is not an object");
    if (!z.contains("zarr_format") || z.at("zarr_format") != 2) {
        throw Error(ErrorCode::UnsupportedFormat, where + ": only zarr format 2 is supported");
    }
    ArrayHeader h;
    try {
        h.shape = z.at("shape").get<std::vector<std::size_t>>();
        h.chunks = z.at("chunks").get<std::vector<std::size_t>>();
    } catch (const json::exception&) {
        throw Error(ErrorCode::CorruptChunk, where + ": missing or malformed shape/chunks");
    }
    if (h.shape.size() != h.chunks.size() || h.shape.empty()) {
        throw Error(ErrorCode::CorruptChunk, where + ": shape and chunks must have the same non-zero rank");
    }
    for (std::size_t i = 0; i < h.shape.size(); ++i) {
        if (h.shape[i] == 0 || h.chunks[i] == 0) {
            throw Error(ErrorCode::CorruptChunk, where + ": every dimension must be positive");
        }
    }
    const auto order = z.value("order", std::string("C"));
    if (order != "C") throw Error(ErrorCode::UnsupportedFormat, where + ": only C order is supported");

    const auto& comp = z.contains("compressor") ? z.at("compressor") : json(nullptr);
    if (comp.is_null()) {
        h.compressor = Compressor::none;
    } else {
        const auto id = comp.is_object() && comp.contains("id") && comp.at("id").is_string()
                            ? comp.at("id").get<std::string>()
                            : std::string("?");
        if (id == "zlib") {
            h.compressor = Compressor::zlib;
        } else if (id == "gzip") {
            h.compressor = Compressor::gzip;
        } else {
            throw Error(ErrorCode::UnsupportedCompressor, id);
        }
    }
    h.dtype = parse_dtype(z.contains("dtype") ? z.at("dtype") : json(nullptr),
                          z.contains("filters") ? z.at("filters") : json(nullptr), where);
    h.fill_value = z.contains("fill_value") ? z.at("fill_value") : json(nullptr);
    const auto sep = z.value("dimension_separator", std::string("."));
    if (sep != "." && sep != "/") throw Error(ErrorCode::UnsupportedFormat, where + ": bad dimension_separator");
    h.dimension_separator = sep.front();
    return h;
}

std::vector<std::uint8_t> inflate(const std::vector<std::uint8_t>& compressed, Compressor kind, std::size_t size_hint,
                                  const std::string& where) {
    if (kind == Compressor::none) return compressed;

    z_stream zs{};
    const int window_bits = kind == Compressor::gzip ? 16 + MAX_WBITS : MAX_WBITS;
    if (inflateInit2(&zs, window_bits) != Z_OK) throw Error(ErrorCode::CorruptChunk, where + ": inflateInit failed");

    std::vector<std::uint8_t> out(std::max<std::size_t>(size_hint, 64));
    zs.next_in = const_cast<Bytef*>(compressed.data());
    zs.avail_in = static_cast<uInt>(compressed.size());
    int rc = Z_OK;
    while (rc != Z_STREAM_END) {
        if (zs.total_out == out.size()) out.resize(out.size() * 2);
        zs.next_out = out.data() + zs.total_out;
        zs.avail_out = static_cast<uInt>(out.size() - zs.total_out);
        rc = ::inflate(&zs, Z_NO_FLUSH);
        if (rc == Z_STREAM_END) break;
        if (rc != Z_OK || (zs.avail_in == 0 && zs.avail_out != 0)) {
            inflateEnd(&zs);
            throw Error(ErrorCode::CorruptChunk, where + ": corrupt compressed chunk");
        }
    }
    out.resize(zs.total_out);
    inflateEnd(&zs);
    return out;
}

std::vector<std::string> decode_vlen_utf8(const std::vector<std::uint8_t>& buf, const std::string& where) {
    if (buf.size() < 4) throw Error(ErrorCode::CorruptChunk, where + ": truncated vlen-utf8 header");
    const std::uint32_t count = load_u32le(buf, 0);
    std::vector<std::string> items;
    items.reserve(count);
    std::size_t pos = 4;
    for (std::uint32_t i = 0; i < count; ++i) {
        if (pos + 4 > buf.size()) throw Error(ErrorCode::CorruptChunk, where + ": truncated vlen-utf8 item");
        const std::uint32_t len = load_u32le(buf, pos);
        pos += 4;
        if (pos + len > buf.size()) throw Error(ErrorCode::CorruptChunk, where + ": truncated vlen-utf8 item");
        items.emplace_back(reinterpret_cast<const char*>(buf.data() + pos), len);
        pos += len;
    }
    return items;
}

// ---------------------------------------------------------------------------

bool is_array(const fs::path& path) { return fs::exists(path / ".zarray"); }
bool is_group(const fs::path& path) { return fs::exists(path / ".zgroup"); }

json read_attributes(const fs::path& path) {
    const auto file = path / ".zattrs";
    if (!fs::exists(file)) return json::object();
    return read_json(file, file.string());
}

Array::Array(fs::path path) : path_(std::move(path)) {
    if (fs::exists(path_ / "zarr.json")) {
        throw Error(ErrorCode::UnsupportedFormat, path_.string() + ": zarr v3 stores are not supported");
    }
    const auto where = path_.string();
    header_ = parse_array_header(read_json(path_ / ".zarray", where + "/.zarray"), where);
}

ArrayData Array::read() const {
    const auto& h = header_;
    const auto& dt = h.dtype;
    const std::string where = path_.string();
    const std::size_t n = h.element_count();
    const std::size_t per_chunk = h.chunk_element_count();

    enum class Target { integer, real, text };
    const Target target = dt.kind == DtypeKind::floating                                          ? Target::real
                          : (dt.kind == DtypeKind::unicode || dt.kind == DtypeKind::bytes ||
                             dt.kind == DtypeKind::vlen_utf8)                                     ? Target::text
                                                                                                  : Target::integer;
    std::vector<std::int64_t> ints;
    std::vector<double> reals;
    std::vector<std::string> texts;

    // Fill values for chunks that are absent on disk.
    std::int64_t int_fill = 0;
    double real_fill = std::numeric_limits<double>::quiet_NaN();
    std::string text_fill;
    if (h.fill_value.is_number_integer()) int_fill = h.fill_value.get<std::int64_t>();
    if (h.fill_value.is_boolean()) int_fill = h.fill_value.get<bool>() ? 1 : 0;
    if (h.fill_value.is_number()) real_fill = h.fill_value.get<double>();
    if (h.fill_value.is_string() && target == Target::text) text_fill = h.fill_value.get<std::string>();

    switch (target) {
    case Target::integer: ints.assign(n, int_fill); break;
    case Target::real: reals.assign(n, real_fill); break;
    case Target::text: texts.assign(n, text_fill); break;
    }

    std::vector<std::size_t> grid(h.shape.size());
    std::size_t chunk_total = 1;
    for (std::size_t d = 0; d < grid.size(); ++d) {
        grid[d] = (h.shape[d] + h.chunks[d] - 1) / h.chunks[d];
        chunk_total *= grid[d];
    }

    std::vector<std::size_t> idx(grid.size(), 0);
    for (std::size_t k = 0; k < chunk_total; ++k) {
        std::string key;
        for (std::size_t d = 0; d < idx.size(); ++d) {
            if (d) key.push_back(h.dimension_separator);
            key += std::to_string(idx[d]);
        }
        const auto chunk_path = path_ / key;
        const std::string chunk_where = where + "/" + key;
        if (fs::exists(chunk_path)) {
            const auto raw = inflate(read_bytes(chunk_path), h.compressor, per_chunk * std::max<std::size_t>(dt.item_size, 1),
                                     chunk_where);
            if (dt.kind == DtypeKind::vlen_utf8) {
                const auto items = decode_vlen_utf8(raw, chunk_where);
                // Edge chunks are normally padded to the full chunk shape; accept
                // unpadded ones as long as every in-bounds element is present.
                for_each_chunk_element(h, idx, [&](std::size_t in_chunk, std::size_t in_array) {
                    if (in_chunk >= items.size()) {
                        throw Error(ErrorCode::CorruptChunk, chunk_where + ": chunk holds too few items");
                    }
                    texts[in_array] = items[in_chunk];
                });
            } else {
                const bool padded = raw.size() == per_chunk * dt.item_size;
                std::size_t expected_unpadded = 0;
                for_each_chunk_element(h, idx, [&](std::size_t, std::size_t) { ++expected_unpadded; });
                if (!padded && raw.size() != expected_unpadded * dt.item_size) {
                    throw Error(ErrorCode::CorruptChunk, chunk_where + ": decoded chunk has " +
                                                             std::to_string(raw.size()) + " bytes, expected " +
                                                             std::to_string(per_chunk * dt.item_size));
                }
                std::size_t sequential = 0;
                for_each_chunk_element(h, idx, [&](std::size_t in_chunk, std::size_t in_array) {
                    const std::size_t slot = padded ? in_chunk : sequential++;
                    const std::uint8_t* p = raw.data() + slot * dt.item_size;
                    switch (dt.kind) {
                    case DtypeKind::signed_int: {
                        const auto u = load_unsigned(p, dt.item_size, dt.big_endian);
                        const unsigned bits = 8 * static_cast<unsigned>(dt.item_size);
                        std::int64_t v = static_cast<std::int64_t>(u);
                        if (bits < 64 && (u >> (bits - 1)) & 1u) v = static_cast<std::int64_t>(u | (~0ULL << bits));
                        ints[in_array] = v;
                        break;
                    }
                    case DtypeKind::unsigned_int:
                    case DtypeKind::boolean: {
                        const auto u = load_unsigned(p, dt.item_size, dt.big_endian);
                        if (u > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
                            throw Error(ErrorCode::UnsupportedDtype, chunk_where + ": uint64 value out of range");
                        }
                        ints[in_array] = static_cast<std::int64_t>(u);
                        break;
                    }
                    case DtypeKind::floating: {
                        const auto u = load_unsigned(p, dt.item_size, dt.big_endian);
                        if (dt.item_size == 4) {
                            reals[in_array] = std::bit_cast<float>(static_cast<std::uint32_t>(u));
                        } else {
                            reals[in_array] = std::bit_cast<double>(u);
                        }
                        break;
                    }
                    case DtypeKind::unicode: {
                        std::string s;
                        for (std::size_t c = 0; c < dt.item_size / 4; ++c) {
                            const auto cp = static_cast<char32_t>(load_unsigned(p + 4 * c, 4, dt.big_endian));
                            if (cp == 0) break;
                            append_utf8(s, cp);
                        }
                        texts[in_array] = std::move(s);
                        break;
                    }
                    case DtypeKind::bytes: {
                        std::size_t len = 0;
                        while (len < dt.item_size && p[len] != 0) ++len;
                        texts[in_array].assign(reinterpret_cast<const char*>(p), len);
                        break;
                    }
                    case DtypeKind::vlen_utf8: break;
                    }
                });
            }
        }
        for (std::size_t d = idx.size(); d-- > 0;) {
            if (++idx[d] < grid[d]) break;
            idx[d] = 0;
        }
    }

    switch (target) {
    case Target::integer: return ints;
    case Target::real: return reals;
    case Target::text: return texts;
    }
    return ints;
}

std::vector<std::int64_t> Array::read_integers() const {
    auto data = read();
    if (auto* v = std::get_if<std::vector<std::int64_t>>(&data)) return std::move(*v);
    throw Error(ErrorCode::UnsupportedDtype, path_.string() + ": expected an integer array, found " + header_.dtype.text);
}

std::vector<std::string> Array::read_strings() const {
    auto data = read();
    if (auto* v = std::get_if<std::vector<std::string>>(&data)) return std::move(*v);
    throw Error(ErrorCode::UnsupportedDtype, path_.string() + ": expected a string array, found " + header_.dtype.text);
}

// ---------------------------------------------------------------------------

namespace {

std::vector<MetaValue> to_categories(ArrayData data, bool& numeric) {
    std::vector<MetaValue> out;
    if (auto* s = std::get_if<std::vector<std::string>>(&data)) {
        numeric = false;
        for (auto& v : *s) out.emplace_back(std::move(v));
    } else if (auto* i = std::get_if<std::vector<std::int64_t>>(&data)) {
        numeric = true;
        for (auto v : *i) out.emplace_back(static_cast<double>(v));
    } else {
        numeric = true;
        for (auto v : std::get<std::vector<double>>(data)) {
            out.emplace_back(std::isfinite(v) ? MetaValue(v) : MetaValue(Missing{}));
        }
    }
    return out;
}

// Plain arrays become (codes, categories) with categories in first-appearance order.
ObsColumn encode_plain(ArrayData data) {
    ObsColumn col;
    std::vector<MetaValue> values;
    col.categories.clear();
    values = to_categories(std::move(data), col.numeric);
    std::map<std::string, std::int64_t> text_codes;
    std::map<double, std::int64_t> num_codes;
    col.codes.reserve(values.size());
    for (auto& v : values) {
        if (is_missing(v)) {
            col.codes.push_back(-1);
        } else if (auto* s = std::get_if<std::string>(&v)) {
            auto [it, inserted] = text_codes.try_emplace(*s, static_cast<std::int64_t>(col.categories.size()));
            if (inserted) col.categories.push_back(v);
            col.codes.push_back(it->second);
        } else {
            const double d = std::get<double>(v);
            auto [it, inserted] = num_codes.try_emplace(d, static_cast<std::int64_t>(col.categories.size()));
            if (inserted) col.categories.push_back(v);
            col.codes.push_back(it->second);
        }
    }
    return col;
}

std::string category_label(const MetaValue& v) {
    if (auto* s = std::get_if<std::string>(&v)) return *s;
    if (auto* d = std::get_if<double>(&v)) return format_number(*d);
    return {};
}

} // namespace

ObsColumn read_obs_column(const fs::path& root, const std::string& key) {
    const auto path = root / "obs" / key;
    const std::string where = "obs/" + key;
    if (is_group(path)) {
        const auto attrs = read_attributes(path);
        const auto encoding = attrs.value("encoding-type", std::string());
        if (encoding == "categorical") {
            if (!is_array(path / "codes")) throw Error(ErrorCode::MissingKey, where + "/codes");
            if (!is_array(path / "categories")) throw Error(ErrorCode::MissingKey, where + "/categories");
            ObsColumn col;
            col.codes = Array(path / "codes").read_integers();
            col.categories = to_categories(Array(path / "categories").read(), col.numeric);
            return col;
        }
        if (encoding == "nullable-integer" || encoding == "nullable-boolean") {
            if (!is_array(path / "values")) throw Error(ErrorCode::MissingKey, where + "/values");
            auto values = Array(path / "values").read();
            std::vector<std::int64_t> mask;
            if (is_array(path / "mask")) mask = Array(path / "mask").read_integers();
            auto col = encode_plain(std::move(values));
            for (std::size_t i = 0; i < mask.size() && i < col.codes.size(); ++i) {
                if (mask[i]) col.codes[i] = -1;
            }
            return col;
        }
        throw Error(ErrorCode::UnsupportedDtype, where + ": unsupported obs encoding '" + encoding + "'");
    }
    if (!is_array(path)) throw Error(ErrorCode::MissingKey, where);

    // Legacy AnnData (< 0.8) keeps categories in obs/__categories/<key>.
    const auto legacy = root / "obs" / "__categories" / key;
    if (is_array(legacy)) {
        ObsColumn col;
        col.codes = Array(path).read_integers();
        col.categories = to_categories(Array(legacy).read(), col.numeric);
        return col;
    }
    return encode_plain(Array(path).read());
}

AnnDataObs load_anndata_zarr(const fs::path& root, const std::string& sample_key, const std::string& type_key,
                             const std::vector<std::string>& metadata_keys) {
    if (fs::exists(root / "zarr.json")) {
        throw Error(ErrorCode::UnsupportedFormat, root.string() + ": zarr v3 stores are not supported");
    }
    if (!is_group(root)) throw Error(ErrorCode::MissingKey, ".zgroup");
    if (!is_group(root / "obs")) throw Error(ErrorCode::MissingKey, "obs");

    const auto samples = read_obs_column(root, sample_key);
    const auto types = read_obs_column(root, type_key);
    if (samples.codes.size() != types.codes.size()) {
        throw Error(ErrorCode::CorruptChunk, "obs/" + sample_key + " and obs/" + type_key + " differ in length");
    }

    auto check_code = [](const ObsColumn& col, std::size_t cell, const std::string& key) {
        const auto code = col.codes[cell];
        if (code < -1 || code >= static_cast<std::int64_t>(col.categories.size())) {
            throw Error(ErrorCode::CodeOutOfRange, "obs/" + key + ": code " + std::to_string(code) + " at cell " +
                                                       std::to_string(cell) + " is outside the " +
                                                       std::to_string(col.categories.size()) + " categories");
        }
        return code;
    };

    AnnDataObs out;
    std::vector<std::string> sample_labels(samples.categories.size());
    for (std::size_t i = 0; i < samples.categories.size(); ++i) sample_labels[i] = category_label(samples.categories[i]);
    std::vector<std::string> type_labels(types.categories.size());
    for (std::size_t i = 0; i < types.categories.size(); ++i) type_labels[i] = category_label(types.categories[i]);

    std::vector<std::int64_t> cell_sample(samples.codes.size(), -1); // kept cells only
    out.cells.rows.reserve(samples.codes.size());
    for (std::size_t cell = 0; cell < samples.codes.size(); ++cell) {
        const auto s = check_code(samples, cell, sample_key);
        const auto t = check_code(types, cell, type_key);
        if (s < 0 || t < 0 || sample_labels[s].empty() || type_labels[t].empty()) {
            ++out.skipped_cells;
            continue;
        }
        cell_sample[cell] = s;
        out.cells.rows.push_back({sample_labels[s], type_labels[t]});
    }
    if (out.skipped_cells > 0) {
        out.warnings.push_back("skipped " + std::to_string(out.skipped_cells) +
                               " cell(s) without a sample or cell type annotation");
    }

    // Sample ids in first-appearance order among kept cells.
    std::vector<std::string> sample_ids;
    std::unordered_map<std::int64_t, std::size_t> sample_slot;
    for (std::size_t cell = 0; cell < cell_sample.size(); ++cell) {
        const auto s = cell_sample[cell];
        if (s < 0) continue;
        if (sample_slot.try_emplace(s, sample_ids.size()).second) sample_ids.push_back(sample_labels[s]);
    }

    std::vector<FieldSpec> fields;
    std::vector<std::vector<MetaValue>> columns;
    for (const auto& key : metadata_keys) {
        const auto col = read_obs_column(root, key);
        if (col.codes.size() != cell_sample.size()) {
            throw Error(ErrorCode::CorruptChunk, "obs/" + key + " differs in length from obs/" + sample_key);
        }
        // votes[sample slot][category code] = number of cells
        std::vector<std::map<std::int64_t, std::size_t>> votes(sample_ids.size());
        for (std::size_t cell = 0; cell < cell_sample.size(); ++cell) {
            if (cell_sample[cell] < 0) continue;
            const auto code = check_code(col, cell, key);
            if (code < 0 || is_missing(col.categories[code])) continue;
            ++votes[sample_slot.at(cell_sample[cell])][code];
        }
        std::vector<MetaValue> values(sample_ids.size(), Missing{});
        for (std::size_t i = 0; i < sample_ids.size(); ++i) {
            std::size_t best = 0;
            std::int64_t best_code = -1;
            bool tie = false;
            for (const auto& [code, n] : votes[i]) {
                if (n > best) {
                    best = n;
                    best_code = code;
                    tie = false;
                } else if (n == best) {
                    tie = true;
                }
            }
            if (best_code < 0) continue;
            if (tie) {
                out.warnings.push_back("sample '" + sample_ids[i] + "': tied majority for '" + key +
                                       "', value left missing");
                continue;
            }
            values[i] = col.categories[best_code];
        }
        FieldSpec spec{key, col.numeric ? FieldKind::numeric : FieldKind::categorical, 0};
        if (key.rfind("level_", 0) == 0) {
            int level = 0;
            auto digits = std::string_view(key).substr(6);
            auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), level);
            if (!digits.empty() && ec == std::errc{} && ptr == digits.data() + digits.size() && level >= 1) {
                spec.kind = FieldKind::hierarchy_level;
                spec.level = level;
                for (auto& v : values) {
                    if (auto* d = std::get_if<double>(&v)) v = format_number(*d);
                }
            }
        }
        fields.push_back(std::move(spec));
        columns.push_back(std::move(values));
    }
    out.sample_meta = MetadataTable(Axis::samples, std::move(sample_ids), std::move(fields), std::move(columns));
    return out;
}

} // namespace cellpop::zarr
