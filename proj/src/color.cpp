#include "cellpop/color.hpp"

#include "cellpop/error.hpp"

#include <algorithm>
#include <cmath>

namespace cellpop {

std::string to_hex(Rgb c) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out = "#";
    for (auto v : {c.r, c.g, c.b}) {
        out.push_back(digits[v >> 4]);
        out.push_back(digits[v & 0xF]);
    }
    return out;
}

std::optional<Rgb> parse_hex_color(std::string_view text) {
    auto nibble = [](char ch) -> int {
        if (ch >= '0' && ch <= '9') return ch - '0';
        if (ch >= 'a' && ch <= 'f') return ch - 'a' + 10;
        if (ch >= 'A' && ch <= 'F') return ch - 'A' + 10;
        return -1;
    };
    if (text.empty() || text.front() != '#') return std::nullopt;
    text.remove_prefix(1);
    std::array<int, 6> n{};
    if (text.size() == 3) {
        for (std::size_t i = 0; i < 3; ++i) {
            n[2 * i] = n[2 * i + 1] = nibble(text[i]);
        }
    } else if (text.size() == 6) {
        for (std::size_t i = 0; i < 6; ++i) n[i] = nibble(text[i]);
    } else {
        return std::nullopt;
    }
    if (std::any_of(n.begin(), n.end(), [](int v) { return v < 0; })) return std::nullopt;
    return Rgb{static_cast<std::uint8_t>(n[0] * 16 + n[1]), static_cast<std::uint8_t>(n[2] * 16 + n[3]),
               static_cast<std::uint8_t>(n[4] * 16 + n[5])};
}

ColorScale::ColorScale(std::string colormap_id, std::vector<ColorAnchor> anchors, double vmin, double vmax)
    : id_(std::move(colormap_id)), anchors_(std::move(anchors)), vmin_(vmin), vmax_(vmax) {
    if (anchors_.size() < 2) throw Error(ErrorCode::InvalidArgument, "a color scale needs at least two anchors");
    if (anchors_.front().position != 0.0 || anchors_.back().position != 1.0) {
        throw Error(ErrorCode::InvalidArgument, "anchor positions must start at 0 and end at 1");
    }
    for (std::size_t i = 1; i < anchors_.size(); ++i) {
        if (!(anchors_[i].position > anchors_[i - 1].position)) {
            throw Error(ErrorCode::InvalidArgument, "anchor positions must be strictly ascending");
        }
    }
    if (!(vmin_ <= vmax_)) throw Error(ErrorCode::InvalidArgument, "color domain needs vmin <= vmax");
}

double ColorScale::position(double v) const noexcept {
    if (vmax_ == vmin_) return 0.0;
    return std::clamp((v - vmin_) / (vmax_ - vmin_), 0.0, 1.0);
}

Rgb ColorScale::operator()(double v) const noexcept {
    const double t = position(v);
    std::size_t seg = 1;
    while (seg + 1 < anchors_.size() && t > anchors_[seg].position) ++seg;
    const auto& a = anchors_[seg - 1];
    const auto& b = anchors_[seg];
    const double u = (t - a.position) / (b.position - a.position);
    auto mix = [u](std::uint8_t x, std::uint8_t y) {
        return static_cast<std::uint8_t>(std::lround(x + (static_cast<double>(y) - x) * u));
    };
    return {mix(a.color.r, b.color.r), mix(a.color.g, b.color.g), mix(a.color.b, b.color.b)};
}

std::vector<std::string> known_colormaps() { return {"default", "greys", "blues", "reds"}; }

bool is_known_colormap(std::string_view id) {
    const auto ids = known_colormaps();
    return std::find(ids.begin(), ids.end(), id) != ids.end();
}

std::vector<ColorAnchor> colormap_anchors(std::string_view id) {
    if (id == "default") {
        // dark blue -> teal -> green -> yellow-green -> yellow
        return {{0.00, {0x1b, 0x23, 0x6b}},
                {0.25, {0x1f, 0x83, 0x8c}},
                {0.50, {0x2f, 0xa8, 0x5a}},
                {0.75, {0x9a, 0xcd, 0x32}},
                {1.00, {0xf4, 0xe6, 0x1e}}};
    }
    if (id == "greys") return {{0.0, {0xf7, 0xf7, 0xf7}}, {1.0, {0x25, 0x25, 0x25}}};
    if (id == "blues") return {{0.0, {0xf7, 0xfb, 0xff}}, {0.5, {0x6b, 0xae, 0xd6}}, {1.0, {0x08, 0x30, 0x6b}}};
    if (id == "reds") return {{0.0, {0xff, 0xf5, 0xf0}}, {0.5, {0xfb, 0x6a, 0x4a}}, {1.0, {0x67, 0x00, 0x0d}}};
    throw Error(ErrorCode::InvalidArgument, "unknown colormap '" + std::string(id) + "'");
}

const std::array<Rgb, 12>& categorical_palette() {
    static const std::array<Rgb, 12> palette{{
        {0x1f, 0x77, 0xb4}, {0xff, 0x7f, 0x0e}, {0x2c, 0xa0, 0x2c}, {0xd6, 0x27, 0x28},
        {0x94, 0x67, 0xbd}, {0x8c, 0x56, 0x4b}, {0xe3, 0x77, 0xc2}, {0x7f, 0x7f, 0x7f},
        {0xbc, 0xbd, 0x22}, {0x17, 0xbe, 0xcf}, {0x00, 0x3f, 0x5c}, {0xff, 0xbb, 0x78},
    }};
    return palette;
}

} // namespace cellpop
