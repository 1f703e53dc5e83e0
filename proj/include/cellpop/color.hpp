#ifndef CELLPOP_COLOR_HPP
#define CELLPOP_COLOR_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cellpop {

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;

    bool operator==(const Rgb&) const = default;
};

/// "#rrggbb", lowercase.
std::string to_hex(Rgb c);

/// Accepts "#rgb" or "#rrggbb" in either case.
std::optional<Rgb> parse_hex_color(std::string_view text);

struct ColorAnchor {
    double position = 0; ///< in [0, 1], strictly ascending across anchors
    Rgb color;
};

/**
 * Piecewise-linear sRGB colormap over a value domain [vmin, vmax].
 * A degenerate domain (vmin == vmax) maps everything to the first anchor.
 */
class ColorScale {
  public:
    ColorScale(std::string colormap_id, std::vector<ColorAnchor> anchors, double vmin, double vmax);

    const std::string& colormap() const noexcept { return id_; }
    const std::vector<ColorAnchor>& anchors() const noexcept { return anchors_; }
    double vmin() const noexcept { return vmin_; }
    double vmax() const noexcept { return vmax_; }

    /// Normalized position of `v` in the domain, clamped to [0, 1].
    double position(double v) const noexcept;

    Rgb operator()(double v) const noexcept;

  private:
    std::string id_;
    std::vector<ColorAnchor> anchors_;
    double vmin_;
    double vmax_;
};

std::vector<std::string> known_colormaps();
bool is_known_colormap(std::string_view id);

/// Anchors of a named colormap. Throws Error(InvalidArgument) for unknown ids.
std::vector<ColorAnchor> colormap_anchors(std::string_view id);

/// Fixed categorical palette; categories beyond its length reuse colors.
const std::array<Rgb, 12>& categorical_palette();

} // namespace cellpop

#endif
