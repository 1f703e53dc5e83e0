#ifndef CELLPOP_RASTER_HPP
#define CELLPOP_RASTER_HPP

#include "cellpop/svg.hpp"

#include <string>
#include <vector>

namespace cellpop {

/// Base PNG canvas before the scale factor.
inline constexpr int kPngBaseWidth = 1200;
inline constexpr int kPngBaseHeight = 900;

/// Draws `model` at (base * scale) pixels and encodes it as PNG.
std::vector<unsigned char> render_png(const RenderModel& model, int scale);

/// Draws an already laid-out scene at its own size.
std::vector<unsigned char> rasterize_png(const Scene& scene);

} // namespace cellpop

#endif
