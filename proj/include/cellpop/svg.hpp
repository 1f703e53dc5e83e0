#ifndef CELLPOP_SVG_HPP
#define CELLPOP_SVG_HPP

#include "cellpop/color.hpp"
#include "cellpop/render.hpp"

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

/**
 * @file svg.hpp
 *
 * @brief Pixel layout of a RenderModel and its SVG serialization.
 *
 * `layout_scene` maps the model's abstract regions onto a pixel canvas as a
 * flat list of primitives. The SVG writer and the PNG rasterizer both draw the
 * same scene, so the two outputs agree on geometry.
 */

namespace cellpop {

struct SceneRect {
    double x = 0, y = 0, width = 0, height = 0;
    std::optional<Rgb> fill;
    std::optional<Rgb> stroke;
    double stroke_width = 1;
};

struct ScenePolygon {
    std::vector<std::pair<double, double>> points;
    Rgb fill;
};

struct SceneLine {
    double x1 = 0, y1 = 0, x2 = 0, y2 = 0;
    Rgb stroke;
    double stroke_width = 1;
};

struct SceneText {
    enum class Anchor { start, middle, end };

    double x = 0, y = 0; ///< baseline anchor point
    std::string text;
    double size = 10;
    Rgb fill;
    Anchor anchor = Anchor::start;
    bool vertical = false; ///< rotated -90 degrees about (x, y)
};

using SceneItem = std::variant<SceneRect, ScenePolygon, SceneLine, SceneText>;

struct SceneGroup {
    std::string id;
    std::vector<SceneItem> items;
};

struct Scene {
    double width = 0;
    double height = 0;
    Rgb background;
    std::vector<SceneGroup> groups; ///< drawing order
};

inline constexpr int kMinCanvas = 64;

/// Throws Error(DegenerateSize) when either dimension is below 64.
Scene layout_scene(const RenderModel& model, int width_px, int height_px);

/// Standalone SVG 1.1; numbers with three decimals, lowercase hex colors.
std::string write_svg(const Scene& scene);

std::string render_svg(const RenderModel& model, int width_px, int height_px);

} // namespace cellpop

#endif
