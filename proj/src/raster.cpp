#include "cellpop/raster.hpp"

#include "cellpop/error.hpp"

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <cmath>

namespace cellpop {

namespace {

cv::Scalar bgr(Rgb c) { return {static_cast<double>(c.b), static_cast<double>(c.g), static_cast<double>(c.r)}; }

cv::Point pt(double x, double y) { return {static_cast<int>(std::lround(x)), static_cast<int>(std::lround(y))}; }

// Hershey fonts are the only ones OpenCV ships; size them from the point size.
constexpr int kFont = cv::FONT_HERSHEY_SIMPLEX;

void draw_text(cv::Mat& img, const SceneText& t) {
    const double font_scale = t.size / 22.0;
    const int thickness = 1;
    int baseline = 0;
    const auto extent = cv::getTextSize(t.text, kFont, font_scale, thickness, &baseline);
    double shift = 0;
    if (t.anchor == SceneText::Anchor::middle) shift = extent.width / 2.0;
    if (t.anchor == SceneText::Anchor::end) shift = extent.width;

    if (!t.vertical) {
        cv::putText(img, t.text, pt(t.x - shift, t.y), kFont, font_scale, bgr(t.fill), thickness, cv::LINE_AA);
        return;
    }
    // Render horizontally onto a patch, rotate it a quarter turn and blend it in.
    cv::Mat patch(extent.height + baseline + 2, extent.width + 2, CV_8UC1, cv::Scalar(0));
    cv::putText(patch, t.text, {1, extent.height + 1}, kFont, font_scale, cv::Scalar(255), thickness, cv::LINE_AA);
    cv::Mat rotated;
    cv::rotate(patch, rotated, cv::ROTATE_90_COUNTERCLOCKWISE);
    // After rotation the text baseline runs up from (x, y); the anchor offset moves along it.
    const int x0 = static_cast<int>(std::lround(t.x)) - (extent.height + 1);
    const int y0 = static_cast<int>(std::lround(t.y + shift)) - rotated.rows;
    const cv::Rect target = cv::Rect(x0, y0, rotated.cols, rotated.rows) & cv::Rect(0, 0, img.cols, img.rows);
    if (target.empty()) return;
    const cv::Rect source(target.x - x0, target.y - y0, target.width, target.height);
    cv::Mat color(target.size(), img.type(), bgr(t.fill));
    cv::Mat alpha;
    rotated(source).convertTo(alpha, CV_32F, 1.0 / 255);
    cv::Mat roi = img(target);
    for (int r = 0; r < roi.rows; ++r) {
        for (int c = 0; c < roi.cols; ++c) {
            const float a = alpha.at<float>(r, c);
            if (a <= 0) continue;
            auto& dst = roi.at<cv::Vec3b>(r, c);
            const auto& src = color.at<cv::Vec3b>(r, c);
            for (int k = 0; k < 3; ++k) dst[k] = cv::saturate_cast<uchar>(dst[k] * (1 - a) + src[k] * a);
        }
    }
}

struct Painter {
    cv::Mat& img;

    void operator()(const SceneRect& r) const {
        const cv::Point p0 = pt(r.x, r.y);
        const cv::Point p1 = pt(r.x + r.width, r.y + r.height);
        if (r.fill && p1.x > p0.x && p1.y > p0.y) {
            cv::rectangle(img, cv::Rect(p0, p1), bgr(*r.fill), cv::FILLED);
        }
        if (r.stroke) {
            const int w = std::max(1, static_cast<int>(std::lround(r.stroke_width)));
            cv::rectangle(img, p0, p1, bgr(*r.stroke), w, cv::LINE_8);
        }
    }

    void operator()(const ScenePolygon& p) const {
        std::vector<cv::Point> pts;
        pts.reserve(p.points.size());
        for (const auto& [x, y] : p.points) pts.push_back(pt(x, y));
        cv::fillPoly(img, std::vector<std::vector<cv::Point>>{pts}, bgr(p.fill), cv::LINE_AA);
    }

    void operator()(const SceneLine& l) const {
        const int w = std::max(1, static_cast<int>(std::lround(l.stroke_width)));
        cv::line(img, pt(l.x1, l.y1), pt(l.x2, l.y2), bgr(l.stroke), w, cv::LINE_AA);
    }

    void operator()(const SceneText& t) const { draw_text(img, t); }
};

} // namespace

std::vector<unsigned char> rasterize_png(const Scene& scene) {
    cv::Mat img(static_cast<int>(scene.height), static_cast<int>(scene.width), CV_8UC3, bgr(scene.background));
    const Painter painter{img};
    for (const auto& g : scene.groups) {
        for (const auto& item : g.items) std::visit(painter, item);
    }
    std::vector<unsigned char> out;
    if (!cv::imencode(".png", img, out)) throw Error(ErrorCode::Io, "PNG encoding failed");
    return out;
}

std::vector<unsigned char> render_png(const RenderModel& model, int scale) {
    if (scale < 1) throw Error(ErrorCode::InvalidArgument, "scale must be a positive integer");
    return rasterize_png(layout_scene(model, kPngBaseWidth * scale, kPngBaseHeight * scale));
}

} // namespace cellpop
