#pragma once

#include <string>
#include <vector>

#include "hillscope/linalg.hpp"

namespace hillscope {

/// Minimal hand-rolled SVG scene: polylines, circles, text. World coordinates
/// are mapped to a fixed viewport with optional vertical flip.
class SvgScene {
public:
    SvgScene(double width_px = 640, double height_px = 480) : w_(width_px), h_(height_px) {}

    void set_world(double x_min, double x_max, double y_min, double y_max, bool flip_y = false);

    void polyline(const std::vector<Vec>& pts, const std::string& stroke, double stroke_width = 1.0);
    void circle(const Vec& center, double radius_px, const std::string& fill);
    void text(const Vec& at, const std::string& content, double size_px = 12);

    void write(const std::string& path) const;

private:
    double w_, h_;
    double x0_ = 0, x1_ = 1, y0_ = 0, y1_ = 1;
    bool flip_ = false;
    std::vector<std::string> body_;

    double px(double x) const;
    double py(double y) const;
};

}  // namespace hillscope
