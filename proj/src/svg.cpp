#include "hillscope/svg.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace hillscope {

void SvgScene::set_world(double x_min, double x_max, double y_min, double y_max, bool flip_y) {
    x0_ = x_min;
    x1_ = x_max;
    y0_ = y_min;
    y1_ = y_max;
    flip_ = flip_y;
}

double SvgScene::px(double x) const { return (x - x0_) / (x1_ - x0_) * w_; }

double SvgScene::py(double y) const {
    double t = (y - y0_) / (y1_ - y0_);
    if (!flip_) t = 1.0 - t;  // SVG y grows downward
    return t * h_;
}

void SvgScene::polyline(const std::vector<Vec>& pts, const std::string& stroke,
                        double stroke_width) {
    if (pts.size() < 2) return;
    std::string d = "<polyline fill=\"none\" stroke=\"" + stroke + "\" stroke-width=\"" +
                    std::to_string(stroke_width) + "\" points=\"";
    char buf[64];
    for (const Vec& p : pts) {
        std::snprintf(buf, sizeof buf, "%.3f,%.3f ", px(p[0]), py(p[p.size() - 1]));
        d += buf;
    }
    d += "\"/>";
    body_.push_back(d);
}

void SvgScene::circle(const Vec& center, double radius_px, const std::string& fill) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "<circle cx=\"%.3f\" cy=\"%.3f\" r=\"%.2f\" fill=\"%s\"/>",
                  px(center[0]), py(center[center.size() - 1]), radius_px, fill.c_str());
    body_.push_back(buf);
}

void SvgScene::text(const Vec& at, const std::string& content, double size_px) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "<text x=\"%.2f\" y=\"%.2f\" font-size=\"%.1f\">",
                  px(at[0]), py(at[at.size() - 1]), size_px);
    body_.push_back(std::string(buf) + content + "</text>");
}

void SvgScene::write(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write SVG: " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w_ << "\" height=\"" << h_
        << "\" viewBox=\"0 0 " << w_ << " " << h_ << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (const auto& e : body_) out << e << "\n";
    out << "</svg>\n";
}

}  // namespace hillscope
