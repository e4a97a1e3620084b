#pragma once

// Per-layer SVG diagrams of contours and extruder paths: outers, holes,
// extrusions and travels each in their own style, y axis flipped so the
// drawing matches plan view. One SVG user unit is one millimeter.

#include <cstdio>
#include <span>
#include <string>

#include "lamina/slicer.hpp"
#include "lamina/toolpath.hpp"

namespace lamina {

struct CanvasTooSmallError : Error {
    using Error::Error;
};

struct CanvasBounds {
    double min_x = 0.0;
    double min_y = 0.0;
    double max_x = 0.0;
    double max_y = 0.0;
};

namespace detail {

inline void svg_coord(std::string& out, double v) {
    char buf[32];
    const int n = std::snprintf(buf, sizeof buf, "%.4f", v);
    out.append(buf, static_cast<std::size_t>(n));
}

struct SvgMapper {
    CanvasBounds canvas;
    double map_x(double x) const { return x - canvas.min_x; }
    double map_y(double y) const { return canvas.max_y - y; }  // plan view

    void point(std::string& out, Vec2 p) const {
        svg_coord(out, map_x(p.x));
        out += ' ';
        svg_coord(out, map_y(p.y));
    }
};

}  // namespace detail

// Renders one layer; `paths` may be null to draw contours only. Dangling
// endpoints from open-contour findings render as highlighted markers.
inline std::string render_layer_svg(const Layer& layer, const LayerPlan* paths,
                                    CanvasBounds canvas, std::span<const Vec2> markers = {}) {
    Box2 content;
    for (const Contour& c : layer.contours) content.expand(c.bounds());
    if (paths)
        for (const Move& m : paths->moves) {
            content.expand(m.from);
            content.expand(m.to);
        }
    for (const Vec2 p : markers) content.expand(p);
    if (!content.empty()) {
        const Box2 want{canvas.min_x, canvas.min_y, canvas.max_x, canvas.max_y};
        if (!want.contains(content))
            throw CanvasTooSmallError("canvas does not enclose the layer's bounding box");
    }

    const double width = canvas.max_x - canvas.min_x;
    const double height = canvas.max_y - canvas.min_y;
    detail::SvgMapper mapper{canvas};

    std::string out;
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"";
    detail::svg_coord(out, width);
    out += "mm\" height=\"";
    detail::svg_coord(out, height);
    out += "mm\" viewBox=\"0 0 ";
    detail::svg_coord(out, width);
    out += ' ';
    detail::svg_coord(out, height);
    out += "\">\n";
    out += "<rect x=\"0\" y=\"0\" width=\"";
    detail::svg_coord(out, width);
    out += "\" height=\"";
    detail::svg_coord(out, height);
    out += "\" fill=\"white\" stroke=\"#cccccc\" stroke-width=\"0.1\"/>\n";

    for (const Contour& c : layer.contours) {
        out += "<path d=\"";
        for (std::size_t i = 0; i < c.vertices.size(); ++i) {
            out += i == 0 ? "M " : " L ";
            mapper.point(out, c.vertices[i]);
        }
        out += " Z\" fill=\"none\" stroke=\"";
        out += c.role == Contour::Role::Outer ? "#1f77b4" : "#d62728";
        out += "\" stroke-width=\"0.2\"/>\n";
    }

    if (paths && !paths->moves.empty()) {
        std::string extrudes, travels;
        for (const Move& m : paths->moves) {
            std::string& d = m.kind == Move::Kind::Extrude ? extrudes : travels;
            d += "M ";
            mapper.point(d, m.from);
            d += " L ";
            mapper.point(d, m.to);
            d += ' ';
        }
        if (!extrudes.empty()) {
            out += "<path d=\"" + extrudes +
                   "\" fill=\"none\" stroke=\"#2ca02c\" stroke-width=\"0.15\"/>\n";
        }
        if (!travels.empty()) {
            out += "<path d=\"" + travels +
                   "\" fill=\"none\" stroke=\"#7f7f7f\" stroke-width=\"0.1\" "
                   "stroke-dasharray=\"0.5 0.5\"/>\n";
        }
    }

    for (const Vec2 p : markers) {
        out += "<circle cx=\"";
        detail::svg_coord(out, mapper.map_x(p.x));
        out += "\" cy=\"";
        detail::svg_coord(out, mapper.map_y(p.y));
        out += "\" r=\"0.6\" fill=\"none\" stroke=\"#ff7f0e\" stroke-width=\"0.25\"/>\n";
    }

    out += "</svg>\n";
    return out;
}

}  // namespace lamina
