#pragma once

// Extruder planning: perimeter insetting, rectilinear infill, raft and
// support generation, island visit ordering (nearest neighbor + 2-opt), and
// G-code emission with volume-conserving E values.

#include <cstdio>
#include <istream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "lamina/geometry.hpp"
#include "lamina/mesh.hpp"
#include "lamina/slicer.hpp"

namespace lamina {

struct DiscontinuousPathError : Error {
    using Error::Error;
};

struct PrintConfig {
    double layer_thickness = 0.2;      // mm
    double extrusion_width = 0.4;      // mm
    double filament_diameter = 1.75;   // mm
    double fill_fraction = 0.2;        // 0 hollow .. 1 solid
    std::size_t raft_layers = 0;
    double support_overhang_deg = 45.0;
    double travel_speed = 6000.0;      // mm/min
    double extrude_speed = 1800.0;     // mm/min
    double extruder_temp = 215.0;      // celsius
    double raft_margin = 3.0;          // mm around the model footprint

    void validate() const {
        if (!(layer_thickness > 0.0)) throw Error("layer_thickness must be positive");
        if (!(extrusion_width > 0.0)) throw Error("extrusion_width must be positive");
        if (!(filament_diameter > 0.0)) throw Error("filament_diameter must be positive");
        if (!(fill_fraction >= 0.0 && fill_fraction <= 1.0))
            throw Error("fill_fraction must be in [0, 1]");
        if (!(support_overhang_deg > 0.0 && support_overhang_deg < 90.0))
            throw Error("support_overhang_deg must be in (0, 90)");
        if (!(travel_speed > 0.0) || !(extrude_speed > 0.0))
            throw Error("speeds must be positive");
        if (!(extruder_temp > 0.0)) throw Error("extruder_temp must be positive");
        if (!(raft_margin > 0.0)) throw Error("raft_margin must be positive");
    }

    double filament_area() const {
        const double r = filament_diameter / 2.0;
        return 3.14159265358979323846 * r * r;
    }

    // mm of filament consumed per mm of extruded path
    double filament_per_mm() const {
        return extrusion_width * layer_thickness / filament_area();
    }
};

// "key = value" profile lines using the PrintConfig field names; '#' starts
// a comment. Unknown keys are errors so typos do not silently print badly.
inline void apply_profile(std::istream& in, PrintConfig& cfg) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        const auto trim = [](std::string s) {
            const std::size_t b = s.find_first_not_of(" \t\r");
            const std::size_t e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string trimmed = trim(line);
        if (trimmed.empty()) continue;
        const std::size_t eq = trimmed.find('=');
        if (eq == std::string::npos)
            throw Error("profile line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(trimmed.substr(0, eq));
        const std::string value = trim(trimmed.substr(eq + 1));
        double num = 0.0;
        try {
            std::size_t used = 0;
            num = std::stod(value, &used);
            if (used != value.size()) throw std::invalid_argument(value);
        } catch (const std::exception&) {
            throw Error("profile line " + std::to_string(line_no) + ": bad value '" + value +
                        "'");
        }
        if (key == "layer_thickness") cfg.layer_thickness = num;
        else if (key == "extrusion_width") cfg.extrusion_width = num;
        else if (key == "filament_diameter") cfg.filament_diameter = num;
        else if (key == "fill_fraction") cfg.fill_fraction = num;
        else if (key == "raft_layers") cfg.raft_layers = static_cast<std::size_t>(num);
        else if (key == "support_overhang_deg") cfg.support_overhang_deg = num;
        else if (key == "travel_speed") cfg.travel_speed = num;
        else if (key == "extrude_speed") cfg.extrude_speed = num;
        else if (key == "extruder_temp") cfg.extruder_temp = num;
        else if (key == "raft_margin") cfg.raft_margin = num;
        else
            throw Error("profile line " + std::to_string(line_no) + ": unknown key '" + key +
                        "'");
    }
}

struct Move {
    enum class Kind { Travel, Extrude };
    Kind kind = Kind::Travel;
    Vec2 from;
    Vec2 to;
    double z = 0.0;                // nozzle height, mm
    double feed = 0.0;             // mm/min
    double extrusion_length = 0.0; // mm of filament, 0 for travels
};

struct LayerPlan {
    double z = 0.0;
    std::vector<Move> moves;
};

struct ToolPath {
    std::vector<LayerPlan> layers;
};

inline double total_extrude_length(const ToolPath& tp) {
    double len = 0.0;
    for (const LayerPlan& layer : tp.layers)
        for (const Move& m : layer.moves)
            if (m.kind == Move::Kind::Extrude) len += distance(m.from, m.to);
    return len;
}

inline double total_travel_length(const ToolPath& tp) {
    double len = 0.0;
    for (const LayerPlan& layer : tp.layers)
        for (const Move& m : layer.moves)
            if (m.kind == Move::Kind::Travel) len += distance(m.from, m.to);
    return len;
}

inline double total_filament_length(const ToolPath& tp) {
    double e = 0.0;
    for (const LayerPlan& layer : tp.layers)
        for (const Move& m : layer.moves) e += m.extrusion_length;
    return e;
}

// Deposited plastic volume implied by the path lengths.
inline double extruded_volume(const ToolPath& tp, const PrintConfig& cfg) {
    return total_extrude_length(tp) * cfg.extrusion_width * cfg.layer_thickness;
}

// ---- polygon offsetting ------------------------------------------------------

namespace detail {

inline std::vector<Vec2> drop_collinear(std::span<const Vec2> ring) {
    std::vector<Vec2> out;
    const std::size_t n = ring.size();
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 prev = ring[(i + n - 1) % n];
        const Vec2 cur = ring[i];
        const Vec2 next = ring[(i + 1) % n];
        const Vec2 u = cur - prev;
        const Vec2 v = next - cur;
        if (std::fabs(cross(u, v)) <= 1e-12 * length(u) * length(v)) continue;
        out.push_back(cur);
    }
    return out;
}

}  // namespace detail

// Offsets a ring toward its left side (the solid side for CCW outers and CW
// holes) by d, with miter joins. Edges that reverse direction under the
// offset are collapsed to their midpoints (miter collapse); the loop counts
// as vanished when that leaves fewer than 3 vertices, flips or zeroes the
// area, or the result self-intersects.
inline std::optional<std::vector<Vec2>> offset_ring(std::span<const Vec2> input, double d) {
    std::vector<Vec2> ring = detail::drop_collinear(input);
    const std::size_t n = ring.size();
    if (n < 3) return std::nullopt;

    std::vector<Vec2> out(n);
    std::vector<Vec2> dir(n);  // source edge directions, edge i = out[i] -> out[i+1]
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 prev = ring[(i + n - 1) % n];
        const Vec2 cur = ring[i];
        const Vec2 next = ring[(i + 1) % n];
        const Vec2 du = cur - prev;
        const Vec2 dv = next - cur;
        const double lu = length(du), lv = length(dv);
        const Vec2 nu{-du.y / lu, du.x / lu};  // left normals
        const Vec2 nv{-dv.y / lv, dv.x / lv};
        // intersect the two shifted edge lines
        const Vec2 p = prev + nu * d;
        const Vec2 q = cur + nv * d;
        const double den = cross(du, dv);
        if (std::fabs(den) < 1e-12 * lu * lv) {
            out[i] = cur + nu * d;  // parallel enough; plain shift
        } else {
            const double t = cross(q - p, dv) / den;
            out[i] = p + du * t;
        }
        dir[i] = dv;
    }

    // dir[i] belongs to the edge leaving out[i]; merging edge i's endpoints
    // keeps the incoming edge of i and the outgoing edge of i+1
    for (bool collapsed = true; collapsed;) {
        collapsed = false;
        for (std::size_t i = 0; i < out.size(); ++i) {
            const std::size_t j = (i + 1) % out.size();
            if (dot(out[j] - out[i], dir[i]) > 0.0) continue;
            const Vec2 mid = (out[i] + out[j]) * 0.5;
            if (j > i) {
                out[i] = mid;
                dir[i] = dir[j];
                out.erase(out.begin() + static_cast<std::ptrdiff_t>(j));
                dir.erase(dir.begin() + static_cast<std::ptrdiff_t>(j));
            } else {  // wrap: merge the last vertex into the first
                out[0] = mid;
                out.pop_back();
                dir.pop_back();
            }
            collapsed = true;
            break;
        }
        if (out.size() < 3) return std::nullopt;
    }

    const double before = ring_signed_area(ring);
    const double after = ring_signed_area(out);
    if (after == 0.0 || (before > 0.0) != (after > 0.0)) return std::nullopt;
    if (std::fabs(after) < 1e-9) return std::nullopt;
    if (ring_self_intersects(out)) return std::nullopt;
    detail::canonicalize_ring(out);
    return out;
}

// ---- perimeters ---------------------------------------------------------------

struct PerimeterLoop {
    std::size_t contour = 0;    // index into the layer's contours
    std::vector<Vec2> ring;     // extrusion centerline, implicitly closed
};

// One loop per contour, inset by half the extrusion width so the deposited
// bead edge lands on the model boundary; loops too small to offset are
// dropped with a warning.
inline std::vector<PerimeterLoop> generate_perimeters(const Layer& layer,
                                                      const PrintConfig& cfg,
                                                      std::vector<std::string>* warnings =
                                                          nullptr) {
    std::vector<PerimeterLoop> loops;
    for (std::size_t ci = 0; ci < layer.contours.size(); ++ci) {
        const Contour& c = layer.contours[ci];
        if (auto ring = offset_ring(c.vertices, cfg.extrusion_width / 2.0)) {
            loops.push_back({ci, std::move(*ring)});
        } else if (warnings) {
            char buf[96];
            std::snprintf(buf, sizeof buf,
                          "contour %zu vanished when inset by %.3f mm; dropped",
                          ci, cfg.extrusion_width / 2.0);
            warnings->push_back(buf);
        }
    }
    return loops;
}

// ---- infill --------------------------------------------------------------------

namespace detail {

// crossings of a horizontal (axis==1, fixed y) or vertical (axis==0) line
// with a set of rings, even-odd, half-open so vertex hits count once
inline std::vector<double> scanline_crossings(std::span<const PerimeterLoop> rings,
                                              std::span<const std::size_t> members, int axis,
                                              double level) {
    std::vector<double> xs;
    for (const std::size_t ri : members) {
        const std::vector<Vec2>& ring = rings[ri].ring;
        const std::size_t n = ring.size();
        for (std::size_t i = 0; i < n; ++i) {
            const Vec2 a = ring[i];
            const Vec2 b = ring[(i + 1) % n];
            const double a_c = axis == 1 ? a.y : a.x;
            const double b_c = axis == 1 ? b.y : b.x;
            if ((a_c <= level) == (b_c <= level)) continue;
            const double t = (level - a_c) / (b_c - a_c);
            xs.push_back(axis == 1 ? a.x + (b.x - a.x) * t : a.y + (b.y - a.y) * t);
        }
    }
    std::sort(xs.begin(), xs.end());
    return xs;
}

// rectilinear fill for one island, clipped to its perimeter-centerline rings
inline std::vector<Segment2> island_infill(std::span<const PerimeterLoop> loops,
                                           std::span<const std::size_t> members,
                                           std::size_t outer_loop, const PrintConfig& cfg,
                                           std::size_t layer_index) {
    std::vector<Segment2> segments;
    if (cfg.fill_fraction <= 0.0) return segments;
    const double spacing = cfg.extrusion_width / cfg.fill_fraction;
    const double margin = cfg.extrusion_width / 2.0;
    const Box2 box = ring_bounds(loops[outer_loop].ring);
    const bool horizontal = layer_index % 2 == 0;

    const double lo = (horizontal ? box.min_y : box.min_x) + margin;
    const double hi = (horizontal ? box.max_y : box.max_x) - margin;
    for (double level = lo; level <= hi + 1e-9; level += spacing) {
        const std::vector<double> xs =
            scanline_crossings(loops, members, horizontal ? 1 : 0, level);
        for (std::size_t i = 0; i + 1 < xs.size(); i += 2) {
            if (xs[i + 1] - xs[i] <= 1e-9) continue;
            if (horizontal)
                segments.push_back({{xs[i], level}, {xs[i + 1], level}});
            else
                segments.push_back({{level, xs[i]}, {level, xs[i + 1]}});
        }
    }
    return segments;
}

}  // namespace detail

// Parallel lines at spacing extrusion_width / fill_fraction (none when the
// fraction is 0), clipped to the perimeter-inset region, alternating 0/90
// degrees by layer parity.
inline std::vector<Segment2> generate_infill(const Layer& layer, const PrintConfig& cfg,
                                             std::size_t layer_index) {
    std::vector<Segment2> segments;
    if (cfg.fill_fraction <= 0.0) return segments;
    const std::vector<PerimeterLoop> loops = generate_perimeters(layer, cfg);

    for (const Island& island : layer.islands) {
        std::vector<std::size_t> members;
        std::size_t outer_loop = SIZE_MAX;
        for (std::size_t li = 0; li < loops.size(); ++li) {
            if (loops[li].contour == island.outer) outer_loop = li;
            const bool is_hole = std::find(island.holes.begin(), island.holes.end(),
                                           loops[li].contour) != island.holes.end();
            if (loops[li].contour == island.outer || is_hole) members.push_back(li);
        }
        if (outer_loop == SIZE_MAX) continue;  // outer vanished; nothing to fill
        const auto island_segments =
            detail::island_infill(loops, members, outer_loop, cfg, layer_index);
        segments.insert(segments.end(), island_segments.begin(), island_segments.end());
    }
    return segments;
}

// ---- raft -----------------------------------------------------------------------

// Solid-fill rectangles under the model: the first layer's footprint
// (bounding box of its outer contours) grown by raft_margin, line direction
// alternating per raft layer.
inline std::vector<std::vector<Segment2>> generate_raft(const Layer& first_layer,
                                                        const PrintConfig& cfg) {
    std::vector<std::vector<Segment2>> raft;
    if (cfg.raft_layers == 0) return raft;
    Box2 box;
    for (const Contour& c : first_layer.contours)
        if (c.role == Contour::Role::Outer) box.expand(c.bounds());
    if (box.empty()) return raft;
    box.min_x -= cfg.raft_margin;
    box.min_y -= cfg.raft_margin;
    box.max_x += cfg.raft_margin;
    box.max_y += cfg.raft_margin;

    const double w = cfg.extrusion_width;
    for (std::size_t k = 0; k < cfg.raft_layers; ++k) {
        std::vector<Segment2> lines;
        if (k % 2 == 0) {
            for (double y = box.min_y + w / 2.0; y <= box.max_y - w / 2.0 + 1e-9; y += w)
                lines.push_back({{box.min_x, y}, {box.max_x, y}});
        } else {
            for (double x = box.min_x + w / 2.0; x <= box.max_x - w / 2.0 + 1e-9; x += w)
                lines.push_back({{x, box.min_y}, {x, box.max_y}});
        }
        raft.push_back(std::move(lines));
    }
    return raft;
}

// ---- supports ----------------------------------------------------------------------

struct SupportColumn {
    Vec2 pos;
    double top_z = 0.0;  // highest layer the pillar reaches (just below the overhang)
};

struct OverhangReport {
    std::vector<std::size_t> facets;        // overhanging facet indices
    std::vector<SupportColumn> columns;
};

namespace detail {

inline bool point_in_triangle_2d(Vec2 p, Vec2 a, Vec2 b, Vec2 c) {
    const double d1 = cross(b - a, p - a);
    const double d2 = cross(c - b, p - b);
    const double d3 = cross(a - c, p - c);
    const bool has_neg = d1 < 0 || d2 < 0 || d3 < 0;
    const bool has_pos = d1 > 0 || d2 > 0 || d3 > 0;
    return !(has_neg && has_pos);
}

}  // namespace detail

// A facet overhangs when its outward normal points down more steeply than the
// threshold; facets resting on the build plate need no support. Columns are
// pillar positions on a 4*extrusion_width grid under the overhanging facets,
// reaching up to one layer below the surface they hold.
inline OverhangReport detect_overhangs(const TriangleMesh& m, const PrintConfig& cfg) {
    OverhangReport report;
    const double threshold = -std::sin(cfg.support_overhang_deg * 3.14159265358979323846 / 180.0);
    Box2 box;
    for (std::size_t i = 0; i < m.facets.size(); ++i) {
        const Facet& f = m.facets[i];
        const double min_z = std::min({f.v[0].z, f.v[1].z, f.v[2].z});
        if (f.normal.z < threshold && min_z > 1e-9) {
            report.facets.push_back(i);
            for (const Vertex& p : f.v) box.expand(Vec2{p.x, p.y});
        }
    }
    if (report.facets.empty()) return report;

    const double step = 4.0 * cfg.extrusion_width;
    for (double x = box.min_x; x <= box.max_x + 1e-9; x += step) {
        for (double y = box.min_y; y <= box.max_y + 1e-9; y += step) {
            double top = std::numeric_limits<double>::infinity();
            for (const std::size_t fi : report.facets) {
                const Facet& f = m.facets[fi];
                if (!detail::point_in_triangle_2d({x, y}, {f.v[0].x, f.v[0].y},
                                                  {f.v[1].x, f.v[1].y}, {f.v[2].x, f.v[2].y}))
                    continue;
                top = std::min(top, std::min({f.v[0].z, f.v[1].z, f.v[2].z}));
            }
            if (std::isfinite(top))
                report.columns.push_back({{x, y}, top - cfg.layer_thickness});
        }
    }
    return report;
}

// ---- island ordering -----------------------------------------------------------------

struct Tour {
    std::vector<std::size_t> order;
    double length = 0.0;
};

inline Tour nearest_neighbor_tour(std::span<const Vec2> points, Vec2 start) {
    Tour tour;
    std::vector<bool> used(points.size(), false);
    Vec2 at = start;
    for (std::size_t step = 0; step < points.size(); ++step) {
        std::size_t best = SIZE_MAX;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (used[i]) continue;
            const double d = distance(at, points[i]);
            if (d < best_d) {  // ties break to the lowest index
                best_d = d;
                best = i;
            }
        }
        used[best] = true;
        tour.order.push_back(best);
        tour.length += best_d;
        at = points[best];
    }
    return tour;
}

namespace detail {

// Held-Karp over subsets: exact minimal open tour from a fixed start.
inline Tour exact_tour(std::span<const Vec2> points, Vec2 start) {
    const std::size_t n = points.size();
    const std::size_t full = (std::size_t{1} << n) - 1;
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> cost((full + 1) * n, inf);
    std::vector<std::uint8_t> parent((full + 1) * n, 0xff);
    for (std::size_t j = 0; j < n; ++j)
        cost[(std::size_t{1} << j) * n + j] = distance(start, points[j]);
    for (std::size_t set = 1; set <= full; ++set) {
        for (std::size_t j = 0; j < n; ++j) {
            if (!(set & (std::size_t{1} << j))) continue;
            const double base = cost[set * n + j];
            if (base == inf) continue;
            for (std::size_t k = 0; k < n; ++k) {
                if (set & (std::size_t{1} << k)) continue;
                const std::size_t next = set | (std::size_t{1} << k);
                const double c = base + distance(points[j], points[k]);
                if (c < cost[next * n + k]) {
                    cost[next * n + k] = c;
                    parent[next * n + k] = static_cast<std::uint8_t>(j);
                }
            }
        }
    }
    Tour tour;
    std::size_t end = 0;
    for (std::size_t j = 1; j < n; ++j)
        if (cost[full * n + j] < cost[full * n + end]) end = j;
    tour.length = cost[full * n + end];
    std::size_t set = full;
    while (end != 0xff) {
        tour.order.push_back(end);
        const std::uint8_t prev = parent[set * n + end];
        set &= ~(std::size_t{1} << end);
        end = prev;
    }
    std::reverse(tour.order.begin(), tour.order.end());
    return tour;
}

}  // namespace detail

// Visit order over island entry points: exact subset dynamic programming up
// to 12 islands (layers rarely have more), nearest neighbor improved by
// 2-opt reversals until no swap helps beyond that. Never longer than the
// plain nearest-neighbor tour; starts at `start` and does not return.
inline Tour order_islands(std::span<const Vec2> points, Vec2 start) {
    if (!points.empty() && points.size() <= 12) return detail::exact_tour(points, start);
    Tour tour = nearest_neighbor_tour(points, start);
    const std::size_t n = tour.order.size();
    if (n < 2) return tour;

    auto& ord = tour.order;
    const auto pos = [&](std::size_t idx) { return points[ord[idx]]; };
    bool improved = true;
    while (improved) {
        improved = false;
        for (std::size_t i = 0; i < n - 1; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                const Vec2 before = i == 0 ? start : pos(i - 1);
                const double removed = distance(before, pos(i)) +
                                       (j + 1 < n ? distance(pos(j), pos(j + 1)) : 0.0);
                const double added = distance(before, pos(j)) +
                                     (j + 1 < n ? distance(pos(i), pos(j + 1)) : 0.0);
                if (added < removed - 1e-12) {
                    std::reverse(ord.begin() + static_cast<std::ptrdiff_t>(i),
                                 ord.begin() + static_cast<std::ptrdiff_t>(j + 1));
                    improved = true;
                }
            }
        }
    }
    tour.length = 0.0;
    Vec2 at = start;
    for (const std::size_t i : ord) {
        tour.length += distance(at, points[i]);
        at = points[i];
    }
    return tour;
}

// ---- print planning --------------------------------------------------------------------

namespace detail {

struct Cursor {
    Vec2 at{0.0, 0.0};

    void travel(LayerPlan& plan, Vec2 to, double z, const PrintConfig& cfg) {
        if (at == to) return;
        plan.moves.push_back({Move::Kind::Travel, at, to, z, cfg.travel_speed, 0.0});
        at = to;
    }
    void extrude(LayerPlan& plan, Vec2 to, double z, const PrintConfig& cfg) {
        if (at == to) return;
        const double len = distance(at, to);
        plan.moves.push_back(
            {Move::Kind::Extrude, at, to, z, cfg.extrude_speed, len * cfg.filament_per_mm()});
        at = to;
    }
    void extrude_ring(LayerPlan& plan, std::span<const Vec2> ring, double z,
                      const PrintConfig& cfg) {
        travel(plan, ring.front(), z, cfg);
        for (std::size_t i = 1; i < ring.size(); ++i) extrude(plan, ring[i], z, cfg);
        extrude(plan, ring.front(), z, cfg);
    }
    // serpentine: each segment entered from its nearer end
    void extrude_lines(LayerPlan& plan, std::span<const Segment2> lines, double z,
                       const PrintConfig& cfg) {
        for (const Segment2& s : lines) {
            const bool a_first = distance(at, s.a) <= distance(at, s.b);
            const Vec2 enter = a_first ? s.a : s.b;
            const Vec2 exit = a_first ? s.b : s.a;
            travel(plan, enter, z, cfg);
            extrude(plan, exit, z, cfg);
        }
    }
};

}  // namespace detail

// Assembles the full print: raft layers first, then each sliced layer with
// islands visited in minimal-travel order (entry point = the perimeter's
// canonical first vertex), perimeter loops before infill, support pillars
// appended.
// Nozzle height for printed layer j is (j+1)*layer_thickness.
inline ToolPath plan_print(std::span<const Layer> layers, const PrintConfig& cfg,
                           std::span<const SupportColumn> supports = {},
                           std::vector<std::string>* warnings = nullptr) {
    cfg.validate();
    ToolPath tp;
    detail::Cursor cursor;
    const double t = cfg.layer_thickness;
    const double raft_lift = static_cast<double>(cfg.raft_layers) * t;

    if (!layers.empty()) {
        const auto raft = generate_raft(layers.front(), cfg);
        for (const auto& lines : raft) {
            LayerPlan plan;
            plan.z = static_cast<double>(tp.layers.size() + 1) * t;
            cursor.extrude_lines(plan, lines, plan.z, cfg);
            tp.layers.push_back(std::move(plan));
        }
    }

    for (std::size_t li = 0; li < layers.size(); ++li) {
        const Layer& layer = layers[li];
        LayerPlan plan;
        plan.z = layer.z + t / 2.0 + raft_lift;

        const std::vector<PerimeterLoop> loops = generate_perimeters(layer, cfg, warnings);

        // group loops per island
        struct IslandWork {
            std::size_t outer_loop = SIZE_MAX;
            std::vector<std::size_t> members;  // outer + holes, loop indices
        };
        std::vector<IslandWork> work;
        for (const Island& island : layer.islands) {
            IslandWork w;
            for (std::size_t k = 0; k < loops.size(); ++k) {
                if (loops[k].contour == island.outer) {
                    w.outer_loop = k;
                    w.members.push_back(k);
                } else if (std::find(island.holes.begin(), island.holes.end(),
                                     loops[k].contour) != island.holes.end()) {
                    w.members.push_back(k);
                }
            }
            if (w.outer_loop != SIZE_MAX) work.push_back(std::move(w));
        }

        std::vector<Vec2> entries;
        entries.reserve(work.size());
        for (const IslandWork& w : work) entries.push_back(loops[w.outer_loop].ring.front());
        const Tour tour = order_islands(entries, cursor.at);

        for (const std::size_t wi : tour.order) {
            const IslandWork& w = work[wi];
            for (const std::size_t k : w.members)
                cursor.extrude_ring(plan, loops[k].ring, plan.z, cfg);
            const auto fill = detail::island_infill(loops, w.members, w.outer_loop, cfg, li);
            cursor.extrude_lines(plan, fill, plan.z, cfg);
        }

        // support pillars: a short alternating stroke per column per layer
        for (const SupportColumn& col : supports) {
            if (plan.z > col.top_z + 1e-9) continue;
            const double half = 1.5 * cfg.extrusion_width;
            const Vec2 a = li % 2 == 0 ? Vec2{col.pos.x - half, col.pos.y}
                                       : Vec2{col.pos.x, col.pos.y - half};
            const Vec2 b = li % 2 == 0 ? Vec2{col.pos.x + half, col.pos.y}
                                       : Vec2{col.pos.x, col.pos.y + half};
            cursor.travel(plan, a, plan.z, cfg);
            cursor.extrude(plan, b, plan.z, cfg);
        }

        tp.layers.push_back(std::move(plan));
    }
    return tp;
}

// ---- G-code ---------------------------------------------------------------------------

// Minimal RepRap-style dialect: heat and wait, home, absolute moves, E reset,
// then G0 travels and G1 extrusions with every coordinate explicit (3
// decimals, E with 5). E accumulates mm of filament so volume is conserved.
inline std::string emit_gcode(const ToolPath& tp, const PrintConfig& cfg,
                              std::span<const std::string> header_comments = {}) {
    // continuity check: each move must start where the previous one ended
    Vec2 at{0.0, 0.0};
    bool first = true;
    for (const LayerPlan& layer : tp.layers) {
        for (const Move& m : layer.moves) {
            if (!first && !(m.from == at))
                throw DiscontinuousPathError("move does not start where the previous ended");
            if (first) {
                if (!(m.from == Vec2{0.0, 0.0}))
                    throw DiscontinuousPathError("first move must start at the origin");
                first = false;
            }
            at = m.to;
        }
    }

    std::string out;
    out.reserve(128 + tp.layers.size() * 64);
    for (const std::string& c : header_comments) {
        out += "; ";
        out += c;
        out += '\n';
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "M104 S%.0f\nM109 S%.0f\nG28\nG90\nG92 E0\n",
                  cfg.extruder_temp, cfg.extruder_temp);
    out += buf;

    double e_total = 0.0;
    for (std::size_t li = 0; li < tp.layers.size(); ++li) {
        const LayerPlan& layer = tp.layers[li];
        std::snprintf(buf, sizeof buf, "; layer %zu z=%.3f\n", li, layer.z);
        out += buf;
        for (const Move& m : layer.moves) {
            if (m.kind == Move::Kind::Travel) {
                std::snprintf(buf, sizeof buf, "G0 X%.3f Y%.3f Z%.3f F%.0f\n", m.to.x, m.to.y,
                              m.z, m.feed);
            } else {
                e_total += m.extrusion_length;
                std::snprintf(buf, sizeof buf, "G1 X%.3f Y%.3f Z%.3f E%.5f F%.0f\n", m.to.x,
                              m.to.y, m.z, e_total, m.feed);
            }
            out += buf;
        }
    }
    out += "M104 S0\nM84\n";
    return out;
}

}  // namespace lamina
