#pragma once

// Horizontal slicing: facet/plane intersection, chaining the resulting
// segments into closed contours, hole/outer classification, and the
// Jordan-curve checks that every printable slice must pass.

#include <algorithm>
#include <atomic>
#include <optional>
#include <span>
#include <thread>
#include <unordered_map>
#include <vector>

#include "lamina/geometry.hpp"
#include "lamina/mesh.hpp"

namespace lamina {

struct NotWatertightError : Error {
    using Error::Error;
};

struct DegenerateThicknessError : Error {
    using Error::Error;
};

struct OpenContourError : Error {
    std::vector<Vec2> dangling;
    explicit OpenContourError(std::vector<Vec2> endpoints)
        : Error("segments do not close into contours (" +
                std::to_string(endpoints.size()) + " dangling endpoints)"),
          dangling(std::move(endpoints)) {}
};

struct Contour {
    enum class Role { Outer, Hole };

    std::vector<Vec2> vertices;  // implicitly closed
    Role role = Role::Outer;
    double signed_area = 0.0;  // positive for outers (CCW), negative for holes

    double perimeter() const { return ring_perimeter(vertices); }
    bool contains(Vec2 p) const { return point_in_ring(p, vertices); }
    Box2 bounds() const { return ring_bounds(vertices); }
};

// An outer contour grouped with the holes it contains.
struct Island {
    std::size_t outer;
    std::vector<std::size_t> holes;
};

struct Layer {
    double z = 0.0;
    std::vector<Contour> contours;
    std::vector<Island> islands;
    std::vector<Vec2> dangling;  // open-chain endpoints kept by lenient slicing
};

// Line segment where a triangle crosses the plane z, by linear interpolation
// along the straddling edges. A vertex exactly on the plane counts as above
// it, so coplanar triangles and single-point contacts yield nothing and an
// edge lying exactly in the plane comes back bit-exactly as the segment.
inline std::optional<Segment2> intersect_facet_plane(const Facet& f, double z) {
    const auto below = [z](const Vertex& p) { return p.z < z; };
    // interpolate from the below vertex so both facets sharing an edge
    // compute the identical crossing point
    const auto crossing = [z](const Vertex& lo, const Vertex& hi) -> Vec2 {
        if (hi.z == z) return {hi.x, hi.y};
        const double t = (z - lo.z) / (hi.z - lo.z);
        return {lo.x + (hi.x - lo.x) * t, lo.y + (hi.y - lo.y) * t};
    };

    Vec2 pts[3];
    int found = 0;
    for (int e = 0; e < 3 && found < 3; ++e) {
        const Vertex& a = f.v[static_cast<std::size_t>(e)];
        const Vertex& b = f.v[static_cast<std::size_t>((e + 1) % 3)];
        if (below(a) && !below(b))
            pts[found++] = crossing(a, b);
        else if (!below(a) && below(b))
            pts[found++] = crossing(b, a);
    }
    if (found != 2) return std::nullopt;
    if (pts[0] == pts[1]) return std::nullopt;  // point contact
    return Segment2{pts[0], pts[1]};
}

// ---- stitching --------------------------------------------------------------

struct StitchReport {
    std::vector<Contour> contours;
    std::vector<Island> islands;
    std::vector<std::vector<Vec2>> open_chains;
    std::vector<Vec2> dangling;  // endpoints of the open chains
};

namespace detail {

struct CellKey {
    std::int64_t x, y;
    bool operator==(const CellKey&) const = default;
};

struct CellKeyHash {
    std::size_t operator()(const CellKey& k) const {
        const std::uint64_t a = static_cast<std::uint64_t>(k.x) * 0x9E3779B97F4A7C15ull;
        const std::uint64_t b = static_cast<std::uint64_t>(k.y) * 0xC2B2AE3D27D4EB4Full;
        return static_cast<std::size_t>(a ^ (b >> 1));
    }
};

// endpoint lookup on a grid quantized by the match tolerance
class EndpointGrid {
public:
    EndpointGrid(std::span<const Segment2> segments, double tol)
        : segments_(segments), tol_(tol), quantum_(std::max(tol, 1e-12)) {
        map_.reserve(segments.size() * 2);
        for (std::size_t i = 0; i < segments.size(); ++i) {
            map_[cell(segments[i].a)].push_back(i);
            map_[cell(segments[i].b)].push_back(i);
        }
    }

    // lowest-index unused segment with an endpoint matching p
    std::optional<std::size_t> find(Vec2 p, const std::vector<bool>& used) const {
        std::optional<std::size_t> best;
        const CellKey c = cell(p);
        for (std::int64_t dx = -1; dx <= 1; ++dx) {
            for (std::int64_t dy = -1; dy <= 1; ++dy) {
                const auto it = map_.find(CellKey{c.x + dx, c.y + dy});
                if (it == map_.end()) continue;
                for (const std::size_t i : it->second) {
                    if (used[i]) continue;
                    if (!matches(p, segments_[i].a) && !matches(p, segments_[i].b)) continue;
                    if (!best || i < *best) best = i;
                }
            }
        }
        return best;
    }

    bool matches(Vec2 p, Vec2 q) const {
        if (tol_ == 0.0) return p == q;
        const Vec2 d = q - p;
        return d.x * d.x + d.y * d.y <= tol_ * tol_;
    }

private:
    CellKey cell(Vec2 p) const {
        return {static_cast<std::int64_t>(std::llround(p.x / quantum_)),
                static_cast<std::int64_t>(std::llround(p.y / quantum_))};
    }

    std::span<const Segment2> segments_;
    double tol_;
    double quantum_;
    std::unordered_map<CellKey, std::vector<std::size_t>, CellKeyHash> map_;
};

inline void drop_consecutive_duplicates(std::vector<Vec2>& ring) {
    ring.erase(std::unique(ring.begin(), ring.end(),
                           [](Vec2 a, Vec2 b) { return a == b; }),
               ring.end());
    while (ring.size() > 1 && ring.front() == ring.back()) ring.pop_back();
}

// rotate so the lexicographically smallest vertex comes first; makes slice
// output independent of facet order
inline void canonicalize_ring(std::vector<Vec2>& ring) {
    const auto it = std::min_element(ring.begin(), ring.end(),
                                     [](Vec2 a, Vec2 b) { return lex_less(a, b); });
    std::rotate(ring.begin(), it, ring.end());
}

inline double point_chord_distance(Vec2 p, Vec2 a, Vec2 b) {
    const Vec2 d = b - a;
    const double len2 = d.x * d.x + d.y * d.y;
    if (len2 == 0.0) return distance(p, a);
    return std::fabs(cross(d, p - a)) / std::sqrt(len2);
}

inline void rdp_keep(std::span<const Vec2> pts, std::size_t lo, std::size_t hi, double tol,
                     std::vector<bool>& keep) {
    if (hi <= lo + 1) return;
    double worst = -1.0;
    std::size_t pick = lo;
    for (std::size_t i = lo + 1; i < hi; ++i) {
        const double d = point_chord_distance(pts[i], pts[lo], pts[hi]);
        if (d > worst) {
            worst = d;
            pick = i;
        }
    }
    if (worst > tol) {
        keep[pick] = true;
        rdp_keep(pts, lo, pick, tol, keep);
        rdp_keep(pts, pick, hi, tol, keep);
    }
}

}  // namespace detail

// Ramer-Douglas-Peucker on a closed ring, anchored at the ring's first
// vertex. Keeps the original ring when simplification would collapse it.
inline std::vector<Vec2> simplify_ring(const std::vector<Vec2>& ring, double tol) {
    if (tol <= 0.0 || ring.size() < 4) return ring;
    std::vector<Vec2> closed = ring;
    closed.push_back(ring.front());
    std::vector<bool> keep(closed.size(), false);
    keep.front() = keep.back() = true;
    detail::rdp_keep(closed, 0, closed.size() - 1, tol, keep);
    std::vector<Vec2> out;
    for (std::size_t i = 0; i + 1 < closed.size(); ++i)
        if (keep[i]) out.push_back(closed[i]);
    if (out.size() < 3) return ring;
    const double before = ring_signed_area(ring);
    const double after = ring_signed_area(out);
    if (after == 0.0 || (before > 0.0) != (after > 0.0)) return ring;
    return out;
}

// Classifies raw closed rings into outers and holes by even-odd containment
// depth, orients them (outers CCW, holes CW), canonicalizes vertex order,
// and groups each outer with the holes directly inside it.
inline std::pair<std::vector<Contour>, std::vector<Island>> classify_rings(
    std::vector<std::vector<Vec2>> rings) {
    const std::size_t n = rings.size();
    std::vector<int> depth(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 rep = rings[i].front();
        for (std::size_t j = 0; j < n; ++j)
            if (j != i && point_in_ring(rep, rings[j])) ++depth[i];
    }

    std::vector<Contour> contours(n);
    for (std::size_t i = 0; i < n; ++i) {
        Contour& c = contours[i];
        c.role = (depth[i] % 2 == 0) ? Contour::Role::Outer : Contour::Role::Hole;
        c.vertices = std::move(rings[i]);
        const double area = ring_signed_area(c.vertices);
        const bool want_ccw = c.role == Contour::Role::Outer;
        if ((area > 0.0) != want_ccw && area != 0.0)
            std::reverse(c.vertices.begin(), c.vertices.end());
        detail::canonicalize_ring(c.vertices);
        // computed after orientation and rotation so the summation order,
        // and with it the exact bits, never depends on stitch direction
        c.signed_area = ring_signed_area(c.vertices);
    }

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const Vec2 pa = contours[a].vertices.front();
        const Vec2 pb = contours[b].vertices.front();
        if (!(pa == pb)) return lex_less(pa, pb);
        if (contours[a].vertices.size() != contours[b].vertices.size())
            return contours[a].vertices.size() < contours[b].vertices.size();
        return contours[a].signed_area < contours[b].signed_area;
    });
    std::vector<Contour> sorted;
    sorted.reserve(n);
    std::vector<int> sorted_depth(n);
    for (std::size_t k = 0; k < n; ++k) {
        sorted_depth[sorted.size()] = depth[order[k]];
        sorted.push_back(std::move(contours[order[k]]));
    }

    // each hole belongs to the innermost outer containing it
    std::vector<Island> islands;
    std::vector<std::size_t> island_of(n, SIZE_MAX);
    for (std::size_t i = 0; i < n; ++i) {
        if (sorted[i].role != Contour::Role::Outer) continue;
        island_of[i] = islands.size();
        islands.push_back({i, {}});
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (sorted[i].role != Contour::Role::Hole) continue;
        const Vec2 rep = sorted[i].vertices.front();
        for (std::size_t j = 0; j < n; ++j) {
            if (sorted[j].role != Contour::Role::Outer) continue;
            // the outer one nesting level up that contains the hole is unique
            if (sorted_depth[j] == sorted_depth[i] - 1 &&
                point_in_ring(rep, sorted[j].vertices)) {
                islands[island_of[j]].holes.push_back(i);
                break;
            }
        }
    }
    return {std::move(sorted), std::move(islands)};
}

// Chains segments end to end by endpoint matching within tol. Chains keep
// extending while any unused segment continues from the current endpoint, so
// cross-sections that touch themselves close as one self-touching loop and
// get flagged downstream rather than silently split.
inline StitchReport stitch_segments_lenient(std::span<const Segment2> segments,
                                            double tol = 1e-7) {
    if (tol < 0.0) throw Error("stitch tolerance must be >= 0");
    std::vector<Segment2> live;
    live.reserve(segments.size());
    for (const Segment2& s : segments)
        if (!(s.a == s.b)) live.push_back(s);

    detail::EndpointGrid grid(live, tol);
    std::vector<bool> used(live.size(), false);
    StitchReport report;
    std::vector<std::vector<Vec2>> rings;

    const auto extend_tail = [&](std::vector<Vec2>& chain) {
        for (;;) {
            const auto next = grid.find(chain.back(), used);
            if (!next) return;
            used[*next] = true;
            const Segment2& s = live[*next];
            chain.push_back(grid.matches(chain.back(), s.a) ? s.b : s.a);
        }
    };

    for (std::size_t seed = 0; seed < live.size(); ++seed) {
        if (used[seed]) continue;
        used[seed] = true;
        std::vector<Vec2> chain{live[seed].a, live[seed].b};
        extend_tail(chain);
        if (!grid.matches(chain.front(), chain.back())) {
            // a seed can land mid-chain; grow the other side too
            std::reverse(chain.begin(), chain.end());
            extend_tail(chain);
        }
        if (grid.matches(chain.front(), chain.back())) {
            chain.pop_back();
            detail::drop_consecutive_duplicates(chain);
            if (chain.size() >= 3) rings.push_back(std::move(chain));
        } else {
            report.dangling.push_back(chain.front());
            report.dangling.push_back(chain.back());
            report.open_chains.push_back(std::move(chain));
        }
    }

    auto [contours, islands] = classify_rings(std::move(rings));
    report.contours = std::move(contours);
    report.islands = std::move(islands);
    return report;
}

inline std::vector<Contour> stitch_segments(std::span<const Segment2> segments,
                                            double tol = 1e-7) {
    StitchReport report = stitch_segments_lenient(segments, tol);
    if (!report.open_chains.empty()) throw OpenContourError(std::move(report.dangling));
    return std::move(report.contours);
}

inline StitchReport stitch_segments_strict(std::span<const Segment2> segments,
                                           double tol = 1e-7) {
    StitchReport report = stitch_segments_lenient(segments, tol);
    if (!report.open_chains.empty()) throw OpenContourError(std::move(report.dangling));
    return report;
}

// ---- slicing ----------------------------------------------------------------

struct SliceOptions {
    double stitch_tol = 1e-7;
    double simplify_tol = 0.07;      // contour simplification (mm); 0 keeps every vertex
    bool check_watertight = true;    // refuse unsafe input up front
    bool allow_open_contours = false; // tolerate open chains (dropped) instead of throwing
    bool parallel = true;            // layers are independent; output order is fixed
};

namespace detail {

// Simplification must never leave a layer worse than the raw stitching:
// rings that self-intersect after the chord replacement revert, and islands
// whose hole/outer relationship breaks revert wholesale.
inline void simplify_layer(Layer& layer, double tol) {
    if (tol <= 0.0) return;
    std::vector<std::vector<Vec2>> originals(layer.contours.size());
    bool any_simplified = false;
    for (std::size_t i = 0; i < layer.contours.size(); ++i) {
        Contour& c = layer.contours[i];
        std::vector<Vec2> simplified = simplify_ring(c.vertices, tol);
        if (simplified.size() == c.vertices.size()) continue;
        if (ring_self_intersects(simplified)) continue;
        originals[i] = std::move(c.vertices);
        c.vertices = std::move(simplified);
        any_simplified = true;
    }
    if (any_simplified) {
        for (const Island& island : layer.islands) {
            if (island.holes.empty()) continue;
            const Contour& outer = layer.contours[island.outer];
            bool ok = true;
            for (const std::size_t hi : island.holes) {
                const Contour& hole = layer.contours[hi];
                for (const Vec2 p : hole.vertices)
                    if (!point_in_ring(p, outer.vertices)) ok = false;
                if (ok && rings_intersect(hole.vertices, outer.vertices)) ok = false;
                if (!ok) break;
            }
            if (ok) continue;
            const auto revert = [&](std::size_t idx) {
                if (!originals[idx].empty())
                    layer.contours[idx].vertices = std::move(originals[idx]);
            };
            revert(island.outer);
            for (const std::size_t hi : island.holes) revert(hi);
        }
    }
    for (Contour& c : layer.contours) c.signed_area = ring_signed_area(c.vertices);
}

template <typename F>
inline void parallel_for(std::size_t n, bool parallel, F&& body) {
    const unsigned hw = std::thread::hardware_concurrency();
    const std::size_t workers = parallel ? std::min<std::size_t>(hw ? hw : 1, n) : 1;
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    body(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (std::thread& t : pool) t.join();
    for (const std::exception_ptr& e : errors)
        if (e) std::rethrow_exception(e);  // lowest layer index wins
}

}  // namespace detail

// Slicing planes sit at z = z_offset + k*layer_thickness, strictly inside
// (z_min, z_max); the default offset of half a layer keeps planes off the
// flat base and top. Layers come back in ascending z with deterministic
// contour order regardless of threading or facet order.
inline std::vector<Layer> slice_mesh(const TriangleMesh& m, double layer_thickness,
                                     std::optional<double> z_offset = std::nullopt,
                                     const SliceOptions& opts = {}) {
    if (!(layer_thickness > 0.0))
        throw DegenerateThicknessError("layer thickness must be positive");
    if (opts.check_watertight) {
        const MeshValidation v = validate_watertight(m);
        if (!v.watertight())
            throw NotWatertightError("mesh is not watertight (" +
                                     std::to_string(v.edge_defects.size()) + " edge defects, " +
                                     std::to_string(v.degenerate_facets.size()) +
                                     " degenerate facets); fix the mesh or force");
    }
    if (m.facets.empty()) return {};

    const double offset = z_offset.value_or(layer_thickness / 2.0);
    const double z_lo = m.z_min();
    const double z_hi = m.z_max();

    std::vector<double> planes;
    std::int64_t k = static_cast<std::int64_t>(std::floor((z_lo - offset) / layer_thickness)) + 1;
    for (;; ++k) {
        const double z = offset + static_cast<double>(k) * layer_thickness;
        if (z <= z_lo) continue;
        if (z >= z_hi) break;
        planes.push_back(z);
    }
    if (planes.empty()) return {};

    // bucket facets by the plane indices their z range can touch
    std::vector<std::vector<std::uint32_t>> plane_facets(planes.size());
    for (std::size_t i = 0; i < m.facets.size(); ++i) {
        const Facet& f = m.facets[i];
        const double fz_lo = std::min({f.v[0].z, f.v[1].z, f.v[2].z});
        const double fz_hi = std::max({f.v[0].z, f.v[1].z, f.v[2].z});
        auto first = std::lower_bound(planes.begin(), planes.end(), fz_lo);
        for (auto it = first; it != planes.end() && *it <= fz_hi; ++it)
            plane_facets[static_cast<std::size_t>(it - planes.begin())].push_back(
                static_cast<std::uint32_t>(i));
    }

    std::vector<Layer> layers(planes.size());
    detail::parallel_for(planes.size(), opts.parallel, [&](std::size_t li) {
        const double z = planes[li];
        std::vector<Segment2> segments;
        segments.reserve(plane_facets[li].size());
        for (const std::uint32_t fi : plane_facets[li])
            if (const auto seg = intersect_facet_plane(m.facets[fi], z)) segments.push_back(*seg);

        Layer& layer = layers[li];
        layer.z = z;
        StitchReport report = opts.allow_open_contours
                                  ? stitch_segments_lenient(segments, opts.stitch_tol)
                                  : stitch_segments_strict(segments, opts.stitch_tol);
        layer.contours = std::move(report.contours);
        layer.islands = std::move(report.islands);
        layer.dangling = std::move(report.dangling);
        detail::simplify_layer(layer, opts.simplify_tol);
    });
    return layers;
}

// ---- contour validation ------------------------------------------------------

struct ContourFinding {
    enum class Kind {
        SimplicityViolation,
        NestingViolation,
        TinyArea,
        DuplicateVertex,
        TooFewVertices,
    };
    Kind kind;
    std::size_t layer = 0;
    std::size_t contour = 0;
    std::size_t edge_a = 0;  // crossing pair for simplicity violations
    std::size_t edge_b = 0;
    std::string detail;
};

struct ContourValidation {
    std::vector<ContourFinding> findings;
    bool clean() const { return findings.empty(); }

    std::size_t count(ContourFinding::Kind kind) const {
        std::size_t n = 0;
        for (const ContourFinding& f : findings)
            if (f.kind == kind) ++n;
        return n;
    }
};

// Jordan-curve check: every contour must be simple (pairwise edge
// intersection, O(n^2) is fine at desk scale), carry real area, and holes
// must nest strictly inside their outers.
inline ContourValidation validate_contours(std::span<const Layer> layers) {
    ContourValidation report;
    for (std::size_t li = 0; li < layers.size(); ++li) {
        const Layer& layer = layers[li];
        std::vector<bool> in_island(layer.contours.size(), false);
        for (const Island& island : layer.islands) {
            in_island[island.outer] = true;
            for (const std::size_t h : island.holes) in_island[h] = true;
        }

        for (std::size_t ci = 0; ci < layer.contours.size(); ++ci) {
            const Contour& c = layer.contours[ci];
            const std::size_t n = c.vertices.size();
            if (n < 3) {
                report.findings.push_back({ContourFinding::Kind::TooFewVertices, li, ci, 0, 0,
                                           "contour has fewer than 3 vertices"});
                continue;
            }
            for (std::size_t i = 0; i < n; ++i) {
                if (c.vertices[i] == c.vertices[(i + 1) % n]) {
                    report.findings.push_back({ContourFinding::Kind::DuplicateVertex, li, ci, i,
                                               0, "consecutive duplicate vertex"});
                    break;
                }
            }
            if (std::fabs(c.signed_area) <= 1e-6)
                report.findings.push_back({ContourFinding::Kind::TinyArea, li, ci, 0, 0,
                                           "contour area is below 1e-6 mm^2"});

            bool crossing_found = false;
            for (std::size_t i = 0; i < n && !crossing_found; ++i) {
                for (std::size_t j = i + 1; j < n; ++j) {
                    const bool adjacent =
                        (j == i + 1) || (i == 0 && j == n - 1);
                    if (adjacent) continue;
                    if (segments_intersect(c.vertices[i], c.vertices[(i + 1) % n],
                                           c.vertices[j], c.vertices[(j + 1) % n])) {
                        report.findings.push_back(
                            {ContourFinding::Kind::SimplicityViolation, li, ci, i, j,
                             "edges " + std::to_string(i) + " and " + std::to_string(j) +
                                 " intersect"});
                        crossing_found = true;
                        break;
                    }
                }
            }

            if (c.role == Contour::Role::Hole && !in_island[ci])
                report.findings.push_back({ContourFinding::Kind::NestingViolation, li, ci, 0, 0,
                                           "hole lies outside every outer contour"});
        }

        // every hole vertex must be strictly inside the assigned outer
        for (const Island& island : layer.islands) {
            const Contour& outer = layer.contours[island.outer];
            for (const std::size_t hi : island.holes) {
                const Contour& hole = layer.contours[hi];
                for (const Vec2 p : hole.vertices) {
                    if (!point_in_ring(p, outer.vertices)) {
                        report.findings.push_back({ContourFinding::Kind::NestingViolation, li,
                                                   hi, 0, 0,
                                                   "hole vertex escapes its outer contour"});
                        break;
                    }
                }
            }
        }
    }
    return report;
}

}  // namespace lamina
