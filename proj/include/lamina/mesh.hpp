#pragma once

// Triangle meshes: tessellating a height grid into a closed solid,
// watertightness/orientation validation, and basic transforms.

#include <cstdint>
#include <cstring>
#include <string>
#include <unordered_map>
#include <vector>

#include "lamina/geometry.hpp"
#include "lamina/heightfield.hpp"

namespace lamina {

struct DegenerateFacetError : Error {
    using Error::Error;
};

using Vertex = Vec3;

struct Facet {
    Vec3 normal;  // unit, outward for generated meshes
    std::array<Vertex, 3> v;
};

struct TriangleMesh {
    std::string name;
    std::vector<Facet> facets;

    double z_min() const {
        double m = std::numeric_limits<double>::infinity();
        for (const Facet& f : facets)
            for (const Vertex& p : f.v) m = std::min(m, p.z);
        return m;
    }
    double z_max() const {
        double m = -std::numeric_limits<double>::infinity();
        for (const Facet& f : facets)
            for (const Vertex& p : f.v) m = std::max(m, p.z);
        return m;
    }
    Box2 xy_bounds() const {
        Box2 box;
        for (const Facet& f : facets)
            for (const Vertex& p : f.v) box.expand(Vec2{p.x, p.y});
        return box;
    }
};

// normalize((v2-v1) x (v3-v1)); collinear vertices have no normal.
inline Vec3 facet_normal(const Vertex& v1, const Vertex& v2, const Vertex& v3) {
    const Vec3 c = cross(v2 - v1, v3 - v1);
    const double len = length(c);
    if (len == 0.0) throw DegenerateFacetError("facet vertices are collinear");
    return {c.x / len, c.y / len, c.z / len};
}

// Signed volume of a closed, outward-oriented mesh (sum of signed
// tetrahedra against the origin).
inline double signed_volume(const TriangleMesh& m) {
    double v6 = 0.0;
    for (const Facet& f : m.facets) v6 += dot(f.v[0], cross(f.v[1], f.v[2]));
    return v6 / 6.0;
}

struct TessellateOptions {
    bool close_solid = true;  // false emits just the open top surface
};

namespace detail {

inline Facet make_facet(const Vertex& a, const Vertex& b, const Vertex& c) {
    return Facet{facet_normal(a, b, c), {a, b, c}};
}

}  // namespace detail

// Two triangles per grid cell on top (lower-left then upper-right block,
// row-major), vertical walls down the grid border, and a mirrored base at
// z = 0, so the result is watertight with outward normals. Triangles whose
// three corners all sit at height 0 enclose no volume and are culled, which
// keeps floored surfaces manifold; for strictly positive grids the top has
// exactly 2*(rows-1)*(cols-1) facets. Two positive regions meeting only
// across a zero-height lattice edge pinch to zero thickness there; four
// sheets share that edge and validate_watertight reports it.
inline TriangleMesh tessellate_heightfield(const HeightField& h,
                                           const TessellateOptions& opts = {}) {
    h.validate();
    const std::size_t rows = h.rows, cols = h.cols;
    std::vector<double> xs(cols), ys(rows);
    for (std::size_t c = 0; c < cols; ++c) xs[c] = static_cast<double>(c) * h.spacing;
    for (std::size_t r = 0; r < rows; ++r) ys[r] = static_cast<double>(r) * h.spacing;

    const auto top = [&](std::size_t r, std::size_t c) -> Vertex {
        return {xs[c], ys[r], h.at(r, c)};
    };
    const auto bottom = [&](std::size_t r, std::size_t c) -> Vertex {
        return {xs[c], ys[r], 0.0};
    };
    const auto solid = [&](std::size_t r1, std::size_t c1, std::size_t r2, std::size_t c2,
                           std::size_t r3, std::size_t c3) {
        return h.at(r1, c1) > 0.0 || h.at(r2, c2) > 0.0 || h.at(r3, c3) > 0.0;
    };

    TriangleMesh m;
    // top, lower-left triangles
    for (std::size_t r = 0; r + 1 < rows; ++r)
        for (std::size_t c = 0; c + 1 < cols; ++c)
            if (solid(r, c, r, c + 1, r + 1, c))
                m.facets.push_back(detail::make_facet(top(r, c), top(r, c + 1), top(r + 1, c)));
    // top, upper-right triangles
    for (std::size_t r = 0; r + 1 < rows; ++r)
        for (std::size_t c = 0; c + 1 < cols; ++c)
            if (solid(r + 1, c + 1, r + 1, c, r, c + 1))
                m.facets.push_back(
                    detail::make_facet(top(r + 1, c + 1), top(r + 1, c), top(r, c + 1)));

    if (!opts.close_solid) return m;

    // walls along the grid border, walked counter-clockwise so the outward
    // side is always to the right of P->Q; the quad diagonal runs from the
    // axis-ascending far corner at the base to the near corner at the top,
    // independent of walk direction
    const auto wall = [&](std::size_t rp, std::size_t cp, std::size_t rq, std::size_t cq) {
        const bool ascending = cp < cq || (cp == cq && rp < rq);
        const std::size_t rs = ascending ? rp : rq, cs = ascending ? cp : cq;
        const std::size_t rt = ascending ? rq : rp, ct = ascending ? cq : cp;
        const Vertex st = top(rs, cs), tt = top(rt, ct);
        const Vertex sb = bottom(rs, cs), tb = bottom(rt, ct);
        if (ascending) {
            if (st.z > 0.0) m.facets.push_back(detail::make_facet(sb, tb, st));
            if (tt.z > 0.0) m.facets.push_back(detail::make_facet(tb, tt, st));
        } else {
            if (st.z > 0.0) m.facets.push_back(detail::make_facet(sb, st, tb));
            if (tt.z > 0.0) m.facets.push_back(detail::make_facet(tb, st, tt));
        }
    };
    for (std::size_t c = 0; c + 1 < cols; ++c) wall(0, c, 0, c + 1);                    // south
    for (std::size_t r = 0; r + 1 < rows; ++r) wall(r, cols - 1, r + 1, cols - 1);      // east
    for (std::size_t c = cols - 1; c > 0; --c) wall(rows - 1, c, rows - 1, c - 1);      // north
    for (std::size_t r = rows - 1; r > 0; --r) wall(r, 0, r - 1, 0);                    // west

    // base mirrors the top cells, wound downward
    for (std::size_t r = 0; r + 1 < rows; ++r)
        for (std::size_t c = 0; c + 1 < cols; ++c)
            if (solid(r, c, r, c + 1, r + 1, c))
                m.facets.push_back(
                    detail::make_facet(bottom(r, c), bottom(r + 1, c), bottom(r, c + 1)));
    for (std::size_t r = 0; r + 1 < rows; ++r)
        for (std::size_t c = 0; c + 1 < cols; ++c)
            if (solid(r + 1, c + 1, r + 1, c, r, c + 1))
                m.facets.push_back(
                    detail::make_facet(bottom(r + 1, c + 1), bottom(r, c + 1), bottom(r + 1, c)));
    return m;
}

// ---- validation -----------------------------------------------------------

struct MeshValidation {
    struct EdgeDefect {
        Vertex a, b;
        int count;  // facets sharing this undirected edge (2 is healthy)
    };
    struct NormalDefect {
        std::size_t facet;
        double deviation;  // max per-component difference, 2 for flipped
    };

    std::vector<EdgeDefect> edge_defects;
    std::vector<std::size_t> degenerate_facets;
    std::vector<NormalDefect> normal_defects;

    bool watertight() const { return edge_defects.empty() && degenerate_facets.empty(); }
    bool clean() const { return watertight() && normal_defects.empty(); }

    std::size_t boundary_edges() const {
        std::size_t n = 0;
        for (const EdgeDefect& d : edge_defects)
            if (d.count == 1) ++n;
        return n;
    }
};

namespace detail {

struct EdgeKey {
    std::array<std::uint64_t, 6> bits;
    bool operator==(const EdgeKey&) const = default;
};

struct EdgeKeyHash {
    std::size_t operator()(const EdgeKey& k) const {
        std::uint64_t h = 0xcbf29ce484222325ull;
        for (std::uint64_t b : k.bits) {
            h ^= b;
            h *= 0x100000001b3ull;
        }
        return static_cast<std::size_t>(h);
    }
};

inline std::uint64_t double_bits(double v) {
    std::uint64_t b;
    std::memcpy(&b, &v, sizeof b);
    return b;
}

// undirected, compared bit-exactly: shared vertices come from identical
// lattice arithmetic, so no epsilon is needed
inline EdgeKey edge_key(const Vertex& a, const Vertex& b) {
    const Vertex& lo = lex_less(a, b) ? a : b;
    const Vertex& hi = lex_less(a, b) ? b : a;
    return EdgeKey{{double_bits(lo.x), double_bits(lo.y), double_bits(lo.z),
                    double_bits(hi.x), double_bits(hi.y), double_bits(hi.z)}};
}

}  // namespace detail

inline MeshValidation validate_watertight(const TriangleMesh& m) {
    MeshValidation report;
    std::unordered_map<detail::EdgeKey, std::pair<std::array<Vertex, 2>, int>,
                       detail::EdgeKeyHash>
        edges;
    edges.reserve(m.facets.size() * 3);

    for (std::size_t i = 0; i < m.facets.size(); ++i) {
        const Facet& f = m.facets[i];
        bool degenerate = f.v[0] == f.v[1] || f.v[1] == f.v[2] || f.v[0] == f.v[2];
        if (!degenerate) {
            const Vec3 c = cross(f.v[1] - f.v[0], f.v[2] - f.v[0]);
            if (length(c) == 0.0) degenerate = true;
        }
        if (degenerate) {
            report.degenerate_facets.push_back(i);
            continue;
        }
        for (int e = 0; e < 3; ++e) {
            const Vertex& a = f.v[static_cast<std::size_t>(e)];
            const Vertex& b = f.v[static_cast<std::size_t>((e + 1) % 3)];
            auto [it, inserted] = edges.try_emplace(detail::edge_key(a, b),
                                                    std::pair{std::array{a, b}, 0});
            (void)inserted;
            ++it->second.second;
        }
        const Vec3 n = facet_normal(f.v[0], f.v[1], f.v[2]);
        const double dev = std::max({std::fabs(n.x - f.normal.x), std::fabs(n.y - f.normal.y),
                                     std::fabs(n.z - f.normal.z)});
        if (dev > 1e-6) report.normal_defects.push_back({i, dev});
    }
    for (const auto& [key, entry] : edges) {
        (void)key;
        if (entry.second != 2)
            report.edge_defects.push_back({entry.first[0], entry.first[1], entry.second});
    }
    return report;
}

// ---- transforms (normals recomputed) ---------------------------------------

inline TriangleMesh scaled(const TriangleMesh& m, double s) {
    if (!(s > 0.0)) throw Error("scale factor must be positive");
    TriangleMesh out;
    out.name = m.name;
    out.facets.reserve(m.facets.size());
    for (const Facet& f : m.facets) {
        const Vertex a = f.v[0] * s, b = f.v[1] * s, c = f.v[2] * s;
        out.facets.push_back({facet_normal(a, b, c), {a, b, c}});
    }
    return out;
}

// Reflection across the yz plane; winding is reversed so orientation stays
// outward.
inline TriangleMesh mirrored_x(const TriangleMesh& m) {
    TriangleMesh out;
    out.name = m.name;
    out.facets.reserve(m.facets.size());
    for (const Facet& f : m.facets) {
        const auto flip = [](const Vertex& p) { return Vertex{-p.x, p.y, p.z}; };
        const Vertex a = flip(f.v[0]), b = flip(f.v[2]), c = flip(f.v[1]);
        out.facets.push_back({facet_normal(a, b, c), {a, b, c}});
    }
    return out;
}

inline TriangleMesh translated(const TriangleMesh& m, Vec3 d) {
    TriangleMesh out;
    out.name = m.name;
    out.facets.reserve(m.facets.size());
    for (const Facet& f : m.facets) {
        const Vertex a = f.v[0] + d, b = f.v[1] + d, c = f.v[2] + d;
        out.facets.push_back({facet_normal(a, b, c), {a, b, c}});
    }
    return out;
}

}  // namespace lamina
