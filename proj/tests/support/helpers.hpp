#pragma once

// Shared test utilities: deterministic generators, independent oracles
// (edge pairing, winding-number containment, exhaustive tours), an XML
// well-formedness checker, and the hand-authored reference cube.

#include <cstring>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "lamina/lamina.hpp"

namespace testsupport {

// ---- bit-exact comparisons ---------------------------------------------------

inline bool same_bits(double a, double b) {
    return std::memcmp(&a, &b, sizeof a) == 0;
}

inline bool same_vertex(const lamina::Vec3& a, const lamina::Vec3& b) {
    return same_bits(a.x, b.x) && same_bits(a.y, b.y) && same_bits(a.z, b.z);
}

inline bool same_mesh(const lamina::TriangleMesh& a, const lamina::TriangleMesh& b) {
    if (a.name != b.name || a.facets.size() != b.facets.size()) return false;
    for (std::size_t i = 0; i < a.facets.size(); ++i) {
        if (!same_vertex(a.facets[i].normal, b.facets[i].normal)) return false;
        for (int k = 0; k < 3; ++k)
            if (!same_vertex(a.facets[i].v[static_cast<std::size_t>(k)],
                             b.facets[i].v[static_cast<std::size_t>(k)]))
                return false;
    }
    return true;
}

inline lamina::TriangleMesh project_f32(const lamina::TriangleMesh& m) {
    lamina::TriangleMesh out;
    out.name = m.name;
    const auto p = [](const lamina::Vec3& v) {
        return lamina::Vec3{static_cast<double>(static_cast<float>(v.x)),
                            static_cast<double>(static_cast<float>(v.y)),
                            static_cast<double>(static_cast<float>(v.z))};
    };
    for (const lamina::Facet& f : m.facets)
        out.facets.push_back({p(f.normal), {p(f.v[0]), p(f.v[1]), p(f.v[2])}});
    return out;
}

// ---- independent oracles ------------------------------------------------------

// Edge-pairing watertightness check, written against a std::map rather than
// the library's hash so the two routes stay independent.
inline bool edges_all_paired(const lamina::TriangleMesh& m) {
    auto key = [](const lamina::Vec3& a, const lamina::Vec3& b) {
        auto tup = [](const lamina::Vec3& v) { return std::array{v.x, v.y, v.z}; };
        auto ta = tup(a), tb = tup(b);
        return ta < tb ? std::pair{ta, tb} : std::pair{tb, ta};
    };
    std::map<std::pair<std::array<double, 3>, std::array<double, 3>>, int> counts;
    for (const lamina::Facet& f : m.facets)
        for (int e = 0; e < 3; ++e)
            ++counts[key(f.v[static_cast<std::size_t>(e)],
                         f.v[static_cast<std::size_t>((e + 1) % 3)])];
    for (const auto& [k, n] : counts)
        if (n != 2) return false;
    return !m.facets.empty();
}

// Winding-number point-in-polygon, deliberately a different algorithm from
// the library's even-odd crossing test.
inline bool winding_contains(lamina::Vec2 p, std::span<const lamina::Vec2> ring) {
    int winding = 0;
    const std::size_t n = ring.size();
    for (std::size_t i = 0; i < n; ++i) {
        const lamina::Vec2 a = ring[i];
        const lamina::Vec2 b = ring[(i + 1) % n];
        if (a.y <= p.y) {
            if (b.y > p.y && lamina::cross(b - a, p - a) > 0) ++winding;
        } else {
            if (b.y <= p.y && lamina::cross(b - a, p - a) < 0) --winding;
        }
    }
    return winding != 0;
}

// Exhaustive-permutation tour oracle for small island counts.
inline double brute_force_tour_length(std::span<const lamina::Vec2> points, lamina::Vec2 start) {
    std::vector<std::size_t> order(points.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    double best = std::numeric_limits<double>::infinity();
    do {
        double len = 0.0;
        lamina::Vec2 at = start;
        for (const std::size_t i : order) {
            len += lamina::distance(at, points[i]);
            at = points[i];
        }
        best = std::min(best, len);
    } while (std::next_permutation(order.begin(), order.end()));
    return best;
}

// Minimal XML well-formedness check: tag balance, quoted attributes, one root.
inline bool xml_well_formed(std::string_view text) {
    std::vector<std::string> stack;
    std::size_t i = 0;
    int roots = 0;
    while (i < text.size()) {
        if (text[i] != '<') {
            ++i;
            continue;
        }
        const std::size_t end = text.find('>', i);
        if (end == std::string_view::npos) return false;
        std::string_view tag = text.substr(i + 1, end - i - 1);
        i = end + 1;
        if (tag.starts_with("?")) {
            if (!tag.ends_with("?")) return false;
            continue;
        }
        // attribute quotes must balance
        int quotes = 0;
        for (const char c : tag)
            if (c == '"') ++quotes;
        if (quotes % 2 != 0) return false;
        if (tag.starts_with("/")) {
            if (stack.empty()) return false;
            const std::string_view name = tag.substr(1);
            if (stack.back() != name) return false;
            stack.pop_back();
            if (stack.empty()) ++roots;
            continue;
        }
        const bool self_closing = tag.ends_with("/");
        std::size_t name_end = 0;
        while (name_end < tag.size() && !std::isspace(static_cast<unsigned char>(tag[name_end])) &&
               tag[name_end] != '/')
            ++name_end;
        if (name_end == 0) return false;
        if (self_closing) {
            if (stack.empty()) ++roots;
            continue;
        }
        stack.emplace_back(tag.substr(0, name_end));
    }
    return stack.empty() && roots == 1;
}

// ---- generators ----------------------------------------------------------------

// Random padded height grid: positive interior heights on a constant border.
inline lamina::HeightField random_padded_heightfield(std::mt19937& rng) {
    std::uniform_int_distribution<std::size_t> size_dist(2, 14);
    std::uniform_real_distribution<double> height_dist(0.5, 12.0);
    std::uniform_real_distribution<double> base_dist(0.0, 2.0);
    std::uniform_real_distribution<double> spacing_dist(0.25, 2.5);

    const std::size_t inner_rows = size_dist(rng);
    const std::size_t inner_cols = size_dist(rng);
    const double base = base_dist(rng);
    const std::size_t pad = 2;

    lamina::HeightField h;
    h.rows = inner_rows + 2 * pad;
    h.cols = inner_cols + 2 * pad;
    h.spacing = spacing_dist(rng);
    h.base_height = base;
    h.heights.assign(h.rows * h.cols, base);
    for (std::size_t r = pad; r < pad + inner_rows; ++r)
        for (std::size_t c = pad; c < pad + inner_cols; ++c)
            h.at(r, c) = base + height_dist(rng);
    return h;
}

// ---- fixtures -------------------------------------------------------------------

// Hand-authored 12-facet 40 mm cube, the reference for the golden-file
// check (blank lines and all, to exercise tolerant parsing).
inline const char* reference_cube_stl() {
    return R"(solid mycube

  facet normal 0.0 -1.0 0.0
    outer loop
      vertex 0.0 0.0 0.0
      vertex 40.0 0.0 0.0
      vertex 0.0 0.0 40.0
    endloop
  endfacet

  facet normal 0.0 -1.0 0.0
    outer loop
      vertex 40.0 0.0 40.0
      vertex 40.0 0.0 0.0
      vertex 0.0 0.0 40.0
    endloop
  endfacet

  facet normal 0.0 1.0 0.0
    outer loop
      vertex 0.0 40.0 0.0
      vertex 40.0 40.0 0.0
      vertex 0.0 40.0 40.0
    endloop
  endfacet

  facet normal 0.0 1.0 0.0
    outer loop
      vertex 40.0 40.0 40.0
      vertex 40.0 40.0 0.0
      vertex 0.0 40.0 40.0
    endloop
  endfacet

  facet normal -1.0 0.0 0.0
    outer loop
      vertex 0.0 0.0 0.0
      vertex 0.0 40.0 0.0
      vertex 0.0 0.0 40.0
    endloop
  endfacet

  facet normal -1.0 0.0 0.0
    outer loop
      vertex 0.0 40.0 40.0
      vertex 0.0 40.0 0.0
      vertex 0.0 0.0 40.0
    endloop
  endfacet

  facet normal 1.0 0.0 0.0
    outer loop
      vertex 40.0 0.0 0.0
      vertex 40.0 40.0 0.0
      vertex 40.0 0.0 40.0
    endloop
  endfacet

  facet normal 1.0 0.0 0.0
    outer loop
      vertex 40.0 40.0 40.0
      vertex 40.0 40.0 0.0
      vertex 40.0 0.0 40.0
    endloop
  endfacet

  facet normal 0.0 0.0 -1.0
    outer loop
      vertex 0.0 0.0 0.0
      vertex 40.0 0.0 0.0
      vertex 0.0 40.0 0.0
    endloop
  endfacet

  facet normal 0.0 0.0 -1.0
    outer loop
      vertex 40.0 40.0 0.0
      vertex 40.0 0.0 0.0
      vertex 0.0 40.0 0.0
    endloop
  endfacet

  facet normal 0.0 0.0 1.0
    outer loop
      vertex 0.0 0.0 40.0
      vertex 40.0 0.0 40.0
      vertex 0.0 40.0 40.0
    endloop
  endfacet

  facet normal 0.0 0.0 1.0
    outer loop
      vertex 40.0 40.0 40.0
      vertex 40.0 0.0 40.0
      vertex 0.0 40.0 40.0
    endloop
  endfacet

endsolid
)";
}

// 40 mm cube as the library builds it: a 2x2 grid of 40 mm heights.
inline lamina::TriangleMesh make_cube40() {
    lamina::HeightField h;
    h.rows = h.cols = 2;
    h.spacing = 40.0;
    h.base_height = 0.0;
    h.heights = {40.0, 40.0, 40.0, 40.0};
    return lamina::tessellate_heightfield(h);
}

// Two tetrahedra sharing only the vertical edge (0,0,4)-(0,0,6); slicing
// between those heights yields a figure-eight through (0,0).
inline lamina::TriangleMesh make_bowtie_mesh() {
    using lamina::Vec3;
    const Vec3 u{0, 0, 4}, v{0, 0, 6};
    const Vec3 p1{4, -2, 4.2}, q1{4, 2, 4.2};
    const Vec3 p2{-4, 2, 4.2}, q2{-4, -2, 4.2};
    lamina::TriangleMesh m;
    m.name = "bowtie";
    const auto add = [&m](Vec3 a, Vec3 b, Vec3 c) {
        m.facets.push_back({lamina::facet_normal(a, b, c), {a, b, c}});
    };
    add(u, v, p1);
    add(v, u, q1);
    add(u, p1, q1);
    add(v, q1, p1);
    add(u, v, p2);
    add(v, u, q2);
    add(u, p2, q2);
    add(v, q2, p2);
    return m;
}

}  // namespace testsupport
