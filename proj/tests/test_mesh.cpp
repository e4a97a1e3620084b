#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "lamina/mesh.hpp"
#include "support/helpers.hpp"

using namespace lamina;
using testsupport::make_cube40;

TEST_CASE("facet_normal follows the cross product") {
    const Vec3 n = facet_normal({0, 0, 0}, {40, 0, 0}, {0, 0, 40});
    CHECK(n.x == 0.0);
    CHECK(n.y == -1.0);
    CHECK(n.z == 0.0);

    const Vec3 up = facet_normal({0, 0, 0}, {1, 0, 0}, {0, 1, 0});
    CHECK(up.z == 1.0);

    CHECK_THROWS_AS(facet_normal({0, 0, 0}, {1, 1, 0}, {2, 2, 0}), DegenerateFacetError);
}

TEST_CASE("2x2 slab tessellates into the 12-facet cube") {
    const TriangleMesh m = make_cube40();
    REQUIRE(m.facets.size() == 12);

    std::size_t top = 0, walls = 0, base = 0;
    for (const Facet& f : m.facets) {
        if (f.normal.z > 0.5) ++top;
        else if (f.normal.z < -0.5) ++base;
        else ++walls;
    }
    CHECK(top == 2);
    CHECK(base == 2);
    CHECK(walls == 8);

    CHECK(testsupport::edges_all_paired(m));  // independent oracle
    const MeshValidation v = validate_watertight(m);
    CHECK(v.watertight());
    CHECK(v.clean());
    CHECK(v.edge_defects.empty());

    CHECK_THAT(signed_volume(m), Catch::Matchers::WithinRel(40.0 * 40.0 * 40.0, 1e-12));
}

TEST_CASE("top facet count follows 2*(rows-1)*(cols-1) for positive grids") {
    const auto top_count = [](std::size_t rows, std::size_t cols) {
        HeightField h;
        h.rows = rows;
        h.cols = cols;
        h.spacing = 1.0;
        h.heights.assign(rows * cols, 3.0);
        const TriangleMesh m = tessellate_heightfield(h);
        std::size_t top = 0;
        for (const Facet& f : m.facets)
            if (f.normal.z > 0.0) ++top;
        return top;
    };
    CHECK(top_count(3, 3) == 8);
    CHECK(top_count(54, 54) == 5618);
}

TEST_CASE("tessellation is watertight and oriented for random padded grids") {
    std::mt19937 rng(13);
    for (int trial = 0; trial < 30; ++trial) {
        const HeightField h = testsupport::random_padded_heightfield(rng);
        const TriangleMesh m = tessellate_heightfield(h);
        const MeshValidation v = validate_watertight(m);
        INFO("trial " << trial << ": " << h.rows << "x" << h.cols);
        REQUIRE(v.watertight());
        REQUIRE(v.normal_defects.empty());
        CHECK(testsupport::edges_all_paired(m));
        CHECK(signed_volume(m) > 0.0);
    }
}

TEST_CASE("flat-floored grids stay watertight despite zero-height aprons") {
    HeightField h;
    h.rows = h.cols = 5;
    h.spacing = 1.0;
    h.heights.assign(25, 0.0);
    h.at(2, 2) = 7.0;  // a single bump in a sea of zeros
    const TriangleMesh m = tessellate_heightfield(h);
    const MeshValidation v = validate_watertight(m);
    CHECK(v.watertight());
    CHECK(testsupport::edges_all_paired(m));
    CHECK(signed_volume(m) > 0.0);
}

TEST_CASE("constant-height solids have volume area*height") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> height(0.5, 20.0);
    std::uniform_int_distribution<std::size_t> dim(2, 9);
    for (int trial = 0; trial < 10; ++trial) {
        HeightField h;
        h.rows = dim(rng);
        h.cols = dim(rng);
        h.spacing = 1.5;
        const double z = height(rng);
        h.heights.assign(h.rows * h.cols, z);
        const double area = static_cast<double>(h.rows - 1) * static_cast<double>(h.cols - 1) *
                            h.spacing * h.spacing;
        const TriangleMesh m = tessellate_heightfield(h);
        CHECK_THAT(signed_volume(m), Catch::Matchers::WithinRel(area * z, 1e-6));
    }
}

TEST_CASE("stored normals match recomputed normals on generated meshes") {
    std::mt19937 rng(19);
    const HeightField h = testsupport::random_padded_heightfield(rng);
    const TriangleMesh m = tessellate_heightfield(h);
    for (const Facet& f : m.facets) {
        const Vec3 n = facet_normal(f.v[0], f.v[1], f.v[2]);
        CHECK(std::fabs(n.x - f.normal.x) <= 1e-9);
        CHECK(std::fabs(n.y - f.normal.y) <= 1e-9);
        CHECK(std::fabs(n.z - f.normal.z) <= 1e-9);
    }
}

TEST_CASE("deleting one facet exposes exactly 3 boundary edges") {
    TriangleMesh m = make_cube40();
    m.facets.pop_back();
    const MeshValidation v = validate_watertight(m);
    CHECK_FALSE(v.watertight());
    CHECK(v.boundary_edges() == 3);
}

TEST_CASE("a single triangle has 3 boundary edges") {
    TriangleMesh m;
    m.facets.push_back({facet_normal({0, 0, 0}, {1, 0, 0}, {0, 1, 0}),
                        {Vec3{0, 0, 0}, Vec3{1, 0, 0}, Vec3{0, 1, 0}}});
    const MeshValidation v = validate_watertight(m);
    CHECK_FALSE(v.watertight());
    CHECK(v.boundary_edges() == 3);
}

TEST_CASE("orientation mismatches count as normal deviations") {
    TriangleMesh m = make_cube40();
    m.facets[0].normal = {-m.facets[0].normal.x, -m.facets[0].normal.y, -m.facets[0].normal.z};
    const MeshValidation v = validate_watertight(m);
    CHECK(v.watertight());  // edges still pair
    REQUIRE(v.normal_defects.size() == 1);
    CHECK(v.normal_defects[0].facet == 0);
    CHECK(v.normal_defects[0].deviation > 1.0);

    // small noise below the gate is tolerated
    TriangleMesh n = make_cube40();
    n.facets[0].normal.x += 1e-8;
    CHECK(validate_watertight(n).normal_defects.empty());

    TriangleMesh o = make_cube40();
    o.facets[0].normal.x += 1e-5;
    CHECK(validate_watertight(o).normal_defects.size() == 1);
}

TEST_CASE("degenerate facets are reported") {
    TriangleMesh m = make_cube40();
    m.facets[3].v[1] = m.facets[3].v[0];
    const MeshValidation v = validate_watertight(m);
    REQUIRE(v.degenerate_facets.size() == 1);
    CHECK(v.degenerate_facets[0] == 3);
    CHECK_FALSE(v.watertight());
}

TEST_CASE("scaling halves the bounding box") {
    const TriangleMesh m = scaled(make_cube40(), 0.5);
    CHECK(m.z_max() == 20.0);
    const Box2 box = m.xy_bounds();
    CHECK(box.width() == 20.0);
    CHECK(box.height() == 20.0);
    CHECK(validate_watertight(m).clean());
    CHECK_THROWS_AS(scaled(m, 0.0), Error);
}

TEST_CASE("mirroring twice is a bit-exact identity on vertices") {
    const TriangleMesh m = make_cube40();
    const TriangleMesh twice = mirrored_x(mirrored_x(m));
    REQUIRE(twice.facets.size() == m.facets.size());
    for (std::size_t i = 0; i < m.facets.size(); ++i)
        for (int k = 0; k < 3; ++k)
            CHECK(testsupport::same_vertex(twice.facets[i].v[static_cast<std::size_t>(k)],
                                           m.facets[i].v[static_cast<std::size_t>(k)]));
}

TEST_CASE("mirroring preserves outward orientation") {
    const TriangleMesh m = mirrored_x(make_cube40());
    CHECK(validate_watertight(m).clean());
    CHECK_THAT(signed_volume(m), Catch::Matchers::WithinRel(64000.0, 1e-12));
}

TEST_CASE("translation moves the min corner") {
    const TriangleMesh m = translated(make_cube40(), {10, 0, 0});
    const Box2 box = m.xy_bounds();
    CHECK(box.min_x == 10.0);
    CHECK(box.min_y == 0.0);
    CHECK(validate_watertight(m).watertight());
}

TEST_CASE("shell-only tessellation emits just the top surface") {
    HeightField h;
    h.rows = h.cols = 2;
    h.spacing = 40.0;
    h.heights = {40, 40, 40, 40};
    const TriangleMesh shell = tessellate_heightfield(h, {.close_solid = false});
    CHECK(shell.facets.size() == 2);
    CHECK_FALSE(validate_watertight(shell).watertight());
}
