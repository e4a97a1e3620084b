#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "lamina/stl_io.hpp"
#include "support/helpers.hpp"

using namespace lamina;
using testsupport::make_cube40;
using testsupport::project_f32;
using testsupport::same_mesh;

TEST_CASE("ascii output uses the fixed 2/4/6 indentation and .0 suffixes") {
    const std::string text = stl::write_ascii(make_cube40(), "mycube");
    CHECK(text.starts_with("solid mycube\n"));
    CHECK(text.ends_with("endsolid mycube\n"));

    const std::string expected_block =
        "  facet normal 0.0 -1.0 0.0\n"
        "    outer loop\n"
        "      vertex 0.0 0.0 0.0\n"
        "      vertex 40.0 0.0 0.0\n"
        "      vertex 0.0 0.0 40.0\n"
        "    endloop\n"
        "  endfacet\n";
    CHECK(text.find(expected_block) != std::string::npos);
    CHECK(text.find("\n\n") == std::string::npos);  // no blank lines
}

TEST_CASE("empty solid name still writes the header space") {
    TriangleMesh m = make_cube40();
    const std::string text = stl::write_ascii(m, "");
    CHECK(text.starts_with("solid \n"));
}

TEST_CASE("a single triangle gets the unit-axis normal") {
    TriangleMesh m;
    m.facets.push_back({facet_normal({0, 0, 0}, {1, 0, 0}, {0, 1, 0}),
                        {Vec3{0, 0, 0}, Vec3{1, 0, 0}, Vec3{0, 1, 0}}});
    const std::string text = stl::write_ascii(m, "tri");
    CHECK(text.find("facet normal 0.0 0.0 1.0") != std::string::npos);
}

TEST_CASE("reads the hand-authored cube listing, blank lines and all") {
    const TriangleMesh m = stl::read_ascii(testsupport::reference_cube_stl());
    REQUIRE(m.facets.size() == 12);
    CHECK(m.name == "mycube");
    // stored normals are retained even where the listing's winding disagrees
    CHECK(m.facets[8].normal.z == -1.0);
    CHECK(m.facets[10].normal.z == 1.0);
    CHECK(m.facets[0].v[1].x == 40.0);
}

TEST_CASE("ascii round trip is bit-exact") {
    std::mt19937 rng(3);
    for (int trial = 0; trial < 25; ++trial) {
        HeightField h = testsupport::random_padded_heightfield(rng);
        TriangleMesh m = tessellate_heightfield(h);
        m.name = "mesh" + std::to_string(trial);
        const TriangleMesh back = stl::read_ascii(stl::write_ascii(m));
        REQUIRE(same_mesh(m, back));
    }
}

TEST_CASE("awkward coordinates round trip through shortest decimals") {
    TriangleMesh m;
    m.name = "awkward";
    const Vec3 a{0.1, 1e-7, 12345.6789};
    const Vec3 b{-0.30000000000000004, 2.2250738585072014e-308, 1e30};
    const Vec3 c{1.0 / 3.0, -40.0, 0.2 + 0.1};
    m.facets.push_back({facet_normal(a, b, c), {a, b, c}});
    const TriangleMesh back = stl::read_ascii(stl::write_ascii(m));
    REQUIRE(same_mesh(m, back));
}

TEST_CASE("parse errors carry the offending line") {
    const char* bad =
        "solid s\n"
        "  facet normal 0 0\n"
        "    outer loop\n";
    try {
        stl::read_ascii(bad);
        FAIL("expected ParseError");
    } catch (const stl::ParseError& e) {
        CHECK(e.line == 3);  // the third component turns out to be 'outer'
    }

    CHECK_THROWS_AS(stl::read_ascii("solid s\n  facet klingon\n"), stl::ParseError);
    CHECK_THROWS_AS(stl::read_ascii("nonsense"), stl::ParseError);
}

TEST_CASE("truncated files are missing endsolid") {
    std::string text = stl::write_ascii(make_cube40(), "cube");
    text.resize(text.size() / 2);
    CHECK_THROWS_AS(stl::read_ascii(text), stl::ParseError);

    CHECK_THROWS_AS(stl::read_ascii("solid s\n"), stl::MissingEndSolidError);
}

TEST_CASE("whitespace-tolerant input accepts scientific notation") {
    const char* text =
        "solid weird\nfacet normal 0 0 1\nouter loop\n"
        "vertex 1.5e1 0 0\nvertex 0 1.5E+1 0\nvertex 0 0 .5\n"
        "endloop\nendfacet\nendsolid weird\n";
    const TriangleMesh m = stl::read_ascii(text);
    REQUIRE(m.facets.size() == 1);
    CHECK(m.facets[0].v[0].x == 15.0);
    CHECK(m.facets[0].v[1].y == 15.0);
    CHECK(m.facets[0].v[2].z == 0.5);
}

TEST_CASE("binary layout is 84 + 50 per facet") {
    const std::string cube = stl::write_binary(make_cube40());
    CHECK(cube.size() == 684);

    TriangleMesh empty;
    CHECK(stl::write_binary(empty).size() == 84);
}

TEST_CASE("binary round trip is exact after float32 projection") {
    std::mt19937 rng(29);
    for (int trial = 0; trial < 25; ++trial) {
        HeightField h = testsupport::random_padded_heightfield(rng);
        TriangleMesh m = tessellate_heightfield(h);
        m.name = "bin" + std::to_string(trial);
        const TriangleMesh back = stl::read_binary(stl::write_binary(m));
        REQUIRE(same_mesh(project_f32(m), back));
    }
}

TEST_CASE("binary length mismatches are truncation errors") {
    std::string bytes = stl::write_binary(make_cube40());
    bytes.pop_back();
    CHECK_THROWS_AS(stl::read_binary(bytes), stl::TruncatedFileError);
    CHECK_THROWS_AS(stl::read_binary("short"), stl::TruncatedFileError);
}

TEST_CASE("binary headers that look like ascii are detectable") {
    TriangleMesh m = make_cube40();
    const std::string bytes = stl::write_binary(m, "solid-looking header");
    CHECK(stl::looks_like_ascii_stl(bytes));
    CHECK_FALSE(stl::looks_like_ascii_stl(stl::write_binary(m, "lamina binary")));
    // still reads fine as binary
    CHECK(stl::read_binary(bytes).facets.size() == 12);
}

TEST_CASE("auto-detection reads both formats") {
    TriangleMesh m = make_cube40();
    m.name = "cube";

    stl::Format format{};
    const TriangleMesh a = stl::read_auto(stl::write_ascii(m), &format);
    CHECK(format == stl::Format::Ascii);
    CHECK(a.facets.size() == 12);

    const TriangleMesh b = stl::read_auto(stl::write_binary(m), &format);
    CHECK(format == stl::Format::Binary);
    CHECK(b.facets.size() == 12);

    // binary whose header begins with "solid" must fall back to binary
    const std::string tricky = stl::write_binary(m, "solid trap");
    const TriangleMesh c = stl::read_auto(tricky, &format);
    CHECK(format == stl::Format::Binary);
    CHECK(c.facets.size() == 12);
}
