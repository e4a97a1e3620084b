#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <chrono>
#include <sys/wait.h>

#include "lamina/lamina.hpp"
#include "support/helpers.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int status = -1;
    std::string output;  // stdout + stderr
};

RunResult run_cli(const std::string& args) {
    const std::string cmd = std::string(LAMINA_CLI_PATH) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult result;
    char buf[512];
    while (std::fgets(buf, sizeof buf, pipe)) result.output += buf;
    const int rc = pclose(pipe);
    result.status = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    return result;
}

fs::path work_dir() {
    const fs::path dir = fs::temp_directory_path() / "lamina_cli_tests";
    fs::create_directories(dir);
    return dir;
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

std::string read_text(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

TEST_CASE("surface subcommand builds a watertight hemisphere") {
    const fs::path out = work_dir() / "hemi.stl";
    const RunResult r = run_cli(
        "surface --fn \"10*sqrt(max(0,1-(x/10)^2-(y/10)^2))\" "
        "--xmin -10 --xmax 10 --ymin -10 --ymax 10 --res 5 -o " +
        out.string());
    INFO(r.output);
    REQUIRE(r.status == 0);

    const lamina::TriangleMesh m = lamina::stl::read_auto(read_text(out));
    CHECK(lamina::validate_watertight(m).watertight());
    CHECK(m.z_max() == 10.0);
    CHECK(m.name == "hemi");
}

TEST_CASE("surface without --fn is a usage error") {
    const RunResult r = run_cli("surface -o /tmp/nothing.stl");
    CHECK(r.status == 2);
}

TEST_CASE("surface rejects a zero resolution, naming the flag") {
    const RunResult r =
        run_cli("surface --fn \"x\" --res 0 -o /tmp/nothing.stl");
    CHECK(r.status == 2);
    CHECK(r.output.find("--res") != std::string::npos);
}

TEST_CASE("relief elevation ingests the 2500-value recipe") {
    const fs::path grid = work_dir() / "terrain.txt";
    std::string text;
    for (std::size_t i = 0; i < 2500; ++i) {
        text += std::to_string(1500 + (i * 37) % 700);
        text += (i % 50 == 49) ? '\n' : ' ';
    }
    write_text(grid, text);

    const fs::path out = work_dir() / "terrain.stl";
    const RunResult r = run_cli("relief --grid " + grid.string() +
                                " --mode elevation --length-x 50 -o " + out.string());
    INFO(r.output);
    REQUIRE(r.status == 0);
    CHECK(r.output.find("54x54") != std::string::npos);

    const lamina::TriangleMesh m = lamina::stl::read_auto(read_text(out));
    // 2*53*53 top + the same base + 4*(54+54-2) wall facets
    CHECK(m.facets.size() == 5618u * 2 + 424);
    CHECK(lamina::validate_watertight(m).watertight());
}

TEST_CASE("relief image binarizes a PGM into a plateau") {
    const fs::path pgm = work_dir() / "pic.pgm";
    write_text(pgm, "P2\n4 3\n255\n"
                    "0 255 255 0\n"
                    "0 255 255 0\n"
                    "0 0 0 0\n");
    const fs::path out = work_dir() / "pic.stl";
    const RunResult r = run_cli("relief --image " + pgm.string() +
                                " --mode image --threshold 0.5 -o " + out.string());
    INFO(r.output);
    REQUIRE(r.status == 0);
    const lamina::TriangleMesh m = lamina::stl::read_auto(read_text(out));
    CHECK(lamina::validate_watertight(m).watertight());
    CHECK(m.z_max() == 10.0);  // default image scale
}

TEST_CASE("relief depth with everything out of range fails cleanly") {
    const fs::path grid = work_dir() / "depth_bad.txt";
    write_text(grid, "Width 2\nHeight 2\n1600 1700 1800 1900\n[0,0,0]\n");
    const RunResult r = run_cli("relief --grid " + grid.string() +
                                " --mode depth -o /tmp/depth_bad.stl");
    CHECK(r.status == 1);
    CHECK(r.output.find("nothing to print") != std::string::npos);
}

TEST_CASE("relief depth honors the capture-tool Height header for row length") {
    const fs::path grid = work_dir() / "depth.txt";
    // 3 rows of 2 values each: Width 3, Height 2 per the capture layout
    write_text(grid, "Width 3\nHeight 2\n\n100 200\n300 400\n500 600\n[0,0,0]\n");
    const fs::path out = work_dir() / "depth.stl";
    const RunResult r =
        run_cli("relief --grid " + grid.string() + " --mode depth -o " + out.string());
    INFO(r.output);
    REQUIRE(r.status == 0);
    CHECK(r.output.find("7x6") != std::string::npos);  // (3+4)x(2+4) with pad 2
}

TEST_CASE("slice produces layer-stamped gcode for the cube") {
    const fs::path stl = work_dir() / "cube.stl";
    write_text(stl, lamina::stl::write_ascii(testsupport::make_cube40(), "cube"));
    const fs::path gcode = work_dir() / "cube.gcode";
    const RunResult r = run_cli("slice " + stl.string() +
                                " --layer-height 10 --gcode " + gcode.string());
    INFO(r.output);
    REQUIRE(r.status == 0);
    CHECK(r.output.find("layers: 4") != std::string::npos);

    const std::string text = read_text(gcode);
    std::size_t comments = 0;
    for (std::size_t pos = text.find("; layer"); pos != std::string::npos;
         pos = text.find("; layer", pos + 1))
        ++comments;
    CHECK(comments == 4);
    CHECK(text.find("M104 S215") != std::string::npos);
    CHECK(text.find("G28") != std::string::npos);
}

TEST_CASE("slice refuses a cube with a deleted facet unless forced") {
    lamina::TriangleMesh broken = testsupport::make_cube40();
    broken.facets.erase(broken.facets.begin() + 2);  // a wall facet: every plane crosses it
    const fs::path stl = work_dir() / "broken.stl";
    write_text(stl, lamina::stl::write_ascii(broken, "broken"));

    const RunResult refused = run_cli("slice " + stl.string() + " --layer-height 10");
    CHECK(refused.status == 1);
    CHECK(refused.output.find("not watertight") != std::string::npos);
    CHECK(refused.output.find("boundary edges: 3") != std::string::npos);

    const fs::path svg = work_dir() / "broken_svg";
    fs::remove_all(svg);
    const RunResult forced = run_cli("slice " + stl.string() +
                                     " --layer-height 10 --force --svg-dir " + svg.string());
    INFO(forced.output);
    CHECK(forced.status == 0);
    // the dropped facet leaves dangling endpoints, highlighted in the preview
    const std::string top_layer = read_text(svg / "layer_0003.svg");
    CHECK(top_layer.find("<circle") != std::string::npos);
}

TEST_CASE("hollow shell with a raft slices end to end") {
    const fs::path stl = work_dir() / "hemi2.stl";
    {
        const lamina::expr::Expression f =
            lamina::expr::parse("10*sqrt(max(0,1-(x/10)^2-(y/10)^2))");
        const lamina::HeightField h =
            lamina::HeightField::from_function(f, -10, 10, -10, 10, 2.0, nullptr, 0.0);
        write_text(stl, lamina::stl::write_ascii(lamina::tessellate_heightfield(h), "hemi"));
    }
    const fs::path gcode = work_dir() / "hemi2.gcode";
    const RunResult r = run_cli("slice " + stl.string() +
                                " --layer-height 1 --fill 0 --raft 2 --gcode " +
                                gcode.string());
    INFO(r.output);
    REQUIRE(r.status == 0);

    const std::string text = read_text(gcode);
    std::size_t comments = 0;
    for (std::size_t pos = text.find("; layer"); pos != std::string::npos;
         pos = text.find("; layer", pos + 1))
        ++comments;
    CHECK(comments == 10 + 2);  // ten model layers plus the raft
}

TEST_CASE("svg previews land in the requested directory") {
    const fs::path stl = work_dir() / "cube_svg.stl";
    write_text(stl, lamina::stl::write_ascii(testsupport::make_cube40(), "cube"));
    const fs::path dir = work_dir() / "previews";
    fs::remove_all(dir);
    const RunResult r = run_cli("slice " + stl.string() + " --layer-height 10 --svg-dir " +
                                dir.string());
    INFO(r.output);
    REQUIRE(r.status == 0);
    CHECK(fs::exists(dir / "layer_0000.svg"));
    CHECK(fs::exists(dir / "layer_0003.svg"));
    CHECK(testsupport::xml_well_formed(read_text(dir / "layer_0000.svg")));
}

TEST_CASE("slice output is byte-identical with --no-timestamp") {
    const fs::path stl = work_dir() / "cube_det.stl";
    write_text(stl, lamina::stl::write_ascii(testsupport::make_cube40(), "cube"));
    const fs::path g1 = work_dir() / "det1.gcode";
    const fs::path g2 = work_dir() / "det2.gcode";
    REQUIRE(run_cli("slice " + stl.string() + " --layer-height 10 --no-timestamp --gcode " +
                    g1.string())
                .status == 0);
    REQUIRE(run_cli("slice " + stl.string() + " --layer-height 10 --no-timestamp --gcode " +
                    g2.string())
                .status == 0);
    CHECK(read_text(g1) == read_text(g2));
}

TEST_CASE("profiles configure the slice and flags override profiles") {
    const fs::path stl = work_dir() / "cube_cfg.stl";
    write_text(stl, lamina::stl::write_ascii(testsupport::make_cube40(), "cube"));
    const fs::path profile = work_dir() / "quality.cfg";
    write_text(profile, "layer_thickness = 20\nfill_fraction = 0\n");

    const RunResult from_profile =
        run_cli("slice " + stl.string() + " --config " + profile.string());
    INFO(from_profile.output);
    REQUIRE(from_profile.status == 0);
    CHECK(from_profile.output.find("layers: 2") != std::string::npos);

    const RunResult overridden = run_cli("slice " + stl.string() + " --config " +
                                         profile.string() + " --layer-height 10");
    REQUIRE(overridden.status == 0);
    CHECK(overridden.output.find("layers: 4") != std::string::npos);

    const fs::path bad = work_dir() / "bad.cfg";
    write_text(bad, "layer_thiccness = 1\n");
    CHECK(run_cli("slice " + stl.string() + " --config " + bad.string()).status == 1);
}

TEST_CASE("validate passes the cube and fails a lone triangle") {
    const fs::path cube = work_dir() / "cube_ok.stl";
    write_text(cube, lamina::stl::write_ascii(testsupport::make_cube40(), "cube"));
    const RunResult good = run_cli("validate " + cube.string() + " --layer-height 10");
    INFO(good.output);
    CHECK(good.status == 0);
    CHECK(good.output.find("OK") != std::string::npos);

    const fs::path tri = work_dir() / "tri.stl";
    write_text(tri,
               "solid tri\n facet normal 0 0 1\n outer loop\n vertex 0 0 0\n"
               " vertex 10 0 0\n vertex 0 10 0\n endloop\n endfacet\nendsolid tri\n");
    const RunResult bad = run_cli("validate " + tri.string());
    CHECK(bad.status == 1);
    CHECK(bad.output.find("boundary edges: 3") != std::string::npos);
}

TEST_CASE("validate flags the bowtie fixture as non-simple") {
    const fs::path stl = work_dir() / "bowtie.stl";
    write_text(stl, lamina::stl::write_ascii(testsupport::make_bowtie_mesh(), "bowtie"));
    const RunResult r = run_cli("validate " + stl.string() + " --layer-height 1");
    INFO(r.output);
    CHECK(r.status == 1);
    CHECK(r.output.find("SimplicityViolation") != std::string::npos);
}

TEST_CASE("the hand-authored reference cube validates clean") {
    const fs::path stl = work_dir() / "reference_cube.stl";
    write_text(stl, testsupport::reference_cube_stl());
    const RunResult r = run_cli("validate " + stl.string() + " --layer-height 10");
    INFO(r.output);
    CHECK(r.status == 0);
    CHECK(r.output.find("watertight: yes") != std::string::npos);
    // winding inconsistencies in the listing surface as informational only
    CHECK(r.output.find("orientation/normal mismatches: 6") != std::string::npos);
}

TEST_CASE("missing subcommands are usage errors") {
    CHECK(run_cli("").status == 2);
    CHECK(run_cli("frobnicate").status == 2);
}

TEST_CASE("surface supports region masks, binary output and shell-only") {
    const fs::path out = work_dir() / "hemi_region.stl";
    const RunResult r = run_cli(
        "surface --fn \"sqrt(100 - x^2 - y^2)\" --region \"100 - x^2 - y^2\" "
        "--res 2 --binary -o " +
        out.string());
    INFO(r.output);
    REQUIRE(r.status == 0);
    lamina::stl::Format format{};
    const lamina::TriangleMesh m = lamina::stl::read_auto(read_text(out), &format);
    CHECK(format == lamina::stl::Format::Binary);
    CHECK(lamina::validate_watertight(m).watertight());
    CHECK_THAT(m.z_max(), Catch::Matchers::WithinAbs(10.0, 1e-5));

    const fs::path shell = work_dir() / "hemi_shell.stl";
    const RunResult s = run_cli("surface --fn \"sqrt(100 - x^2 - y^2)\" --region "
                                "\"100 - x^2 - y^2\" --res 2 --shell-only -o " +
                                shell.string());
    REQUIRE(s.status == 0);
    const lamina::TriangleMesh open = lamina::stl::read_auto(read_text(shell));
    CHECK_FALSE(lamina::validate_watertight(open).watertight());
    CHECK(open.facets.size() < m.facets.size());
}

TEST_CASE("the default surface-then-slice pipeline finishes inside ten seconds") {
    const auto start = std::chrono::steady_clock::now();
    const fs::path stl = work_dir() / "pipeline.stl";
    const fs::path gcode = work_dir() / "pipeline.gcode";
    const RunResult built = run_cli(
        "surface --fn \"10*sqrt(max(0,1-(x/10)^2-(y/10)^2))\" --res 5 -o " + stl.string());
    INFO(built.output);
    REQUIRE(built.status == 0);
    CHECK(built.output.find("101x101") != std::string::npos);
    const RunResult sliced = run_cli("slice " + stl.string() + " --gcode " + gcode.string());
    INFO(sliced.output);
    REQUIRE(sliced.status == 0);
    CHECK(sliced.output.find("layers: 50") != std::string::npos);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    CHECK(seconds < 10.0);
}
