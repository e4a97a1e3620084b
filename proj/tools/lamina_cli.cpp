// lamina command line: turn expressions, images, elevation grids and depth
// grids into printable STL solids, and slice STL into validated G-code with
// SVG layer previews.
//
// Exit codes: 0 ok, 1 validation or processing failure, 2 usage.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "lamina/lamina.hpp"

namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw lamina::Error("cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return std::move(buf).str();
}

void write_file(const fs::path& path, std::string_view data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw lamina::Error("cannot write '" + path.string() + "'");
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw lamina::Error("write failed for '" + path.string() + "'");
}

void write_mesh(const lamina::TriangleMesh& mesh, const fs::path& out_path, bool binary) {
    if (binary)
        write_file(out_path, lamina::stl::write_binary(mesh));
    else
        write_file(out_path, lamina::stl::write_ascii(mesh));
}

struct SurfaceArgs {
    std::string fn;
    std::string region;
    double xmin = -10.0, xmax = 10.0, ymin = -10.0, ymax = 10.0;
    double res = 5.0;
    double floor = 0.0;
    std::string output;
    std::string name;
    bool binary = false;
    bool shell_only = false;
};

int run_surface(const SurfaceArgs& a) {
    const lamina::expr::Expression f = lamina::expr::parse(a.fn);
    std::optional<lamina::expr::Expression> region;
    if (!a.region.empty()) region = lamina::expr::parse(a.region);

    const lamina::HeightField grid = lamina::HeightField::from_function(
        f, a.xmin, a.xmax, a.ymin, a.ymax, a.res, region ? &*region : nullptr, a.floor);

    lamina::TriangleMesh mesh =
        lamina::tessellate_heightfield(grid, {.close_solid = !a.shell_only});
    mesh.name = a.name.empty() ? fs::path(a.output).stem().string() : a.name;
    write_mesh(mesh, a.output, a.binary);

    std::printf("grid: %zux%zu, spacing %.6g mm\n", grid.rows, grid.cols, grid.spacing);
    std::printf("facets: %zu%s\n", mesh.facets.size(), a.shell_only ? " (open shell)" : "");
    std::printf("height: %.6g mm\n", grid.max_height());
    std::printf("wrote %s\n", a.output.c_str());
    return 0;
}

struct ReliefArgs {
    std::string image;
    std::string grid;
    std::string mode;
    double scale = 0.0;  // 0 = per-mode default
    double threshold = 0.5;
    double lo = 20.0, hi = 1500.0;
    std::size_t pad = 2;
    std::size_t length_x = 0;
    bool mirror = false;
    bool no_invert = false;
    std::string output;
    std::string name;
    bool binary = false;
    bool shell_only = false;
};

int run_relief(const ReliefArgs& a) {
    lamina::HeightField grid;
    if (a.mode == "image") {
        if (a.image.empty()) throw lamina::Error("--mode image needs --image");
        std::ifstream in(a.image, std::ios::binary);
        if (!in) throw lamina::Error("cannot open '" + a.image + "'");
        const lamina::Raster raster = lamina::read_pgm(in);
        const double scale = a.scale > 0.0 ? a.scale : 10.0;
        grid = lamina::HeightField::from_image(raster, a.threshold, scale, a.pad);
    } else {
        if (a.grid.empty()) throw lamina::Error("--mode " + a.mode + " needs --grid");
        std::ifstream in(a.grid);
        if (!in) throw lamina::Error("cannot open '" + a.grid + "'");
        const lamina::GridText text = lamina::read_grid_text(in);
        std::size_t length_x = a.length_x;
        if (length_x == 0 && text.height) length_x = *text.height;  // capture-tool row length
        if (length_x == 0 && text.width) length_x = *text.width;
        if (length_x == 0)
            throw lamina::Error("per-row value count unknown: pass --length-x or use a file "
                                "with Width/Height headers");

        lamina::GridSourceSpec spec;
        spec.length_x = length_x;
        spec.total = text.values.size();
        spec.pad_width = a.pad;
        if (a.mode == "elevation") {
            spec.scale = a.scale > 0.0 ? a.scale : 1.0 / 50.0;
            double lowest = std::numeric_limits<double>::infinity();
            for (const double v : text.values) lowest = std::min(lowest, v);
            spec.pad_value = lowest * spec.scale;
            grid = lamina::HeightField::from_flat_grid(text.values, spec);
        } else if (a.mode == "depth") {
            spec.scale = a.scale > 0.0 ? a.scale : 1.0 / 10.0;
            grid = lamina::HeightField::from_depth_grid(text.values, spec, a.lo, a.hi, a.mirror,
                                                        !a.no_invert);
        } else {
            throw lamina::Error("unknown mode '" + a.mode + "'");
        }
    }

    lamina::TriangleMesh mesh =
        lamina::tessellate_heightfield(grid, {.close_solid = !a.shell_only});
    mesh.name = a.name.empty() ? fs::path(a.output).stem().string() : a.name;
    write_mesh(mesh, a.output, a.binary);

    std::printf("grid: %zux%zu (pad %zu), base %.6g mm, peak %.6g mm\n", grid.rows, grid.cols,
                a.pad, grid.base_height, grid.max_height());
    std::printf("facets: %zu%s\n", mesh.facets.size(), a.shell_only ? " (open shell)" : "");
    std::printf("wrote %s\n", a.output.c_str());
    return 0;
}

struct SliceArgs {
    std::string input;
    std::string config;
    std::optional<double> layer_height;
    std::optional<double> fill;
    std::optional<std::size_t> raft;
    std::optional<double> z_offset;
    bool supports = false;
    bool force = false;
    bool no_timestamp = false;
    std::string gcode;
    std::string svg_dir;
};

lamina::TriangleMesh load_mesh(const std::string& path) {
    const std::string bytes = read_file(path);
    lamina::stl::Format format = lamina::stl::Format::Binary;
    lamina::TriangleMesh mesh = lamina::stl::read_auto(bytes, &format);
    if (format == lamina::stl::Format::Binary && lamina::stl::looks_like_ascii_stl(bytes))
        std::fprintf(stderr, "warning: binary stl header starts with \"solid\"\n");
    return mesh;
}

void print_mesh_report(const lamina::MeshValidation& v) {
    std::size_t nonmanifold = 0;
    for (const auto& d : v.edge_defects)
        if (d.count > 2) ++nonmanifold;
    std::printf("  boundary edges: %zu\n", v.boundary_edges());
    std::printf("  non-manifold edges: %zu\n", nonmanifold);
    std::printf("  degenerate facets: %zu\n", v.degenerate_facets.size());
    std::printf("  orientation/normal mismatches: %zu (informational)\n",
                v.normal_defects.size());
}

void print_contour_report(const lamina::ContourValidation& findings,
                          std::span<const lamina::Layer> layers) {
    for (const lamina::ContourFinding& f : findings.findings) {
        const char* kind = "";
        switch (f.kind) {
        case lamina::ContourFinding::Kind::SimplicityViolation: kind = "SimplicityViolation"; break;
        case lamina::ContourFinding::Kind::NestingViolation: kind = "NestingViolation"; break;
        case lamina::ContourFinding::Kind::TinyArea: kind = "TinyArea"; break;
        case lamina::ContourFinding::Kind::DuplicateVertex: kind = "DuplicateVertex"; break;
        case lamina::ContourFinding::Kind::TooFewVertices: kind = "TooFewVertices"; break;
        }
        std::printf("  layer %zu (z=%.3f) contour %zu: %s: %s\n", f.layer,
                    layers[f.layer].z, f.contour, kind, f.detail.c_str());
    }
}

lamina::PrintConfig build_config(const SliceArgs& a) {
    lamina::PrintConfig cfg;
    if (!a.config.empty()) {
        std::ifstream in(a.config);
        if (!in) throw lamina::Error("cannot open profile '" + a.config + "'");
        lamina::apply_profile(in, cfg);
    }
    if (a.layer_height) cfg.layer_thickness = *a.layer_height;  // flags beat the profile
    if (a.fill) cfg.fill_fraction = *a.fill;
    if (a.raft) cfg.raft_layers = *a.raft;
    cfg.validate();
    return cfg;
}

int run_slice(const SliceArgs& a) {
    const lamina::TriangleMesh mesh = load_mesh(a.input);
    const lamina::PrintConfig cfg = build_config(a);

    const lamina::MeshValidation mesh_report = lamina::validate_watertight(mesh);
    if (!mesh_report.watertight()) {
        std::printf("mesh is not watertight:\n");
        print_mesh_report(mesh_report);
        if (!a.force) return 1;
        std::fprintf(stderr, "warning: slicing a non-watertight mesh (--force)\n");
    }

    std::vector<lamina::Layer> layers;
    try {
        layers = lamina::slice_mesh(mesh, cfg.layer_thickness, a.z_offset,
                                    {.check_watertight = false,
                                     .allow_open_contours = a.force});
    } catch (const lamina::OpenContourError& e) {
        std::printf("open contours: %s\n", e.what());
        for (std::size_t i = 0; i + 1 < e.dangling.size(); i += 2)
            std::printf("  dangling: (%.4f, %.4f) and (%.4f, %.4f)\n", e.dangling[i].x,
                        e.dangling[i].y, e.dangling[i + 1].x, e.dangling[i + 1].y);
        return 1;
    }
    if (layers.empty())
        std::fprintf(stderr, "warning: EmptyPrint: no slicing plane lies inside the mesh\n");

    const lamina::ContourValidation findings = lamina::validate_contours(layers);
    if (!findings.clean()) {
        std::printf("contour findings:\n");
        print_contour_report(findings, layers);
        const std::size_t fatal =
            findings.count(lamina::ContourFinding::Kind::SimplicityViolation) +
            findings.count(lamina::ContourFinding::Kind::NestingViolation) +
            findings.count(lamina::ContourFinding::Kind::TooFewVertices);
        if (fatal > 0 && !a.force) {
            std::printf("slices are not all simple closed curves; use --force to proceed\n");
            return 1;
        }
        if (fatal > 0)
            std::fprintf(stderr, "warning: continuing past contour findings (--force)\n");
    }

    std::vector<lamina::SupportColumn> columns;
    if (a.supports) {
        const lamina::OverhangReport overhangs = lamina::detect_overhangs(mesh, cfg);
        columns = overhangs.columns;
        std::printf("overhanging facets: %zu, support columns: %zu\n",
                    overhangs.facets.size(), columns.size());
    }

    std::vector<std::string> warnings;
    const lamina::ToolPath tp = lamina::plan_print(layers, cfg, columns, &warnings);
    for (const std::string& w : warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());

    if (!a.gcode.empty()) {
        std::vector<std::string> header;
        header.push_back("generated by lamina");
        header.push_back("input: " + fs::path(a.input).filename().string());
        if (!a.no_timestamp) {
            const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
            char stamp[64];
            std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
            header.push_back(std::string("date: ") + stamp);
        }
        write_file(a.gcode, lamina::emit_gcode(tp, cfg, header));
    }

    if (!a.svg_dir.empty()) {
        fs::create_directories(a.svg_dir);
        lamina::Box2 box;
        for (const lamina::Layer& layer : layers) {
            for (const lamina::Contour& c : layer.contours) box.expand(c.bounds());
            for (const lamina::Vec2 p : layer.dangling) box.expand(p);
        }
        for (const lamina::LayerPlan& plan : tp.layers)
            for (const lamina::Move& m : plan.moves) {
                box.expand(m.from);
                box.expand(m.to);
            }
        if (!box.empty()) {
            const lamina::CanvasBounds canvas{box.min_x - 1.0, box.min_y - 1.0,
                                              box.max_x + 1.0, box.max_y + 1.0};
            const std::size_t raft_count = tp.layers.size() - layers.size();
            for (std::size_t li = 0; li < layers.size(); ++li) {
                const lamina::LayerPlan& plan = tp.layers[raft_count + li];
                char name[32];
                std::snprintf(name, sizeof name, "layer_%04zu.svg", li);
                write_file(fs::path(a.svg_dir) / name,
                           lamina::render_layer_svg(layers[li], &plan, canvas,
                                                    layers[li].dangling));
            }
        }
    }

    std::size_t islands = 0;
    for (const lamina::Layer& layer : layers) islands += layer.islands.size();
    std::printf("layers: %zu (+%zu raft)\n", layers.size(), cfg.raft_layers);
    std::printf("islands: %zu\n", islands);
    std::printf("extrude path: %.2f mm\n", lamina::total_extrude_length(tp));
    std::printf("travel: %.2f mm\n", lamina::total_travel_length(tp));
    std::printf("filament: %.2f mm\n", lamina::total_filament_length(tp));
    return 0;
}

struct ValidateArgs {
    std::string input;
    double layer_height = 0.2;
};

int run_validate(const ValidateArgs& a) {
    const lamina::TriangleMesh mesh = load_mesh(a.input);
    std::printf("facets: %zu\n", mesh.facets.size());

    const lamina::MeshValidation v = lamina::validate_watertight(mesh);
    std::printf("watertight: %s\n", v.watertight() ? "yes" : "NO");
    print_mesh_report(v);

    bool slices_clean = true;
    try {
        const std::vector<lamina::Layer> layers =
            lamina::slice_mesh(mesh, a.layer_height, std::nullopt,
                               {.check_watertight = false});
        const lamina::ContourValidation findings = lamina::validate_contours(layers);
        std::printf("trial slice: %zu layers, %zu findings\n", layers.size(),
                    findings.findings.size());
        print_contour_report(findings, layers);
        slices_clean = findings.clean();
    } catch (const lamina::OpenContourError& e) {
        std::printf("trial slice: open contours (%zu dangling endpoints)\n",
                    e.dangling.size());
        slices_clean = false;
    }

    const bool ok = v.watertight() && slices_clean;
    std::printf("%s\n", ok ? "OK" : "INVALID");
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"lamina: math data to printable meshes, slices, and G-code"};
    app.require_subcommand(1);

    SurfaceArgs surface;
    CLI::App* surface_cmd =
        app.add_subcommand("surface", "tessellate an algebraic surface z = f(x, y) into STL");
    surface_cmd->add_option("--fn", surface.fn, "expression for f(x, y), e.g. \"sqrt(1 - x^2 - y^2)\"")
        ->required();
    surface_cmd->add_option("--region", surface.region,
                            "keep samples only where this expression is > 0");
    surface_cmd->add_option("--xmin", surface.xmin, "domain minimum x in mm");
    surface_cmd->add_option("--xmax", surface.xmax, "domain maximum x in mm");
    surface_cmd->add_option("--ymin", surface.ymin, "domain minimum y in mm");
    surface_cmd->add_option("--ymax", surface.ymax, "domain maximum y in mm");
    surface_cmd->add_option("--res", surface.res, "samples per mm")
        ->check(CLI::PositiveNumber);
    surface_cmd->add_option("--floor", surface.floor, "truncate below this height (mm)")
        ->check(CLI::NonNegativeNumber);
    surface_cmd->add_option("-o,--output", surface.output, "output .stl path")->required();
    surface_cmd->add_option("--name", surface.name, "solid name (default: output stem)");
    surface_cmd->add_flag("--binary", surface.binary, "write binary STL instead of ASCII");
    surface_cmd->add_flag("--shell-only", surface.shell_only,
                          "emit only the open top surface (no walls or base)");

    ReliefArgs relief;
    CLI::App* relief_cmd =
        app.add_subcommand("relief", "build a relief from an image, elevation or depth grid");
    relief_cmd->add_option("--image", relief.image, "grayscale PGM (P2/P5) input")
        ->check(CLI::ExistingFile);
    relief_cmd->add_option("--grid", relief.grid, "whitespace-separated grid text input")
        ->check(CLI::ExistingFile);
    relief_cmd->add_option("--mode", relief.mode, "image | elevation | depth")
        ->required()
        ->check(CLI::IsMember({"image", "elevation", "depth"}));
    relief_cmd->add_option("--scale", relief.scale,
                           "height scale (defaults: image 10, elevation 1/50, depth 1/10)");
    relief_cmd->add_option("--threshold", relief.threshold, "image binarize threshold in (0,1)");
    relief_cmd->add_option("--lo", relief.lo, "depth lower bound (mm)");
    relief_cmd->add_option("--hi", relief.hi, "depth upper bound (mm)");
    relief_cmd->add_option("--pad", relief.pad, "border rings to add");
    relief_cmd->add_option("--length-x", relief.length_x, "values per row in the grid stream");
    relief_cmd->add_flag("--mirror", relief.mirror, "reverse each row (undo camera mirroring)");
    relief_cmd->add_flag("--no-invert", relief.no_invert,
                         "keep raw depths instead of height = max - depth");
    relief_cmd->add_option("-o,--output", relief.output, "output .stl path")->required();
    relief_cmd->add_option("--name", relief.name, "solid name (default: output stem)");
    relief_cmd->add_flag("--binary", relief.binary, "write binary STL instead of ASCII");
    relief_cmd->add_flag("--shell-only", relief.shell_only,
                         "emit only the open top surface (no walls or base)");

    SliceArgs slice;
    CLI::App* slice_cmd =
        app.add_subcommand("slice", "slice an STL into toolpaths, G-code and SVG previews");
    slice_cmd->add_option("input", slice.input, "input .stl (ASCII or binary, auto-detected)")
        ->required()
        ->check(CLI::ExistingFile);
    double layer_height_opt = 0.0, fill_opt = 0.0, offset_opt = 0.0;
    std::size_t raft_opt = 0;
    CLI::Option* lh = slice_cmd->add_option("--layer-height", layer_height_opt,
                                            "layer thickness in mm (default 0.2)")
                          ->check(CLI::PositiveNumber);
    CLI::Option* fl = slice_cmd->add_option("--fill", fill_opt, "fill fraction in [0,1]")
                          ->check(CLI::Range(0.0, 1.0));
    CLI::Option* rf = slice_cmd->add_option("--raft", raft_opt, "raft layer count");
    CLI::Option* zo = slice_cmd->add_option("--z-offset", offset_opt,
                                            "absolute z of the first slicing plane");
    slice_cmd->add_flag("--supports", slice.supports, "generate support pillars under overhangs");
    slice_cmd->add_flag("--force", slice.force,
                        "slice despite watertightness or contour findings");
    slice_cmd->add_flag("--no-timestamp", slice.no_timestamp,
                        "omit the date comment for byte-identical output");
    slice_cmd->add_option("--gcode", slice.gcode, "write G-code here");
    slice_cmd->add_option("--svg-dir", slice.svg_dir, "write layer_%04d.svg previews here");
    slice_cmd->add_option("--config", slice.config,
                          "print profile (key = value, PrintConfig field names)")
        ->check(CLI::ExistingFile);

    ValidateArgs validate;
    CLI::App* validate_cmd =
        app.add_subcommand("validate", "check watertightness and slice-level contour validity");
    validate_cmd->add_option("input", validate.input, "input .stl")
        ->required()
        ->check(CLI::ExistingFile);
    validate_cmd->add_option("--layer-height", validate.layer_height,
                             "trial slice thickness in mm")
        ->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (surface_cmd->parsed()) return run_surface(surface);
        if (relief_cmd->parsed()) return run_relief(relief);
        if (slice_cmd->parsed()) {
            if (lh->count()) slice.layer_height = layer_height_opt;
            if (fl->count()) slice.fill = fill_opt;
            if (rf->count()) slice.raft = raft_opt;
            if (zo->count()) slice.z_offset = offset_opt;
            return run_slice(slice);
        }
        if (validate_cmd->parsed()) return run_validate(validate);
    } catch (const lamina::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
