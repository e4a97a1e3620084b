#pragma once

// Rectangular height grids (mm) and the four ways to build one: sampling an
// expression, binarizing a grayscale image, reshaping a flat elevation
// stream, and clamping/inverting a depth-camera stream. Also the two text
// ingestion formats: PGM (P2/P5) rasters and whitespace-separated grids.

#include <algorithm>
#include <cstddef>
#include <istream>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "lamina/expr.hpp"
#include "lamina/geometry.hpp"

namespace lamina {

struct EmptyDomainError : Error {
    using Error::Error;
};

struct AllBelowFloorError : Error {
    using Error::Error;
};

struct UnsupportedRasterError : Error {
    using Error::Error;
};

struct ShapeMismatchError : Error {
    using Error::Error;
};

struct NonFiniteValueError : Error {
    std::size_t index;
    NonFiniteValueError(std::size_t i)
        : Error("non-finite value at index " + std::to_string(i)), index(i) {}
};

// Layout of a flat row-major value stream: how long each row is, how many
// values in total, what to multiply by, and how to border the result.
struct GridSourceSpec {
    std::size_t length_x = 0;   // values per row
    std::size_t total = 0;      // total values expected
    double scale = 1.0;
    std::size_t pad_width = 0;  // rings of border cells
    double pad_value = 0.0;     // mm
};

// Grayscale raster with pixel values normalized to [0, 1], row 0 on top.
struct Raster {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<double> pixels;

    double at(std::size_t row, std::size_t col) const { return pixels[row * width + col]; }
};

// Depth clamp: in-range values pass through, everything else becomes hi
// (far plane), so dropouts and outliers read as background.
inline double depth_bound(double v, double lo, double hi) {
    return (v >= lo && v <= hi) ? v : hi;
}

struct HeightField {
    std::size_t rows = 0;
    std::size_t cols = 0;
    double spacing = 1.0;       // mm per cell, uniform
    double base_height = 0.0;   // mm, the floor/padding level
    std::vector<double> heights;  // row-major, rows*cols values, mm

    double at(std::size_t row, std::size_t col) const { return heights[row * cols + col]; }
    double& at(std::size_t row, std::size_t col) { return heights[row * cols + col]; }

    double max_height() const {
        double m = 0.0;
        for (double h : heights) m = std::max(m, h);
        return m;
    }

    void validate() const {
        if (rows < 2 || cols < 2)
            throw Error("height grid needs at least 2 rows and 2 columns");
        if (heights.size() != rows * cols)
            throw ShapeMismatchError("height count " + std::to_string(heights.size()) +
                                     " does not match " + std::to_string(rows) + "x" +
                                     std::to_string(cols));
        if (!(spacing > 0.0)) throw Error("cell spacing must be positive");
        if (!(base_height >= 0.0)) throw Error("base height must be >= 0");
        for (std::size_t i = 0; i < heights.size(); ++i) {
            if (!std::isfinite(heights[i])) throw NonFiniteValueError(i);
            if (heights[i] < base_height)
                throw Error("height below base at index " + std::to_string(i));
        }
    }

    static HeightField from_function(const expr::Expression& f, double xmin, double xmax,
                                     double ymin, double ymax, double res,
                                     const expr::Expression* region, double floor_height);
    static HeightField from_image(const Raster& img, double threshold, double height_scale,
                                  std::size_t pad_width = 2);
    static HeightField from_flat_grid(std::span<const double> values, const GridSourceSpec& spec);
    static HeightField from_depth_grid(std::span<const double> values, const GridSourceSpec& spec,
                                       double lo, double hi, bool mirror, bool invert = true);
};

namespace detail {

inline HeightField pad_grid(std::size_t rows, std::size_t cols, const std::vector<double>& cells,
                            double spacing, std::size_t pad, double pad_value) {
    HeightField h;
    h.rows = rows + 2 * pad;
    h.cols = cols + 2 * pad;
    h.spacing = spacing;
    h.heights.assign(h.rows * h.cols, pad_value);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c)
            h.heights[(r + pad) * h.cols + (c + pad)] = cells[r * cols + c];
    return h;
}

}  // namespace detail

// Samples f on a lattice with spacing 1/res. A sample is replaced by the
// floor when the region expression is <= 0 there, when f is non-finite, or
// when f lands below the floor; this truncates the surface at the floor
// plane and guarantees a flat printable base.
inline HeightField HeightField::from_function(const expr::Expression& f, double xmin, double xmax,
                                              double ymin, double ymax, double res,
                                              const expr::Expression* region,
                                              double floor_height) {
    if (!(xmax > xmin) || !(ymax > ymin)) throw EmptyDomainError("empty x/y domain");
    if (!(res > 0.0)) throw EmptyDomainError("resolution must be positive");
    if (!(floor_height >= 0.0)) throw Error("floor must be >= 0");

    const double spacing = 1.0 / res;
    const std::size_t cols = static_cast<std::size_t>(std::floor((xmax - xmin) * res)) + 1;
    const std::size_t rows = static_cast<std::size_t>(std::floor((ymax - ymin) * res)) + 1;
    if (cols < 2 || rows < 2)
        throw EmptyDomainError("fewer than 2 samples per axis at this resolution");

    HeightField h;
    h.rows = rows;
    h.cols = cols;
    h.spacing = spacing;
    h.base_height = floor_height;
    h.heights.resize(rows * cols);

    bool any_above = false;
    for (std::size_t r = 0; r < rows; ++r) {
        const double y = ymin + static_cast<double>(r) * spacing;
        for (std::size_t c = 0; c < cols; ++c) {
            const double x = xmin + static_cast<double>(c) * spacing;
            double v = floor_height;
            bool masked = false;
            if (region) {
                const double g = expr::evaluate(*region, x, y);
                masked = !(g > 0.0);  // non-finite region values mask too
            }
            if (!masked) {
                const double fv = expr::evaluate(f, x, y);
                if (std::isfinite(fv) && fv > floor_height) {
                    v = fv;
                    any_above = true;
                }
            }
            h.heights[r * cols + c] = v;
        }
    }
    if (!any_above)
        throw AllBelowFloorError("every sample clamps to the floor; nothing to print");
    h.validate();
    return h;
}

// Binarize-then-scale: pixels at or above the threshold become height_scale,
// the rest 0, then a pad_width ring of zeros closes the level curves.
inline HeightField HeightField::from_image(const Raster& img, double threshold,
                                           double height_scale, std::size_t pad_width) {
    if (img.width == 0 || img.height == 0 || img.pixels.size() != img.width * img.height)
        throw UnsupportedRasterError("empty or inconsistent raster");
    if (!(threshold > 0.0 && threshold < 1.0)) throw Error("threshold must be in (0, 1)");
    if (!(height_scale > 0.0)) throw Error("height scale must be positive");

    std::vector<double> cells(img.width * img.height, 0.0);
    bool any_set = false;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (img.pixels[i] >= threshold) {
            cells[i] = height_scale;
            any_set = true;
        }
    }
    if (!any_set)
        throw AllBelowFloorError("no pixel reaches the threshold; nothing to print");

    HeightField h = detail::pad_grid(img.height, img.width, cells, 1.0, pad_width, 0.0);
    h.base_height = 0.0;
    h.validate();
    return h;
}

// Reshapes a flat stream into rows of length_x values (row r holds elements
// r*length_x .. (r+1)*length_x - 1), scales, then pads.
inline HeightField HeightField::from_flat_grid(std::span<const double> values,
                                               const GridSourceSpec& spec) {
    if (spec.length_x == 0 || spec.total == 0)
        throw ShapeMismatchError("grid spec has zero dimensions");
    if (values.size() != spec.total)
        throw ShapeMismatchError("expected " + std::to_string(spec.total) + " values, got " +
                                 std::to_string(values.size()));
    if (spec.total % spec.length_x != 0)
        throw ShapeMismatchError("total " + std::to_string(spec.total) +
                                 " is not a multiple of row length " +
                                 std::to_string(spec.length_x));

    std::vector<double> cells(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) throw NonFiniteValueError(i);
        cells[i] = values[i] * spec.scale;
        if (!std::isfinite(cells[i])) throw NonFiniteValueError(i);
    }

    const std::size_t rows = spec.total / spec.length_x;
    HeightField h = detail::pad_grid(rows, spec.length_x, cells, 1.0, spec.pad_width,
                                     spec.pad_value);
    h.base_height = *std::min_element(h.heights.begin(), h.heights.end());
    h.validate();
    return h;
}

// Depth pipeline: bound to [lo, hi] (out-of-range becomes hi), scale,
// reshape, pad with hi*scale, optionally un-mirror each row, then invert
// (height = hi*scale - clamped*scale) so near objects print tall and the
// border lands at 0.
inline HeightField HeightField::from_depth_grid(std::span<const double> values,
                                                const GridSourceSpec& spec, double lo, double hi,
                                                bool mirror, bool invert) {
    if (!(lo > 0.0) || !(hi > lo)) throw Error("need 0 < lo < hi for depth bounds");

    std::vector<double> bounded(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) throw NonFiniteValueError(i);
        bounded[i] = depth_bound(values[i], lo, hi) * spec.scale;
    }

    GridSourceSpec inner = spec;
    inner.scale = 1.0;  // already applied
    inner.pad_value = hi * spec.scale;
    HeightField h = from_flat_grid(bounded, inner);

    if (mirror) {
        for (std::size_t r = 0; r < h.rows; ++r)
            std::reverse(h.heights.begin() + static_cast<std::ptrdiff_t>(r * h.cols),
                         h.heights.begin() + static_cast<std::ptrdiff_t>((r + 1) * h.cols));
    }
    if (invert) {
        const double top = hi * spec.scale;
        for (double& v : h.heights) v = top - v;
        h.base_height = 0.0;
        bool any_above = false;
        for (double v : h.heights)
            if (v > 0.0) any_above = true;
        if (!any_above)
            throw AllBelowFloorError("every depth sample is out of range; nothing to print");
    } else {
        h.base_height = *std::min_element(h.heights.begin(), h.heights.end());
    }
    h.validate();
    return h;
}

// ---- text ingestion -------------------------------------------------------

// Whitespace-separated grid text: optional "Width N" / "Height M" header
// lines, then row-major reals; a trailing "[0,0,0]" sentinel is discarded.
struct GridText {
    std::vector<double> values;
    std::optional<std::size_t> width;
    std::optional<std::size_t> height;
};

inline GridText read_grid_text(std::istream& in) {
    GridText out;
    std::string token;
    std::size_t index = 0;
    while (in >> token) {
        if (token == "Width" || token == "Height") {
            std::size_t n = 0;
            if (!(in >> n)) throw Error("missing value after '" + token + "' header");
            (token == "Width" ? out.width : out.height) = n;
            continue;
        }
        if (token == "[0,0,0]") continue;  // capture-tool end sentinel
        try {
            std::size_t used = 0;
            const double v = std::stod(token, &used);
            if (used != token.size()) throw std::invalid_argument(token);
            out.values.push_back(v);
        } catch (const std::exception&) {
            throw Error("grid text: bad value '" + token + "' at position " +
                        std::to_string(index));
        }
        ++index;
    }
    return out;
}

// ---- PGM ------------------------------------------------------------------

namespace detail {

inline int pgm_next_datum(std::istream& in) {
    // skips whitespace and '#' comments between header fields
    int c = in.get();
    for (;;) {
        while (c == ' ' || c == '\t' || c == '\n' || c == '\r') c = in.get();
        if (c == '#') {
            while (c != '\n' && c != EOF) c = in.get();
            continue;
        }
        break;
    }
    return c;
}

inline std::size_t pgm_read_number(std::istream& in) {
    int c = pgm_next_datum(in);
    if (c < '0' || c > '9') throw UnsupportedRasterError("malformed PGM header");
    std::size_t v = 0;
    while (c >= '0' && c <= '9') {
        v = v * 10 + static_cast<std::size_t>(c - '0');
        c = in.get();
    }
    return v;
}

}  // namespace detail

// Reads netpbm grayscale, plain (P2) or raw (P5); anything else is the
// caller's job to convert first.
inline Raster read_pgm(std::istream& in) {
    const int magic0 = in.get();
    const int magic1 = in.get();
    if (magic0 != 'P' || (magic1 != '2' && magic1 != '5')) {
        throw UnsupportedRasterError(
            "not a grayscale PGM (P2/P5); convert color images before ingesting");
    }
    const std::size_t width = detail::pgm_read_number(in);
    const std::size_t height = detail::pgm_read_number(in);
    const std::size_t maxval = detail::pgm_read_number(in);
    if (width == 0 || height == 0 || maxval == 0 || maxval > 65535)
        throw UnsupportedRasterError("bad PGM dimensions or maxval");
    if (width > 100000000 / height)
        throw UnsupportedRasterError("raster larger than 100M pixels");

    Raster img;
    img.width = width;
    img.height = height;
    img.pixels.resize(width * height);

    if (magic1 == '2') {
        for (double& p : img.pixels) {
            const std::size_t v = detail::pgm_read_number(in);
            p = static_cast<double>(v) / static_cast<double>(maxval);
        }
    } else {
        // single whitespace byte separates header from raster data
        for (double& p : img.pixels) {
            int v = in.get();
            if (v == EOF) throw UnsupportedRasterError("truncated PGM raster");
            if (maxval > 255) {
                const int lo = in.get();
                if (lo == EOF) throw UnsupportedRasterError("truncated PGM raster");
                v = v * 256 + lo;
            }
            p = static_cast<double>(v) / static_cast<double>(maxval);
        }
    }
    return img;
}

inline Raster read_pgm_string(const std::string& bytes) {
    std::istringstream in(bytes, std::ios::binary);
    return read_pgm(in);
}

}  // namespace lamina
