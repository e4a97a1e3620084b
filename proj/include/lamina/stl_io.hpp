#pragma once

// STL reading and writing. ASCII output uses the fixed 2/4/6-space
// indentation and prints every number as its shortest round-trip decimal
// with a guaranteed decimal point (40.0, never 40). Input parsing is
// whitespace tolerant. Binary follows the de facto 3D Systems layout:
// 80-byte header, little-endian uint32 facet count, then 50 bytes per facet
// (12 float32 + uint16 attribute).

#include <charconv>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>

#include "lamina/mesh.hpp"

namespace lamina::stl {

struct ParseError : Error {
    std::size_t line;
    ParseError(std::size_t line_no, const std::string& what_arg)
        : Error("stl parse error at line " + std::to_string(line_no) + ": " + what_arg),
          line(line_no) {}
};

struct MissingEndSolidError : ParseError {
    MissingEndSolidError(std::size_t line_no)
        : ParseError(line_no, "file ends before 'endsolid'") {}
};

struct TruncatedFileError : Error {
    using Error::Error;
};

// fixed ASCII layout: these exact strings, never configurable
inline constexpr std::string_view kFacetIndent = "  ";
inline constexpr std::string_view kLoopIndent = "    ";
inline constexpr std::string_view kVertexIndent = "      ";

namespace detail {

inline void append_number(std::string& out, double v) {
    char buf[40];
    const auto result = std::to_chars(buf, buf + sizeof buf, v);
    const std::string_view text(buf, static_cast<std::size_t>(result.ptr - buf));
    out += text;
    if (text.find_first_of(".eE") == std::string_view::npos) out += ".0";
}

struct Lexer {
    std::string_view src;
    std::size_t pos = 0;
    std::size_t line = 1;

    void skip_space() {
        while (pos < src.size()) {
            const char c = src[pos];
            if (c == '\n') {
                ++line;
                ++pos;
            } else if (c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f') {
                ++pos;
            } else {
                break;
            }
        }
    }

    bool at_end() {
        skip_space();
        return pos >= src.size();
    }

    std::string_view next_token() {
        skip_space();
        const std::size_t start = pos;
        while (pos < src.size() && !std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
        return src.substr(start, pos - start);
    }

    // rest of the current line, trimmed; used for solid names
    std::string rest_of_line() {
        while (pos < src.size() && (src[pos] == ' ' || src[pos] == '\t')) ++pos;
        const std::size_t start = pos;
        while (pos < src.size() && src[pos] != '\n' && src[pos] != '\r') ++pos;
        std::size_t end = pos;
        while (end > start && (src[end - 1] == ' ' || src[end - 1] == '\t')) --end;
        return std::string(src.substr(start, end - start));
    }

    void expect(std::string_view keyword) {
        skip_space();
        const std::size_t at = line;
        if (pos >= src.size()) throw MissingEndSolidError(at);
        const std::string_view tok = next_token();
        if (tok != keyword)
            throw ParseError(at, "expected '" + std::string(keyword) + "', got '" +
                                     std::string(tok) + "'");
    }

    double number() {
        skip_space();
        if (pos >= src.size()) throw MissingEndSolidError(line);
        const std::size_t at = line;
        const std::string_view tok = next_token();
        double v = 0.0;
        const auto result = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (result.ec != std::errc{} || result.ptr != tok.data() + tok.size() ||
            !std::isfinite(v))
            throw ParseError(at, "expected a number, got '" + std::string(tok) + "'");
        return v;
    }
};

inline void put_u32le(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 24) & 0xff));
}

inline void put_f32le(std::string& out, double v) {
    const float f = static_cast<float>(v);
    std::uint32_t bits;
    std::memcpy(&bits, &f, sizeof bits);
    put_u32le(out, bits);
}

inline std::uint32_t get_u32le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline double get_f32le(const unsigned char* p) {
    const std::uint32_t bits = get_u32le(p);
    float f;
    std::memcpy(&f, &bits, sizeof f);
    return static_cast<double>(f);
}

}  // namespace detail

inline std::string write_ascii(const TriangleMesh& m, std::string_view name) {
    std::string out;
    out.reserve(64 + m.facets.size() * 200);
    out += "solid ";
    out += name;
    out += '\n';
    for (const Facet& f : m.facets) {
        out += kFacetIndent;
        out += "facet normal ";
        detail::append_number(out, f.normal.x);
        out += ' ';
        detail::append_number(out, f.normal.y);
        out += ' ';
        detail::append_number(out, f.normal.z);
        out += '\n';
        out += kLoopIndent;
        out += "outer loop\n";
        for (const Vertex& p : f.v) {
            out += kVertexIndent;
            out += "vertex ";
            detail::append_number(out, p.x);
            out += ' ';
            detail::append_number(out, p.y);
            out += ' ';
            detail::append_number(out, p.z);
            out += '\n';
        }
        out += kLoopIndent;
        out += "endloop\n";
        out += kFacetIndent;
        out += "endfacet\n";
    }
    out += "endsolid ";
    out += name;
    out += '\n';
    return out;
}

inline std::string write_ascii(const TriangleMesh& m) { return write_ascii(m, m.name); }

inline TriangleMesh read_ascii(std::string_view text) {
    detail::Lexer lex{text};
    lex.expect("solid");
    TriangleMesh m;
    m.name = lex.rest_of_line();
    for (;;) {
        if (lex.at_end()) throw MissingEndSolidError(lex.line);
        const std::size_t at = lex.line;
        const std::string_view tok = lex.next_token();
        if (tok == "endsolid") {
            lex.rest_of_line();  // optional name, ignored
            return m;
        }
        if (tok != "facet")
            throw ParseError(at, "expected 'facet' or 'endsolid', got '" + std::string(tok) +
                                     "'");
        lex.expect("normal");
        Facet f;
        f.normal.x = lex.number();
        f.normal.y = lex.number();
        f.normal.z = lex.number();
        lex.expect("outer");
        lex.expect("loop");
        for (Vertex& p : f.v) {
            lex.expect("vertex");
            p.x = lex.number();
            p.y = lex.number();
            p.z = lex.number();
        }
        lex.expect("endloop");
        lex.expect("endfacet");
        m.facets.push_back(f);
    }
}

inline std::string write_binary(const TriangleMesh& m, std::string_view header = {}) {
    if (m.facets.size() > 0xffffffffull)
        throw Error("binary stl carries at most 2^32 - 1 facets");
    std::string out;
    out.reserve(84 + m.facets.size() * 50);
    std::string head(header.substr(0, 80));
    if (head.empty()) head = m.name.substr(0, 80);
    head.resize(80, '\0');
    out += head;
    detail::put_u32le(out, static_cast<std::uint32_t>(m.facets.size()));
    for (const Facet& f : m.facets) {
        detail::put_f32le(out, f.normal.x);
        detail::put_f32le(out, f.normal.y);
        detail::put_f32le(out, f.normal.z);
        for (const Vertex& p : f.v) {
            detail::put_f32le(out, p.x);
            detail::put_f32le(out, p.y);
            detail::put_f32le(out, p.z);
        }
        out.push_back('\0');  // attribute byte count = 0
        out.push_back('\0');
    }
    return out;
}

// True when a buffer that is about to be read as binary starts like an
// ASCII file; callers surface this as a warning.
inline bool looks_like_ascii_stl(std::string_view bytes) {
    return bytes.substr(0, 5) == "solid";
}

inline TriangleMesh read_binary(std::string_view bytes) {
    if (bytes.size() < 84)
        throw TruncatedFileError("binary stl must be at least 84 bytes, got " +
                                 std::to_string(bytes.size()));
    const auto* data = reinterpret_cast<const unsigned char*>(bytes.data());
    const std::uint32_t count = detail::get_u32le(data + 80);
    const std::size_t expected = 84 + static_cast<std::size_t>(count) * 50;
    if (bytes.size() != expected)
        throw TruncatedFileError("binary stl length " + std::to_string(bytes.size()) +
                                 " does not match 84 + 50*" + std::to_string(count));

    TriangleMesh m;
    const std::size_t name_end = bytes.substr(0, 80).find('\0');
    m.name = std::string(bytes.substr(0, std::min<std::size_t>(name_end, 80)));
    while (!m.name.empty() && (m.name.back() == ' ' || m.name.back() == '\t')) m.name.pop_back();

    m.facets.reserve(count);
    const unsigned char* p = data + 84;
    for (std::uint32_t i = 0; i < count; ++i, p += 50) {
        Facet f;
        f.normal = {detail::get_f32le(p), detail::get_f32le(p + 4), detail::get_f32le(p + 8)};
        for (int k = 0; k < 3; ++k) {
            const unsigned char* q = p + 12 + k * 12;
            f.v[static_cast<std::size_t>(k)] = {detail::get_f32le(q), detail::get_f32le(q + 4),
                                                detail::get_f32le(q + 8)};
        }
        m.facets.push_back(f);
    }
    return m;
}

enum class Format { Ascii, Binary };

// ASCII when it both looks like ASCII and parses as ASCII; binary otherwise.
// When a "solid"-headed file parses as neither, the ASCII diagnosis is the
// useful one.
inline TriangleMesh read_auto(std::string_view bytes, Format* detected = nullptr) {
    if (looks_like_ascii_stl(bytes)) {
        try {
            TriangleMesh m = read_ascii(bytes);
            if (detected) *detected = Format::Ascii;
            return m;
        } catch (const ParseError& ascii_error) {
            try {
                TriangleMesh m = read_binary(bytes);
                if (detected) *detected = Format::Binary;
                return m;
            } catch (const TruncatedFileError&) {
                throw ascii_error;
            }
        }
    }
    if (detected) *detected = Format::Binary;
    return read_binary(bytes);
}

}  // namespace lamina::stl
