#include "continuum/mesh_io.hpp"

#include "continuum/errors.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace continuum {

namespace {

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        const std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc{} && ptr == end;
}

std::string line_path(std::size_t line) { return "line " + std::to_string(line); }

} // namespace

std::string format_double(double v) {
    char buf[40];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ec == std::errc{} ? ptr : buf);
}

void write_tmesh4(std::ostream& out, const TetraMesh4& mesh) {
    out << "tmesh4 " << mesh.vertices().size() << ' ' << mesh.tetrahedra().size() << '\n';
    for (const auto& v : mesh.vertices()) {
        out << g17(v.x) << ' ' << g17(v.y) << ' ' << g17(v.z) << ' ' << g17(v.w) << '\n';
    }
    for (const auto& t : mesh.tetrahedra()) {
        out << t[0] << ' ' << t[1] << ' ' << t[2] << ' ' << t[3] << '\n';
    }
}

std::string to_tmesh4(const TetraMesh4& mesh) {
    std::ostringstream s;
    write_tmesh4(s, mesh);
    return s.str();
}

TetraMesh4 read_tmesh4(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    const auto next_record = [&]() -> std::vector<std::string_view> {
        while (std::getline(in, line)) {
            ++line_no;
            auto fields = split_ws(line);
            if (fields.empty() || fields[0].front() == '#') continue;
            return fields;
        }
        return {};
    };

    auto header = next_record();
    std::size_t n_verts = 0, n_tets = 0;
    if (header.size() != 3 || header[0] != "tmesh4" || !parse_number(header[1], n_verts) ||
        !parse_number(header[2], n_tets)) {
        throw ParseError(line_path(line_no), "expected header 'tmesh4 <n_verts> <n_tets>'");
    }
    std::vector<Vec4> vertices;
    vertices.reserve(n_verts);
    for (std::size_t i = 0; i < n_verts; ++i) {
        auto f = next_record();
        Vec4 v;
        if (f.size() != 4 || !parse_number(f[0], v.x) || !parse_number(f[1], v.y) || !parse_number(f[2], v.z) ||
            !parse_number(f[3], v.w)) {
            throw ParseError(line_path(line_no), "expected 4 reals for vertex " + std::to_string(i));
        }
        vertices.push_back(v);
    }
    std::vector<Tetrahedron> tets;
    tets.reserve(n_tets);
    for (std::size_t i = 0; i < n_tets; ++i) {
        auto f = next_record();
        Tetrahedron t{};
        bool ok = f.size() == 4;
        for (std::size_t k = 0; ok && k < 4; ++k) ok = parse_number(f[k], t[k]);
        if (!ok) throw ParseError(line_path(line_no), "expected 4 indices for tetrahedron " + std::to_string(i));
        tets.push_back(t);
    }
    if (!next_record().empty()) throw ParseError(line_path(line_no), "unexpected trailing data");
    return TetraMesh4(std::move(vertices), std::move(tets));
}

TetraMesh4 parse_tmesh4(std::string_view text) {
    std::istringstream s{std::string(text)};
    return read_tmesh4(s);
}

TetraMesh4 load_tmesh4(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path.string(), "cannot open file");
    return read_tmesh4(in);
}

void write_obj(std::ostream& out, std::span<const ObjObject> objects) {
    std::size_t base = 1;
    for (const auto& obj : objects) {
        const TriMesh3& m = *obj.mesh;
        out << "o " << obj.name << '\n';
        for (std::size_t i = 0; i < m.vertices.size(); ++i) {
            const auto& v = m.vertices[i];
            out << "v " << g17(v.x) << ' ' << g17(v.y) << ' ' << g17(v.z);
            if (m.has_colors()) {
                const auto& c = m.colors[i];
                out << ' ' << g17(c.r) << ' ' << g17(c.g) << ' ' << g17(c.b);
            }
            out << '\n';
        }
        for (const auto& t : m.triangles) {
            out << "f " << t[0] + base << ' ' << t[1] + base << ' ' << t[2] + base << '\n';
        }
        base += m.vertices.size();
    }
}

TriMesh3 read_obj(std::istream& in) {
    TriMesh3 m;
    std::vector<Rgba> colors;
    bool any_color = false;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto f = split_ws(line);
        if (f.empty()) continue;
        if (f[0] == "v") {
            Vec3 v;
            if (f.size() < 4 || !parse_number(f[1], v.x) || !parse_number(f[2], v.y) || !parse_number(f[3], v.z)) {
                throw ParseError(line_path(line_no), "malformed vertex");
            }
            Rgba c;
            if (f.size() >= 7) {
                if (!parse_number(f[4], c.r) || !parse_number(f[5], c.g) || !parse_number(f[6], c.b)) {
                    throw ParseError(line_path(line_no), "malformed vertex color");
                }
                any_color = true;
            }
            m.vertices.push_back(v);
            colors.push_back(c);
        } else if (f[0] == "f") {
            std::vector<Index> poly;
            for (std::size_t k = 1; k < f.size(); ++k) {
                const auto token = f[k].substr(0, f[k].find('/'));
                long long idx = 0;
                if (!parse_number(token, idx) || idx == 0) throw ParseError(line_path(line_no), "malformed face index");
                const long long resolved = idx > 0 ? idx - 1 : static_cast<long long>(m.vertices.size()) + idx;
                if (resolved < 0 || resolved >= static_cast<long long>(m.vertices.size())) {
                    throw ParseError(line_path(line_no), "face index out of range");
                }
                poly.push_back(static_cast<Index>(resolved));
            }
            if (poly.size() < 3) throw ParseError(line_path(line_no), "face needs at least 3 vertices");
            for (std::size_t k = 1; k + 1 < poly.size(); ++k) m.triangles.push_back({poly[0], poly[k], poly[k + 1]});
        }
    }
    if (any_color) m.colors = std::move(colors);
    return m;
}

TriMesh3 load_obj(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path.string(), "cannot open file");
    return read_obj(in);
}

} // namespace continuum
