#pragma once

#include "continuum/mesh.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

namespace continuum {

// Plain-text tetrahedral mesh interchange:
//
//   tmesh4 <n_verts> <n_tets>
//   x y z w            (n_verts lines, %.17g)
//   i0 i1 i2 i3        (n_tets lines, zero-based)
//
// Blank lines and lines starting with '#' are ignored on read. Reals are
// written with 17 significant digits so a write/read cycle is bit-exact.
void write_tmesh4(std::ostream& out, const TetraMesh4& mesh);
std::string to_tmesh4(const TetraMesh4& mesh);
// Throws ParseError (with "line N" as path) or InvalidArgument for meshes
// violating the TetraMesh4 invariants.
TetraMesh4 read_tmesh4(std::istream& in);
TetraMesh4 parse_tmesh4(std::string_view text);
TetraMesh4 load_tmesh4(const std::filesystem::path& path);

// Wavefront OBJ. Vertex colors use the common `v x y z r g b` extension.
struct ObjObject {
    std::string name;
    const TriMesh3* mesh = nullptr;
};
void write_obj(std::ostream& out, std::span<const ObjObject> objects);
// Reads `v` and `f` records (polygons are fan-triangulated, `a/b/c` index
// forms and negative indices accepted); everything else is skipped.
TriMesh3 read_obj(std::istream& in);
TriMesh3 load_obj(const std::filesystem::path& path);

// Shortest decimal text that round-trips the double exactly.
std::string format_double(double v);

} // namespace continuum
