#pragma once

#include "continuum/mesh.hpp"

#include <optional>
#include <string_view>

namespace continuum {

enum class PrimitiveKind { tesseract, pentachoron, hexadecachoron, hypersphere };

std::string_view to_string(PrimitiveKind kind);
std::optional<PrimitiveKind> parse_primitive_kind(std::string_view name);

// Closed boundary 3-surface of a regular 4-polytope (or a 3-sphere), centered
// at the origin, with outward-oriented tetrahedra.
//
//   tesseract       `size` is the edge length; 8 cubic cells x 6 tetrahedra.
//   pentachoron     `size` is the circumradius; 5 tetrahedral cells.
//   hexadecachoron  `size` is the circumradius; 16 tetrahedral cells.
//   hypersphere     `size` is the radius; the 16-cell boundary subdivided
//                   `subdivision` times (edge midpoints, 8 children per
//                   tetrahedron) with every vertex pushed onto the sphere.
//
// Throws InvalidArgument for size <= 0 or subdivision > 6.
TetraMesh4 make_primitive(PrimitiveKind kind, double size, int subdivision = 0);

// Lifts a 3D surface into a slab sheet between w = 0 and w = depth. Each
// triangle becomes a prism split into 3 tetrahedra; the split of every side
// quad depends only on the global indices of its edge, so neighbouring
// prisms share faces. Tetrahedra are oriented along the source triangle's
// normal. Vertices [0, n) sit at w = 0 and [n, 2n) at w = depth.
// Throws InvalidArgument for an empty surface or depth <= 0.
TetraMesh4 extrude_lift(const TriMesh3& surface, double depth);

struct WExtent {
    double w_min = 0.0;
    double w_max = 0.0;
    double hyper_depth() const { return w_max - w_min; }
    double center() const { return 0.5 * (w_min + w_max); }
};

// Throws InvalidArgument for a mesh without vertices.
WExtent mesh_w_extent(const TetraMesh4& mesh, const Transform4& model);

// Axis-aligned box surface centered at the origin, 12 outward-wound triangles.
TriMesh3 make_box_surface(Vec3 size);
// Two-triangle rectangle in the y = 0 plane facing +y.
TriMesh3 make_ground_quad(double size_x, double size_z);

} // namespace continuum
