#pragma once

// The 4D -> 3D stage. Both projection methods produce a TriMesh3 expressed
// in the 4D camera's local (x, y, z) frame; project_node maps that result
// into the 3D world according to the rig's sync state.

#include "continuum/geometry.hpp"
#include "continuum/math.hpp"
#include "continuum/mesh.hpp"

#include <array>
#include <optional>
#include <string_view>

namespace continuum {

enum class ProjectionMode { cross_section, frustum };
enum class CameraSync { synced, detached };

std::string_view to_string(ProjectionMode mode);
std::string_view to_string(CameraSync sync);

// Plane-local |w| below this counts as "on the plane" and is nudged to +kOnPlaneNudge.
inline constexpr double kOnPlaneNudge = 1e-12;
// Output vertices closer than this (max-norm) are merged.
inline constexpr double kMergeDistance = 1e-9;

inline constexpr double kDefaultFocal = 2.0;
inline constexpr double kDefaultNearW = 0.1;

// 4D projector. In frustum mode the eye sits at camera-local w' = -focal and
// a point (x', y', z', w') maps to (x', y', z') * focal / (focal + w'), so the
// w' = 0 hyperplane is reproduced at unit scale.
struct Camera4 {
    Pose4 pose{};
    ProjectionMode mode = ProjectionMode::cross_section;
    double focal = kDefaultFocal;
    double near_w = kDefaultNearW;

    // Throws InvalidArgument unless focal > 0 and 0 < near_w < focal.
    void validate() const;
    Hyperplane slice_plane() const { return {pose}; }
};

struct Pose3 {
    Vec3 position{};
    Matrix3 orientation{}; // columns: right, up, forward
    friend bool operator==(const Pose3&, const Pose3&) = default;
};

// Orbit of a detached 4D camera about a focus point, in the plane spanned by
// the view direction at orbit start and the w axis. Angle 0 is the start pose.
struct OrbitState {
    Vec4 focus{};
    double radius = 0.0;
    double angle = 0.0;
    Vec4 view_dir{0, 0, 1, 0};      // unit, w = 0
    Rotation4 base_rotation{};      // camera orientation at angle 0
};

struct CameraRig {
    Camera4 cam4{};
    Pose3 cam3{};
    // w coordinate a synced 4D camera takes (the player's w).
    double sync_w = 0.0;
    CameraSync sync = CameraSync::synced;
    std::optional<OrbitState> orbit;

    // The 4D pose a synced camera has for the current cam3 pose and sync_w.
    Pose4 synced_pose() const;
    // cam4 shares cam3's position and 3D orientation (within tol) and has no
    // 4D rotational component.
    bool satisfies_sync_invariant(double tol = 0.0) const;
    // Snaps cam4 to synced_pose(); used after cam3 or sync_w changes.
    void resync();
};

// Slice of one tetrahedron: empty, a triangle, or a non-self-intersecting
// quadrilateral, in plane-local (x, y, z).
struct SlicePolygon {
    std::array<Vec3, 4> vertices{};
    std::size_t count = 0;
    std::size_t source_tetra = 0;

    bool empty() const { return count == 0; }
};

// Throws InvalidArgument for a degenerate tetrahedron. The polygon is wound
// with its normal along the plane-local xyz part of cross4(p1-p0, p2-p0, p3-p0).
SlicePolygon slice_tetra(Vec4 p0, Vec4 p1, Vec4 p2, Vec4 p3, const Hyperplane& plane, std::size_t source_tetra = 0);

// Intersection of the transformed mesh with the hyperplane, in plane-local
// (x, y, z). Quads are split along their shorter diagonal, vertices within
// kMergeDistance merged, colors interpolated, degenerate triangles dropped.
// Closed outward-oriented meshes produce closed outward-wound surfaces.
TriMesh3 cross_section(const TetraMesh4& mesh, const Transform4& model, const Hyperplane& plane);

// Perspective projection along camera-local w. Emits each distinct
// tetrahedron face once; tetrahedra reaching focal + w' <= near_w are clipped
// against w' = near_w - focal before projection. Throws InvalidArgument
// unless cam.mode is frustum.
TriMesh3 frustum_project(const TetraMesh4& mesh, const Transform4& model, const Camera4& cam);

// Frustum mapping of a single camera-local point.
Vec3 frustum_map(Vec4 local, double focal);

// Projects a 4D node for the rig and expresses the result in world
// coordinates. Synced rigs map through the 3D camera pose (the 4D camera
// transform is undone so the renderer applies the view once); detached rigs
// map through the 4D camera pose only.
TriMesh3 project_node(const TetraMesh4& mesh, const Transform4& model, const CameraRig& rig);

// Places a native 3D mesh in the world by the xyz part of its transform.
TriMesh3 transform_tri3(const TriMesh3& mesh, const Transform4& model);

// Moves the orbit angle by delta and re-aims cam4 at the focus.
// Throws InvalidState when the rig has no orbit.
CameraRig orbit_update(const CameraRig& rig, double delta_angle);

// One interpolation step of a detached cam4 back toward synced_pose(): the
// position moves by fraction alpha, the orientation looks at the orbit focus
// (or blends toward the synced orientation without an orbit). At alpha = 1
// the rig is synced exactly, in cross-section mode, with the orbit cleared.
// Throws InvalidState for a synced rig and InvalidArgument for alpha
// outside [0, 1].
CameraRig transition_step(const CameraRig& rig, double alpha);

// Orientation with forward (local +z) along `forward`, keeping the other
// axes as close to `reference` as possible.
Rotation4 look_along(const Rotation4& reference, Vec4 forward);

} // namespace continuum
