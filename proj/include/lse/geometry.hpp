// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "lse/math.hpp"

namespace lse {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Indexed triangle mesh with per-vertex normals and RGB albedos.
/// Reconstructed scenes are open shells; no manifoldness is assumed.
struct TriangleMesh {
    std::vector<Vec3> vertices;   // positions, meters
    std::vector<Vec3> normals;    // unit shading normals, one per vertex
    std::vector<Vec3> albedos;    // RGB reflectance in [0,1], one per vertex
    std::vector<std::array<uint32_t, 3>> triangles;

    size_t vertex_count() const { return vertices.size(); }
    size_t triangle_count() const { return triangles.size(); }

    /// Throws std::invalid_argument on any broken invariant
    /// (index out of range, non-unit normal, albedo outside [0,1],
    /// mismatched array lengths).
    void validate() const;

    /// Axis-aligned bounds diagonal; used to scale epsilons.
    double bounds_diagonal() const;

    /// Area-weighted vertex normals from face geometry. Used by loaders
    /// when the source file carries no normals.
    void compute_vertex_normals();
};

struct Ray {
    Vec3 origin;
    Vec3 direction;  // unit length
    double t_min = 0.0;
    double t_max = kInfinity;
};

/// Nearest intersection along a ray. Normal and albedo are
/// barycentric-interpolated from vertex data; the normal is re-normalized.
struct SurfaceHit {
    Vec3 point;
    Vec3 shading_normal;   // interpolated, unit
    Vec3 geometric_normal; // face normal, unit, oriented with vertex winding
    Vec3 albedo;
    uint32_t triangle_id = 0;
    double t = 0.0;
    bool backface = false; // ray arrived from behind the geometric normal
};

/// Watertight-enough Moller-Trumbore test. Returns t, barycentrics (u, v)
/// of the hit with t in (t_min, t_max), or nullopt.
std::optional<std::array<double, 3>> intersect_triangle(const Ray& ray, const Vec3& a,
                                                        const Vec3& b, const Vec3& c);

/// Interpolates hit attributes for triangle `tri` at barycentrics (u, v).
SurfaceHit make_surface_hit(const TriangleMesh& mesh, uint32_t tri, const Ray& ray,
                            double t, double u, double v);

}  // namespace lse
