// SPDX-License-Identifier: Apache-2.0
#include "lse/geometry.hpp"

#include <stdexcept>
#include <string>

namespace lse {

void TriangleMesh::validate() const {
    if (normals.size() != vertices.size() || albedos.size() != vertices.size()) {
        throw std::invalid_argument("mesh: normal/albedo arrays must match vertex count");
    }
    for (const auto& tri : triangles) {
        for (uint32_t idx : tri) {
            if (idx >= vertices.size()) {
                throw std::invalid_argument("mesh: triangle index " + std::to_string(idx) +
                                            " out of range");
            }
        }
    }
    for (const Vec3& n : normals) {
        if (!is_unit(n, 1e-6)) throw std::invalid_argument("mesh: non-unit vertex normal");
    }
    for (const Vec3& a : albedos) {
        for (int c = 0; c < 3; ++c) {
            if (!(a[c] >= 0.0 && a[c] <= 1.0)) {
                throw std::invalid_argument("mesh: albedo channel outside [0,1]");
            }
        }
    }
}

double TriangleMesh::bounds_diagonal() const {
    if (vertices.empty()) return 0.0;
    Vec3 lo = vertices.front(), hi = vertices.front();
    for (const Vec3& v : vertices) {
        lo = min(lo, v);
        hi = max(hi, v);
    }
    return length(hi - lo);
}

void TriangleMesh::compute_vertex_normals() {
    normals.assign(vertices.size(), Vec3{});
    for (const auto& tri : triangles) {
        const Vec3& a = vertices[tri[0]];
        const Vec3& b = vertices[tri[1]];
        const Vec3& c = vertices[tri[2]];
        const Vec3 fn = cross(b - a, c - a);  // length = 2 * area, area weighting
        normals[tri[0]] += fn;
        normals[tri[1]] += fn;
        normals[tri[2]] += fn;
    }
    for (Vec3& n : normals) {
        const double len = length(n);
        n = len > 0.0 ? n / len : Vec3{0.0, 0.0, 1.0};
    }
}

std::optional<std::array<double, 3>> intersect_triangle(const Ray& ray, const Vec3& a,
                                                        const Vec3& b, const Vec3& c) {
    const Vec3 e1 = b - a;
    const Vec3 e2 = c - a;
    const Vec3 pvec = cross(ray.direction, e2);
    const double det = dot(e1, pvec);
    if (det == 0.0) return std::nullopt;
    const double inv_det = 1.0 / det;
    const Vec3 tvec = ray.origin - a;
    const double u = dot(tvec, pvec) * inv_det;
    if (u < 0.0 || u > 1.0) return std::nullopt;
    const Vec3 qvec = cross(tvec, e1);
    const double v = dot(ray.direction, qvec) * inv_det;
    if (v < 0.0 || u + v > 1.0) return std::nullopt;
    const double t = dot(e2, qvec) * inv_det;
    if (t <= ray.t_min || t >= ray.t_max) return std::nullopt;
    return std::array<double, 3>{t, u, v};
}

SurfaceHit make_surface_hit(const TriangleMesh& mesh, uint32_t tri, const Ray& ray,
                            double t, double u, double v) {
    const auto& idx = mesh.triangles[tri];
    const double w = 1.0 - u - v;
    SurfaceHit hit;
    hit.triangle_id = tri;
    hit.t = t;
    hit.point = ray.origin + ray.direction * t;
    hit.shading_normal =
        normalize(mesh.normals[idx[0]] * w + mesh.normals[idx[1]] * u + mesh.normals[idx[2]] * v);
    hit.albedo = mesh.albedos[idx[0]] * w + mesh.albedos[idx[1]] * u + mesh.albedos[idx[2]] * v;
    const Vec3& a = mesh.vertices[idx[0]];
    hit.geometric_normal =
        normalize(cross(mesh.vertices[idx[1]] - a, mesh.vertices[idx[2]] - a));
    hit.backface = dot(ray.direction, hit.geometric_normal) > 0.0;
    return hit;
}

}  // namespace lse
