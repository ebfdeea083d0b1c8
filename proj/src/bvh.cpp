// SPDX-License-Identifier: Apache-2.0
#include "lse/bvh.hpp"

#include <algorithm>
#include <stdexcept>

namespace lse {

bool Aabb::hit(const Ray& ray, const Vec3& inv_dir, double t_max) const {
    double t0 = ray.t_min;
    double t1 = t_max;
    for (int axis = 0; axis < 3; ++axis) {
        double near = (lo[axis] - ray.origin[axis]) * inv_dir[axis];
        double far = (hi[axis] - ray.origin[axis]) * inv_dir[axis];
        if (near > far) std::swap(near, far);
        t0 = near > t0 ? near : t0;
        t1 = far < t1 ? far : t1;
        if (t0 > t1) return false;
    }
    return true;
}

Bvh::Bvh(const TriangleMesh& mesh) : mesh_(&mesh) {
    if (mesh.triangle_count() == 0) {
        throw std::invalid_argument("bvh: cannot build over an empty mesh");
    }
    shadow_eps_ = 1e-4 * mesh.bounds_diagonal();

    const auto n = static_cast<uint32_t>(mesh.triangle_count());
    std::vector<Aabb> prim_bounds(n);
    std::vector<Vec3> centroids(n);
    std::vector<uint32_t> prims(n);
    for (uint32_t i = 0; i < n; ++i) {
        prims[i] = i;
        const auto& tri = mesh.triangles[i];
        prim_bounds[i].grow(mesh.vertices[tri[0]]);
        prim_bounds[i].grow(mesh.vertices[tri[1]]);
        prim_bounds[i].grow(mesh.vertices[tri[2]]);
        centroids[i] = prim_bounds[i].centroid();
    }
    nodes_.reserve(2 * n);
    build_recursive(prims, 0, n, prim_bounds, centroids);
    prim_order_ = std::move(prims);
}

uint32_t Bvh::build_recursive(std::vector<uint32_t>& prims, uint32_t begin, uint32_t end,
                              const std::vector<Aabb>& prim_bounds,
                              const std::vector<Vec3>& centroids) {
    const auto node_index = static_cast<uint32_t>(nodes_.size());
    nodes_.emplace_back();

    Aabb bounds;
    for (uint32_t i = begin; i < end; ++i) bounds.grow(prim_bounds[prims[i]]);
    nodes_[node_index].bounds = bounds;

    const uint32_t count = end - begin;
    if (count <= 4) {
        // Leaves keep primitives in id order so equal-t ties break low.
        std::sort(prims.begin() + begin, prims.begin() + end);
        nodes_[node_index].first = begin;
        nodes_[node_index].count = count;
        return node_index;
    }

    Aabb centroid_bounds;
    for (uint32_t i = begin; i < end; ++i) centroid_bounds.grow(centroids[prims[i]]);
    const Vec3 extent = centroid_bounds.hi - centroid_bounds.lo;
    int axis = 0;
    if (extent.y > extent[axis]) axis = 1;
    if (extent.z > extent[axis]) axis = 2;

    const uint32_t mid = begin + count / 2;
    if (extent[axis] <= 0.0) {
        // Degenerate spread; split arbitrarily to keep depth bounded.
        std::nth_element(prims.begin() + begin, prims.begin() + mid, prims.begin() + end);
    } else {
        std::nth_element(prims.begin() + begin, prims.begin() + mid, prims.begin() + end,
                         [&](uint32_t a, uint32_t b) {
                             if (centroids[a][axis] != centroids[b][axis])
                                 return centroids[a][axis] < centroids[b][axis];
                             return a < b;
                         });
    }

    const uint32_t left = build_recursive(prims, begin, mid, prim_bounds, centroids);
    const uint32_t right = build_recursive(prims, mid, end, prim_bounds, centroids);
    (void)left;  // left child is node_index + 1 by construction
    nodes_[node_index].first = node_index + 1;
    nodes_[node_index].right = right;
    return node_index;
}

std::optional<SurfaceHit> Bvh::intersect(const Ray& ray) const {
    const Vec3 inv_dir{1.0 / ray.direction.x, 1.0 / ray.direction.y, 1.0 / ray.direction.z};

    double best_t = ray.t_max;
    uint32_t best_tri = 0;
    double best_u = 0.0, best_v = 0.0;
    bool found = false;

    uint32_t stack[64];
    int sp = 0;
    stack[sp++] = 0;
    while (sp > 0) {
        const Node& node = nodes_[stack[--sp]];
        if (!node.bounds.hit(ray, inv_dir, best_t)) continue;
        if (node.count > 0) {
            for (uint32_t i = 0; i < node.count; ++i) {
                const uint32_t tri = prim_order_[node.first + i];
                const auto& idx = mesh_->triangles[tri];
                Ray clipped = ray;
                clipped.t_max = best_t;
                const auto isect = intersect_triangle(clipped, mesh_->vertices[idx[0]],
                                                      mesh_->vertices[idx[1]],
                                                      mesh_->vertices[idx[2]]);
                if (!isect) continue;
                const double t = (*isect)[0];
                // Strict < plus low-id leaf ordering implements the
                // smallest-id tie-break for equal t.
                if (t < best_t || (t == best_t && found && tri < best_tri)) {
                    best_t = t;
                    best_tri = tri;
                    best_u = (*isect)[1];
                    best_v = (*isect)[2];
                    found = true;
                }
            }
        } else {
            stack[sp++] = node.right;
            stack[sp++] = node.first;
        }
    }

    if (!found) return std::nullopt;
    return make_surface_hit(*mesh_, best_tri, ray, best_t, best_u, best_v);
}

bool Bvh::any_hit(const Ray& ray) const {
    const Vec3 inv_dir{1.0 / ray.direction.x, 1.0 / ray.direction.y, 1.0 / ray.direction.z};
    uint32_t stack[64];
    int sp = 0;
    stack[sp++] = 0;
    while (sp > 0) {
        const Node& node = nodes_[stack[--sp]];
        if (!node.bounds.hit(ray, inv_dir, ray.t_max)) continue;
        if (node.count > 0) {
            for (uint32_t i = 0; i < node.count; ++i) {
                const auto& idx = mesh_->triangles[prim_order_[node.first + i]];
                if (intersect_triangle(ray, mesh_->vertices[idx[0]], mesh_->vertices[idx[1]],
                                       mesh_->vertices[idx[2]])) {
                    return true;
                }
            }
        } else {
            stack[sp++] = node.right;
            stack[sp++] = node.first;
        }
    }
    return false;
}

bool Bvh::occluded(const Vec3& p, const Vec3& dir, const Vec3& offset_normal) const {
    Ray shadow;
    shadow.origin = p + offset_normal * shadow_eps_;
    shadow.direction = dir;
    shadow.t_min = 0.0;
    shadow.t_max = kInfinity;
    return any_hit(shadow);
}

std::optional<SurfaceHit> intersect_brute_force(const TriangleMesh& mesh, const Ray& ray) {
    double best_t = ray.t_max;
    uint32_t best_tri = 0;
    double best_u = 0.0, best_v = 0.0;
    bool found = false;
    for (uint32_t tri = 0; tri < mesh.triangle_count(); ++tri) {
        const auto& idx = mesh.triangles[tri];
        Ray clipped = ray;
        clipped.t_max = best_t;
        const auto isect = intersect_triangle(clipped, mesh.vertices[idx[0]],
                                              mesh.vertices[idx[1]], mesh.vertices[idx[2]]);
        if (!isect) continue;
        const double t = (*isect)[0];
        if (t < best_t) {
            best_t = t;
            best_tri = tri;
            best_u = (*isect)[1];
            best_v = (*isect)[2];
            found = true;
        }
    }
    if (!found) return std::nullopt;
    return make_surface_hit(mesh, best_tri, ray, best_t, best_u, best_v);
}

}  // namespace lse
