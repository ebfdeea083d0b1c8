// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "lse/geometry.hpp"

namespace lse {

struct Aabb {
    Vec3 lo{kInfinity, kInfinity, kInfinity};
    Vec3 hi{-kInfinity, -kInfinity, -kInfinity};

    void grow(const Vec3& p) { lo = min(lo, p); hi = max(hi, p); }
    void grow(const Aabb& b) { lo = min(lo, b.lo); hi = max(hi, b.hi); }
    Vec3 centroid() const { return (lo + hi) * 0.5; }
    bool hit(const Ray& ray, const Vec3& inv_dir, double t_max) const;
};

/// Binary BVH over mesh triangles, median split on the widest centroid axis.
/// Immutable after construction; safe for concurrent intersect/occluded calls.
/// Equal-t hits resolve to the smallest triangle id so results match the
/// brute-force ordering exactly.
class Bvh {
public:
    /// Throws std::invalid_argument on an empty mesh.
    explicit Bvh(const TriangleMesh& mesh);

    /// Nearest hit with t in (t_min, t_max), or nullopt.
    std::optional<SurfaceHit> intersect(const Ray& ray) const;

    /// True iff any triangle blocks Ray(p + eps * offset_normal, dir).
    /// `offset_normal` is the geometric normal at p (self-intersection guard);
    /// pass the direction itself for free-space queries.
    bool occluded(const Vec3& p, const Vec3& dir, const Vec3& offset_normal) const;

    /// Any-hit test for an explicit ray (no origin offsetting).
    bool any_hit(const Ray& ray) const;

    const TriangleMesh& mesh() const { return *mesh_; }
    double shadow_epsilon() const { return shadow_eps_; }

private:
    struct Node {
        Aabb bounds;
        uint32_t first = 0;   // leaf: index into prim_order_; inner: left child
        uint32_t count = 0;   // leaf: primitive count; inner: 0
        uint32_t right = 0;   // inner only
    };

    uint32_t build_recursive(std::vector<uint32_t>& prims, uint32_t begin, uint32_t end,
                             const std::vector<Aabb>& prim_bounds,
                             const std::vector<Vec3>& centroids);

    const TriangleMesh* mesh_;
    std::vector<Node> nodes_;
    std::vector<uint32_t> prim_order_;
    double shadow_eps_ = 0.0;  // 1e-4 * scene diagonal
};

/// Reference intersector used by tests; O(triangles) per ray.
std::optional<SurfaceHit> intersect_brute_force(const TriangleMesh& mesh, const Ray& ray);

}  // namespace lse
