// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>

#include "lse/geometry.hpp"
#include "lse/math.hpp"

namespace lse {

/// Pinhole camera: intrinsics in pixels, world-from-camera rigid pose.
/// Camera space looks down +z, x right, y down (image rows increase with y).
struct CameraModel {
    double fx = 0.0, fy = 0.0, cx = 0.0, cy = 0.0;
    int width = 0, height = 0;
    std::array<Vec3, 3> rotation{Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, 0, 1}};  // rows R[i]
    Vec3 translation;  // camera origin in world coordinates

    /// Throws std::invalid_argument on broken invariants (non-positive focal
    /// lengths, principal point outside the image, non-orthonormal rotation).
    void validate() const;

    Vec3 to_world_dir(const Vec3& cam_dir) const {
        // rotation rows are world-from-camera columns transposed; store R so
        // that world = R * cam.
        return {dot(rotation[0], cam_dir), dot(rotation[1], cam_dir), dot(rotation[2], cam_dir)};
    }

    /// Primary ray through pixel coordinates (px, py); pass pixel-center
    /// (x + 0.5, y + 0.5) or jittered positions.
    Ray primary_ray(double px, double py) const {
        const Vec3 cam_dir = normalize(Vec3{(px - cx) / fx, (py - cy) / fy, 1.0});
        Ray ray;
        ray.origin = translation;
        ray.direction = to_world_dir(cam_dir);
        ray.t_min = 0.0;
        ray.t_max = kInfinity;
        return ray;
    }

    /// Convenience look-at constructor (up defaults to world +z).
    static CameraModel look_at(const Vec3& eye, const Vec3& target, const Vec3& up,
                               double fov_y_deg, int width, int height);
};

}  // namespace lse
