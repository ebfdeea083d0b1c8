// SPDX-License-Identifier: Apache-2.0
#include "lse/camera.hpp"

#include <cmath>
#include <stdexcept>

namespace lse {

void CameraModel::validate() const {
    if (!(fx > 0.0) || !(fy > 0.0)) throw std::invalid_argument("camera: focal length must be > 0");
    if (width <= 0 || height <= 0) throw std::invalid_argument("camera: zero-area image");
    if (!(cx > 0.0 && cx < width) || !(cy > 0.0 && cy < height)) {
        throw std::invalid_argument("camera: principal point outside the image");
    }
    // Orthonormality within 1e-9, determinant +1.
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            const double d = dot(rotation[i], rotation[j]);
            const double expected = (i == j) ? 1.0 : 0.0;
            if (std::abs(d - expected) > 1e-9) {
                throw std::invalid_argument("camera: rotation not orthonormal");
            }
        }
    }
    const double det = dot(rotation[0], cross(rotation[1], rotation[2]));
    if (std::abs(det - 1.0) > 1e-9) throw std::invalid_argument("camera: rotation determinant != 1");
}

CameraModel CameraModel::look_at(const Vec3& eye, const Vec3& target, const Vec3& up,
                                 double fov_y_deg, int width, int height) {
    CameraModel cam;
    cam.width = width;
    cam.height = height;
    cam.fy = 0.5 * height / std::tan(0.5 * fov_y_deg * kPi / 180.0);
    cam.fx = cam.fy;
    cam.cx = 0.5 * width;
    cam.cy = 0.5 * height;

    const Vec3 forward = normalize(target - eye);        // camera +z
    const Vec3 right = normalize(cross(forward, up));    // camera +x
    const Vec3 down = cross(forward, right);             // camera +y (rows grow downward)
    // world = R * cam with columns (right, down, forward); rows stored directly.
    cam.rotation = {Vec3{right.x, down.x, forward.x}, Vec3{right.y, down.y, forward.y},
                    Vec3{right.z, down.z, forward.z}};
    cam.translation = eye;
    return cam;
}

}  // namespace lse
