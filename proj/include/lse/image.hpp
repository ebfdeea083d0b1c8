// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "lse/math.hpp"

namespace lse {

/// Linear-irradiance RGB image (float32 per channel) with a per-pixel
/// validity mask. Renders use the mask as a coverage flag (primary ray hit
/// something); references use it to exclude reconstruction holes.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<float> rgb;        // 3 * width * height, row-major, top-left origin
    std::vector<uint8_t> mask;     // 1 = valid

    Image() = default;
    Image(int w, int h, bool valid = true)
        : width(w), height(h), rgb(static_cast<size_t>(3) * w * h, 0.0f),
          mask(static_cast<size_t>(w) * h, valid ? 1 : 0) {}

    size_t pixel_count() const { return static_cast<size_t>(width) * height; }

    Vec3 at(int x, int y) const {
        const size_t i = 3 * (static_cast<size_t>(y) * width + x);
        return {rgb[i], rgb[i + 1], rgb[i + 2]};
    }
    void set(int x, int y, const Vec3& v) {
        const size_t i = 3 * (static_cast<size_t>(y) * width + x);
        rgb[i] = static_cast<float>(v.x);
        rgb[i + 1] = static_cast<float>(v.y);
        rgb[i + 2] = static_cast<float>(v.z);
    }
    bool valid(int x, int y) const { return mask[static_cast<size_t>(y) * width + x] != 0; }

    double mean_intensity_masked() const;
};

}  // namespace lse
