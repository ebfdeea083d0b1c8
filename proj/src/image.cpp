// SPDX-License-Identifier: Apache-2.0
#include "lse/image.hpp"

namespace lse {

double Image::mean_intensity_masked() const {
    double total = 0.0;
    size_t count = 0;
    for (size_t p = 0; p < pixel_count(); ++p) {
        if (!mask[p]) continue;
        total += (rgb[3 * p] + rgb[3 * p + 1] + rgb[3 * p + 2]) / 3.0;
        ++count;
    }
    return count > 0 ? total / count : 0.0;
}

}  // namespace lse
