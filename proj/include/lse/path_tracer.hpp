// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "lse/bvh.hpp"
#include "lse/camera.hpp"
#include "lse/env_light.hpp"
#include "lse/image.hpp"

namespace lse {

struct TraceConfig {
    int samples_per_pixel = 64;
    int max_bounces = 3;            // path vertices that run light sampling
    int env_samples_per_vertex = 1;
    uint64_t rng_seed = 0;
    double floor_weight = 0.1;
    int threads = 0;                // 0 = hardware concurrency

    void validate() const;
};

/// Dense per-channel matrix of d(pixel)/d(lambda) coefficients. Image
/// formation is I = J * lambda, so one trace serves both the forward render
/// and the optimizer's gradient.
class LightJacobian {
public:
    LightJacobian() = default;
    LightJacobian(int pixel_count, int light_count);

    int pixel_count() const { return pixel_count_; }
    int light_count() const { return light_count_; }

    double coeff(int pixel, int light, int channel) const {
        return data_[index(pixel, light, channel)];
    }
    void add(int pixel, int light, int channel, double value) {
        data_[index(pixel, light, channel)] += value;
    }

    bool covered(int pixel) const { return coverage_[pixel] != 0; }
    void set_covered(int pixel) { coverage_[pixel] = 1; }

    /// Throws std::logic_error on any negative or non-finite entry, or on a
    /// nonzero row for an uncovered pixel.
    void check_integrity() const;

    /// Raw little-endian float32 dump plus a JSON sidecar
    /// {m_pix, n_lights, channels, seed}.
    void save_raw(const std::string& path_prefix, uint64_t seed) const;

    const std::vector<double>& data() const { return data_; }

private:
    size_t index(int pixel, int light, int channel) const {
        return (static_cast<size_t>(pixel) * light_count_ + light) * 3 + channel;
    }

    int pixel_count_ = 0;
    int light_count_ = 0;
    std::vector<double> data_;
    std::vector<uint8_t> coverage_;
};

/// Lambertian BRDF value, rho / pi per channel.
inline Vec3 lambertian_brdf(const Vec3& albedo) { return albedo * (1.0 / kPi); }

/// Cosine-weighted hemisphere sample around unit normal n.
/// Returns (direction, pdf = max(dot(w,n),0) / pi).
std::pair<Vec3, double> cosine_sample_hemisphere(const Vec3& n, double u1, double u2);

/// Traces M primary rays per pixel; at every path vertex draws
/// env_samples_per_vertex lights from `dist`, samples a direction uniformly
/// within the chosen light's cell, shadow-tests it, and accumulates
/// V * T * f * cos / (M * N * q_j * cell_pdf_j) into the light's column.
/// Paths continue by cosine sampling (throughput multiplier = albedo) up to
/// max_bounces vertices. Per-pixel RNG streams keyed by (seed, pixel index)
/// make the result bitwise independent of the thread count.
LightJacobian trace_jacobian(const Bvh& accel, const EnvironmentMap& env,
                             const CameraModel& camera, const TraceConfig& cfg,
                             const LightSampleDistribution& dist);

/// I = J * lambda per channel; uncovered pixels stay 0 with mask cleared.
Image apply_jacobian(const LightJacobian& jacobian, const EnvironmentMap& env,
                     int width, int height);

/// Defined as apply_jacobian(trace_jacobian(...), lambda); forward render
/// and derivative are consistent by construction.
Image render(const Bvh& accel, const EnvironmentMap& env, const CameraModel& camera,
             const TraceConfig& cfg, const LightSampleDistribution& dist);

}  // namespace lse
