// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lse/math.hpp"

namespace lse {

/// Ring discretization of the unit sphere into directional lights.
/// Rings sit at polar angles theta_i = pi*i/(R-1); each pole is a single
/// direction. Every direction owns a "band cell": the polar band halfway to
/// the neighbouring rings crossed with its azimuthal wedge. The cells
/// partition the sphere, so per-light solid angles sum to 4*pi exactly.
struct EnvironmentMap {
    int ring_count = 0;
    std::vector<Vec3> directions;      // unit vectors, world frame, +z poles
    std::vector<int> ring_index;       // ring of each direction
    std::vector<Vec3> radiance;        // lambda, RGB per direction, >= 0

    int light_count() const { return static_cast<int>(directions.size()); }

    /// Solid angle of light j's band cell, steradians.
    double cell_solid_angle(int j) const;

    /// Uniform direction within light j's band cell; the conditional density
    /// is 1 / cell_solid_angle(j).
    Vec3 sample_cell_direction(int j, double u1, double u2) const;

    /// Index of the stored direction with the largest dot(omega, d_j);
    /// ties break to the smallest index.
    int nearest_direction(const Vec3& omega) const;

    /// lambda at the nearest stored direction.
    Vec3 radiance_toward(const Vec3& omega) const;

    double total_radiance() const;

private:
    // Cached per-ring layout, filled by discretize_sphere.
    friend EnvironmentMap discretize_sphere(int ring_count);
    std::vector<int> ring_first_;      // first light index of each ring
    std::vector<int> ring_size_;
    std::vector<double> ring_cos_lo_;  // cos(theta) at the band's upper edge
    std::vector<double> ring_cos_hi_;  // cos(theta) at the band's lower edge
};

/// Builds the direction set for `ring_count` >= 2 rings with all radiance
/// zero. Ring i holds ceil(2*pi*sin(theta_i) / dtheta) directions,
/// dtheta = pi/(ring_count-1), mirrored across the equator so counts are
/// reflection-symmetric; azimuth phase is 0 on every ring.
/// 21 rings give 522 directions.
EnvironmentMap discretize_sphere(int ring_count);

/// Discrete light-selection distribution: a lambda-proportional term mixed
/// with a uniform floor so every light keeps strictly positive probability.
struct LightSampleDistribution {
    std::vector<double> probability;  // q_j, sums to 1
    std::vector<double> cdf;

    /// Inversion sampling; returns (light index, q_j).
    std::pair<int, double> sample(double u) const;
};

/// q_j = (1-floor_weight) * sum_c(lambda_jc)/sum(lambda) + floor_weight/N.
/// An all-zero map yields the exactly uniform distribution.
LightSampleDistribution build_light_distribution(const EnvironmentMap& env,
                                                 double floor_weight);

/// JSON document {ring_count, directions, radiance}.
std::string env_to_json(const EnvironmentMap& env);
EnvironmentMap env_from_json(const std::string& json_text);
void save_env_json(const EnvironmentMap& env, const std::string& path);
EnvironmentMap load_env_json(const std::string& path);

/// Equirectangular PFM visualization (nearest-neighbor splat).
void save_env_pfm(const EnvironmentMap& env, const std::string& path, int width = 256,
                  int height = 128);

}  // namespace lse
