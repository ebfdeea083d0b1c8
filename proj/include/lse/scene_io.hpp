// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lse/bvh.hpp"
#include "lse/camera.hpp"
#include "lse/geometry.hpp"
#include "lse/image.hpp"

namespace lse {

/// Mesh loading. PLY (ascii or binary_little_endian) with x,y,z vertex
/// positions, optional nx,ny,nz normals, and red,green,blue colors
/// (uchar/255 or float). OBJ is accepted with the per-vertex RGB extension
/// ("v x y z r g b"). Missing normals are computed area-weighted; missing
/// colors are an error (albedos are required input).
TriangleMesh load_mesh(const std::string& path);
void save_mesh_ply(const TriangleMesh& mesh, const std::string& path);  // binary LE

/// PFM: header "PF", dims, scale -1.0 (little-endian), rows bottom-up.
/// Round trips are bitwise.
Image load_pfm(const std::string& path);
void save_pfm(const Image& image, const std::string& path);

/// PNG 8-bit, treated as sRGB; loading linearizes through the sRGB EOTF,
/// saving applies the inverse transfer with clamping to [0,1].
Image load_png(const std::string& path);
void save_png(const Image& image, const std::string& path);

/// Dispatch on extension (.pfm/.png).
Image load_image(const std::string& path);
void save_image(const Image& image, const std::string& path);

double srgb_to_linear(double srgb);
double linear_to_srgb(double linear);

/// Per-pixel validity from geometry coverage: a pixel is valid iff its
/// central primary ray hits front-facing geometry.
std::vector<uint8_t> compute_mask(const Bvh& accel, const CameraModel& camera);

/// |ref - render| * scale per channel; pixels masked out in either input
/// are black.
Image error_map(const Image& ref, const Image& render, double scale = 1.5);

struct ViewConfig {
    std::string image_path;
    CameraModel camera;
};

/// JSON scene description consumed by the CLI: mesh, views, environment
/// resolution, and trace/objective overrides.
struct SceneConfig {
    std::string mesh_path;
    std::vector<ViewConfig> views;
    int ring_count = 9;
    // Optional overrides; absent fields keep module defaults.
    std::optional<int> spp;
    std::optional<int> max_bounces;
    std::optional<uint64_t> seed;
    std::optional<double> alpha;
    std::optional<double> beta;
    std::optional<double> cauchy_scale;
    std::optional<int> max_smc;
    std::optional<int> threads;
};

SceneConfig load_scene_config(const std::string& path);
std::string scene_config_to_json(const SceneConfig& config);

}  // namespace lse
