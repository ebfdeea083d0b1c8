// SPDX-License-Identifier: Apache-2.0
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "lse/scene_io.hpp"

namespace lse {

namespace {

CameraModel camera_from_json(const nlohmann::json& doc) {
    CameraModel cam;
    cam.fx = doc.at("fx").get<double>();
    cam.fy = doc.at("fy").get<double>();
    cam.cx = doc.at("cx").get<double>();
    cam.cy = doc.at("cy").get<double>();
    cam.width = doc.at("width").get<int>();
    cam.height = doc.at("height").get<int>();
    const auto& rot = doc.at("rotation");
    for (int i = 0; i < 3; ++i) {
        cam.rotation[i] = {rot[i][0].get<double>(), rot[i][1].get<double>(),
                           rot[i][2].get<double>()};
    }
    const auto& t = doc.at("translation");
    cam.translation = {t[0].get<double>(), t[1].get<double>(), t[2].get<double>()};
    cam.validate();
    return cam;
}

nlohmann::json camera_to_json(const CameraModel& cam) {
    nlohmann::json doc;
    doc["fx"] = cam.fx;
    doc["fy"] = cam.fy;
    doc["cx"] = cam.cx;
    doc["cy"] = cam.cy;
    doc["width"] = cam.width;
    doc["height"] = cam.height;
    doc["rotation"] = {{cam.rotation[0].x, cam.rotation[0].y, cam.rotation[0].z},
                       {cam.rotation[1].x, cam.rotation[1].y, cam.rotation[1].z},
                       {cam.rotation[2].x, cam.rotation[2].y, cam.rotation[2].z}};
    doc["translation"] = {cam.translation.x, cam.translation.y, cam.translation.z};
    return doc;
}

}  // namespace

SceneConfig load_scene_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error("config: " + path + ": " + e.what());
    }

    const auto base = std::filesystem::path(path).parent_path();
    auto resolve = [&](const std::string& p) {
        const std::filesystem::path fp(p);
        return fp.is_absolute() ? fp.string() : (base / fp).string();
    };

    SceneConfig config;
    config.mesh_path = resolve(doc.at("mesh").get<std::string>());
    config.ring_count = doc.value("rings", 9);
    if (config.ring_count < 2) throw std::runtime_error("config: rings must be >= 2");
    for (const auto& view : doc.at("views")) {
        ViewConfig v;
        v.image_path = resolve(view.at("image").get<std::string>());
        v.camera = camera_from_json(view.at("camera"));
        config.views.push_back(std::move(v));
    }
    if (config.views.empty()) throw std::runtime_error("config: at least one view is required");

    if (doc.contains("spp")) config.spp = doc["spp"].get<int>();
    if (doc.contains("max_bounces")) config.max_bounces = doc["max_bounces"].get<int>();
    if (doc.contains("seed")) config.seed = doc["seed"].get<uint64_t>();
    if (doc.contains("alpha")) config.alpha = doc["alpha"].get<double>();
    if (doc.contains("beta")) config.beta = doc["beta"].get<double>();
    if (doc.contains("cauchy_c")) config.cauchy_scale = doc["cauchy_c"].get<double>();
    if (doc.contains("max_smc")) config.max_smc = doc["max_smc"].get<int>();
    if (doc.contains("threads")) config.threads = doc["threads"].get<int>();
    return config;
}

std::string scene_config_to_json(const SceneConfig& config) {
    nlohmann::json doc;
    doc["mesh"] = config.mesh_path;
    doc["rings"] = config.ring_count;
    doc["views"] = nlohmann::json::array();
    for (const auto& view : config.views) {
        doc["views"].push_back({{"image", view.image_path}, {"camera", camera_to_json(view.camera)}});
    }
    if (config.spp) doc["spp"] = *config.spp;
    if (config.max_bounces) doc["max_bounces"] = *config.max_bounces;
    if (config.seed) doc["seed"] = *config.seed;
    if (config.alpha) doc["alpha"] = *config.alpha;
    if (config.beta) doc["beta"] = *config.beta;
    if (config.cauchy_scale) doc["cauchy_c"] = *config.cauchy_scale;
    if (config.max_smc) doc["max_smc"] = *config.max_smc;
    if (config.threads) doc["threads"] = *config.threads;
    return doc.dump(2);
}

}  // namespace lse
