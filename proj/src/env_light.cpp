// SPDX-License-Identifier: Apache-2.0
#include "lse/env_light.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "lse/image.hpp"
#include "lse/scene_io.hpp"

namespace lse {

namespace {

Vec3 spherical_dir(double cos_theta, double phi) {
    const double sin_theta = std::sqrt(std::max(0.0, 1.0 - cos_theta * cos_theta));
    return {sin_theta * std::cos(phi), sin_theta * std::sin(phi), cos_theta};
}

}  // namespace

EnvironmentMap discretize_sphere(int ring_count) {
    if (ring_count < 2) throw std::invalid_argument("env: ring_count must be >= 2");

    EnvironmentMap env;
    env.ring_count = ring_count;
    const double dtheta = kPi / (ring_count - 1);

    for (int i = 0; i < ring_count; ++i) {
        // Mirror the count from the matching northern ring so the layout is
        // exactly symmetric under equatorial reflection (ceil is sensitive to
        // last-ulp differences in sin near the south pole otherwise).
        const int mirror = std::min(i, ring_count - 1 - i);
        const double theta = kPi * i / (ring_count - 1);
        const double mirror_theta = kPi * mirror / (ring_count - 1);
        const int count =
            (mirror == 0) ? 1
                          : static_cast<int>(std::ceil(2.0 * kPi * std::sin(mirror_theta) / dtheta));

        const double theta_lo = (i == 0) ? 0.0 : theta - 0.5 * dtheta;
        const double theta_hi = (i == ring_count - 1) ? kPi : theta + 0.5 * dtheta;

        env.ring_first_.push_back(env.light_count());
        env.ring_size_.push_back(count);
        env.ring_cos_lo_.push_back((i == 0) ? 1.0 : std::cos(theta_lo));
        env.ring_cos_hi_.push_back((i == ring_count - 1) ? -1.0 : std::cos(theta_hi));

        const double cos_theta = (i == 0) ? 1.0 : (i == ring_count - 1) ? -1.0 : std::cos(theta);
        for (int k = 0; k < count; ++k) {
            const double phi = 2.0 * kPi * k / count;  // phase 0 on every ring
            env.directions.push_back(count == 1 ? Vec3{0.0, 0.0, cos_theta}
                                                : spherical_dir(cos_theta, phi));
            env.ring_index.push_back(i);
        }
    }
    env.radiance.assign(env.directions.size(), Vec3{});
    return env;
}

double EnvironmentMap::cell_solid_angle(int j) const {
    const int ring = ring_index[j];
    const double dphi = 2.0 * kPi / ring_size_[ring];
    return dphi * (ring_cos_lo_[ring] - ring_cos_hi_[ring]);
}

Vec3 EnvironmentMap::sample_cell_direction(int j, double u1, double u2) const {
    const int ring = ring_index[j];
    const int in_ring = j - ring_first_[ring];
    const double dphi = 2.0 * kPi / ring_size_[ring];
    const double phi_center = dphi * in_ring;
    const double cos_theta = ring_cos_hi_[ring] + u1 * (ring_cos_lo_[ring] - ring_cos_hi_[ring]);
    const double phi = phi_center + (u2 - 0.5) * dphi;
    return spherical_dir(cos_theta, phi);
}

int EnvironmentMap::nearest_direction(const Vec3& omega) const {
    int best = 0;
    double best_dot = dot(omega, directions[0]);
    for (int j = 1; j < light_count(); ++j) {
        const double d = dot(omega, directions[j]);
        if (d > best_dot) {
            best_dot = d;
            best = j;
        }
    }
    return best;
}

Vec3 EnvironmentMap::radiance_toward(const Vec3& omega) const {
    return radiance[nearest_direction(omega)];
}

double EnvironmentMap::total_radiance() const {
    double total = 0.0;
    for (const Vec3& lam : radiance) total += sum(lam);
    return total;
}

LightSampleDistribution build_light_distribution(const EnvironmentMap& env, double floor_weight) {
    if (!(floor_weight > 0.0 && floor_weight <= 1.0)) {
        throw std::invalid_argument("env: floor_weight must be in (0,1]");
    }
    const int n = env.light_count();
    const double total = env.total_radiance();

    LightSampleDistribution dist;
    dist.probability.resize(n);
    dist.cdf.resize(n);
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
        const double share = total > 0.0 ? sum(env.radiance[j]) / total : 1.0 / n;
        dist.probability[j] = (1.0 - floor_weight) * share + floor_weight / n;
        acc += dist.probability[j];
        dist.cdf[j] = acc;
    }
    // Pin the tail so inversion never falls off the table.
    dist.cdf[n - 1] = 1.0;
    return dist;
}

std::pair<int, double> LightSampleDistribution::sample(double u) const {
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), u,
                                     [](double c, double value) { return c <= value; });
    const int j = static_cast<int>(it - cdf.begin());
    return {j, probability[j]};
}

std::string env_to_json(const EnvironmentMap& env) {
    nlohmann::json doc;
    doc["ring_count"] = env.ring_count;
    auto& dirs = doc["directions"] = nlohmann::json::array();
    auto& rads = doc["radiance"] = nlohmann::json::array();
    for (int j = 0; j < env.light_count(); ++j) {
        const Vec3& d = env.directions[j];
        const Vec3& r = env.radiance[j];
        dirs.push_back({d.x, d.y, d.z});
        rads.push_back({r.x, r.y, r.z});
    }
    return doc.dump(2);
}

EnvironmentMap env_from_json(const std::string& json_text) {
    const auto doc = nlohmann::json::parse(json_text);
    EnvironmentMap env = discretize_sphere(doc.at("ring_count").get<int>());
    const auto& rads = doc.at("radiance");
    if (static_cast<int>(rads.size()) != env.light_count()) {
        throw std::runtime_error("env: radiance array does not match ring_count layout");
    }
    for (int j = 0; j < env.light_count(); ++j) {
        env.radiance[j] = {rads[j][0].get<double>(), rads[j][1].get<double>(),
                           rads[j][2].get<double>()};
        for (int c = 0; c < 3; ++c) {
            if (!(env.radiance[j][c] >= 0.0)) {
                throw std::runtime_error("env: negative radiance in file");
            }
        }
    }
    return env;
}

void save_env_json(const EnvironmentMap& env, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("env: cannot open " + path + " for writing");
    out << env_to_json(env) << "\n";
}

EnvironmentMap load_env_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("env: cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return env_from_json(text);
}

void save_env_pfm(const EnvironmentMap& env, const std::string& path, int width, int height) {
    Image img(width, height);
    for (int y = 0; y < height; ++y) {
        const double theta = kPi * (y + 0.5) / height;
        for (int x = 0; x < width; ++x) {
            const double phi = 2.0 * kPi * (x + 0.5) / width;
            img.set(x, y, env.radiance_toward(spherical_dir(std::cos(theta), phi)));
        }
    }
    save_pfm(img, path);
}

}  // namespace lse
