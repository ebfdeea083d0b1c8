// SPDX-License-Identifier: Apache-2.0
#include "lse/path_tracer.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "lse/rng.hpp"

namespace lse {

void TraceConfig::validate() const {
    if (samples_per_pixel < 1) throw std::invalid_argument("trace: samples_per_pixel must be >= 1");
    if (max_bounces < 1) throw std::invalid_argument("trace: max_bounces must be >= 1");
    if (env_samples_per_vertex < 1) {
        throw std::invalid_argument("trace: env_samples_per_vertex must be >= 1");
    }
    if (!(floor_weight > 0.0 && floor_weight <= 1.0)) {
        throw std::invalid_argument("trace: floor_weight must be in (0,1]");
    }
}

LightJacobian::LightJacobian(int pixel_count, int light_count)
    : pixel_count_(pixel_count),
      light_count_(light_count),
      data_(static_cast<size_t>(pixel_count) * light_count * 3, 0.0),
      coverage_(pixel_count, 0) {}

void LightJacobian::check_integrity() const {
    for (int p = 0; p < pixel_count_; ++p) {
        for (int j = 0; j < light_count_; ++j) {
            for (int c = 0; c < 3; ++c) {
                const double v = coeff(p, j, c);
                if (!std::isfinite(v)) throw std::logic_error("jacobian: non-finite coefficient");
                if (v < 0.0) throw std::logic_error("jacobian: negative coefficient");
                if (!covered(p) && v != 0.0) {
                    throw std::logic_error("jacobian: nonzero row for uncovered pixel");
                }
            }
        }
    }
}

void LightJacobian::save_raw(const std::string& path_prefix, uint64_t seed) const {
    std::ofstream raw(path_prefix + ".f32", std::ios::binary);
    if (!raw) throw std::runtime_error("jacobian: cannot open " + path_prefix + ".f32");
    std::vector<float> row(data_.size());
    for (size_t i = 0; i < data_.size(); ++i) row[i] = static_cast<float>(data_[i]);
    raw.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(float)));

    nlohmann::json sidecar{{"m_pix", pixel_count_},
                           {"n_lights", light_count_},
                           {"channels", 3},
                           {"seed", seed}};
    std::ofstream meta(path_prefix + ".json", std::ios::binary);
    meta << sidecar.dump(2) << "\n";
}

std::pair<Vec3, double> cosine_sample_hemisphere(const Vec3& n, double u1, double u2) {
    // Concentric-free polar mapping: r = sqrt(u1), phi = 2 pi u2.
    const double r = std::sqrt(u1);
    const double phi = 2.0 * kPi * u2;
    const double local_x = r * std::cos(phi);
    const double local_y = r * std::sin(phi);
    const double local_z = std::sqrt(std::max(0.0, 1.0 - u1));

    Vec3 t, b;
    orthonormal_basis(n, t, b);
    const Vec3 dir = normalize(t * local_x + b * local_y + n * local_z);
    const double pdf = std::max(dot(dir, n), 0.0) / kPi;
    return {dir, pdf};
}

namespace {

struct PixelTraceContext {
    const Bvh* accel;
    const EnvironmentMap* env;
    const CameraModel* camera;
    const TraceConfig* cfg;
    const LightSampleDistribution* dist;
    std::vector<double> cell_solid_angle;  // precomputed per light
};

void trace_pixel(const PixelTraceContext& ctx, int pixel, LightJacobian& out) {
    const int x = pixel % ctx.camera->width;
    const int y = pixel / ctx.camera->width;
    const TraceConfig& cfg = *ctx.cfg;
    const int spp = cfg.samples_per_pixel;
    const int n_light_samples = cfg.env_samples_per_vertex;
    const double sample_norm = 1.0 / (static_cast<double>(spp) * n_light_samples);

    Pcg32 rng = make_pixel_rng(cfg.rng_seed, static_cast<uint64_t>(pixel));

    for (int s = 0; s < spp; ++s) {
        const double px = x + rng.next_double();
        const double py = y + rng.next_double();
        auto hit = ctx.accel->intersect(ctx.camera->primary_ray(px, py));
        if (!hit) continue;
        if (hit->backface) continue;  // open-shell interior: mask out
        out.set_covered(pixel);

        Vec3 throughput{1.0, 1.0, 1.0};
        for (int bounce = 0; bounce < cfg.max_bounces; ++bounce) {
            // Front-side geometric normal for shadow offsets.
            Vec3 offset_n = hit->geometric_normal;
            if (dot(offset_n, hit->shading_normal) < 0.0) offset_n = -offset_n;

            const Vec3 brdf = lambertian_brdf(hit->albedo);

            // Next-event estimation against the environment light.
            for (int ls = 0; ls < n_light_samples; ++ls) {
                const auto [light, q] = ctx.dist->sample(rng.next_double());
                const Vec3 omega =
                    ctx.env->sample_cell_direction(light, rng.next_double(), rng.next_double());
                const double cos_s = dot(omega, hit->shading_normal);
                if (cos_s <= 0.0 || dot(omega, offset_n) <= 0.0) continue;
                if (ctx.accel->occluded(hit->point, omega, offset_n)) continue;
                const double geom = cos_s * ctx.cell_solid_angle[light] * sample_norm / q;
                for (int c = 0; c < 3; ++c) {
                    out.add(pixel, light, c, throughput[c] * brdf[c] * geom);
                }
            }

            if (bounce + 1 == cfg.max_bounces) break;

            const auto [dir, pdf] =
                cosine_sample_hemisphere(hit->shading_normal, rng.next_double(), rng.next_double());
            if (pdf <= 0.0 || dot(dir, offset_n) <= 0.0) break;
            // Lambertian with cosine sampling: f * cos / pdf == albedo.
            throughput *= hit->albedo;

            Ray bounce_ray;
            bounce_ray.origin = hit->point + offset_n * ctx.accel->shadow_epsilon();
            bounce_ray.direction = dir;
            hit = ctx.accel->intersect(bounce_ray);
            if (!hit || hit->backface) break;
        }
    }
}

}  // namespace

LightJacobian trace_jacobian(const Bvh& accel, const EnvironmentMap& env,
                             const CameraModel& camera, const TraceConfig& cfg,
                             const LightSampleDistribution& dist) {
    cfg.validate();
    camera.validate();
    if (env.light_count() < 1) throw std::invalid_argument("trace: environment has no lights");
    if (static_cast<int>(dist.probability.size()) != env.light_count()) {
        throw std::invalid_argument("trace: distribution size does not match environment");
    }

    const int pixel_count = camera.width * camera.height;
    LightJacobian jacobian(pixel_count, env.light_count());

    PixelTraceContext ctx;
    ctx.accel = &accel;
    ctx.env = &env;
    ctx.camera = &camera;
    ctx.cfg = &cfg;
    ctx.dist = &dist;
    ctx.cell_solid_angle.resize(env.light_count());
    for (int j = 0; j < env.light_count(); ++j) ctx.cell_solid_angle[j] = env.cell_solid_angle(j);

    int thread_count = cfg.threads > 0 ? cfg.threads
                                       : static_cast<int>(std::thread::hardware_concurrency());
    if (thread_count < 1) thread_count = 1;

    if (thread_count == 1) {
        for (int p = 0; p < pixel_count; ++p) trace_pixel(ctx, p, jacobian);
    } else {
        // Each pixel is traced wholly by one worker with its own RNG stream,
        // so the result is bitwise identical at any thread count.
        std::atomic<int> next_pixel{0};
        auto worker = [&] {
            for (;;) {
                const int p = next_pixel.fetch_add(64);
                if (p >= pixel_count) return;
                const int end = std::min(p + 64, pixel_count);
                for (int i = p; i < end; ++i) trace_pixel(ctx, i, jacobian);
            }
        };
        std::vector<std::thread> pool;
        for (int t = 0; t < thread_count; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    jacobian.check_integrity();
    return jacobian;
}

Image apply_jacobian(const LightJacobian& jacobian, const EnvironmentMap& env, int width,
                     int height) {
    if (width * height != jacobian.pixel_count() ||
        env.light_count() != jacobian.light_count()) {
        throw std::invalid_argument("apply_jacobian: dimension mismatch");
    }
    Image image(width, height, false);
    for (int p = 0; p < jacobian.pixel_count(); ++p) {
        if (!jacobian.covered(p)) continue;
        image.mask[p] = 1;
        Vec3 value{};
        for (int j = 0; j < jacobian.light_count(); ++j) {  // fixed summation order
            for (int c = 0; c < 3; ++c) {
                value[c] += jacobian.coeff(p, j, c) * env.radiance[j][c];
            }
        }
        image.set(p % width, p / width, value);
    }
    return image;
}

Image render(const Bvh& accel, const EnvironmentMap& env, const CameraModel& camera,
             const TraceConfig& cfg, const LightSampleDistribution& dist) {
    const LightJacobian jacobian = trace_jacobian(accel, env, camera, cfg, dist);
    return apply_jacobian(jacobian, env, camera.width, camera.height);
}

}  // namespace lse
