// SPDX-License-Identifier: Apache-2.0
#include "support/scenes.hpp"

#include "lse/path_tracer.hpp"

namespace lse::testing {

namespace {

/// Nearest positive ray parameter of a sphere hit, or +inf on miss.
double ray_sphere_t(const Vec3& origin, const Vec3& dir, const SphereLight& light) {
    const Vec3 oc = origin - light.center;
    const double b = dot(oc, dir);
    const double c = dot(oc, oc) - light.radius * light.radius;
    const double disc = b * b - c;
    if (disc < 0.0) return kInfinity;
    const double sqrt_disc = std::sqrt(disc);
    const double t0 = -b - sqrt_disc;
    if (t0 > 0.0) return t0;
    const double t1 = -b + sqrt_disc;
    return t1 > 0.0 ? t1 : kInfinity;
}

}  // namespace

Image render_sphere_light(const Bvh& accel, const CameraModel& camera, const SphereLight& light,
                          int spp, int max_bounces, uint64_t seed) {
    Image image(camera.width, camera.height, false);
    const double inv_spp = 1.0 / spp;

    for (int y = 0; y < camera.height; ++y) {
        for (int x = 0; x < camera.width; ++x) {
            const uint64_t pixel = static_cast<uint64_t>(y) * camera.width + x;
            Pcg32 rng = make_pixel_rng(seed, pixel);
            Vec3 value{};
            bool covered = false;

            for (int s = 0; s < spp; ++s) {
                auto hit = accel.intersect(
                    camera.primary_ray(x + rng.next_double(), y + rng.next_double()));
                if (!hit || hit->backface) continue;
                covered = true;

                Vec3 throughput{1.0, 1.0, 1.0};
                for (int bounce = 0; bounce < max_bounces; ++bounce) {
                    Vec3 offset_n = hit->geometric_normal;
                    if (dot(offset_n, hit->shading_normal) < 0.0) offset_n = -offset_n;

                    // Cone sampling toward the sphere.
                    const Vec3 to_center = light.center - hit->point;
                    const double dist = length(to_center);
                    if (dist > light.radius) {
                        const double sin_max = light.radius / dist;
                        const double cos_max = std::sqrt(std::max(0.0, 1.0 - sin_max * sin_max));
                        const double u1 = rng.next_double();
                        const double u2 = rng.next_double();
                        const double cos_theta = 1.0 - u1 * (1.0 - cos_max);
                        const double sin_theta =
                            std::sqrt(std::max(0.0, 1.0 - cos_theta * cos_theta));
                        const double phi = 2.0 * kPi * u2;
                        Vec3 t, b;
                        const Vec3 axis = to_center / dist;
                        orthonormal_basis(axis, t, b);
                        const Vec3 omega = normalize(t * (sin_theta * std::cos(phi)) +
                                                     b * (sin_theta * std::sin(phi)) +
                                                     axis * cos_theta);
                        const double cos_s = dot(omega, hit->shading_normal);
                        if (cos_s > 0.0 && dot(omega, offset_n) > 0.0) {
                            const Vec3 origin = hit->point + offset_n * accel.shadow_epsilon();
                            const double t_light = ray_sphere_t(origin, omega, light);
                            Ray shadow{origin, omega, 0.0, t_light};
                            if (t_light < kInfinity && !accel.any_hit(shadow)) {
                                const double pdf = 1.0 / (2.0 * kPi * (1.0 - cos_max));
                                const Vec3 brdf = lambertian_brdf(hit->albedo);
                                for (int c = 0; c < 3; ++c) {
                                    value[c] += inv_spp * throughput[c] * brdf[c] * cos_s *
                                                light.radiance[c] / pdf;
                                }
                            }
                        }
                    }

                    if (bounce + 1 == max_bounces) break;
                    const auto [dir, pdf] = cosine_sample_hemisphere(
                        hit->shading_normal, rng.next_double(), rng.next_double());
                    if (pdf <= 0.0 || dot(dir, offset_n) <= 0.0) break;
                    throughput *= hit->albedo;
                    Ray bounce_ray{hit->point + offset_n * accel.shadow_epsilon(), dir, 0.0,
                                   kInfinity};
                    hit = accel.intersect(bounce_ray);
                    if (!hit || hit->backface) break;
                }
            }

            if (covered) {
                image.mask[pixel] = 1;
                image.set(x, y, value);
            }
        }
    }
    return image;
}

}  // namespace lse::testing
