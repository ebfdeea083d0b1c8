// SPDX-License-Identifier: Apache-2.0
//
// End-to-end acceptance gate. Each criterion prints exactly one
// [PASS]/[FAIL] line; the process exits nonzero if any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "lse/estimator.hpp"
#include "lse/path_tracer.hpp"
#include "lse/rng.hpp"
#include "support/scenes.hpp"

using namespace lse;
using namespace lse::testing;

namespace {

int g_failures = 0;

double now_seconds() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

void report(int index, const char* title, bool pass, double seconds, const std::string& detail) {
    std::printf("[%s] criterion %d: %s (%.1f s) %s\n", pass ? "PASS" : "FAIL", index, title,
                seconds, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

// ---------------------------------------------------------------------------
// 1. Sphere discretization: exact direction count and equator symmetry.
void criterion_1() {
    const double t0 = now_seconds();
    bool pass = true;
    std::string detail;

    const EnvironmentMap env21 = discretize_sphere(21);
    if (env21.light_count() != 522) {
        pass = false;
        detail = "R=21 gave " + std::to_string(env21.light_count()) + " directions, want 522;";
    }
    for (int rings = 2; rings <= 30 && pass; ++rings) {
        const EnvironmentMap env = discretize_sphere(rings);
        std::vector<int> sizes(rings, 0);
        for (int j = 0; j < env.light_count(); ++j) sizes[env.ring_index[j]]++;
        for (int i = 0; i < rings; ++i) {
            if (sizes[i] != sizes[rings - 1 - i]) {
                pass = false;
                detail = "asymmetric ring counts at R=" + std::to_string(rings);
                break;
            }
        }
    }
    const double elapsed = now_seconds() - t0;
    if (elapsed >= 1.0) {
        pass = false;
        detail += " over the 1 s budget";
    }
    if (pass) detail = "522 directions at R=21, symmetric for R=2..30";
    report(1, "sphere discretization fidelity", pass, elapsed, detail);
}

// ---------------------------------------------------------------------------
// 2. Lambertian plane under a uniform unit sky renders to rho.
void criterion_2() {
    const double t0 = now_seconds();
    const double rho = 0.5;

    const TriangleMesh floor = make_floor_quad(100.0, Vec3(rho));
    const Bvh accel(floor);
    const CameraModel camera =
        CameraModel::look_at({0.0, 0.0, 5.0}, {0.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, 30.0, 16, 16);

    EnvironmentMap env = discretize_sphere(9);
    for (Vec3& r : env.radiance) r = Vec3(1.0);

    TraceConfig cfg;
    cfg.samples_per_pixel = 4096;
    cfg.max_bounces = 1;
    cfg.rng_seed = 2024;
    const Image image =
        render(accel, env, camera, cfg, build_light_distribution(env, cfg.floor_weight));

    const double mean = image.mean_intensity_masked();
    const bool within = std::abs(mean - rho) <= 0.01 * rho;
    const double elapsed = now_seconds() - t0;
    char buf[128];
    std::snprintf(buf, sizeof(buf), "mean %.5f vs %.2f (1%% band)", mean, rho);
    report(2, "analytic radiometry oracle", within && elapsed < 60.0, elapsed, buf);
}

// ---------------------------------------------------------------------------
// 3. Jacobian application linearity and gradient correctness.
LightJacobian random_jacobian(int pixels, int lights, uint64_t seed) {
    LightJacobian jac(pixels, lights);
    Pcg32 rng(mix64(seed), 41);
    for (int p = 0; p < pixels; ++p) {
        jac.set_covered(p);
        for (int j = 0; j < lights; ++j) {
            for (int c = 0; c < 3; ++c) jac.add(p, j, c, rng.next_double() * 0.2);
        }
    }
    return jac;
}

void criterion_3() {
    const double t0 = now_seconds();
    bool pass = true;
    std::string detail = "linearity, objective FD 1e-5, activation FD 1e-4";

    // (a) Linearity of the pixel-from-lambda map. Doubling lambda doubles
    // every coefficient product exactly, so the output must match bitwise.
    {
        EnvironmentMap env = discretize_sphere(4);
        Pcg32 rng(3, 5);
        for (Vec3& r : env.radiance) {
            r = Vec3{rng.next_double(), rng.next_double(), rng.next_double()};
        }
        EnvironmentMap doubled = env;
        for (Vec3& r : doubled.radiance) r = r * 2.0;

        const LightJacobian jac = random_jacobian(64, env.light_count(), 11);
        const Image one = apply_jacobian(jac, env, 8, 8);
        const Image two = apply_jacobian(jac, doubled, 8, 8);
        for (size_t i = 0; i < one.rgb.size() && pass; ++i) {
            if (two.rgb[i] != 2.0f * one.rgb[i]) {
                pass = false;
                detail = "scaling lambda by 2 is not exact";
            }
        }
        // Additivity within accumulation roundoff.
        EnvironmentMap sum_env = env;
        EnvironmentMap other = env;
        Pcg32 rng2(9, 2);
        for (int j = 0; j < env.light_count(); ++j) {
            other.radiance[j] = Vec3{rng2.next_double(), rng2.next_double(), rng2.next_double()};
            sum_env.radiance[j] = env.radiance[j] + other.radiance[j];
        }
        const Image a = apply_jacobian(jac, env, 8, 8);
        const Image b = apply_jacobian(jac, other, 8, 8);
        const Image ab = apply_jacobian(jac, sum_env, 8, 8);
        for (size_t i = 0; i < a.rgb.size() && pass; ++i) {
            if (std::abs(ab.rgb[i] - (a.rgb[i] + b.rgb[i])) > 1e-5) {
                pass = false;
                detail = "additivity in lambda violated";
            }
        }
    }

    // (b) Full objective gradient vs central differences on random
    // 5-light / 16-pixel instances.
    for (uint64_t seed = 1; seed <= 3 && pass; ++seed) {
        const LightJacobian jac = random_jacobian(16, 5, seed);
        Image ref(16, 1);
        Pcg32 rng(mix64(seed), 77);
        for (int p = 0; p < 16; ++p) {
            ref.set(p, 0, {rng.next_double(), rng.next_double(), rng.next_double()});
        }
        ObjectiveConfig cfg;
        cfg.alpha = 0.03;
        cfg.beta = 5.0;
        cfg.cauchy_scale = 0.05;
        LambdaVector lambda(15);
        for (double& v : lambda) v = 0.1 + rng.next_double();

        LambdaVector grad;
        objective_and_gradient({jac}, {ref}, lambda, cfg, &grad);
        const double h = 1e-6;
        for (size_t i = 0; i < lambda.size(); ++i) {
            LambdaVector plus = lambda, minus = lambda;
            plus[i] += h;
            minus[i] -= h;
            const double fd = (objective_and_gradient({jac}, {ref}, plus, cfg, nullptr) -
                               objective_and_gradient({jac}, {ref}, minus, cfg, nullptr)) /
                              (2.0 * h);
            if (std::abs(grad[i] - fd) > 1e-5 * std::max(1.0, std::abs(fd))) {
                pass = false;
                detail = "objective gradient disagrees with finite differences";
                break;
            }
        }
    }

    // (c) Activation gradient vs finite differences.
    if (pass) {
        Pcg32 rng(15, 4);
        LambdaVector lambda(30);
        for (double& v : lambda) v = rng.next_double();
        const auto grad = activation_gradient(lambda, 0.8, 6.0);
        const double h = 1e-6;
        for (size_t i = 0; i < lambda.size(); ++i) {
            LambdaVector plus = lambda, minus = lambda;
            plus[i] += h;
            minus[i] -= h;
            const double fd = (activation_penalty(plus, 0.8, 6.0) -
                               activation_penalty(minus, 0.8, 6.0)) /
                              (2.0 * h);
            if (std::abs(grad[i] - fd) > 1e-4 * std::max(1e-8, std::abs(fd))) {
                pass = false;
                detail = "activation gradient disagrees with finite differences";
                break;
            }
        }
    }
    report(3, "jacobian and gradient correctness", pass, now_seconds() - t0, detail);
}

// ---------------------------------------------------------------------------
// 4. Inverse-crime round trip: one active light out of 86 at R=9.
void criterion_4() {
    const double t0 = now_seconds();

    const TriangleMesh mesh = make_box_scene();
    const Bvh accel(mesh);
    const CameraModel camera =
        CameraModel::look_at({0.0, -3.5, 2.5}, {0.0, 0.0, 0.3}, {0.0, 0.0, 1.0}, 45.0, 160, 120);

    EnvironmentMap truth = discretize_sphere(9);
    const int active = truth.nearest_direction(normalize(Vec3{0.35, -0.5, 0.8}));
    truth.radiance[active] = {1.2, 0.9, 0.7};

    TraceConfig truth_cfg;
    truth_cfg.samples_per_pixel = 256;
    truth_cfg.max_bounces = 2;
    truth_cfg.rng_seed = 424242;
    const Image reference =
        render(accel, truth, camera, truth_cfg, build_light_distribution(truth, 0.1));

    TraceConfig est_cfg;
    est_cfg.samples_per_pixel = 64;
    est_cfg.max_bounces = 2;
    est_cfg.rng_seed = 7;

    ObjectiveConfig obj;
    obj.cauchy_scale = 0.05;
    obj.alpha = 0.05;
    obj.beta = 10.0;
    obj.max_smc_iterations = 10;

    EnvironmentMap estimated = discretize_sphere(9);
    const EstimationReport rep =
        estimate_lights(accel, {reference}, {camera}, obj, est_cfg, estimated);

    bool pass = rep.rounds.size() <= 10;
    std::string detail;
    double worst_rel = 0.0;
    for (int c = 0; c < 3; ++c) {
        const double rel = std::abs(estimated.radiance[active][c] - truth.radiance[active][c]) /
                           truth.radiance[active][c];
        worst_rel = std::max(worst_rel, rel);
    }
    if (worst_rel > 0.05) pass = false;

    const double active_total = sum(estimated.radiance[active]);
    double worst_inactive = 0.0;
    for (int j = 0; j < estimated.light_count(); ++j) {
        if (j != active) worst_inactive = std::max(worst_inactive, sum(estimated.radiance[j]));
    }
    if (worst_inactive > 0.01 * active_total) pass = false;

    const double elapsed = now_seconds() - t0;
    if (elapsed >= 300.0) pass = false;
    char buf[192];
    std::snprintf(buf, sizeof(buf),
                  "active err %.1f%% (<=5%%), worst inactive %.2f%% of active (<=1%%), %zu rounds",
                  worst_rel * 100.0, 100.0 * worst_inactive / std::max(active_total, 1e-12),
                  rep.rounds.size());
    report(4, "inverse-crime round-trip recovery", pass, elapsed, buf);
}

// ---------------------------------------------------------------------------
// 5. Cross-model recovery from a spherical area light.
void criterion_5() {
    const double t0 = now_seconds();

    const TriangleMesh mesh = make_box_scene();
    const Bvh accel(mesh);
    // Two views constrain light elevation and decorrelate estimator noise.
    const std::vector<CameraModel> cameras = {
        CameraModel::look_at({0.0, -3.5, 2.5}, {0.0, 0.0, 0.3}, {0.0, 0.0, 1.0}, 45.0, 160, 120),
        CameraModel::look_at({3.2, 1.2, 2.2}, {0.0, 0.0, 0.3}, {0.0, 0.0, 1.0}, 45.0, 160, 120)};

    // The light sits far enough away to be effectively directional; a
    // near-field source puts a shading gradient across the floor that the
    // at-infinity light model cannot represent.
    const Vec3 bearing = normalize(Vec3{0.5, -0.4, 0.75});
    SphereLight light;
    light.center = bearing * 200.0;
    light.radius = 20.0;
    light.radiance = {70.0, 60.0, 50.0};
    std::vector<Image> references;
    for (size_t v = 0; v < cameras.size(); ++v) {
        references.push_back(render_sphere_light(accel, cameras[v], light, 512, 2, 13579 + v));
    }
    const Image& reference = references[0];

    TraceConfig est_cfg;
    est_cfg.samples_per_pixel = 256;
    est_cfg.env_samples_per_vertex = 4;
    est_cfg.max_bounces = 2;
    est_cfg.rng_seed = 11;

    ObjectiveConfig obj;
    // The Cauchy scale is matched to the data magnitude (mean intensity
    // ~0.25) so the bulk of the image stays in the quadratic regime.
    obj.cauchy_scale = 0.3;
    obj.alpha = 0.3;
    obj.beta = 10.0;
    obj.max_smc_iterations = 6;
    obj.max_gd_iterations = 1000;

    EnvironmentMap estimated = discretize_sphere(9);
    estimate_lights(accel, references, cameras, obj, est_cfg, estimated);

    // Angular concentration of the recovered mass.
    const double cos30 = std::cos(30.0 * kPi / 180.0);
    double mass_near = 0.0, mass_total = 0.0;
    for (int j = 0; j < estimated.light_count(); ++j) {
        const double m = sum(estimated.radiance[j]);
        mass_total += m;
        if (dot(estimated.directions[j], bearing) >= cos30) mass_near += m;
    }
    const double fraction = mass_total > 0.0 ? mass_near / mass_total : 0.0;

    // Photometric agreement of the re-render.
    TraceConfig rerender_cfg = est_cfg;
    rerender_cfg.samples_per_pixel = 512;
    rerender_cfg.rng_seed = 2222;
    const Image rerender = render(accel, estimated, cameras[0], rerender_cfg,
                                  build_light_distribution(estimated, 0.1));
    double sq_sum = 0.0, ref_sum = 0.0;
    size_t count = 0;
    for (int y = 0; y < reference.height; ++y) {
        for (int x = 0; x < reference.width; ++x) {
            if (!reference.valid(x, y) || !rerender.valid(x, y)) continue;
            const Vec3 r = reference.at(x, y) - rerender.at(x, y);
            const Vec3 v = reference.at(x, y);
            for (int c = 0; c < 3; ++c) {
                sq_sum += r[c] * r[c];
                ref_sum += v[c];
            }
            count += 3;
        }
    }
    const double rmse = std::sqrt(sq_sum / count);
    const double ref_mean = ref_sum / count;

    const double elapsed = now_seconds() - t0;
    const bool pass = fraction >= 0.80 && rmse <= 0.10 * ref_mean && elapsed < 900.0;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "%.0f%% of mass within 30 deg (>=80%%), RMSE %.4f vs 10%% of mean %.4f",
                  fraction * 100.0, rmse, ref_mean);
    report(5, "cross-model spherical-light recovery", pass, elapsed, buf);
}

// ---------------------------------------------------------------------------
// 6. Structural properties.
void criterion_6() {
    const double t0 = now_seconds();
    bool pass = true;
    std::string detail = "nonneg, monotone descent, dead-light zeroing, determinism, variance";

    // Nonnegativity after every update + monotone objective.
    {
        const LightJacobian jac = random_jacobian(16, 4, 99);
        Image ref(16, 1);
        Pcg32 rng(1, 1);
        for (int p = 0; p < 16; ++p) {
            ref.set(p, 0, {rng.next_double(), rng.next_double(), rng.next_double()});
        }
        ObjectiveConfig cfg;
        cfg.alpha = 0.02;
        cfg.max_gd_iterations = 1;
        LambdaVector lambda(12, 1e-3);
        double prev = 1e300;
        for (int step = 0; step < 40 && pass; ++step) {
            const GdStats stats = gradient_descent({jac}, {ref}, lambda, cfg);
            for (double v : lambda) {
                if (v < 0.0) {
                    pass = false;
                    detail = "negative lambda after an update";
                }
            }
            if (stats.final_objective > prev + 1e-12) {
                pass = false;
                detail = "objective increased on an accepted step";
            }
            prev = stats.final_objective;
        }
    }

    // All-zero-Jacobian light pinned exactly at 0.
    if (pass) {
        LightJacobian jac(4, 2);
        Pcg32 rng(5, 3);
        for (int p = 0; p < 4; ++p) {
            jac.set_covered(p);
            for (int c = 0; c < 3; ++c) jac.add(p, 0, c, 0.4 + 0.2 * rng.next_double());
        }
        Image ref(4, 1);
        for (int p = 0; p < 4; ++p) ref.set(p, 0, {0.3, 0.3, 0.3});
        ObjectiveConfig cfg;
        cfg.alpha = 0.01;
        cfg.beta = 10.0;
        cfg.cauchy_scale = 1.0;
        LambdaVector lambda(6, 1e-3);
        gradient_descent({jac}, {ref}, lambda, cfg);
        if (lambda[3] != 0.0 || lambda[4] != 0.0 || lambda[5] != 0.0) {
            pass = false;
            detail = "unreachable light did not end at exactly zero";
        }
    }

    // Bitwise determinism across thread counts.
    if (pass) {
        const TriangleMesh mesh = make_box_scene();
        const Bvh accel(mesh);
        const CameraModel camera = CameraModel::look_at({0.0, -3.0, 2.0}, {0.0, 0.0, 0.3},
                                                        {0.0, 0.0, 1.0}, 45.0, 48, 36);
        EnvironmentMap env = discretize_sphere(9);
        env.radiance[10] = {1.0, 0.8, 0.6};
        const auto dist = build_light_distribution(env, 0.1);
        TraceConfig cfg;
        cfg.samples_per_pixel = 16;
        cfg.max_bounces = 2;
        cfg.rng_seed = 77;

        cfg.threads = 1;
        const LightJacobian base = trace_jacobian(accel, env, camera, cfg, dist);
        for (int threads : {3, 8}) {
            cfg.threads = threads;
            const LightJacobian other = trace_jacobian(accel, env, camera, cfg, dist);
            if (other.data() != base.data()) {
                pass = false;
                detail = "jacobian differs at " + std::to_string(threads) + " threads";
                break;
            }
        }
    }

    // Importance sampling beats uniform sampling in variance on the
    // one-active-light scene over 16 seeds.
    if (pass) {
        const TriangleMesh mesh = make_box_scene();
        const Bvh accel(mesh);
        const CameraModel camera = CameraModel::look_at({0.0, -3.0, 2.0}, {0.0, 0.0, 0.3},
                                                        {0.0, 0.0, 1.0}, 45.0, 32, 24);
        EnvironmentMap env = discretize_sphere(9);
        const int active = env.nearest_direction(normalize(Vec3{0.35, -0.5, 0.8}));
        env.radiance[active] = {1.0, 1.0, 1.0};
        const auto importance = build_light_distribution(env, 0.1);
        const auto uniform = build_light_distribution(env, 1.0);

        TraceConfig cfg;
        cfg.samples_per_pixel = 8;
        cfg.max_bounces = 1;

        auto mean_over_seeds = [&](const LightSampleDistribution& dist, double* variance) {
            std::vector<double> means;
            for (uint64_t seed = 0; seed < 16; ++seed) {
                cfg.rng_seed = 1000 + seed;
                const LightJacobian jac = trace_jacobian(accel, env, camera, cfg, dist);
                means.push_back(
                    apply_jacobian(jac, env, camera.width, camera.height).mean_intensity_masked());
            }
            double mu = 0.0;
            for (double m : means) mu += m;
            mu /= means.size();
            double var = 0.0;
            for (double m : means) var += (m - mu) * (m - mu);
            *variance = var / (means.size() - 1);
            return mu;
        };

        double var_importance = 0.0, var_uniform = 0.0;
        mean_over_seeds(importance, &var_importance);
        mean_over_seeds(uniform, &var_uniform);
        if (!(var_importance < var_uniform)) {
            pass = false;
            char buf[96];
            std::snprintf(buf, sizeof(buf), "importance var %.3e !< uniform var %.3e",
                          var_importance, var_uniform);
            detail = buf;
        }
    }
    report(6, "structural properties", pass, now_seconds() - t0, detail);
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    if (g_failures == 0) {
        std::printf("acceptance: all 6 criteria passed\n");
        return 0;
    }
    std::printf("acceptance: %d criterion(s) failed\n", g_failures);
    return 1;
}
