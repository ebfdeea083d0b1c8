// SPDX-License-Identifier: Apache-2.0
#include "lse/estimator.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "lse/rng.hpp"

namespace lse {

void ObjectiveConfig::validate() const {
    if (!(cauchy_scale > 0.0)) throw std::invalid_argument("objective: cauchy_scale must be > 0");
    if (alpha < 0.0 || beta < 0.0) throw std::invalid_argument("objective: alpha, beta must be >= 0");
    if (!(lambda_init > 0.0)) throw std::invalid_argument("objective: lambda_init must be > 0");
    if (!(step0 > 0.0)) throw std::invalid_argument("objective: step0 must be > 0");
    if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0)) {
        throw std::invalid_argument("objective: backtrack_factor must be in (0,1)");
    }
    if (!(sufficient_decrease > 0.0 && sufficient_decrease < 1.0)) {
        throw std::invalid_argument("objective: sufficient_decrease must be in (0,1)");
    }
    if (!(grad_tol_rel > 0.0)) throw std::invalid_argument("objective: grad_tol_rel must be > 0");
    if (!(smc_delta_tol > 0.0)) throw std::invalid_argument("objective: smc_delta_tol must be > 0");
    if (max_gd_iterations < 1 || max_smc_iterations < 1) {
        throw std::invalid_argument("objective: iteration caps must be >= 1");
    }
}

namespace {

double cauchy_loss(double r, double c) {
    const double z = r / c;
    return 0.5 * c * c * std::log1p(z * z);
}

/// Influence function, d/dr of the Cauchy loss.
double cauchy_psi(double r, double c) {
    const double z = r / c;
    return r / (1.0 + z * z);
}

double projected_grad_inf_norm(const LambdaVector& lambda, const LambdaVector& grad) {
    double norm = 0.0;
    for (size_t i = 0; i < lambda.size(); ++i) {
        if (lambda[i] == 0.0 && grad[i] > 0.0) continue;  // active bound, outward gradient
        norm = std::max(norm, std::abs(grad[i]));
    }
    return norm;
}

double projected_grad_sq_norm(const LambdaVector& lambda, const LambdaVector& grad) {
    double norm = 0.0;
    for (size_t i = 0; i < lambda.size(); ++i) {
        if (lambda[i] == 0.0 && grad[i] > 0.0) continue;
        norm += grad[i] * grad[i];
    }
    return norm;
}

}  // namespace

double photometric_error(const std::vector<Image>& references, const std::vector<Image>& renders,
                         double cauchy_scale, std::vector<std::vector<Vec3>>* residuals) {
    if (references.size() != renders.size()) {
        throw std::invalid_argument("photometric_error: view count mismatch");
    }
    if (residuals) residuals->assign(references.size(), {});

    double error = 0.0;
    size_t valid_pixels = 0;
    for (size_t v = 0; v < references.size(); ++v) {
        const Image& ref = references[v];
        const Image& render = renders[v];
        if (ref.width != render.width || ref.height != render.height) {
            throw std::invalid_argument("photometric_error: image dimension mismatch");
        }
        if (residuals) (*residuals)[v].assign(ref.pixel_count(), Vec3{});
        for (int y = 0; y < ref.height; ++y) {
            for (int x = 0; x < ref.width; ++x) {
                if (!ref.valid(x, y) || !render.valid(x, y)) continue;
                ++valid_pixels;
                const Vec3 r = ref.at(x, y) - render.at(x, y);
                if (residuals) (*residuals)[v][static_cast<size_t>(y) * ref.width + x] = r;
                for (int c = 0; c < 3; ++c) error += cauchy_loss(r[c], cauchy_scale);
            }
        }
    }
    if (valid_pixels == 0) {
        throw std::runtime_error("photometric_error: no valid pixels (degenerate problem)");
    }
    return error;
}

double activation_penalty(const LambdaVector& lambda, double alpha, double beta) {
    double phi = 0.0;
    for (size_t j = 0; j * 3 < lambda.size(); ++j) {
        const double total = lambda[3 * j] + lambda[3 * j + 1] + lambda[3 * j + 2];
        phi += alpha * std::log1p(beta * total);
    }
    return phi;
}

LambdaVector activation_gradient(const LambdaVector& lambda, double alpha, double beta) {
    LambdaVector grad(lambda.size(), 0.0);
    for (size_t j = 0; j * 3 < lambda.size(); ++j) {
        const double total = lambda[3 * j] + lambda[3 * j + 1] + lambda[3 * j + 2];
        const double g = alpha * beta / (1.0 + beta * total);
        grad[3 * j] = grad[3 * j + 1] = grad[3 * j + 2] = g;
    }
    return grad;
}

double objective_and_gradient(const std::vector<LightJacobian>& jacobians,
                              const std::vector<Image>& references, const LambdaVector& lambda,
                              const ObjectiveConfig& cfg, LambdaVector* grad) {
    if (jacobians.size() != references.size()) {
        throw std::invalid_argument("objective: per-view Jacobian count mismatch");
    }
    if (grad) *grad = activation_gradient(lambda, cfg.alpha, cfg.beta);

    double error = 0.0;
    size_t valid_pixels = 0;
    for (size_t v = 0; v < references.size(); ++v) {
        const Image& ref = references[v];
        const LightJacobian& jac = jacobians[v];
        for (int p = 0; p < jac.pixel_count(); ++p) {
            const int x = p % ref.width;
            const int y = p / ref.width;
            if (!ref.valid(x, y) || !jac.covered(p)) continue;
            ++valid_pixels;
            // Predicted pixel J*lambda, kept in double to stay smooth in lambda.
            Vec3 predicted{};
            for (int j = 0; j < jac.light_count(); ++j) {
                for (int c = 0; c < 3; ++c) {
                    predicted[c] += jac.coeff(p, j, c) * lambda[3 * static_cast<size_t>(j) + c];
                }
            }
            const Vec3 r = ref.at(x, y) - predicted;
            for (int c = 0; c < 3; ++c) {
                error += cauchy_loss(r[c], cfg.cauchy_scale);
                if (grad) {
                    const double psi = cauchy_psi(r[c], cfg.cauchy_scale);
                    for (int j = 0; j < jac.light_count(); ++j) {
                        (*grad)[3 * static_cast<size_t>(j) + c] -= psi * jac.coeff(p, j, c);
                    }
                }
            }
        }
    }
    if (valid_pixels == 0) {
        throw std::runtime_error("objective: no valid pixels (degenerate problem)");
    }
    const double total = error + activation_penalty(lambda, cfg.alpha, cfg.beta);
    if (!std::isfinite(total)) throw std::runtime_error("objective: non-finite value");
    return total;
}

GdStats gradient_descent(const std::vector<LightJacobian>& jacobians,
                         const std::vector<Image>& references, LambdaVector& lambda,
                         const ObjectiveConfig& cfg) {
    cfg.validate();

    LambdaVector grad;
    double objective = objective_and_gradient(jacobians, references, lambda, cfg, &grad);
    const double grad_tol = cfg.grad_tol_rel * projected_grad_inf_norm(lambda, grad);

    GdStats stats;
    for (int iter = 0; iter < cfg.max_gd_iterations; ++iter) {
        const double pg_inf = projected_grad_inf_norm(lambda, grad);
        if (pg_inf <= grad_tol) {
            stats.converged = true;
            break;
        }
        const double pg_sq = projected_grad_sq_norm(lambda, grad);

        double step = cfg.step0;
        LambdaVector candidate(lambda.size());
        double candidate_objective = 0.0;
        bool accepted = false;
        while (step >= 1e-12 * cfg.step0) {
            for (size_t i = 0; i < lambda.size(); ++i) {
                candidate[i] = std::max(0.0, lambda[i] - step * grad[i]);
            }
            candidate_objective =
                objective_and_gradient(jacobians, references, candidate, cfg, nullptr);
            if (candidate_objective <= objective - cfg.sufficient_decrease * step * pg_sq) {
                accepted = true;
                break;
            }
            step *= cfg.backtrack_factor;
        }
        if (!accepted) {
            stats.backtrack_underflow = true;
            break;
        }
        // Armijo guarantees monotone descent on accepted steps.
        if (candidate_objective > objective) {
            throw std::logic_error("gradient_descent: accepted step increased the objective");
        }
        lambda = candidate;
        objective = objective_and_gradient(jacobians, references, lambda, cfg, &grad);
        ++stats.iterations;
    }
    stats.final_objective = objective;
    stats.final_grad_norm = projected_grad_inf_norm(lambda, grad);
    if (!stats.converged) stats.converged = stats.final_grad_norm <= grad_tol;
    return stats;
}

std::string EstimationReport::to_json() const {
    nlohmann::json doc;
    doc["converged"] = converged;
    auto& rounds_json = doc["rounds"] = nlohmann::json::array();
    for (const SmcRound& round : rounds) {
        rounds_json.push_back({{"E_p", round.photometric_error},
                               {"Phi", round.activation_penalty},
                               {"E", round.objective},
                               {"gd_iters", round.gd_iterations},
                               {"lambda_delta", round.lambda_delta},
                               {"seconds", round.seconds}});
    }
    return doc.dump(2);
}

EstimationReport estimate_lights(const Bvh& accel, const std::vector<Image>& references,
                                 const std::vector<CameraModel>& cameras,
                                 const ObjectiveConfig& cfg, const TraceConfig& trace_cfg,
                                 EnvironmentMap& env) {
    cfg.validate();
    trace_cfg.validate();
    if (references.empty() || references.size() != cameras.size()) {
        throw std::invalid_argument("estimate: need >= 1 reference with matching cameras");
    }

    const int n_lights = env.light_count();
    LambdaVector lambda(static_cast<size_t>(n_lights) * 3, cfg.lambda_init);
    for (int j = 0; j < n_lights; ++j) env.radiance[j] = Vec3(cfg.lambda_init);

    EstimationReport report;
    LambdaVector previous = lambda;
    for (int round = 0; round < cfg.max_smc_iterations; ++round) {
        const auto t0 = std::chrono::steady_clock::now();

        const LightSampleDistribution dist = build_light_distribution(env, trace_cfg.floor_weight);
        std::vector<LightJacobian> jacobians;
        jacobians.reserve(references.size());
        for (size_t v = 0; v < references.size(); ++v) {
            TraceConfig view_cfg = trace_cfg;
            view_cfg.rng_seed =
                mix64(trace_cfg.rng_seed ^ mix64(static_cast<uint64_t>(round) * 131 + v));
            jacobians.push_back(trace_jacobian(accel, env, cameras[v], view_cfg, dist));
        }

        const GdStats gd = gradient_descent(jacobians, references, lambda, cfg);

        for (int j = 0; j < n_lights; ++j) {
            env.radiance[j] = {lambda[3 * static_cast<size_t>(j)],
                               lambda[3 * static_cast<size_t>(j) + 1],
                               lambda[3 * static_cast<size_t>(j) + 2]};
        }

        double max_change = 0.0;
        double max_lambda = 0.0;
        for (size_t i = 0; i < lambda.size(); ++i) {
            max_change = std::max(max_change, std::abs(lambda[i] - previous[i]));
            max_lambda = std::max(max_lambda, std::abs(lambda[i]));
        }
        const double rel_change = max_change / std::max(max_lambda, 1e-12);
        previous = lambda;

        SmcRound entry;
        entry.objective = gd.final_objective;
        entry.activation_penalty = activation_penalty(lambda, cfg.alpha, cfg.beta);
        entry.photometric_error = entry.objective - entry.activation_penalty;
        entry.gd_iterations = gd.iterations;
        entry.lambda_delta = rel_change;
        entry.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        report.rounds.push_back(entry);

        if (round > 0 && rel_change <= cfg.smc_delta_tol) {
            report.converged = true;
            break;
        }
    }
    return report;
}

}  // namespace lse
