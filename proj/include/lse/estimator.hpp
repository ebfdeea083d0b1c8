// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lse/bvh.hpp"
#include "lse/camera.hpp"
#include "lse/env_light.hpp"
#include "lse/image.hpp"
#include "lse/path_tracer.hpp"

namespace lse {

struct ObjectiveConfig {
    double cauchy_scale = 0.05;     // c, normalized irradiance units
    double alpha = 0.0;             // activation weight; 0 disables the penalty
    double beta = 10.0;
    double lambda_init = 1e-3;      // "near zero" initialization
    double step0 = 1.0;
    double backtrack_factor = 0.5;  // tau
    double sufficient_decrease = 1e-4;  // Armijo c1
    double grad_tol_rel = 1e-6;     // stop at ||P grad||_inf <= rel * initial
    double smc_delta_tol = 1e-3;    // relative lambda change between rounds
    int max_gd_iterations = 200;
    int max_smc_iterations = 10;

    void validate() const;
};

/// Flattened lambda vector, 3 channels per light, always >= 0.
using LambdaVector = std::vector<double>;

struct GdStats {
    int iterations = 0;
    double final_objective = 0.0;
    double final_grad_norm = 0.0;
    bool converged = false;
    bool backtrack_underflow = false;
};

struct SmcRound {
    double photometric_error = 0.0;
    double activation_penalty = 0.0;
    double objective = 0.0;
    int gd_iterations = 0;
    double lambda_delta = 0.0;  // max-abs change vs previous round
    double seconds = 0.0;
};

struct EstimationReport {
    std::vector<SmcRound> rounds;
    bool converged = false;
    std::string to_json() const;
};

/// Cauchy-robust photometric error over all views:
/// E_p = sum (c^2/2) log(1 + (r/c)^2), r = reference - render, counting only
/// pixels valid in both the reference mask and the render coverage.
/// Residuals come back per view for gradient assembly.
/// Throws std::runtime_error when no valid pixel exists.
double photometric_error(const std::vector<Image>& references, const std::vector<Image>& renders,
                         double cauchy_scale, std::vector<std::vector<Vec3>>* residuals = nullptr);

/// Phi = sum_i alpha * log(1 + beta * sum_c lambda_ic).
double activation_penalty(const LambdaVector& lambda, double alpha, double beta);

/// d Phi_i / d lambda_ic = alpha*beta / (1 + beta * sum_c lambda_ic),
/// identical across the channels of light i.
LambdaVector activation_gradient(const LambdaVector& lambda, double alpha, double beta);

/// E = E_p + Phi and its gradient for fixed per-view Jacobians, with renders
/// formed as J * lambda. `grad` may be null to get the value only.
double objective_and_gradient(const std::vector<LightJacobian>& jacobians,
                              const std::vector<Image>& references, const LambdaVector& lambda,
                              const ObjectiveConfig& cfg, LambdaVector* grad);

/// Projected gradient descent with Armijo backtracking on the fixed-Jacobian
/// objective: lambda+ = max(0, lambda - s * grad). Accepted steps never
/// increase E; stops on the projected-gradient norm test or iteration cap.
GdStats gradient_descent(const std::vector<LightJacobian>& jacobians,
                         const std::vector<Image>& references, LambdaVector& lambda,
                         const ObjectiveConfig& cfg);

/// Full pipeline: initialize lambda near zero, then repeat
/// {build distribution from lambda, trace per-view Jacobians, run gradient
/// descent} until the max-abs relative lambda change drops below
/// smc_delta_tol or max_smc_iterations.
EstimationReport estimate_lights(const Bvh& accel, const std::vector<Image>& references,
                                 const std::vector<CameraModel>& cameras,
                                 const ObjectiveConfig& cfg, const TraceConfig& trace_cfg,
                                 EnvironmentMap& env);

}  // namespace lse
