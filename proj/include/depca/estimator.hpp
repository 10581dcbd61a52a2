/*
 * Copyright 2026 The depca authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef DEPCA_ESTIMATOR_HPP_
#define DEPCA_ESTIMATOR_HPP_

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "depca/density.hpp"
#include "depca/qpsolve.hpp"
#include "depca/rng.hpp"
#include "depca/scorematch.hpp"

namespace depca::estimator
{

struct EstimatorOptions
{
    int restarts = 10;
    int max_outer_iters = 500;
    double convergence_tol = 1e-6;   // relative objective change per outer iteration
    double initial_step = 0.1;
    long minibatch_size = 0;         // 0 = full batch
    double lambda_sparsity = 0.0;
    std::uint64_t seed = 0;
    int threads = 1;                 // restart-level parallelism
    int ica_max_iters = 400;
    double ica_tol = 1e-7;
    double qp_kkt_tol = 1e-6;

    void validate() const;
};

struct IcaResult
{
    scorematch::UnmixingMatrix W;
    double objective = 0.0;
    /// Set when the data look Gaussian, in which case the rotation is not
    /// identifiable and the returned W is arbitrary.
    bool gaussian_warning = false;
};

struct EstimationResult
{
    scorematch::UnmixingMatrix W_hat;
    density::DependencyMatrix M_hat;
    std::vector<double> objective_trace;     // J after each outer iteration, best restart
    std::vector<double> restart_objectives;  // final J per restart
    bool converged = false;
};

/// Outcome of one adaptive step-size probe.
struct StepChoice
{
    double step = 0.0;
    double objective = 0.0;
    bool improved = false;  // line-search failure when false
};

/// Try steps {2 mu, mu, mu/2} through `objective_at_step` and keep the best;
/// when none improves on `current_objective`, halve up to 20 times. Failure
/// to improve is reported, not thrown.
StepChoice adaptive_step(double prev_step, double current_objective,
                         const std::function<double(double)>& objective_at_step);

/// Maximum-likelihood ICA with unit-norm rows on whitened data: gradient
/// descent on J0(W) = (1/T) sum_t sum_i G(w_i^T x_t) - log |det W|, best
/// of `restarts` random orthogonal initializations.
IcaResult ica_init(const Eigen::MatrixXd& X, const EstimatorOptions& opts, Rng& rng);

/// ICA objective J0 (exposed for baselines and tests).
double ica_objective(const Eigen::MatrixXd& X, const scorematch::UnmixingMatrix& W);

/// Full alternating estimation: ICA initialization, then per outer
/// iteration one adaptive gradient step on W (rows renormalized) followed
/// by a QP solve for m; best of `restarts` independent runs.
EstimationResult estimate(const Eigen::MatrixXd& X, const EstimatorOptions& opts, Rng& rng);

}  // namespace depca::estimator

#endif  // DEPCA_ESTIMATOR_HPP_
