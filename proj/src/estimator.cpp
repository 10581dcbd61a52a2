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

#include "depca/estimator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/LU>
#include <Eigen/QR>

#include "depca/errors.hpp"

namespace depca::estimator
{
namespace
{

// E[log cosh Z] for standard normal Z; the floor of the ICA objective on
// whitened Gaussian data (unit-variance Laplace data sit around 0.3382).
constexpr double kGaussianLogCoshMean = 0.3745672074914380;
constexpr double kGaussianGapPerDim = 0.015;

Eigen::MatrixXd normalize_rows(Eigen::MatrixXd W)
{
    for (int i = 0; i < W.rows(); ++i)
    {
        double n = W.row(i).norm();
        if (!(n > 0.0))
        {
            throw numerical_error("estimator: zero row encountered during renormalization");
        }
        W.row(i) /= n;
    }
    return W;
}

void warn_if_not_white(const Eigen::MatrixXd& X)
{
    Eigen::RowVectorXd mean = X.colwise().mean();
    Eigen::MatrixXd centered = X.rowwise() - mean;
    Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(X.rows());
    double dev = (cov - Eigen::MatrixXd::Identity(X.cols(), X.cols())).cwiseAbs().maxCoeff();
    if (dev > 0.05)
    {
        warn("estimator: data do not look whitened (covariance deviates from I by " +
             std::to_string(dev) + ")");
    }
}

Eigen::MatrixXd random_orthogonal(int d, Rng& rng)
{
    Eigen::MatrixXd G(d, d);
    for (int i = 0; i < d; ++i)
    {
        for (int j = 0; j < d; ++j)
        {
            G(i, j) = rng.normal();
        }
    }
    return Eigen::HouseholderQR<Eigen::MatrixXd>(G).householderQ();
}

Eigen::MatrixXd ica_gradient(const Eigen::MatrixXd& X, const Eigen::MatrixXd& W)
{
    const Eigen::MatrixXd Y = X * W.transpose();
    Eigen::MatrixXd grad = Y.array().tanh().matrix().transpose() * X / static_cast<double>(X.rows());
    grad -= W.inverse().transpose();
    return grad;
}

// Run fn(0..n-1) on up to `threads` workers; restarts are independent, so
// scheduling cannot change any result.
void run_indexed(int n, int threads, const std::function<void(int)>& fn)
{
    threads = std::max(1, std::min(threads, n));
    if (threads == 1)
    {
        for (int i = 0; i < n; ++i)
        {
            fn(i);
        }
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mu;
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w)
    {
        pool.emplace_back(
            [&]()
            {
                for (;;)
                {
                    int i = next.fetch_add(1);
                    if (i >= n)
                    {
                        return;
                    }
                    try
                    {
                        fn(i);
                    }
                    catch (...)
                    {
                        std::lock_guard<std::mutex> lock(error_mu);
                        if (!first_error)
                        {
                            first_error = std::current_exception();
                        }
                    }
                }
            });
    }
    for (auto& t : pool)
    {
        t.join();
    }
    if (first_error)
    {
        std::rethrow_exception(first_error);
    }
}

struct IcaRun
{
    Eigen::MatrixXd W;
    double objective = std::numeric_limits<double>::infinity();
    bool ok = false;
};

IcaRun ica_descent(const Eigen::MatrixXd& X, const EstimatorOptions& opts, Rng rng)
{
    const int d = static_cast<int>(X.cols());
    IcaRun run;
    Eigen::MatrixXd W = random_orthogonal(d, rng);
    scorematch::UnmixingMatrix U{W};
    double J = ica_objective(X, U);
    double step = opts.initial_step;
    for (int it = 0; it < opts.ica_max_iters && std::isfinite(J); ++it)
    {
        const Eigen::MatrixXd grad = ica_gradient(X, W);
        auto at_step = [&](double s) -> double
        {
            scorematch::UnmixingMatrix cand{normalize_rows(W - s * grad)};
            return ica_objective(X, cand);
        };
        StepChoice choice = adaptive_step(step, J, at_step);
        if (!choice.improved)
        {
            break;
        }
        double rel = (J - choice.objective) / std::max(std::abs(J), 1e-12);
        W = normalize_rows(W - choice.step * grad);
        J = choice.objective;
        step = choice.step;
        if (rel < opts.ica_tol)
        {
            break;
        }
    }
    if (std::isfinite(J))
    {
        run.W = W;
        run.objective = J;
        run.ok = true;
    }
    return run;
}

struct AlternationRun
{
    Eigen::MatrixXd W;
    Eigen::VectorXd m;
    std::vector<double> trace;
    double final_objective = std::numeric_limits<double>::infinity();
    bool converged = false;
    bool ok = false;
};

// Uniform subsample without replacement (partial Fisher-Yates).
void subsample_rows(const Eigen::MatrixXd& X, long size, Rng& rng, Eigen::MatrixXd& batch)
{
    const long T = X.rows();
    std::vector<long> idx(T);
    std::iota(idx.begin(), idx.end(), 0L);
    for (long i = 0; i < size; ++i)
    {
        long j = i + static_cast<long>(rng.uniform() * static_cast<double>(T - i));
        j = std::min(j, T - 1);
        std::swap(idx[i], idx[j]);
    }
    batch.resize(size, X.cols());
    for (long i = 0; i < size; ++i)
    {
        batch.row(i) = X.row(idx[i]);
    }
}

double quadratic_value(const scorematch::QuadraticForm& q, const Eigen::VectorXd& m, double lambda)
{
    return 0.5 * m.dot(q.H * m) + m.dot(q.b) + lambda * m.sum();
}

AlternationRun run_alternation(const Eigen::MatrixXd& X, const EstimatorOptions& opts, Rng rng)
{
    const int d = static_cast<int>(X.cols());
    const double lambda = opts.lambda_sparsity;
    const bool minibatch = opts.minibatch_size > 0 && opts.minibatch_size < X.rows();

    AlternationRun run;
    EstimatorOptions ica_opts = opts;
    ica_opts.restarts = 1;
    Rng ica_rng = rng.derive(0);
    IcaRun ica = ica_descent(X, ica_opts, ica_rng);
    if (!ica.ok)
    {
        return run;
    }
    Eigen::MatrixXd W = ica.W;

    Eigen::MatrixXd batch = X;
    Rng batch_rng = rng.derive(1);
    auto next_batch = [&]()
    {
        if (minibatch)
        {
            subsample_rows(X, opts.minibatch_size, batch_rng, batch);
        }
    };

    qpsolve::QPOptions qp_opts;
    qp_opts.kkt_tol = opts.qp_kkt_tol;

    next_batch();
    scorematch::QuadraticForm q = scorematch::assemble_quadratic(batch, {W});
    Eigen::VectorXd m = qpsolve::solve_dependency_qp(q, d, lambda, qp_opts).m;
    double J = quadratic_value(q, m, lambda);
    run.trace.push_back(J);

    double step = opts.initial_step;
    for (int outer = 0; outer < opts.max_outer_iters; ++outer)
    {
        next_batch();
        if (minibatch)
        {
            q = scorematch::assemble_quadratic(batch, {W});
            J = quadratic_value(q, m, lambda);
        }
        if (!std::isfinite(J))
        {
            throw numerical_error("estimate: objective became non-finite");
        }

        // Step 1: one adaptive gradient step on W under unit-norm rows.
        density::DependencyMatrix M = density::DependencyMatrix::from_upper(m, d);
        const Eigen::MatrixXd grad = scorematch::grad_W(batch, {W}, M);
        auto at_step = [&](double s) -> double
        {
            scorematch::UnmixingMatrix cand{normalize_rows(W - s * grad)};
            return scorematch::objective_J(batch, cand, M) + lambda * m.sum();
        };
        // Line-search failure leaves W unchanged; the QP step then returns
        // the same m and the relative-change test ends the loop.
        StepChoice choice = adaptive_step(step, J, at_step);
        if (choice.improved)
        {
            W = normalize_rows(W - choice.step * grad);
            step = choice.step;
        }

        // Step 2: exact QP solve for m at the new W.
        q = scorematch::assemble_quadratic(batch, {W});
        m = qpsolve::solve_dependency_qp(q, d, lambda, qp_opts).m;
        double J_new = quadratic_value(q, m, lambda);
        run.trace.push_back(J_new);

        double rel = std::abs(J - J_new) / std::max(std::abs(J), 1e-12);
        J = J_new;
        // In minibatch mode the relative change is noisy across batches;
        // max_outer_iters is the practical stopping rule there.
        if (rel < opts.convergence_tol)
        {
            run.converged = true;
            break;
        }
    }

    run.W = W;
    run.m = m;
    // Restart comparison is always on the full data.
    if (minibatch)
    {
        scorematch::QuadraticForm q_full = scorematch::assemble_quadratic(X, {W});
        run.final_objective = quadratic_value(q_full, m, lambda);
    }
    else
    {
        run.final_objective = J;
    }
    run.ok = std::isfinite(run.final_objective);
    return run;
}

}  // namespace

void EstimatorOptions::validate() const
{
    if (restarts < 1)
    {
        throw parameter_error("EstimatorOptions: restarts must be >= 1");
    }
    if (!(convergence_tol >= 0.0) || !(ica_tol > 0.0) || !(qp_kkt_tol > 0.0))
    {
        throw parameter_error("EstimatorOptions: tolerances must be positive");
    }
    if (!(initial_step > 0.0))
    {
        throw parameter_error("EstimatorOptions: initial_step must be positive");
    }
    if (max_outer_iters < 0 || ica_max_iters < 0)
    {
        throw parameter_error("EstimatorOptions: iteration caps must be non-negative");
    }
    if (minibatch_size < 0)
    {
        throw parameter_error("EstimatorOptions: minibatch_size must be non-negative");
    }
    if (lambda_sparsity < 0.0)
    {
        throw parameter_error("EstimatorOptions: lambda_sparsity must be non-negative");
    }
}

StepChoice adaptive_step(double prev_step, double current_objective,
                         const std::function<double(double)>& objective_at_step)
{
    if (!(prev_step > 0.0))
    {
        throw parameter_error("adaptive_step: step must be positive");
    }
    const double candidates[3] = {2.0 * prev_step, prev_step, 0.5 * prev_step};
    StepChoice best;
    best.objective = std::numeric_limits<double>::infinity();
    for (double s : candidates)
    {
        double obj = objective_at_step(s);
        if (obj < best.objective)
        {
            best.objective = obj;
            best.step = s;
        }
    }
    if (best.objective < current_objective)
    {
        best.improved = true;
        return best;
    }
    double s = 0.5 * prev_step;
    for (int k = 0; k < 20; ++k)
    {
        s *= 0.5;
        double obj = objective_at_step(s);
        if (obj < current_objective)
        {
            return {s, obj, true};
        }
    }
    return {prev_step, current_objective, false};
}

double ica_objective(const Eigen::MatrixXd& X, const scorematch::UnmixingMatrix& W)
{
    const Eigen::MatrixXd Y = X * W.w.transpose();
    // Overflow-safe log cosh, vectorized.
    Eigen::ArrayXXd a = Y.array().abs();
    double sum = (a - M_LN2 + (-2.0 * a).exp().log1p()).sum() / static_cast<double>(X.rows());
    double log_det = std::log(std::abs(W.w.determinant()));
    if (!std::isfinite(log_det))
    {
        return std::numeric_limits<double>::infinity();
    }
    return sum - log_det;
}

IcaResult ica_init(const Eigen::MatrixXd& X, const EstimatorOptions& opts, Rng& rng)
{
    opts.validate();
    if (X.rows() < X.cols())
    {
        throw dimension_error("ica_init: need at least d samples");
    }
    warn_if_not_white(X);
    const int d = static_cast<int>(X.cols());

    std::vector<IcaRun> runs(opts.restarts);
    run_indexed(opts.restarts, opts.threads,
                [&](int r) { runs[r] = ica_descent(X, opts, rng.derive(static_cast<std::uint64_t>(r))); });

    int best = -1;
    for (int r = 0; r < opts.restarts; ++r)
    {
        if (runs[r].ok && (best < 0 || runs[r].objective < runs[best].objective))
        {
            best = r;
        }
    }
    if (best < 0)
    {
        throw numerical_error("ica_init: all restarts diverged");
    }

    IcaResult result;
    result.W.w = runs[best].W;
    result.objective = runs[best].objective;
    // On Gaussian data the objective cannot drop below the rotation-
    // invariant floor d * E[log cosh Z]; flag runs that get stuck there.
    double gap = d * kGaussianLogCoshMean - result.objective;
    result.gaussian_warning = gap < kGaussianGapPerDim * d;
    if (result.gaussian_warning)
    {
        warn("ica_init: objective close to the Gaussian floor; rotation not identifiable");
    }
    return result;
}

EstimationResult estimate(const Eigen::MatrixXd& X, const EstimatorOptions& opts, Rng& rng)
{
    opts.validate();
    const int d = static_cast<int>(X.cols());
    if (X.rows() < d)
    {
        throw dimension_error("estimate: need at least d samples");
    }
    warn_if_not_white(X);

    std::vector<AlternationRun> runs(opts.restarts);
    run_indexed(opts.restarts, opts.threads,
                [&](int r)
                { runs[r] = run_alternation(X, opts, rng.derive(1000 + static_cast<std::uint64_t>(r))); });

    int best = -1;
    for (int r = 0; r < opts.restarts; ++r)
    {
        if (runs[r].ok && (best < 0 || runs[r].final_objective < runs[best].final_objective))
        {
            best = r;
        }
    }
    if (best < 0)
    {
        throw numerical_error("estimate: all restarts failed");
    }

    EstimationResult result;
    result.W_hat.w = runs[best].W;
    result.M_hat = density::DependencyMatrix::from_upper(runs[best].m, d);
    result.objective_trace = runs[best].trace;
    result.restart_objectives.reserve(opts.restarts);
    for (const auto& r : runs)
    {
        result.restart_objectives.push_back(r.final_objective);
    }
    result.converged = runs[best].converged;
    return result;
}

}  // namespace depca::estimator
