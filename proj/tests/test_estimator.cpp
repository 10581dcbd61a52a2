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

#include <cmath>
#include <vector>

#include <doctest.h>

#include "depca/errors.hpp"
#include "depca/estimator.hpp"
#include "depca/eval.hpp"
#include "depca/genmodel.hpp"
#include "depca/preprocess.hpp"
#include "test_util.hpp"

using namespace depca;
using namespace depca::estimator;

namespace
{

Eigen::MatrixXd laplace_sources(long T, int d, Rng& rng)
{
    Eigen::MatrixXd S(T, d);
    for (long t = 0; t < T; ++t)
    {
        for (int j = 0; j < d; ++j)
        {
            double u = rng.uniform() - 0.5;
            S(t, j) = -std::copysign(std::log(1.0 - 2.0 * std::abs(u)), u);
        }
    }
    return S;
}

}  // namespace

TEST_SUITE("estimator")
{
    TEST_CASE("adaptive step picks the best candidate")
    {
        // Descent on f(s) = (s - 3)^2 from f = 9 at s = 0.
        auto objective = [](double s) { return (s - 3.0) * (s - 3.0); };
        StepChoice choice = adaptive_step(1.0, 9.0, objective);
        CHECK(choice.improved);
        CHECK(choice.step == 2.0);  // 2 mu is the best of {2, 1, 0.5}
        CHECK(choice.objective == doctest::Approx(1.0));
    }

    TEST_CASE("adaptive step halves into tiny steps when needed")
    {
        // Only very small steps improve: f increases beyond s = 1e-4.
        auto objective = [](double s) { return s < 1e-4 ? -s : 10.0 + s; };
        StepChoice choice = adaptive_step(1.0, 0.0, objective);
        CHECK(choice.improved);
        CHECK(choice.step < 1e-4);
    }

    TEST_CASE("adaptive step reports line-search failure on a flat objective")
    {
        int calls = 0;
        auto objective = [&](double) {
            ++calls;
            return 5.0;
        };
        StepChoice choice = adaptive_step(0.5, 5.0, objective);
        CHECK_FALSE(choice.improved);
        CHECK(choice.step == 0.5);
        CHECK(calls == 23);  // 3 candidates + 20 halvings
        CHECK_THROWS_AS(adaptive_step(0.0, 1.0, objective), parameter_error);
    }

    TEST_CASE("descent on a convex quadratic strictly decreases the objective")
    {
        double x = 10.0;
        double step = 1.0;
        double f = x * x;
        for (int it = 0; it < 50; ++it)
        {
            double grad = 2.0 * x;
            auto at_step = [&](double s)
            {
                double cand = x - s * grad;
                return cand * cand;
            };
            StepChoice choice = adaptive_step(step, f, at_step);
            if (!choice.improved)
            {
                break;
            }
            CHECK(choice.objective < f);
            x -= choice.step * grad;
            f = choice.objective;
            step = choice.step;
        }
        CHECK(f < 1e-10);
    }

    TEST_CASE("ica_init separates a two-source Laplace mixture")
    {
        Rng rng(81);
        const long T = 20000;
        Eigen::MatrixXd S = laplace_sources(T, 2, rng);
        Eigen::MatrixXd A(2, 2);
        A << 1.3, 0.4, -0.7, 0.9;
        Eigen::MatrixXd X = S * A.transpose();
        auto wh = preprocess::fit_whitening(X, 2);
        Eigen::MatrixXd Z = preprocess::apply_whitening(wh, X);

        EstimatorOptions opts;
        opts.restarts = 3;
        Rng seed_rng(5);
        IcaResult ica = ica_init(Z, opts, seed_rng);
        CHECK_FALSE(ica.gaussian_warning);
        CHECK((ica.W.w.rowwise().norm().array() - 1.0).abs().maxCoeff() < 1e-10);

        eval::PerformanceMatrix P = eval::performance_matrix(ica.W.w, A, &wh);
        CHECK(eval::amari_index(P) < 0.05);
    }

    TEST_CASE("ica_init flags Gaussian data as non-identifiable")
    {
        Rng rng(82);
        Eigen::MatrixXd Z = testutil::random_matrix(20000, 3, rng);
        auto wh = preprocess::fit_whitening(Z, 3);
        Eigen::MatrixXd Zw = preprocess::apply_whitening(wh, Z);
        EstimatorOptions opts;
        opts.restarts = 2;
        Rng seed_rng(6);
        IcaResult ica = ica_init(Zw, opts, seed_rng);
        CHECK(ica.gaussian_warning);
    }

    TEST_CASE("zero outer iterations return the initialization")
    {
        Rng rng(83);
        genmodel::GenerationSpec spec = genmodel::GenerationSpec::block_spec(4, 3000, 2);
        genmodel::Dataset ds = genmodel::generate_dataset(spec, rng);
        auto wh = preprocess::fit_whitening(ds.X, 4);
        Eigen::MatrixXd Z = preprocess::apply_whitening(wh, ds.X);

        EstimatorOptions opts;
        opts.restarts = 1;
        opts.max_outer_iters = 0;
        opts.convergence_tol = 0.0;
        Rng a(7);
        EstimationResult res = estimate(Z, opts, a);
        CHECK(res.objective_trace.size() == 1);
        CHECK_FALSE(res.converged);

        // m is the QP fit at the returned W.
        scorematch::QuadraticForm q = scorematch::assemble_quadratic(Z, res.W_hat);
        Eigen::VectorXd m_direct = qpsolve::solve_dependency_qp(q, 4, 0.0).m;
        CHECK((res.M_hat.upper_vector() - m_direct).cwiseAbs().maxCoeff() < 1e-12);
    }

    TEST_CASE("full-batch alternation has a non-increasing trace")
    {
        Rng rng(84);
        genmodel::GenerationSpec spec = genmodel::GenerationSpec::block_spec(5, 4000, 3);
        spec.scale_off = 1.0 / 3.0;
        genmodel::Dataset ds = genmodel::generate_dataset(spec, rng);
        auto wh = preprocess::fit_whitening(ds.X, 5);
        Eigen::MatrixXd Z = preprocess::apply_whitening(wh, ds.X);

        EstimatorOptions opts;
        opts.restarts = 2;
        opts.max_outer_iters = 40;
        Rng a(8);
        EstimationResult res = estimate(Z, opts, a);
        for (std::size_t i = 1; i < res.objective_trace.size(); ++i)
        {
            CHECK(res.objective_trace[i] <= res.objective_trace[i - 1] + 1e-12);
        }
        CHECK((res.W_hat.w.rowwise().norm().array() - 1.0).abs().maxCoeff() < 1e-10);
        CHECK_NOTHROW(res.M_hat.validate(true));
        CHECK(res.restart_objectives.size() == 2);
        double best = std::min(res.restart_objectives[0], res.restart_objectives[1]);
        CHECK(res.objective_trace.back() == doctest::Approx(best).epsilon(1e-12));
    }

    TEST_CASE("estimation is bit-reproducible, also with threads")
    {
        Rng rng(85);
        genmodel::GenerationSpec spec = genmodel::GenerationSpec::block_spec(4, 2000, 2);
        genmodel::Dataset ds = genmodel::generate_dataset(spec, rng);
        auto wh = preprocess::fit_whitening(ds.X, 4);
        Eigen::MatrixXd Z = preprocess::apply_whitening(wh, ds.X);

        EstimatorOptions opts;
        opts.restarts = 3;
        opts.max_outer_iters = 10;
        Rng a(9), b(9), c(9);
        EstimationResult r1 = estimate(Z, opts, a);
        EstimationResult r2 = estimate(Z, opts, b);
        opts.threads = 2;
        EstimationResult r3 = estimate(Z, opts, c);
        CHECK(r1.W_hat.w == r2.W_hat.w);
        CHECK(r1.M_hat.m == r2.M_hat.m);
        CHECK(r1.W_hat.w == r3.W_hat.w);
        CHECK(r1.M_hat.m == r3.M_hat.m);
    }

    TEST_CASE("minibatch mode runs and stays feasible")
    {
        Rng rng(86);
        genmodel::GenerationSpec spec = genmodel::GenerationSpec::block_spec(4, 5000, 2);
        genmodel::Dataset ds = genmodel::generate_dataset(spec, rng);
        auto wh = preprocess::fit_whitening(ds.X, 4);
        Eigen::MatrixXd Z = preprocess::apply_whitening(wh, ds.X);

        EstimatorOptions opts;
        opts.restarts = 1;
        opts.max_outer_iters = 15;
        opts.minibatch_size = 1000;
        Rng a(10);
        EstimationResult res = estimate(Z, opts, a);
        CHECK_NOTHROW(res.M_hat.validate(true));
        CHECK((res.W_hat.w.rowwise().norm().array() - 1.0).abs().maxCoeff() < 1e-10);
    }

    TEST_CASE("block dependency shows up in the normalized estimate")
    {
        Rng rng(87);
        genmodel::GenerationSpec spec = genmodel::GenerationSpec::block_spec(4, 6000, 2);
        spec.scale_off = 1.0 / 2.0;
        genmodel::Dataset ds = genmodel::generate_dataset(spec, rng);
        auto wh = preprocess::fit_whitening(ds.X, 4);
        Eigen::MatrixXd Z = preprocess::apply_whitening(wh, ds.X);

        EstimatorOptions opts;
        opts.restarts = 4;
        opts.max_outer_iters = 120;
        Rng a(11);
        EstimationResult res = estimate(Z, opts, a);

        eval::PerformanceMatrix P = eval::performance_matrix(res.W_hat.w, ds.A, &wh);
        eval::PermutationMatch match = eval::match_permutation(P);
        Eigen::MatrixXd aligned(4, 4);
        for (int i = 0; i < 4; ++i)
        {
            for (int j = 0; j < 4; ++j)
            {
                aligned(match.perm[i], match.perm[j]) = res.M_hat.m(i, j);
            }
        }
        Eigen::MatrixXd norm = eval::normalize_dependency(aligned);
        double block_entry = norm(0, 1);
        double outside = std::max({norm(0, 2), norm(0, 3), norm(1, 2), norm(1, 3), norm(2, 3)});
        CHECK(block_entry > outside);
    }

    TEST_CASE("input validation")
    {
        EstimatorOptions opts;
        opts.restarts = 0;
        CHECK_THROWS_AS(opts.validate(), parameter_error);

        EstimatorOptions ok;
        Rng rng(12);
        Eigen::MatrixXd tiny = testutil::random_matrix(2, 4, rng);
        CHECK_THROWS_AS(estimate(tiny, ok, rng), dimension_error);
    }
}
