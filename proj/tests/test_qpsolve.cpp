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
#include <limits>

#include <doctest.h>

#include "depca/errors.hpp"
#include "depca/qpsolve.hpp"
#include "test_util.hpp"

using namespace depca;
using namespace depca::qpsolve;

namespace
{

scorematch::QuadraticForm random_psd_form(int d, Rng& rng)
{
    TriIndex tri(d);
    const int p = tri.size();
    Eigen::MatrixXd A = testutil::random_matrix(p + 3, p, rng);
    scorematch::QuadraticForm q;
    q.H = A.transpose() * A / static_cast<double>(p);
    q.b = testutil::random_matrix(p, 1, rng);
    return q;
}

}  // namespace

TEST_SUITE("qpsolve")
{
    TEST_CASE("separable interior optimum")
    {
        const int d = 2;
        TriIndex tri(d);
        scorematch::QuadraticForm q;
        q.H = Eigen::MatrixXd::Identity(tri.size(), tri.size());
        q.b = Eigen::VectorXd::Zero(tri.size());
        q.b[tri.flat(0, 0)] = -1.0;
        QPSolution sol = solve_dependency_qp(q, d, 0.0);
        CHECK(sol.status == QPStatus::optimal);
        CHECK(sol.m[tri.flat(0, 0)] == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(sol.m[tri.flat(0, 1)] == doctest::Approx(0.0).epsilon(1e-10));
        CHECK(sol.m[tri.flat(1, 1)] == doctest::Approx(0.0).epsilon(1e-10));
        CHECK(sol.kkt_residual <= 1e-6);
    }

    TEST_CASE("all-positive gradient pins the solution at zero")
    {
        const int d = 3;
        TriIndex tri(d);
        scorematch::QuadraticForm q;
        q.H = Eigen::MatrixXd::Identity(tri.size(), tri.size());
        q.b = Eigen::VectorXd::Ones(tri.size());
        QPSolution sol = solve_dependency_qp(q, d, 0.0);
        CHECK(sol.status == QPStatus::optimal);
        CHECK(sol.m.cwiseAbs().maxCoeff() <= 1e-10);
        CHECK(sol.kkt_residual <= 1e-6);
    }

    TEST_CASE("matches the exhaustive active-set enumeration on tiny problems")
    {
        Rng rng(51);
        for (int d : {2, 3})
        {
            for (int rep = 0; rep < 20; ++rep)
            {
                scorematch::QuadraticForm q = random_psd_form(d, rng);
                QPSolution sol = solve_dependency_qp(q, d, 0.0);
                double objective = 0.5 * sol.m.dot(q.H * sol.m) + sol.m.dot(q.b);
                double oracle = testutil::enumeration_oracle(q.H, q.b, d);
                CHECK(objective <= oracle + 1e-9);
                CHECK(objective >= oracle - 1e-9);
            }
        }
    }

    TEST_CASE("matches the long-run projected-gradient oracle")
    {
        Rng rng(52);
        for (int rep = 0; rep < 8; ++rep)
        {
            int d = 2 + rep % 5;  // up to d = 6, p = 21
            scorematch::QuadraticForm q = random_psd_form(d, rng);
            QPSolution sol = solve_dependency_qp(q, d, 0.0);
            REQUIRE(sol.status == QPStatus::optimal);
            double objective = 0.5 * sol.m.dot(q.H * sol.m) + sol.m.dot(q.b);
            double oracle = testutil::projected_gradient_oracle(q.H, q.b, d);
            CHECK(std::abs(objective - oracle) < 1e-8);
        }
    }

    TEST_CASE("solutions are feasible and certified by the KKT residual")
    {
        Rng rng(53);
        ConstraintSet cs(4);
        for (int rep = 0; rep < 25; ++rep)
        {
            scorematch::QuadraticForm q = random_psd_form(4, rng);
            QPSolution sol = solve_dependency_qp(q, 4, 0.0);
            CHECK(cs.feasible(sol.m, 1e-10));
            CHECK(sol.kkt_residual <= 1e-6);
            CHECK(sol.status == QPStatus::optimal);
        }
    }

    TEST_CASE("dual iterates walk the objective up to the constrained optimum")
    {
        Rng rng(55);
        for (int rep = 0; rep < 10; ++rep)
        {
            scorematch::QuadraticForm q = random_psd_form(3, rng);
            QPSolution sol = solve_dependency_qp(q, 3, 0.0);
            REQUIRE(sol.objective_trace.size() >= 1);
            for (std::size_t i = 1; i < sol.objective_trace.size(); ++i)
            {
                CHECK(sol.objective_trace[i] >= sol.objective_trace[i - 1] - 1e-12);
            }
            double final_obj = 0.5 * sol.m.dot(q.H * sol.m) + sol.m.dot(q.b);
            CHECK(sol.objective_trace.back() == doctest::Approx(final_obj).epsilon(1e-8));
        }
    }

    TEST_CASE("kkt_residual is zero at a pinned origin")
    {
        const int d = 2;
        TriIndex tri(d);
        scorematch::QuadraticForm q;
        q.H = Eigen::MatrixXd::Identity(tri.size(), tri.size());
        q.b = Eigen::VectorXd::Ones(tri.size());
        CHECK(kkt_residual(q, d, 0.0, Eigen::VectorXd::Zero(tri.size())) <= 1e-10);
    }

    TEST_CASE("kkt_residual flags a perturbed optimum")
    {
        const int d = 2;
        TriIndex tri(d);
        scorematch::QuadraticForm q;
        q.H = Eigen::MatrixXd::Identity(tri.size(), tri.size());
        q.b = Eigen::VectorXd::Zero(tri.size());
        q.b[tri.flat(0, 0)] = -0.5;
        QPSolution sol = solve_dependency_qp(q, d, 0.0);
        Eigen::VectorXd perturbed = sol.m;
        perturbed[tri.flat(0, 0)] += 0.01;  // still feasible
        CHECK(kkt_residual(q, d, 0.0, perturbed) > 1e-6);
        CHECK(kkt_residual(q, d, 0.0, perturbed) == doctest::Approx(0.01).epsilon(1e-6));
    }

    TEST_CASE("kkt_residual rejects infeasible points with diagnostics")
    {
        const int d = 2;
        TriIndex tri(d);
        scorematch::QuadraticForm q;
        q.H = Eigen::MatrixXd::Identity(tri.size(), tri.size());
        q.b = Eigen::VectorXd::Zero(tri.size());
        Eigen::VectorXd bad = Eigen::VectorXd::Zero(tri.size());
        bad[tri.flat(0, 1)] = 1.0;  // off-diagonal above both diagonals
        try
        {
            kkt_residual(q, d, 0.0, bad);
            FAIL("expected parameter_error");
        }
        catch (const parameter_error& e)
        {
            CHECK(std::string(e.what()).find("violated") != std::string::npos);
        }
    }

    TEST_CASE("sparsity pressure is monotone in lambda")
    {
        Rng rng(54);
        for (int rep = 0; rep < 5; ++rep)
        {
            scorematch::QuadraticForm q = random_psd_form(4, rng);
            q.b = -q.b.cwiseAbs();  // make a nontrivial positive solution likely
            double previous = std::numeric_limits<double>::infinity();
            for (double lambda : {0.0, 0.05, 0.2, 0.5, 1.0})
            {
                QPSolution sol = solve_dependency_qp(q, 4, lambda);
                double total = sol.m.sum();
                CHECK(total <= previous + 1e-9);
                previous = total;
            }
        }
    }

    TEST_CASE("NaN input is rejected")
    {
        const int d = 2;
        TriIndex tri(d);
        scorematch::QuadraticForm q;
        q.H = Eigen::MatrixXd::Identity(tri.size(), tri.size());
        q.b = Eigen::VectorXd::Zero(tri.size());
        q.b[0] = std::numeric_limits<double>::quiet_NaN();
        CHECK_THROWS_AS(solve_dependency_qp(q, d, 0.0), parameter_error);
        CHECK_THROWS_AS(solve_dependency_qp(q, d, -0.5), parameter_error);
    }

    TEST_CASE("singular H gets a recorded ridge")
    {
        const int d = 2;
        TriIndex tri(d);
        Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(tri.size(), 1.0, 2.0);
        scorematch::QuadraticForm q;
        q.H = v * v.transpose();  // rank one
        q.b = -v;
        QPSolution sol = solve_dependency_qp(q, d, 0.0);
        CHECK(sol.ridge > 0.0);
        CHECK(sol.status == QPStatus::optimal);
        CHECK(sol.kkt_residual <= 1e-6);
    }

    TEST_CASE("constraint values match a hand enumeration")
    {
        ConstraintSet cs(2);
        TriIndex tri(2);
        Eigen::VectorXd m(tri.size());
        m[tri.flat(0, 0)] = 1.0;
        m[tri.flat(0, 1)] = 0.4;
        m[tri.flat(1, 1)] = 0.5;
        Eigen::VectorXd vals = cs.evaluate(m);
        CHECK(vals[tri.flat(0, 0)] == 1.0);
        CHECK(vals[tri.size()] == doctest::Approx(0.6));      // row 0: 1.0 - 0.4
        CHECK(vals[tri.size() + 1] == doctest::Approx(0.1));  // row 1: 0.5 - 0.4
        CHECK(cs.feasible(m, 0.0));
        m[tri.flat(0, 1)] = 0.6;
        CHECK_FALSE(cs.feasible(m, 1e-12));
    }
}
