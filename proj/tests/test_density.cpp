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

#include <doctest.h>

#include "depca/density.hpp"
#include "depca/errors.hpp"
#include "test_util.hpp"

using namespace depca;
using namespace depca::density;

namespace
{

DependencyMatrix make_m2(double m11, double m22, double m12)
{
    DependencyMatrix M;
    M.m.resize(2, 2);
    M.m << m11, m12, m12, m22;
    return M;
}

}  // namespace

TEST_SUITE("density")
{
    TEST_CASE("nonlinearity at the origin")
    {
        auto lc = nonlinearity(0.0);
        CHECK(lc.G == 0.0);
        CHECK(lc.G1 == 0.0);
        CHECK(lc.G2 == 1.0);
    }

    TEST_CASE("nonlinearity at 1 against a high-precision value")
    {
        auto lc = nonlinearity(1.0);
        CHECK(lc.G == doctest::Approx(0.43378083048302719).epsilon(1e-14));
        CHECK(lc.G1 == doctest::Approx(std::tanh(1.0)).epsilon(1e-15));
        CHECK(lc.G2 == doctest::Approx(1.0 - std::tanh(1.0) * std::tanh(1.0)).epsilon(1e-13));
    }

    TEST_CASE("nonlinearity saturates without overflow")
    {
        auto lc = nonlinearity(50.0);
        CHECK(lc.G == doctest::Approx(50.0 - M_LN2).epsilon(1e-15));
        CHECK(lc.G1 == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(lc.G2 < 1e-40);
        auto big = nonlinearity(-1e6);
        CHECK(std::isfinite(big.G));
        CHECK(big.G1 == -1.0);
        CHECK(big.G2 == 0.0);
        CHECK(nonlinearity_third(3.0) ==
              doctest::Approx(-2.0 * std::tanh(3.0) / std::cosh(3.0) / std::cosh(3.0))
                  .epsilon(1e-12));
    }

    TEST_CASE("log_ptilde_s on worked 2-D examples")
    {
        Eigen::VectorXd s(2);
        s << 1.0, -1.0;
        CHECK(log_ptilde_s(s, make_m2(1, 1, 0), Smoothing::exact_abs) == -2.0);
        CHECK(log_ptilde_s(s, make_m2(1, 1, 0.5), Smoothing::exact_abs) == -3.0);
        Eigen::VectorXd same(2);
        same << 1.0, 1.0;
        double equal_valued = log_ptilde_s(same, make_m2(1, 1, 0.5), Smoothing::exact_abs);
        CHECK(equal_valued == -2.0);
        CHECK(equal_valued > -3.0);  // equal components are more probable
    }

    TEST_CASE("log_ptilde_s rejects dimension mismatch")
    {
        Eigen::VectorXd s(3);
        s.setZero();
        CHECK_THROWS_AS(log_ptilde_s(s, make_m2(1, 1, 0), Smoothing::exact_abs), dimension_error);
    }

    TEST_CASE("log_ptilde_x composes the unmixing and the determinant")
    {
        Rng rng(21);
        Eigen::VectorXd x(2);
        x << 0.3, -1.2;
        DependencyMatrix M = make_m2(1.0, 0.8, 0.3);

        SUBCASE("identity unmixing")
        {
            Eigen::MatrixXd W = Eigen::MatrixXd::Identity(2, 2);
            CHECK(log_ptilde_x(x, W, M, Smoothing::exact_abs) ==
                  log_ptilde_s(x, M, Smoothing::exact_abs));
        }

        SUBCASE("orthogonal unmixing adds no determinant term")
        {
            double a = 0.6;
            Eigen::MatrixXd W(2, 2);
            W << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
            CHECK(log_ptilde_x(x, W, M, Smoothing::exact_abs) ==
                  doctest::Approx(log_ptilde_s(W * x, M, Smoothing::exact_abs)).epsilon(1e-14));
        }

        SUBCASE("random instance against explicit recomputation")
        {
            for (int rep = 0; rep < 20; ++rep)
            {
                int d = 4;
                Eigen::MatrixXd W = testutil::random_unit_rows(d, rng);
                Eigen::MatrixXd Mfull = testutil::random_dependency(d, rng);
                DependencyMatrix M4{Mfull};
                Eigen::VectorXd xr = testutil::random_matrix(d, 1, rng);
                Eigen::VectorXd y = W * xr;
                double manual = 0.0;
                for (int i = 0; i < d; ++i)
                {
                    manual -= Mfull(i, i) * std::abs(y[i]);
                    for (int j = i + 1; j < d; ++j)
                    {
                        manual -= Mfull(i, j) * std::abs(y[i] - y[j]);
                    }
                }
                manual += std::log(std::abs(W.determinant()));
                double lib = log_ptilde_x(xr, W, M4, Smoothing::exact_abs);
                CHECK(std::abs(lib - manual) <= 1e-12 * (1.0 + std::abs(manual)));
            }
        }
    }

    TEST_CASE("log_ptilde_x rejects singular W")
    {
        Eigen::MatrixXd W = Eigen::MatrixXd::Zero(2, 2);
        Eigen::VectorXd x(2);
        x.setZero();
        CHECK_THROWS_AS(log_ptilde_x(x, W, make_m2(1, 1, 0), Smoothing::exact_abs),
                        numerical_error);
    }

    TEST_CASE("g_closed_form basics")
    {
        CHECK(g_closed_form(0.0, 3.0) == 0.0);
        CHECK(g_closed_form(4.0, 1.0) == -2.0);
        CHECK_THROWS_AS(g_closed_form(-0.1, 1.0), parameter_error);
    }

    TEST_CASE("g_numeric matches the closed form for the model weight laws")
    {
        // Off-diagonal law inverse-Gamma(1/2, m^2/2): the closed form has
        // proportionality constant exactly 1, so g(v) = exp(-m sqrt(v)).
        const double m = 1.0;
        auto off_density = [&](double u) { return inverse_gamma_density(u, 0.5, 0.5 * m * m); };
        CHECK(g_numeric(1.0, off_density, false) ==
              doctest::Approx(std::exp(-1.0)).epsilon(1e-6));

        // Both laws: log g(v) + m sqrt(v) constant on a v-grid.
        auto diag_density = [&](double u) { return inverse_gamma_density(u, 1.0, 0.5 * m * m); };
        for (bool with_sqrt : {false, true})
        {
            auto density_fn = with_sqrt ? std::function<double(double)>(diag_density)
                                        : std::function<double(double)>(off_density);
            double reference =
                std::log(g_numeric(1.0, density_fn, with_sqrt)) - g_closed_form(1.0, m);
            for (double v : {0.01, 0.1, 0.5, 2.0, 8.0, 25.0})
            {
                double shifted =
                    std::log(g_numeric(v, density_fn, with_sqrt)) - g_closed_form(v, m);
                CHECK(std::abs(shifted - reference) < 1e-6);
            }
        }
    }

    TEST_CASE("g_numeric of a near point mass is a linear log-transform")
    {
        // Narrow Gamma(k, u0/k) concentrates at u0; log g(v) ~ -v u0 / 2.
        const double u0 = 1.0;
        const double k = 400.0;
        auto narrow = [&](double u) -> double
        {
            double logp = (k - 1.0) * std::log(u) - u * k / u0 - std::lgamma(k) -
                          k * std::log(u0 / k);
            return std::exp(logp);
        };
        for (double v : {0.0, 0.25, 0.5, 1.0})
        {
            CHECK(std::log(g_numeric(v, narrow, false)) ==
                  doctest::Approx(-0.5 * v * u0).epsilon(0.01));
        }
    }

    TEST_CASE("log g is decreasing and convex for a Gamma weight law")
    {
        auto gamma21 = [](double u) { return u * std::exp(-u); };
        std::vector<double> grid;
        for (double v = 0.1; v <= 10.0; v += 0.3)
        {
            grid.push_back(std::log(g_numeric(v, gamma21, false)));
        }
        for (std::size_t i = 1; i < grid.size(); ++i)
        {
            CHECK(grid[i] - grid[i - 1] < 1e-8);
        }
        for (std::size_t i = 2; i < grid.size(); ++i)
        {
            CHECK(grid[i] - 2.0 * grid[i - 1] + grid[i - 2] >= -1e-8);
        }
    }

    TEST_CASE("generalized density reduces to the plain model")
    {
        Rng rng(22);
        auto theta = genmodel::SignPattern::laplacian_default(3);
        for (int rep = 0; rep < 50; ++rep)
        {
            Eigen::MatrixXd Mfull = testutil::random_dependency(3, rng);
            DependencyMatrix M{Mfull};
            Eigen::VectorXd s = testutil::random_matrix(3, 1, rng);
            double a = log_ptilde_s_general(s, M, theta, Smoothing::exact_abs);
            double b = log_ptilde_s(s, M, Smoothing::exact_abs);
            CHECK(std::abs(a - b) <= 1e-12 * (1.0 + std::abs(b)));
        }
    }

    TEST_CASE("generalized density sign cases")
    {
        DependencyMatrix M = make_m2(1.0, 1.0, 0.5);
        Eigen::VectorXd s(2);
        s << 1.0, -1.0;

        genmodel::SignPattern plus;
        plus.theta.resize(2, 2);
        plus.theta << 1.0, 1.0, 1.0, 1.0;
        // Radicand vanishes: anticorrelated pair is favored.
        CHECK(log_ptilde_s_general(s, M, plus, Smoothing::exact_abs) == -2.0);

        genmodel::SignPattern zero;
        zero.theta.resize(2, 2);
        zero.theta << 1.0, 0.0, 0.0, 1.0;
        double expected = -(1.0 + 1.0 + 0.5 * std::sqrt(2.0));
        CHECK(log_ptilde_s_general(s, M, zero, Smoothing::exact_abs) ==
              doctest::Approx(expected).epsilon(1e-14));
    }

    TEST_CASE("generalized density validates the sign pattern")
    {
        DependencyMatrix M = make_m2(1, 1, 0.5);
        Eigen::VectorXd s(2);
        s.setZero();
        genmodel::SignPattern bad;
        bad.theta.resize(2, 2);
        bad.theta << 0.5, 1.0, 1.0, 1.0;
        CHECK_THROWS_AS(log_ptilde_s_general(s, M, bad, Smoothing::exact_abs), parameter_error);
    }

    TEST_CASE("smoothing gap is bounded by log 2 per unit weight")
    {
        Rng rng(23);
        for (int rep = 0; rep < 100; ++rep)
        {
            int d = 4;
            Eigen::MatrixXd Mfull = testutil::random_dependency(d, rng);
            DependencyMatrix M{Mfull};
            Eigen::VectorXd s = testutil::random_matrix(d, 1, rng);
            double exact = log_ptilde_s(s, M, Smoothing::exact_abs);
            double smooth = log_ptilde_s(s, M, Smoothing::log_cosh);
            double weight_sum = 0.0;
            for (int i = 0; i < d; ++i)
            {
                for (int j = i; j < d; ++j)
                {
                    weight_sum += Mfull(i, j);
                }
            }
            CHECK(smooth >= exact);  // G(u) <= |u|
            CHECK(smooth - exact <= M_LN2 * weight_sum + 1e-12);
        }
    }

    TEST_CASE("dependency matrix round trip through the upper vector")
    {
        Rng rng(24);
        Eigen::MatrixXd Mfull = testutil::random_dependency(5, rng);
        DependencyMatrix M{Mfull};
        M.validate();
        DependencyMatrix back = DependencyMatrix::from_upper(M.upper_vector(), 5);
        CHECK(back.m == M.m);
    }

    TEST_CASE("row dominance violations are caught")
    {
        DependencyMatrix M = make_m2(0.4, 1.0, 0.5);
        CHECK_THROWS_AS(M.validate(true), parameter_error);
        CHECK_NOTHROW(M.validate(false));
    }
}
