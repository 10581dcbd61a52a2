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

#include "depca/genmodel.hpp"

#include <cmath>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include "depca/errors.hpp"

namespace depca::genmodel
{
namespace
{

bool is_symmetric(const Eigen::MatrixXd& m, double tol)
{
    return m.rows() == m.cols() && (m - m.transpose()).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace

void WeightMatrix::validate() const
{
    if (!is_symmetric(u, 0.0))
    {
        throw parameter_error("WeightMatrix: matrix must be exactly symmetric");
    }
    if ((u.array() < 0.0).any())
    {
        throw parameter_error("WeightMatrix: entries must be non-negative");
    }
    if ((u.diagonal().array() <= 0.0).any())
    {
        throw parameter_error("WeightMatrix: diagonal entries must be positive");
    }
}

void PrecisionMatrix::validate() const
{
    if (!is_symmetric(lambda, 0.0))
    {
        throw numerical_error("PrecisionMatrix: matrix must be symmetric");
    }
    const int d = static_cast<int>(lambda.rows());
    for (int i = 0; i < d; ++i)
    {
        double off = lambda.row(i).cwiseAbs().sum() - std::abs(lambda(i, i));
        if (!(lambda(i, i) > off))
        {
            throw numerical_error("PrecisionMatrix: row " + std::to_string(i) +
                                  " is not strictly diagonally dominant");
        }
    }
    if (Eigen::LLT<Eigen::MatrixXd>(lambda).info() != Eigen::Success)
    {
        throw numerical_error("PrecisionMatrix: Cholesky factorization failed");
    }
}

void SignPattern::validate() const
{
    if (!is_symmetric(theta, 0.0))
    {
        throw parameter_error("SignPattern: matrix must be symmetric");
    }
    const int d = static_cast<int>(theta.rows());
    for (int i = 0; i < d; ++i)
    {
        if (!(theta(i, i) > 0.0))
        {
            throw parameter_error("SignPattern: diagonal entries must be positive");
        }
        for (int j = 0; j < d; ++j)
        {
            if (i == j)
            {
                continue;
            }
            double t = theta(i, j);
            if (t != -1.0 && t != 0.0 && t != 1.0)
            {
                throw parameter_error("SignPattern: off-diagonal entries must be in {-1, 0, 1}");
            }
            if (theta(i, i) < std::abs(t))
            {
                throw parameter_error("SignPattern: requires theta_ii >= |theta_ij|");
            }
        }
    }
}

SignPattern SignPattern::laplacian_default(int d)
{
    SignPattern s;
    s.theta = Eigen::MatrixXd::Constant(d, d, -1.0);
    s.theta.diagonal().setOnes();
    return s;
}

void GenerationSpec::validate() const
{
    if (d < 2)
    {
        throw parameter_error("GenerationSpec: d must be >= 2");
    }
    if (T < 1)
    {
        throw parameter_error("GenerationSpec: T must be >= 1");
    }
    if (!(shape_diag > 0.0) || !(scale_diag > 0.0))
    {
        throw parameter_error("GenerationSpec: diagonal shape/scale must be positive");
    }
    if (!pattern.empty() && (!(shape_off > 0.0) || !(scale_off > 0.0)))
    {
        throw parameter_error("GenerationSpec: off-diagonal shape/scale must be positive");
    }
    for (auto [i, j] : pattern)
    {
        if (i < 0 || j < 0 || i >= d || j >= d || i >= j)
        {
            throw parameter_error("GenerationSpec: pattern pairs must satisfy 0 <= i < j < d");
        }
    }
}

GenerationSpec GenerationSpec::block_spec(int d, long T, int block)
{
    GenerationSpec spec;
    spec.d = d;
    spec.T = T;
    for (int i = 0; i < block; ++i)
    {
        for (int j = i + 1; j < block; ++j)
        {
            spec.pattern.emplace_back(i, j);
        }
    }
    spec.validate();
    return spec;
}

Eigen::VectorXd sample_inverse_gamma(double shape, double scale, int n, Rng& rng)
{
    if (!(shape > 0.0) || !(scale > 0.0))
    {
        throw parameter_error("sample_inverse_gamma: shape and scale must be positive");
    }
    if (n < 1)
    {
        throw parameter_error("sample_inverse_gamma: n must be >= 1");
    }
    Eigen::VectorXd out(n);
    for (int i = 0; i < n; ++i)
    {
        double g = rng.gamma(shape);
        // Gamma(shape, 1) draws can underflow to zero for tiny shapes;
        // retry instead of emitting infinities.
        while (!(g > 0.0))
        {
            g = rng.gamma(shape);
        }
        out[i] = scale / g;
    }
    return out;
}

WeightMatrix sample_weights(const GenerationSpec& spec, Rng& rng)
{
    spec.validate();
    WeightMatrix w;
    w.u = Eigen::MatrixXd::Zero(spec.d, spec.d);
    Eigen::VectorXd diag = sample_inverse_gamma(spec.shape_diag, spec.scale_diag, spec.d, rng);
    w.u.diagonal() = diag;
    if (!spec.pattern.empty())
    {
        Eigen::VectorXd off = sample_inverse_gamma(spec.shape_off, spec.scale_off,
                                                   static_cast<int>(spec.pattern.size()), rng);
        int k = 0;
        for (auto [i, j] : spec.pattern)
        {
            w.u(i, j) = off[k];
            w.u(j, i) = off[k];
            ++k;
        }
    }
    return w;
}

PrecisionMatrix build_precision(const WeightMatrix& u)
{
    u.validate();
    PrecisionMatrix p;
    p.lambda = -u.u;
    p.lambda.diagonal() = u.u.rowwise().sum();
    return p;
}

PrecisionMatrix build_precision_general(const WeightMatrix& u, const SignPattern& theta)
{
    u.validate();
    theta.validate();
    if (theta.theta.rows() != u.u.rows())
    {
        throw dimension_error("build_precision_general: dimension mismatch");
    }
    Eigen::MatrixXd omega = u.u;
    omega.diagonal() = u.u.rowwise().sum();
    PrecisionMatrix p;
    p.lambda = omega.cwiseProduct(theta.theta);
    return p;
}

Eigen::MatrixXd sample_sources(const PrecisionMatrix& lambda, long T, Rng& rng)
{
    const int d = static_cast<int>(lambda.lambda.rows());
    Eigen::LLT<Eigen::MatrixXd> llt(lambda.lambda);
    if (llt.info() != Eigen::Success)
    {
        throw numerical_error("sample_sources: precision matrix is not positive definite");
    }
    // Lambda = L L^T, so s = L^-T z has covariance Lambda^-1.
    Eigen::MatrixXd Lt = llt.matrixU();
    Eigen::MatrixXd S(T, d);
    Eigen::VectorXd z(d);
    for (long t = 0; t < T; ++t)
    {
        for (int i = 0; i < d; ++i)
        {
            z[i] = rng.normal();
        }
        S.row(t) = Lt.triangularView<Eigen::Upper>().solve(z).transpose();
    }
    return S;
}

Dataset generate_dataset(const GenerationSpec& spec, Rng& rng)
{
    spec.validate();
    Dataset ds;
    ds.S.resize(spec.T, spec.d);

    // One hierarchical draw per sample: fresh weights, fresh precision.
    for (long t = 0; t < spec.T; ++t)
    {
        PrecisionMatrix lambda = build_precision(sample_weights(spec, rng));
        ds.S.row(t) = sample_sources(lambda, 1, rng);
    }

    // Standardize each source to zero mean, unit variance over the sample.
    // Population (1/T) moments; skipped for T == 1 where they degenerate.
    if (spec.T > 1)
    {
        for (int j = 0; j < spec.d; ++j)
        {
            double mean = ds.S.col(j).mean();
            ds.S.col(j).array() -= mean;
            double sd = std::sqrt(ds.S.col(j).squaredNorm() / static_cast<double>(spec.T));
            if (sd > 0.0)
            {
                ds.S.col(j) /= sd;
            }
        }
    }

    const int max_attempts = 10;
    for (int attempt = 0;; ++attempt)
    {
        ds.A.resize(spec.d, spec.d);
        for (int i = 0; i < spec.d; ++i)
        {
            for (int j = 0; j < spec.d; ++j)
            {
                ds.A(i, j) = rng.normal();
            }
        }
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(ds.A);
        double cond = svd.singularValues()(0) / svd.singularValues()(spec.d - 1);
        if (std::isfinite(cond) && cond < 1e12)
        {
            break;
        }
        if (attempt + 1 >= max_attempts)
        {
            throw numerical_error("generate_dataset: mixing matrix numerically singular after 10 draws");
        }
    }

    ds.X = ds.S * ds.A.transpose();
    return ds;
}

}  // namespace depca::genmodel
