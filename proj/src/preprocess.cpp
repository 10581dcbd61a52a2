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

#include "depca/preprocess.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "depca/errors.hpp"

namespace depca::preprocess
{

WhiteningTransform WhiteningTransform::identity(int dim)
{
    WhiteningTransform t;
    t.mean = Eigen::VectorXd::Zero(dim);
    t.projection = Eigen::MatrixXd::Identity(dim, dim);
    t.eigenvalues = Eigen::VectorXd::Ones(dim);
    t.d0 = dim;
    t.d = dim;
    return t;
}

Eigen::MatrixXd WhiteningTransform::to_matrix() const
{
    Eigen::MatrixXd packed = Eigen::MatrixXd::Zero(d + 2, d0);
    packed.row(0) = mean.transpose();
    packed.row(1) = eigenvalues.transpose();
    packed.bottomRows(d) = projection;
    return packed;
}

WhiteningTransform WhiteningTransform::from_matrix(const Eigen::MatrixXd& packed)
{
    if (packed.rows() < 3)
    {
        throw dimension_error("WhiteningTransform::from_matrix: need at least 3 rows");
    }
    WhiteningTransform t;
    t.d0 = static_cast<int>(packed.cols());
    t.d = static_cast<int>(packed.rows()) - 2;
    t.mean = packed.row(0).transpose();
    t.eigenvalues = packed.row(1).transpose();
    t.projection = packed.bottomRows(t.d);
    return t;
}

Eigen::MatrixXd remove_dc_and_normalize(const Eigen::MatrixXd& X)
{
    if (X.rows() == 0 || X.cols() == 0)
    {
        throw dimension_error("remove_dc_and_normalize: empty input");
    }
    Eigen::MatrixXd out(X.rows(), X.cols());
    long kept = 0;
    long dropped = 0;
    for (long t = 0; t < X.rows(); ++t)
    {
        Eigen::RowVectorXd row = X.row(t);
        row.array() -= row.mean();
        double norm = row.norm();
        if (norm <= 1e-300)
        {
            ++dropped;
            continue;
        }
        out.row(kept++) = row / norm;
    }
    if (dropped > 0)
    {
        warn("remove_dc_and_normalize: dropped " + std::to_string(dropped) +
             " rows that were constant");
    }
    if (kept == 0)
    {
        throw numerical_error("remove_dc_and_normalize: all rows degenerate");
    }
    return out.topRows(kept);
}

WhiteningTransform fit_whitening(const Eigen::MatrixXd& X, int d_keep)
{
    const long T = X.rows();
    const int d0 = static_cast<int>(X.cols());
    if (T == 0 || d0 == 0)
    {
        throw dimension_error("fit_whitening: empty input");
    }
    if (d_keep < 1 || d_keep > d0)
    {
        throw dimension_error("fit_whitening: d_keep must be in [1, input dim]");
    }

    WhiteningTransform t;
    t.d0 = d0;
    t.d = d_keep;
    t.mean = X.colwise().mean().transpose();
    Eigen::MatrixXd centered = X.rowwise() - t.mean.transpose();
    Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(T);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success)
    {
        throw numerical_error("fit_whitening: eigendecomposition failed");
    }
    // Eigen returns ascending order; flip to descending.
    t.eigenvalues = eig.eigenvalues().reverse();
    Eigen::MatrixXd vectors = eig.eigenvectors().rowwise().reverse();

    double floor = 1e-12 * t.eigenvalues[0];
    for (int i = 0; i < d_keep; ++i)
    {
        if (!(t.eigenvalues[i] > floor))
        {
            throw dimension_error("fit_whitening: covariance rank below d_keep = " +
                                  std::to_string(d_keep) + "; retain at most " + std::to_string(i) +
                                  " dimensions");
        }
    }
    t.projection = t.eigenvalues.head(d_keep).array().rsqrt().matrix().asDiagonal() *
                   vectors.leftCols(d_keep).transpose();
    return t;
}

Eigen::MatrixXd apply_whitening(const WhiteningTransform& t, const Eigen::MatrixXd& X)
{
    if (X.cols() != t.d0)
    {
        throw dimension_error("apply_whitening: input dimension mismatch");
    }
    return (X.rowwise() - t.mean.transpose()) * t.projection.transpose();
}

Eigen::MatrixXd unmix_to_original(const WhiteningTransform& t, const Eigen::MatrixXd& W_hat)
{
    if (W_hat.rows() != t.d || W_hat.cols() != t.d)
    {
        throw dimension_error("unmix_to_original: W_hat must be d x d for the retained dim");
    }
    Eigen::MatrixXd mixing = W_hat.partialPivLu().solve(Eigen::MatrixXd::Identity(t.d, t.d));
    Eigen::MatrixXd pinv =
        t.projection.completeOrthogonalDecomposition().pseudoInverse();  // d0 x d
    return pinv * mixing;
}

}  // namespace depca::preprocess
