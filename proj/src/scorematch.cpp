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

#include "depca/scorematch.hpp"

#include <cmath>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "depca/errors.hpp"

namespace depca::scorematch
{
namespace
{

void check_inputs(const Eigen::MatrixXd& X, const UnmixingMatrix& W)
{
    if (X.rows() == 0)
    {
        throw dimension_error("scorematch: empty data matrix");
    }
    if (X.cols() != W.w.cols())
    {
        throw dimension_error("scorematch: data dimension does not match W");
    }
    W.validate();
}

// Pair iteration shared by the batched kernels. Calls fn(i, j, m_ij) for
// every upper pair with a nonzero coefficient.
template <typename F>
void for_each_pair(const Eigen::MatrixXd& M, const F& fn)
{
    const int d = static_cast<int>(M.rows());
    for (int i = 0; i < d; ++i)
    {
        for (int j = i + 1; j < d; ++j)
        {
            if (M(i, j) != 0.0)
            {
                fn(i, j, M(i, j));
            }
        }
    }
}

}  // namespace

void UnmixingMatrix::validate() const
{
    if (w.rows() != w.cols() || w.rows() == 0)
    {
        throw dimension_error("UnmixingMatrix: matrix must be square");
    }
    double max_dev = (w.rowwise().norm().array() - 1.0).abs().maxCoeff();
    if (max_dev > 1e-8)
    {
        warn("UnmixingMatrix: row norms deviate from 1 by " + std::to_string(max_dev));
    }
    double abs_det = std::abs(Eigen::PartialPivLU<Eigen::MatrixXd>(w).determinant());
    if (!(abs_det > 0.0) || !std::isfinite(abs_det))
    {
        throw numerical_error("UnmixingMatrix: matrix is numerically singular");
    }
}

FeatureVectors feature_vectors(const Eigen::VectorXd& x, const UnmixingMatrix& W)
{
    const int d = W.dim();
    if (x.size() != d)
    {
        throw dimension_error("feature_vectors: dimension mismatch");
    }
    TriIndex tri(d);
    const Eigen::VectorXd y = W.w * x;
    FeatureVectors f;
    f.gk = Eigen::MatrixXd::Zero(d, tri.size());
    f.hk = Eigen::MatrixXd::Zero(d, tri.size());
    for (int k = 0; k < d; ++k)
    {
        for (int i = 0; i < d; ++i)
        {
            auto lc = density::nonlinearity(y[i]);
            f.gk(k, tri.flat(i, i)) = -lc.G1 * W.w(i, k);
            f.hk(k, tri.flat(i, i)) = -lc.G2 * W.w(i, k) * W.w(i, k);
            for (int j = i + 1; j < d; ++j)
            {
                auto lp = density::nonlinearity(y[i] - y[j]);
                double dw = W.w(i, k) - W.w(j, k);
                f.gk(k, tri.flat(i, j)) = -lp.G1 * dw;
                f.hk(k, tri.flat(i, j)) = -lp.G2 * dw * dw;
            }
        }
    }
    return f;
}

double objective_J(const Eigen::MatrixXd& X, const UnmixingMatrix& W,
                   const density::DependencyMatrix& M)
{
    check_inputs(X, W);
    const int d = W.dim();
    if (M.dim() != d)
    {
        throw dimension_error("objective_J: M does not match W");
    }
    const long T = X.rows();
    const Eigen::MatrixXd Y = X * W.w.transpose();
    const Eigen::MatrixXd gram = W.w * W.w.transpose();
    const Eigen::VectorXd mdiag = M.m.diagonal();
    const Eigen::VectorXd wnorm2 = W.w.rowwise().squaredNorm();

    // alpha_ti collects the G' coefficients so that psi_t = -W^T alpha_t;
    // the sum over k of d_k psi_k accumulates directly into `linear`.
    Eigen::ArrayXXd g1y = Y.array().tanh();
    Eigen::ArrayXXd alpha = g1y.rowwise() * mdiag.transpose().array();
    double linear = ((1.0 - g1y.square()).rowwise() * (mdiag.array() * wnorm2.array()).transpose())
                        .sum();

    for_each_pair(M.m,
                  [&](int i, int j, double mij)
                  {
                      Eigen::ArrayXd g1 = (Y.col(i) - Y.col(j)).array().tanh();
                      double dn = (W.w.row(i) - W.w.row(j)).squaredNorm();
                      alpha.col(i) += mij * g1;
                      alpha.col(j) -= mij * g1;
                      linear += mij * dn * (1.0 - g1.square()).sum();
                  });

    // sum_k psi_k^2 = alpha^T (W W^T) alpha per sample.
    double quad = (alpha.matrix() * gram).cwiseProduct(alpha.matrix()).sum();
    return (0.5 * quad - linear) / static_cast<double>(T);
}

QuadraticForm assemble_quadratic(const Eigen::MatrixXd& X, const UnmixingMatrix& W)
{
    check_inputs(X, W);
    const int d = W.dim();
    const long T = X.rows();
    TriIndex tri(d);
    const int p = tri.size();

    // Incidence map E (d x p): column (i,i) = e_i, column (i,j) = e_i - e_j.
    Eigen::MatrixXd E = Eigen::MatrixXd::Zero(d, p);
    Eigen::VectorXd norm2(p);
    for (int k = 0; k < p; ++k)
    {
        auto [i, j] = tri.unflat(k);
        if (i == j)
        {
            E(i, k) = 1.0;
            norm2[k] = W.w.row(i).squaredNorm();
        }
        else
        {
            E(i, k) = 1.0;
            E(j, k) = -1.0;
            norm2[k] = (W.w.row(i) - W.w.row(j)).squaredNorm();
        }
    }
    const Eigen::MatrixXd K = E.transpose() * (W.w * W.w.transpose()) * E;

    // With c_t the per-sample vector of G' factors (one per flat index),
    // sum_k g_k g_k^T = (c_t c_t^T) o K, so H = ((1/T) sum_t c_t c_t^T) o K.
    // The b vector needs only the mean of the G'' factors.
    Eigen::MatrixXd C_outer = Eigen::MatrixXd::Zero(p, p);
    Eigen::VectorXd q_mean = Eigen::VectorXd::Zero(p);

    const long block = 8192;  // row-chunked so T x p buffers stay small
    Eigen::MatrixXd C;
    for (long start = 0; start < T; start += block)
    {
        const long n = std::min(block, T - start);
        const Eigen::MatrixXd Y = X.middleRows(start, n) * W.w.transpose();
        C.resize(n, p);
        for (int k = 0; k < p; ++k)
        {
            auto [i, j] = tri.unflat(k);
            if (i == j)
            {
                C.col(k) = Y.col(i).array().tanh();
            }
            else
            {
                C.col(k) = (Y.col(i) - Y.col(j)).array().tanh();
            }
        }
        C_outer.selfadjointView<Eigen::Lower>().rankUpdate(C.transpose(), 1.0);
        q_mean.array() += static_cast<double>(n) - C.array().square().colwise().sum().transpose();
    }
    C_outer = C_outer.selfadjointView<Eigen::Lower>();

    QuadraticForm q;
    q.H = (C_outer / static_cast<double>(T)).cwiseProduct(K);
    q.b = -(q_mean / static_cast<double>(T)).cwiseProduct(norm2);

    // H is a Hadamard product of two Gram matrices, hence PSD; verify at
    // desk scale where the eigensolve is cheap.
    if (p <= 300)
    {
        double min_eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(q.H).eigenvalues().minCoeff();
        if (min_eig < -1e-10 * q.H.trace())
        {
            throw numerical_error("assemble_quadratic: H failed the PSD check");
        }
    }
    return q;
}

Eigen::MatrixXd grad_W(const Eigen::MatrixXd& X, const UnmixingMatrix& W,
                       const density::DependencyMatrix& M)
{
    check_inputs(X, W);
    const int d = W.dim();
    if (M.dim() != d)
    {
        throw dimension_error("grad_W: M does not match W");
    }
    const long T = X.rows();
    const Eigen::MatrixXd Y = X * W.w.transpose();
    const Eigen::VectorXd mdiag = M.m.diagonal();
    const Eigen::VectorXd wnorm2 = W.w.rowwise().squaredNorm();

    // Per-sample quantities, batched over rows:
    //   psi_t = -W^T alpha_t,
    //   d/dW [sum_k psi_k^2 / 2] = (B_t psi_t) x_t^T - alpha_t psi_t^T
    //   d/dW [sum_k d_k psi_k]   = rho_t x_t^T + 2 B_t
    // with B_t = -D_t W and D_t the G''-weighted incidence (Laplacian-like)
    // matrix of the active terms.
    Eigen::ArrayXXd g1y = Y.array().tanh();
    Eigen::ArrayXXd g2y = 1.0 - g1y.square();
    Eigen::ArrayXXd alpha = g1y.rowwise() * mdiag.transpose().array();
    Eigen::ArrayXXd diag_w = g2y.rowwise() * mdiag.transpose().array();  // diagonal of D_t
    Eigen::ArrayXXd rho =
        (2.0 * g2y * g1y).rowwise() * (mdiag.array() * wnorm2.array()).transpose();

    Eigen::MatrixXd sum_D = Eigen::MatrixXd::Zero(d, d);  // sum_t D_t

    for_each_pair(M.m,
                  [&](int i, int j, double mij)
                  {
                      Eigen::ArrayXd g1 = (Y.col(i) - Y.col(j)).array().tanh();
                      Eigen::ArrayXd g2 = 1.0 - g1.square();
                      double dn = (W.w.row(i) - W.w.row(j)).squaredNorm();
                      alpha.col(i) += mij * g1;
                      alpha.col(j) -= mij * g1;
                      Eigen::ArrayXd g3w = 2.0 * mij * dn * g2 * g1;  // -m G''' ||.||^2
                      rho.col(i) += g3w;
                      rho.col(j) -= g3w;
                      diag_w.col(i) += mij * g2;
                      diag_w.col(j) += mij * g2;
                      double s = mij * g2.sum();
                      sum_D(i, j) -= s;
                      sum_D(j, i) -= s;
                  });
    sum_D.diagonal() += diag_w.colwise().sum().matrix();

    const Eigen::MatrixXd psi = -(alpha.matrix() * W.w);            // rows psi_t^T
    const Eigen::MatrixXd v = psi * W.w.transpose();                // rows (W psi_t)^T
    // diag_w already carries the full diagonal of D_t; the pair loop adds
    // the off-diagonal action -m g2 only.
    Eigen::ArrayXXd dv = diag_w * v.array();                        // rows (D_t W psi_t)^T
    for_each_pair(M.m,
                  [&](int i, int j, double mij)
                  {
                      Eigen::ArrayXd c =
                          mij * (1.0 - (Y.col(i) - Y.col(j)).array().tanh().square());
                      dv.col(i) -= c * v.col(j).array();
                      dv.col(j) -= c * v.col(i).array();
                  });

    Eigen::MatrixXd grad = (rho.matrix() - dv.matrix()).transpose() * X;
    grad.noalias() -= alpha.matrix().transpose() * psi;
    grad.noalias() -= 2.0 * sum_D * W.w;
    return grad / static_cast<double>(T);
}

}  // namespace depca::scorematch
