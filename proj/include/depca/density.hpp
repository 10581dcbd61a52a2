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

#ifndef DEPCA_DENSITY_HPP_
#define DEPCA_DENSITY_HPP_

#include <functional>

#include <Eigen/Dense>

#include "depca/genmodel.hpp"
#include "depca/triangular.hpp"

namespace depca::density
{

/// How the |.| terms of the model density are evaluated: exactly, or
/// through the smooth surrogate G(u) = log cosh(u) used by the estimator.
enum class Smoothing
{
    exact_abs,
    log_cosh,
};

/// Symmetric non-negative dependency matrix M. The diagonal m_ii controls
/// marginal sparsity, an off-diagonal m_ij > 0 a conditional positive
/// dependency between components i and j.
struct DependencyMatrix
{
    Eigen::MatrixXd m;

    int dim() const { return static_cast<int>(m.rows()); }

    /// Symmetry and non-negativity; with `require_row_dominance` also the
    /// estimation-side constraint sum_{j != i} m_ij <= m_ii.
    void validate(bool require_row_dominance = true) const;

    bool row_dominant(double tol = 0.0) const;

    /// Upper-triangular vector in the shared TriIndex ordering.
    Eigen::VectorXd upper_vector() const;

    static DependencyMatrix from_upper(const Eigen::VectorXd& m_flat, int d);
};

struct LogCosh
{
    double G;   // log cosh(v)
    double G1;  // tanh(v)
    double G2;  // sech^2(v)
};

/// Overflow-safe log cosh and its first two derivatives.
LogCosh nonlinearity(double v);

/// G'''(v) = -2 sech^2(v) tanh(v); needed by the W-gradient.
double nonlinearity_third(double v);

/// Unnormalized log model density of the sources,
///   -sum_i [ m_ii phi(s_i) + sum_{j>i} m_ij phi(s_i - s_j) ],
/// with phi = |.| or log cosh per the smoothing policy.
double log_ptilde_s(const Eigen::VectorXd& s, const DependencyMatrix& M, Smoothing smoothing);

/// Unnormalized log data density: log_ptilde_s(W x) + log |det W|.
double log_ptilde_x(const Eigen::VectorXd& x, const Eigen::MatrixXd& W, const DependencyMatrix& M,
                    Smoothing smoothing);

/// Closed-form log g(v) = -m sqrt(v) (additive constant dropped).
double g_closed_form(double v, double m);

/// One-dimensional integral defining the g-nonlinearities,
///   integral_0^inf [sqrt(u) if with_sqrt] exp(-v u / 2) weight_density(u) du,
/// by adaptive Gauss-Kronrod quadrature to 1e-8 relative tolerance.
double g_numeric(double v, const std::function<double(double)>& weight_density, bool with_sqrt);

/// Generalized (sign-pattern) log density of the sources,
///   -sum_i [ theta_ii m_ii phi(s_i)
///            + sum_{j>i} m_ij sqrt(theta_ii s_i^2 + theta_jj s_j^2 + 2 theta_ij s_i s_j) ].
/// Under log_cosh smoothing the radicand is shifted by 1e-9 and the
/// diagonal |s_i| becomes G(s_i); evaluation-only path.
double log_ptilde_s_general(const Eigen::VectorXd& s, const DependencyMatrix& M,
                            const genmodel::SignPattern& theta, Smoothing smoothing);

/// Inverse-Gamma density x^(-shape-1) exp(-scale/x) * scale^shape / Gamma(shape).
double inverse_gamma_density(double x, double shape, double scale);

}  // namespace depca::density

#endif  // DEPCA_DENSITY_HPP_
