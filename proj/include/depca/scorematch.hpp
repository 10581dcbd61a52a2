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

#ifndef DEPCA_SCOREMATCH_HPP_
#define DEPCA_SCOREMATCH_HPP_

#include <Eigen/Dense>

#include "depca/density.hpp"
#include "depca/triangular.hpp"

namespace depca::scorematch
{

/// Square unmixing matrix with unit-norm rows (enforced by the estimator,
/// validated here with a warning tolerance of 1e-8).
struct UnmixingMatrix
{
    Eigen::MatrixXd w;

    int dim() const { return static_cast<int>(w.rows()); }

    /// Warns on row norms off unity; throws on a numerically singular W.
    void validate() const;
};

/// The score-matching objective for fixed W as a quadratic form in the
/// upper-triangular dependency vector m:
///   J(m | W) = (1/2) m^T H m + m^T b,
/// H = (1/T) sum_t sum_k g_k g_k^T (positive semidefinite),
/// b = (1/T) sum_t sum_k h_k.
struct QuadraticForm
{
    Eigen::MatrixXd H;
    Eigen::VectorXd b;
};

/// Per-coordinate feature rows for one sample: row k of `gk` holds the
/// coefficients of m in psi_k, row k of `hk` those in d_k psi_k.
struct FeatureVectors
{
    Eigen::MatrixXd gk;
    Eigen::MatrixXd hk;
};

FeatureVectors feature_vectors(const Eigen::VectorXd& x, const UnmixingMatrix& W);

/// Score-matching objective
///   J(W, m) = (1/T) sum_t sum_k [ psi_k^2 / 2 + d_k psi_k ].
double objective_J(const Eigen::MatrixXd& X, const UnmixingMatrix& W,
                   const density::DependencyMatrix& M);

QuadraticForm assemble_quadratic(const Eigen::MatrixXd& X, const UnmixingMatrix& W);

/// Analytic gradient of objective_J with respect to the entries of W.
Eigen::MatrixXd grad_W(const Eigen::MatrixXd& X, const UnmixingMatrix& W,
                       const density::DependencyMatrix& M);

}  // namespace depca::scorematch

#endif  // DEPCA_SCOREMATCH_HPP_
