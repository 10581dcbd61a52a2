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

#ifndef DEPCA_GENMODEL_HPP_
#define DEPCA_GENMODEL_HPP_

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "depca/rng.hpp"

namespace depca::genmodel
{

/// Symmetric non-negative weight matrix U of the random-precision model.
/// Off-diagonal weights couple component pairs; diagonal weights must be
/// strictly positive so the induced precision matrix is invertible.
struct WeightMatrix
{
    Eigen::MatrixXd u;

    void validate() const;
};

/// Precision matrix Lambda built from a WeightMatrix: symmetric, strictly
/// diagonally dominant with positive diagonal, hence positive definite.
struct PrecisionMatrix
{
    Eigen::MatrixXd lambda;

    void validate() const;
};

/// Deterministic sign structure of the generalized precision model:
/// positive diagonal, off-diagonal entries in {-1, 0, +1}, and
/// theta_ii >= |theta_ij| so diagonal dominance survives the Hadamard
/// product.
struct SignPattern
{
    Eigen::MatrixXd theta;

    void validate() const;

    /// theta_ii = 1, theta_ij = -1: reproduces the plain Laplacian model.
    static SignPattern laplacian_default(int d);
};

/// Declarative description of a synthetic experiment. Weights are drawn
/// from inverse-Gamma laws with density proportional to
/// x^(-shape-1) exp(-scale/x); diagonal entries and patterned off-diagonal
/// entries use separate (shape, scale) classes. `pattern` holds 0-based
/// (i, j) pairs with i < j; all other off-diagonal weights are exactly
/// zero.
struct GenerationSpec
{
    int d = 2;
    long T = 1;
    double shape_diag = 2.0;
    double scale_diag = 1.0;
    double shape_off = 2.0;
    double scale_off = 1.0 / 3.0;
    std::vector<std::pair<int, int>> pattern;
    std::uint64_t seed = 0;

    void validate() const;

    /// Dependency pattern coupling the first `block` components pairwise.
    static GenerationSpec block_spec(int d, long T, int block);
};

/// One synthetic dataset: observations X (T x d), mixing matrix A (d x d),
/// standardized sources S (T x d). A fresh weight matrix (and hence a
/// fresh precision matrix) is drawn for every sample.
struct Dataset
{
    Eigen::MatrixXd X;
    Eigen::MatrixXd A;
    Eigen::MatrixXd S;
    bool per_sample_weights = true;
};

/// n draws from the inverse-Gamma law with density ~ x^(-shape-1) exp(-scale/x).
Eigen::VectorXd sample_inverse_gamma(double shape, double scale, int n, Rng& rng);

WeightMatrix sample_weights(const GenerationSpec& spec, Rng& rng);

/// Weighted-graph Laplacian: lambda_ij = -u_ij (i != j), lambda_ii = sum_k u_ik.
PrecisionMatrix build_precision(const WeightMatrix& u);

/// Generalized precision Lambda = Omega o Theta (entrywise) with
/// omega_ii = sum_k u_ik and omega_ij = u_ij.
PrecisionMatrix build_precision_general(const WeightMatrix& u, const SignPattern& theta);

/// T i.i.d. zero-mean Gaussian rows with the given precision, sampled by
/// solving L^T s = z against the Cholesky factor.
Eigen::MatrixXd sample_sources(const PrecisionMatrix& lambda, long T, Rng& rng);

Dataset generate_dataset(const GenerationSpec& spec, Rng& rng);

}  // namespace depca::genmodel

#endif  // DEPCA_GENMODEL_HPP_
