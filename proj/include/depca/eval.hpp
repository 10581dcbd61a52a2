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

#ifndef DEPCA_EVAL_HPP_
#define DEPCA_EVAL_HPP_

#include <vector>

#include <Eigen/Dense>

#include "depca/density.hpp"
#include "depca/genmodel.hpp"
#include "depca/preprocess.hpp"

namespace depca::eval
{

/// P = W A (composed with the whitening map when estimation ran in the
/// whitened space). Close to a scaled permutation means good separation.
struct PerformanceMatrix
{
    Eigen::MatrixXd p;
};

/// Row-to-column assignment sigma and per-row signs that make the
/// reordered diagonal of P non-negative.
struct PermutationMatch
{
    std::vector<int> perm;  // row i matched to column perm[i]
    Eigen::VectorXd signs;  // +-1 per row
};

struct Histogram2D
{
    Eigen::VectorXd xedges;
    Eigen::VectorXd yedges;
    Eigen::MatrixXd mass;  // bins x bins, sums to 1
    long total_count = 0;
};

struct DensityMeasures
{
    double ang = 0.0;  // cosine between mass vectors (larger is better)
    double kl = 0.0;   // KL divergence (smaller is better)
    double sq = 0.0;   // histogram-weighted squared distance
};

struct DensityComparison
{
    DensityMeasures model;
    DensityMeasures gauss;
    DensityMeasures laplace;
    Histogram2D hist;
};

struct CorrelationMatrices
{
    Eigen::MatrixXd linear;
    Eigen::MatrixXd energy;  // correlation of the squared components
};

struct MdsEmbedding
{
    Eigen::MatrixXd distance;  // d x d, 1 - sqrt(normalized dependency)
    Eigen::MatrixXd coords;    // d x 2
};

PerformanceMatrix performance_matrix(const Eigen::MatrixXd& W_hat, const Eigen::MatrixXd& A_true,
                                     const preprocess::WhiteningTransform* whitening = nullptr);

/// Optimal assignment maximizing sum_i |P(i, sigma(i))| over permutations.
PermutationMatch match_permutation(const PerformanceMatrix& P);

/// Amari index in [0, 1]; 0 iff P is a scaled signed permutation.
double amari_index(const PerformanceMatrix& P);

/// M'_ij = m_ij / sqrt(m_ii m_jj); unit diagonal. Diagonal entries below
/// 1e-12 zero out their row/column off-diagonals with a warning.
Eigen::MatrixXd normalize_dependency(const Eigen::MatrixXd& M_hat);

/// Reference dependency matrix of a synthetic spec: identity for
/// independent sources, diagonally dominant block structure otherwise
/// (off-diagonals m'_ij / sqrt(rowsum_i rowsum_j), sums including the
/// diagonal).
Eigen::MatrixXd reference_matrix(const genmodel::GenerationSpec& spec);

/// Frobenius distance between the reference and the normalized estimate,
/// after aligning the estimate's index set with `match` (rows and columns
/// permuted identically). Pass nullptr when already aligned.
double error_M(const Eigen::MatrixXd& M_hat, const Eigen::MatrixXd& M_ref,
               const PermutationMatch* match = nullptr);

CorrelationMatrices correlation_matrices(const Eigen::MatrixXd& S);

/// 2-D goodness-of-approximation protocol: histogram the sample on an
/// N x N grid over the [quantile, 1-quantile] range per axis, evaluate
/// the model density and moment-matched Gaussian / factorizable-Laplace
/// baselines on the bin centers, and compare with the three measures.
DensityComparison density_comparison(const Eigen::MatrixXd& S2, const density::DependencyMatrix& M,
                                     int bins, double quantile = 0.001);

/// Distance matrix 1 - sqrt(M') and its classical 2-D MDS embedding.
MdsEmbedding mds_embedding(const Eigen::MatrixXd& M_hat);

}  // namespace depca::eval

#endif  // DEPCA_EVAL_HPP_
