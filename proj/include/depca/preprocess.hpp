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

#ifndef DEPCA_PREPROCESS_HPP_
#define DEPCA_PREPROCESS_HPP_

#include <Eigen/Dense>

namespace depca::preprocess
{

/// PCA whitening map fitted on training data: z = projection (x - mean).
/// Rows of `projection` are the whitened directions lambda^(-1/2) e_i for
/// the retained eigenpairs, eigenvalues stored in descending order.
struct WhiteningTransform
{
    Eigen::VectorXd mean;        // input-space mean (d0)
    Eigen::MatrixXd projection;  // d x d0
    Eigen::VectorXd eigenvalues; // all d0 eigenvalues, descending
    int d0 = 0;
    int d = 0;

    /// Identity transform (zero mean, unit projection).
    static WhiteningTransform identity(int dim);

    /// Pack into one matrix for the CLI file format: row 0 mean, row 1
    /// eigenvalues, remaining d rows the projection.
    Eigen::MatrixXd to_matrix() const;
    static WhiteningTransform from_matrix(const Eigen::MatrixXd& packed);
};

/// Remove each row's DC component, then rescale the row to unit norm.
/// Rows that are zero after centering are dropped with a warning.
Eigen::MatrixXd remove_dc_and_normalize(const Eigen::MatrixXd& X);

WhiteningTransform fit_whitening(const Eigen::MatrixXd& X, int d_keep);

Eigen::MatrixXd apply_whitening(const WhiteningTransform& t, const Eigen::MatrixXd& X);

/// Original-space basis vectors for an unmixing matrix estimated in the
/// whitened space: columns of pinv(projection) * W_hat^-1.
Eigen::MatrixXd unmix_to_original(const WhiteningTransform& t, const Eigen::MatrixXd& W_hat);

}  // namespace depca::preprocess

#endif  // DEPCA_PREPROCESS_HPP_
