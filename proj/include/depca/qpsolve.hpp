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

#ifndef DEPCA_QPSOLVE_HPP_
#define DEPCA_QPSOLVE_HPP_

#include <vector>

#include <Eigen/Dense>

#include "depca/scorematch.hpp"

namespace depca::qpsolve
{

/// Feasible set of the dependency vector (upper-triangular ordering):
///   m_ij >= 0 for all i <= j,
///   sum_{j != i} m_ij <= m_ii for every row i.
/// m = 0 is always feasible.
struct ConstraintSet
{
    int d;

    explicit ConstraintSet(int dim) : d(dim) {}

    int vector_size() const { return d * (d + 1) / 2; }
    int count() const { return vector_size() + d; }

    /// All constraint normals as columns of a (p x count) matrix; the
    /// feasible set is { m : normals^T m >= 0 }.
    Eigen::MatrixXd normals() const;

    /// Values normals^T m; non-negative iff feasible.
    Eigen::VectorXd evaluate(const Eigen::VectorXd& m) const;

    bool feasible(const Eigen::VectorXd& m, double tol) const;
};

enum class QPStatus
{
    optimal,
    max_iter,
    numerical,
};

struct QPSolution
{
    Eigen::VectorXd m;
    double kkt_residual = 0.0;
    int iterations = 0;
    QPStatus status = QPStatus::optimal;
    double ridge = 0.0;  // diagonal regularization added to H, 0 if none
    /// Objective after each resolved constraint. The dual active-set
    /// method walks up from the unconstrained minimum, so the trace is
    /// non-decreasing and ends at the constrained optimum.
    std::vector<double> objective_trace;
};

struct QPOptions
{
    double kkt_tol = 1e-6;
    int max_iter = 0;  // 0: solver picks a cap from the problem size
};

/// Minimize (1/2) m^T H m + m^T (b + lambda 1) over the ConstraintSet.
/// H must be positive semidefinite; a ridge of 1e-10 trace(H) is added
/// when the smallest eigenvalue falls below 1e-12 trace(H).
QPSolution solve_dependency_qp(const scorematch::QuadraticForm& q, int d, double lambda,
                               const QPOptions& options = {});

/// Infinity norm of the KKT stationarity residual at m, with multipliers
/// recovered by non-negative least squares on the active constraints,
/// plus the complementarity violation. Throws if m is infeasible.
double kkt_residual(const scorematch::QuadraticForm& q, int d, double lambda,
                    const Eigen::VectorXd& m);

}  // namespace depca::qpsolve

#endif  // DEPCA_QPSOLVE_HPP_
