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

#include "depca/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "depca/errors.hpp"

namespace depca::eval
{
namespace
{

// O(n^3) Hungarian assignment (potentials + shortest augmenting paths),
// minimizing the total cost.
std::vector<int> hungarian_min(const Eigen::MatrixXd& cost)
{
    const int n = static_cast<int>(cost.rows());
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i)
    {
        p[0] = i;
        int j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::vector<bool> used(n + 1, false);
        do
        {
            used[j0] = true;
            int i0 = p[j0];
            int j1 = 0;
            double delta = inf;
            for (int j = 1; j <= n; ++j)
            {
                if (used[j])
                {
                    continue;
                }
                double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j])
                {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta)
                {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j)
            {
                if (used[j])
                {
                    u[p[j]] += delta;
                    v[j] -= delta;
                }
                else
                {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do
        {
            int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<int> row_to_col(n, -1);
    for (int j = 1; j <= n; ++j)
    {
        if (p[j] != 0)
        {
            row_to_col[p[j] - 1] = j - 1;
        }
    }
    return row_to_col;
}

void measures_against(const Eigen::MatrixXd& hist_mass, const Eigen::MatrixXd& model_mass,
                      DensityMeasures& out)
{
    double dot = hist_mass.cwiseProduct(model_mass).sum();
    double na = hist_mass.squaredNorm();
    double nb = model_mass.squaredNorm();
    out.ang = dot / std::sqrt(na * nb);
    double kl = 0.0;
    double sq = 0.0;
    for (int i = 0; i < hist_mass.rows(); ++i)
    {
        for (int j = 0; j < hist_mass.cols(); ++j)
        {
            double ph = hist_mass(i, j);
            double pm = std::max(model_mass(i, j), 1e-300);
            if (ph > 0.0)
            {
                kl += std::log(ph / pm) * ph;
            }
            double diff = hist_mass(i, j) - model_mass(i, j);
            sq += diff * diff * ph;
        }
    }
    out.kl = kl;
    out.sq = sq;
}

double quantile_sorted(const std::vector<double>& sorted, double q)
{
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

Eigen::MatrixXd normalize_grid(Eigen::MatrixXd log_density)
{
    double max_log = log_density.maxCoeff();
    Eigen::MatrixXd mass = (log_density.array() - max_log).exp();
    return mass / mass.sum();
}

}  // namespace

PerformanceMatrix performance_matrix(const Eigen::MatrixXd& W_hat, const Eigen::MatrixXd& A_true,
                                     const preprocess::WhiteningTransform* whitening)
{
    PerformanceMatrix out;
    if (whitening != nullptr)
    {
        if (whitening->d0 != A_true.rows() || W_hat.cols() != whitening->d)
        {
            throw dimension_error("performance_matrix: whitening map does not match W/A");
        }
        out.p = W_hat * (whitening->projection * A_true);
    }
    else
    {
        if (W_hat.cols() != A_true.rows())
        {
            throw dimension_error("performance_matrix: W and A dimensions do not match");
        }
        out.p = W_hat * A_true;
    }
    return out;
}

PermutationMatch match_permutation(const PerformanceMatrix& P)
{
    if (P.p.rows() != P.p.cols())
    {
        throw dimension_error("match_permutation: P must be square");
    }
    const int d = static_cast<int>(P.p.rows());
    PermutationMatch match;
    match.perm = hungarian_min(-P.p.cwiseAbs());
    match.signs.resize(d);
    for (int i = 0; i < d; ++i)
    {
        match.signs[i] = P.p(i, match.perm[i]) < 0.0 ? -1.0 : 1.0;
    }
    return match;
}

double amari_index(const PerformanceMatrix& P)
{
    const Eigen::MatrixXd a = P.p.cwiseAbs();
    const int d = static_cast<int>(a.rows());
    if (d != a.cols() || d < 2)
    {
        throw dimension_error("amari_index: P must be square with d >= 2");
    }
    if ((a.rowwise().maxCoeff().array() <= 0.0).any() ||
        (a.colwise().maxCoeff().array() <= 0.0).any())
    {
        throw numerical_error("amari_index: degenerate input with a zero row or column");
    }
    double rows = (a.rowwise().sum().array() / a.rowwise().maxCoeff().array() - 1.0).sum();
    double cols = (a.colwise().sum().array() / a.colwise().maxCoeff().array() - 1.0).sum();
    return (rows + cols) / (2.0 * d * (d - 1));
}

Eigen::MatrixXd normalize_dependency(const Eigen::MatrixXd& M_hat)
{
    if (M_hat.rows() != M_hat.cols())
    {
        throw dimension_error("normalize_dependency: matrix must be square");
    }
    const int d = static_cast<int>(M_hat.rows());
    std::vector<bool> degenerate(d, false);
    int n_degenerate = 0;
    for (int i = 0; i < d; ++i)
    {
        if (M_hat(i, i) < 1e-12)
        {
            degenerate[i] = true;
            ++n_degenerate;
        }
    }
    if (n_degenerate > 0)
    {
        warn("normalize_dependency: " + std::to_string(n_degenerate) +
             " diagonal entries below 1e-12; their off-diagonals normalized to 0");
    }
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i < d; ++i)
    {
        out(i, i) = 1.0;
        for (int j = i + 1; j < d; ++j)
        {
            if (!degenerate[i] && !degenerate[j])
            {
                out(i, j) = M_hat(i, j) / std::sqrt(M_hat(i, i) * M_hat(j, j));
                out(j, i) = out(i, j);
            }
        }
    }
    return out;
}

Eigen::MatrixXd reference_matrix(const genmodel::GenerationSpec& spec)
{
    spec.validate();
    const int d = spec.d;
    Eigen::MatrixXd ref = Eigen::MatrixXd::Identity(d, d);
    if (spec.pattern.empty())
    {
        return ref;
    }
    const double m_diag = std::sqrt(spec.scale_diag);
    const double m_off = std::sqrt(spec.scale_off);
    // Row sums of the m' matrix, diagonal included.
    Eigen::VectorXd row_sum = Eigen::VectorXd::Constant(d, m_diag);
    for (auto [i, j] : spec.pattern)
    {
        row_sum[i] += m_off;
        row_sum[j] += m_off;
    }
    for (auto [i, j] : spec.pattern)
    {
        double value = m_off / std::sqrt(row_sum[i] * row_sum[j]);
        ref(i, j) = value;
        ref(j, i) = value;
    }
    return ref;
}

double error_M(const Eigen::MatrixXd& M_hat, const Eigen::MatrixXd& M_ref,
               const PermutationMatch* match)
{
    if (M_hat.rows() != M_ref.rows() || M_hat.cols() != M_ref.cols())
    {
        throw dimension_error("error_M: dimension mismatch");
    }
    Eigen::MatrixXd aligned = M_hat;
    if (match != nullptr)
    {
        const int d = static_cast<int>(M_hat.rows());
        if (static_cast<int>(match->perm.size()) != d)
        {
            throw dimension_error("error_M: permutation size mismatch");
        }
        // Estimated component i plays the role of source perm[i].
        for (int i = 0; i < d; ++i)
        {
            for (int j = 0; j < d; ++j)
            {
                aligned(match->perm[i], match->perm[j]) = M_hat(i, j);
            }
        }
    }
    return (M_ref - normalize_dependency(aligned)).norm();
}

CorrelationMatrices correlation_matrices(const Eigen::MatrixXd& S)
{
    const long T = S.rows();
    if (T < 2)
    {
        throw dimension_error("correlation_matrices: need at least 2 samples");
    }
    auto pearson = [&](const Eigen::MatrixXd& M) -> Eigen::MatrixXd
    {
        Eigen::MatrixXd centered = M.rowwise() - M.colwise().mean();
        Eigen::VectorXd sd = (centered.colwise().squaredNorm() / static_cast<double>(T))
                                 .cwiseSqrt()
                                 .transpose();
        if ((sd.array() <= 0.0).any())
        {
            throw numerical_error("correlation_matrices: zero-variance column");
        }
        Eigen::MatrixXd corr = centered.transpose() * centered / static_cast<double>(T);
        corr = sd.cwiseInverse().asDiagonal() * corr * sd.cwiseInverse().asDiagonal();
        return corr;
    };
    CorrelationMatrices out;
    out.linear = pearson(S);
    out.energy = pearson(S.array().square().matrix());
    return out;
}

DensityComparison density_comparison(const Eigen::MatrixXd& S2, const density::DependencyMatrix& M,
                                     int bins, double quantile)
{
    if (S2.cols() != 2 || M.dim() != 2)
    {
        throw dimension_error("density_comparison: requires 2-D samples and a 2x2 M");
    }
    if (bins < 2)
    {
        throw parameter_error("density_comparison: bins must be >= 2");
    }
    const long T = S2.rows();
    if (T < 10)
    {
        throw dimension_error("density_comparison: too few samples");
    }

    // Histogram support from empirical quantiles per axis.
    Eigen::Vector2d lo, hi;
    for (int axis = 0; axis < 2; ++axis)
    {
        std::vector<double> sorted(S2.col(axis).data(), S2.col(axis).data() + T);
        std::sort(sorted.begin(), sorted.end());
        lo[axis] = quantile_sorted(sorted, quantile);
        hi[axis] = quantile_sorted(sorted, 1.0 - quantile);
        if (!(hi[axis] > lo[axis]))
        {
            throw numerical_error("density_comparison: degenerate support on axis " +
                                  std::to_string(axis));
        }
    }

    DensityComparison out;
    out.hist.xedges = Eigen::VectorXd::LinSpaced(bins + 1, lo[0], hi[0]);
    out.hist.yedges = Eigen::VectorXd::LinSpaced(bins + 1, lo[1], hi[1]);
    Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(bins, bins);
    const double wx = (hi[0] - lo[0]) / bins;
    const double wy = (hi[1] - lo[1]) / bins;
    long in_range = 0;
    for (long t = 0; t < T; ++t)
    {
        double x = S2(t, 0);
        double y = S2(t, 1);
        if (x < lo[0] || x > hi[0] || y < lo[1] || y > hi[1])
        {
            continue;
        }
        int bx = std::min(static_cast<int>((x - lo[0]) / wx), bins - 1);
        int by = std::min(static_cast<int>((y - lo[1]) / wy), bins - 1);
        counts(bx, by) += 1.0;
        ++in_range;
    }
    if (in_range == 0)
    {
        throw numerical_error("density_comparison: no samples inside the grid");
    }
    double empty_fraction = (counts.array() == 0.0).count() / static_cast<double>(bins * bins);
    if (empty_fraction > 0.5)
    {
        throw numerical_error("density_comparison: " + std::to_string(empty_fraction * 100.0) +
                              "% of the grid bins are empty; widen bins or add samples");
    }
    out.hist.mass = counts / static_cast<double>(in_range);
    out.hist.total_count = in_range;

    // Bin centers.
    Eigen::VectorXd cx(bins), cy(bins);
    for (int i = 0; i < bins; ++i)
    {
        cx[i] = 0.5 * (out.hist.xedges[i] + out.hist.xedges[i + 1]);
        cy[i] = 0.5 * (out.hist.yedges[i] + out.hist.yedges[i + 1]);
    }

    // Model density on the grid (exact |.| form).
    Eigen::MatrixXd log_model(bins, bins);
    Eigen::VectorXd s(2);
    for (int i = 0; i < bins; ++i)
    {
        for (int j = 0; j < bins; ++j)
        {
            s << cx[i], cy[j];
            log_model(i, j) = density::log_ptilde_s(s, M, density::Smoothing::exact_abs);
        }
    }

    // Moment-matched Gaussian baseline.
    Eigen::Vector2d mean = S2.colwise().mean().transpose();
    Eigen::MatrixXd centered = S2.rowwise() - mean.transpose();
    Eigen::Matrix2d cov = centered.transpose() * centered / static_cast<double>(T);
    Eigen::Matrix2d prec = cov.inverse();
    Eigen::MatrixXd log_gauss(bins, bins);
    for (int i = 0; i < bins; ++i)
    {
        for (int j = 0; j < bins; ++j)
        {
            Eigen::Vector2d v(cx[i] - mean[0], cy[j] - mean[1]);
            log_gauss(i, j) = -0.5 * v.dot(prec * v);
        }
    }

    // Factorizable Laplace baseline with matched mean and variance.
    Eigen::Vector2d scale = (centered.colwise().squaredNorm() / static_cast<double>(T))
                                .cwiseSqrt()
                                .transpose() /
                            std::sqrt(2.0);
    Eigen::MatrixXd log_laplace(bins, bins);
    for (int i = 0; i < bins; ++i)
    {
        for (int j = 0; j < bins; ++j)
        {
            log_laplace(i, j) =
                -std::abs(cx[i] - mean[0]) / scale[0] - std::abs(cy[j] - mean[1]) / scale[1];
        }
    }

    measures_against(out.hist.mass, normalize_grid(log_model), out.model);
    measures_against(out.hist.mass, normalize_grid(log_gauss), out.gauss);
    measures_against(out.hist.mass, normalize_grid(log_laplace), out.laplace);
    return out;
}

MdsEmbedding mds_embedding(const Eigen::MatrixXd& M_hat)
{
    const int d = static_cast<int>(M_hat.rows());
    MdsEmbedding out;
    Eigen::MatrixXd normalized = normalize_dependency(M_hat);
    out.distance = (1.0 - normalized.array().cwiseMax(0.0).sqrt()).matrix();
    out.distance.diagonal().setZero();

    // Classical MDS: double-center -D o D / 2, then the top-2 eigenpairs.
    Eigen::MatrixXd center =
        Eigen::MatrixXd::Identity(d, d) - Eigen::MatrixXd::Constant(d, d, 1.0 / d);
    Eigen::MatrixXd B =
        -0.5 * center * out.distance.cwiseProduct(out.distance) * center;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(B);
    out.coords = Eigen::MatrixXd::Zero(d, 2);
    const double floor = 1e-12 * std::max(eig.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
    for (int k = 0; k < 2 && k < d; ++k)
    {
        double value = eig.eigenvalues()[d - 1 - k];
        Eigen::VectorXd vec = eig.eigenvectors().col(d - 1 - k);
        if (value < -floor)
        {
            warn("mds_embedding: clamping negative eigenvalue " + std::to_string(value));
        }
        if (value < floor)
        {
            value = 0.0;  // rank deficiency or rounding noise
        }
        // Fix the sign so the embedding is reproducible.
        int argmax = 0;
        vec.cwiseAbs().maxCoeff(&argmax);
        if (vec[argmax] < 0.0)
        {
            vec = -vec;
        }
        out.coords.col(k) = vec * std::sqrt(value);
    }
    return out;
}

}  // namespace depca::eval
