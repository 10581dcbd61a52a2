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

#include "depca/density.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/LU>

#include "depca/errors.hpp"

namespace depca::density
{
namespace
{

// 15-point Gauss-Kronrod rule on [-1, 1]; the embedded 7-point Gauss rule
// uses the even-indexed nodes. Standard QUADPACK constants.
constexpr int kKronrodPoints = 15;
constexpr double kKronrodNodes[kKronrodPoints] = {
    -0.991455371120813, -0.949107912342759, -0.864864423359769, -0.741531185599394,
    -0.586087235467691, -0.405845151377397, -0.207784955007898, 0.0,
    0.207784955007898,  0.405845151377397,  0.586087235467691,  0.741531185599394,
    0.864864423359769,  0.949107912342759,  0.991455371120813};
constexpr double kKronrodWeights[kKronrodPoints] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728,
    0.204432940075298, 0.190350578064785, 0.169004726639267, 0.140653259715525,
    0.104790010322250, 0.063092092629979, 0.022935322010529};
constexpr double kGaussWeights[7] = {0.129484966168870, 0.279705391489277, 0.381830050505119,
                                     0.417959183673469, 0.381830050505119, 0.279705391489277,
                                     0.129484966168870};

struct Interval
{
    double a;
    double b;
    double value;
    double error;
};

template <typename F>
Interval gauss_kronrod(const F& f, double a, double b)
{
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double kronrod = 0.0;
    double gauss = 0.0;
    for (int i = 0; i < kKronrodPoints; ++i)
    {
        double fx = f(mid + half * kKronrodNodes[i]);
        kronrod += kKronrodWeights[i] * fx;
        if (i % 2 == 1)
        {
            gauss += kGaussWeights[i / 2] * fx;
        }
    }
    kronrod *= half;
    gauss *= half;
    return {a, b, kronrod, std::abs(kronrod - gauss)};
}

// Adaptive bisection on [0, 1] with the worst interval refined first.
template <typename F>
double adaptive_quadrature(const F& f, double rel_tol, int max_intervals)
{
    std::vector<Interval> intervals;
    intervals.push_back(gauss_kronrod(f, 0.0, 0.5));
    intervals.push_back(gauss_kronrod(f, 0.5, 1.0));
    for (;;)
    {
        double total = 0.0;
        double err = 0.0;
        std::size_t worst = 0;
        for (std::size_t i = 0; i < intervals.size(); ++i)
        {
            total += intervals[i].value;
            err += intervals[i].error;
            if (intervals[i].error > intervals[worst].error)
            {
                worst = i;
            }
        }
        if (err <= rel_tol * std::abs(total) + 1e-300)
        {
            return total;
        }
        if (static_cast<int>(intervals.size()) >= max_intervals)
        {
            throw numerical_error("g_numeric: quadrature did not converge (" +
                                  std::to_string(intervals.size()) + " intervals, error " +
                                  std::to_string(err) + ", value " + std::to_string(total) + ")");
        }
        Interval w = intervals[worst];
        intervals[worst] = gauss_kronrod(f, w.a, 0.5 * (w.a + w.b));
        intervals.push_back(gauss_kronrod(f, 0.5 * (w.a + w.b), w.b));
    }
}

double phi_abs_or_smooth(double v, Smoothing smoothing)
{
    return smoothing == Smoothing::exact_abs ? std::abs(v) : nonlinearity(v).G;
}

}  // namespace

void DependencyMatrix::validate(bool require_row_dominance) const
{
    if (m.rows() != m.cols())
    {
        throw dimension_error("DependencyMatrix: matrix must be square");
    }
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 0.0)
    {
        throw parameter_error("DependencyMatrix: matrix must be symmetric");
    }
    if ((m.array() < 0.0).any())
    {
        throw parameter_error("DependencyMatrix: entries must be non-negative");
    }
    if (require_row_dominance && !row_dominant(1e-10))
    {
        throw parameter_error("DependencyMatrix: row dominance sum_{j!=i} m_ij <= m_ii violated");
    }
}

bool DependencyMatrix::row_dominant(double tol) const
{
    for (int i = 0; i < dim(); ++i)
    {
        double off = m.row(i).sum() - m(i, i);
        if (off > m(i, i) + tol)
        {
            return false;
        }
    }
    return true;
}

Eigen::VectorXd DependencyMatrix::upper_vector() const
{
    TriIndex tri(dim());
    Eigen::VectorXd out(tri.size());
    for (int k = 0; k < tri.size(); ++k)
    {
        auto [i, j] = tri.unflat(k);
        out[k] = m(i, j);
    }
    return out;
}

DependencyMatrix DependencyMatrix::from_upper(const Eigen::VectorXd& m_flat, int d)
{
    TriIndex tri(d);
    if (m_flat.size() != tri.size())
    {
        throw dimension_error("DependencyMatrix::from_upper: expected d(d+1)/2 entries");
    }
    DependencyMatrix M;
    M.m = Eigen::MatrixXd::Zero(d, d);
    for (int k = 0; k < tri.size(); ++k)
    {
        auto [i, j] = tri.unflat(k);
        M.m(i, j) = m_flat[k];
        M.m(j, i) = m_flat[k];
    }
    return M;
}

LogCosh nonlinearity(double v)
{
    const double a = std::abs(v);
    const double e = std::exp(-2.0 * a);  // in (0, 1], never overflows
    LogCosh out;
    out.G = a - M_LN2 + std::log1p(e);
    out.G1 = std::copysign((1.0 - e) / (1.0 + e), v);
    out.G2 = 4.0 * e / ((1.0 + e) * (1.0 + e));
    return out;
}

double nonlinearity_third(double v)
{
    LogCosh lc = nonlinearity(v);
    return -2.0 * lc.G2 * lc.G1;
}

double log_ptilde_s(const Eigen::VectorXd& s, const DependencyMatrix& M, Smoothing smoothing)
{
    const int d = M.dim();
    if (s.size() != d)
    {
        throw dimension_error("log_ptilde_s: dimension mismatch between s and M");
    }
    double acc = 0.0;
    for (int i = 0; i < d; ++i)
    {
        acc += M.m(i, i) * phi_abs_or_smooth(s[i], smoothing);
        for (int j = i + 1; j < d; ++j)
        {
            if (M.m(i, j) != 0.0)
            {
                acc += M.m(i, j) * phi_abs_or_smooth(s[i] - s[j], smoothing);
            }
        }
    }
    return -acc;
}

double log_ptilde_x(const Eigen::VectorXd& x, const Eigen::MatrixXd& W, const DependencyMatrix& M,
                    Smoothing smoothing)
{
    if (W.rows() != W.cols() || W.rows() != x.size())
    {
        throw dimension_error("log_ptilde_x: W must be square and match x");
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(W);
    double abs_det = std::abs(lu.determinant());
    if (!(abs_det > 0.0) || !std::isfinite(abs_det))
    {
        throw numerical_error("log_ptilde_x: W is singular");
    }
    return log_ptilde_s(W * x, M, smoothing) + std::log(abs_det);
}

double g_closed_form(double v, double m)
{
    if (v < 0.0)
    {
        throw parameter_error("g_closed_form: v must be non-negative");
    }
    return -m * std::sqrt(v);
}

double g_numeric(double v, const std::function<double(double)>& weight_density, bool with_sqrt)
{
    if (v < 0.0)
    {
        throw parameter_error("g_numeric: v must be non-negative");
    }
    // Substitution u = t / (1 - t) maps (0, inf) to (0, 1); du = dt / (1-t)^2.
    auto integrand = [&](double t) -> double
    {
        double one_minus = 1.0 - t;
        double u = t / one_minus;
        double damp = std::exp(-0.5 * v * u);
        if (damp == 0.0)
        {
            return 0.0;
        }
        double w = weight_density(u);
        if (with_sqrt)
        {
            w *= std::sqrt(u);
        }
        return damp * w / (one_minus * one_minus);
    };
    return adaptive_quadrature(integrand, 1e-8, 4000);
}

double log_ptilde_s_general(const Eigen::VectorXd& s, const DependencyMatrix& M,
                            const genmodel::SignPattern& theta, Smoothing smoothing)
{
    theta.validate();
    const int d = M.dim();
    if (s.size() != d || theta.theta.rows() != d)
    {
        throw dimension_error("log_ptilde_s_general: dimension mismatch");
    }
    const double eps = smoothing == Smoothing::log_cosh ? 1e-9 : 0.0;
    double acc = 0.0;
    for (int i = 0; i < d; ++i)
    {
        acc += theta.theta(i, i) * M.m(i, i) * phi_abs_or_smooth(s[i], smoothing);
        for (int j = i + 1; j < d; ++j)
        {
            if (M.m(i, j) == 0.0)
            {
                continue;
            }
            double z = theta.theta(i, i) * s[i] * s[i] + theta.theta(j, j) * s[j] * s[j] +
                       2.0 * theta.theta(i, j) * s[i] * s[j];
            // Tolerate rounding noise around an exact zero radicand.
            double scale = s[i] * s[i] + s[j] * s[j] + 1.0;
            if (z < -1e-12 * scale)
            {
                throw numerical_error("log_ptilde_s_general: negative radicand for pair (" +
                                      std::to_string(i) + ", " + std::to_string(j) + ")");
            }
            acc += M.m(i, j) * std::sqrt(std::max(z, 0.0) + eps);
        }
    }
    return -acc;
}

double inverse_gamma_density(double x, double shape, double scale)
{
    if (!(shape > 0.0) || !(scale > 0.0))
    {
        throw parameter_error("inverse_gamma_density: shape and scale must be positive");
    }
    if (x <= 0.0)
    {
        return 0.0;
    }
    double log_pdf = shape * std::log(scale) - std::lgamma(shape) - (shape + 1.0) * std::log(x) - scale / x;
    return std::exp(log_pdf);
}

}  // namespace depca::density
