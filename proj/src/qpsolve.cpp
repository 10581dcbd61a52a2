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

#include "depca/qpsolve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "depca/errors.hpp"
#include "depca/triangular.hpp"

namespace depca::qpsolve
{
namespace
{

constexpr double kInf = std::numeric_limits<double>::infinity();

// Dual active-set method of Goldfarb and Idnani for strictly convex QP:
//   min (1/2) x^T G x + a^T x   s.t.   C^T x >= 0.
// Starts from the unconstrained minimizer and adds the most violated
// constraint at each step, maintaining J = L^-T Q and the triangular
// factor R of the active-normal basis through Givens rotations.
struct GiSolver
{
    const Eigen::MatrixXd& G;
    const Eigen::VectorXd& a;
    const Eigen::MatrixXd& C;
    int n;
    int m;
    Eigen::MatrixXd J;
    Eigen::MatrixXd R;
    Eigen::VectorXd x;
    std::vector<int> active;
    Eigen::VectorXd u;
    std::vector<double> trace;
    int iterations = 0;
    bool hit_cap = false;

    GiSolver(const Eigen::LLT<Eigen::MatrixXd>& llt, const Eigen::MatrixXd& hessian,
             const Eigen::VectorXd& linear, const Eigen::MatrixXd& constraints)
        : G(hessian),
          a(linear),
          C(constraints),
          n(static_cast<int>(linear.size())),
          m(static_cast<int>(constraints.cols())),
          R(Eigen::MatrixXd::Zero(n, n)),
          u(Eigen::VectorXd::Zero(n))
    {
        J = llt.matrixU().solve(Eigen::MatrixXd::Identity(n, n));
        x = llt.solve(-a);
        trace.push_back(objective());
    }

    double objective() const { return 0.5 * x.dot(G * x) + x.dot(a); }

    void givens(double& a, double& b, double& c, double& s) const
    {
        double r = std::hypot(a, b);
        if (r == 0.0)
        {
            c = 1.0;
            s = 0.0;
            return;
        }
        c = a / r;
        s = b / r;
        a = r;
        b = 0.0;
    }

    // Zero d[q+1..n-1] with rotations applied to the columns of J; the
    // surviving head of d becomes the new column of R.
    bool add_constraint(Eigen::VectorXd& d)
    {
        const int q = static_cast<int>(active.size());
        for (int j = n - 1; j > q; --j)
        {
            double c, s;
            givens(d[j - 1], d[j], c, s);
            Eigen::VectorXd col1 = J.col(j - 1);
            J.col(j - 1) = c * col1 + s * J.col(j);
            J.col(j) = -s * col1 + c * J.col(j);
        }
        if (std::abs(d[q]) < 1e-13 * (1.0 + d.head(q + 1).cwiseAbs().maxCoeff()))
        {
            return false;  // dependent normal; caller treats as numerical trouble
        }
        R.col(q).head(q + 1) = d.head(q + 1);
        return true;
    }

    void drop_constraint(int l)
    {
        const int q = static_cast<int>(active.size());
        active.erase(active.begin() + l);
        for (int k = l; k + 1 < q; ++k)
        {
            u[k] = u[k + 1];
        }
        u[q - 1] = 0.0;
        // Shift trailing columns of R left, then restore the triangle.
        for (int col = l; col + 1 < q; ++col)
        {
            R.col(col).head(q) = R.col(col + 1).head(q);
        }
        R.col(q - 1).setZero();
        for (int k = l; k < q - 1; ++k)
        {
            double c, s;
            givens(R(k, k), R(k + 1, k), c, s);
            for (int col = k + 1; col < q - 1; ++col)
            {
                double t1 = R(k, col);
                double t2 = R(k + 1, col);
                R(k, col) = c * t1 + s * t2;
                R(k + 1, col) = -s * t1 + c * t2;
            }
            Eigen::VectorXd col1 = J.col(k);
            J.col(k) = c * col1 + s * J.col(k + 1);
            J.col(k + 1) = -s * col1 + c * J.col(k + 1);
        }
    }

    QPStatus run(int max_iter)
    {
        const double feas_tol = 1e-12;
        for (iterations = 0; iterations < max_iter; ++iterations)
        {
            // Most violated inactive constraint.
            int pick = -1;
            double worst = -feas_tol * (1.0 + x.cwiseAbs().maxCoeff());
            Eigen::VectorXd s = C.transpose() * x;
            for (int i = 0; i < m; ++i)
            {
                bool is_active = std::find(active.begin(), active.end(), i) != active.end();
                if (!is_active && s[i] < worst)
                {
                    worst = s[i];
                    pick = i;
                }
            }
            if (pick < 0)
            {
                return QPStatus::optimal;
            }

            const Eigen::VectorXd np = C.col(pick);
            double u_incoming = 0.0;
            double s_pick = s[pick];

            for (;;)
            {
                const int q = static_cast<int>(active.size());
                Eigen::VectorXd d = J.transpose() * np;
                Eigen::VectorXd z = J.rightCols(n - q) * d.tail(n - q);
                Eigen::VectorXd r;
                if (q > 0)
                {
                    r = R.topLeftCorner(q, q)
                            .triangularView<Eigen::Upper>()
                            .solve(d.head(q));
                }

                double t1 = kInf;
                int drop = -1;
                for (int k = 0; k < q; ++k)
                {
                    if (r[k] > 1e-14 && u[k] / r[k] < t1)
                    {
                        t1 = u[k] / r[k];
                        drop = k;
                    }
                }
                double ztnp = z.dot(np);
                double t2 = ztnp > 1e-14 ? -s_pick / ztnp : kInf;
                double t = std::min(t1, t2);

                if (t >= kInf)
                {
                    return QPStatus::numerical;  // infeasible; cannot happen for this cone
                }

                if (t2 >= kInf)
                {
                    // Dual-only step: drop the blocking constraint and retry.
                    u.head(q) -= t * r;
                    u_incoming += t;
                    drop_constraint(drop);
                    continue;
                }

                x += t * z;
                u.head(q) -= t * r;
                u_incoming += t;
                s_pick += t * ztnp;

                if (t == t2)
                {
                    if (!add_constraint(d))
                    {
                        return QPStatus::numerical;
                    }
                    u[q] = u_incoming;
                    active.push_back(pick);
                    trace.push_back(objective());
                    break;
                }
                drop_constraint(drop);
            }
        }
        hit_cap = true;
        return QPStatus::max_iter;
    }
};

// Clears rounding-level noise (negative entries, sub-tolerance
// off-diagonals) and, if material row violations remain (max_iter
// iterates), shrinks the off-diagonals uniformly so the returned point is
// always feasible.
Eigen::VectorXd repair_feasibility(const Eigen::VectorXd& m_in, int d)
{
    TriIndex tri(d);
    Eigen::VectorXd m = m_in.cwiseMax(0.0);
    const double noise = 1e-12 * (1.0 + m.maxCoeff());
    Eigen::VectorXd row_off = Eigen::VectorXd::Zero(d);
    for (int k = 0; k < tri.size(); ++k)
    {
        auto [i, j] = tri.unflat(k);
        if (i != j)
        {
            if (m[k] < noise)
            {
                m[k] = 0.0;
            }
            row_off[i] += m[k];
            row_off[j] += m[k];
        }
    }
    double shrink = 1.0;
    for (int i = 0; i < d; ++i)
    {
        int kd = tri.flat(i, i);
        if (row_off[i] > m[kd] && row_off[i] <= m[kd] + noise)
        {
            m[kd] = row_off[i];  // absorb rounding into the diagonal
        }
        else if (row_off[i] > m[kd])
        {
            shrink = std::min(shrink, m[kd] / row_off[i]);
        }
    }
    if (shrink < 1.0)
    {
        for (int k = 0; k < tri.size(); ++k)
        {
            auto [i, j] = tri.unflat(k);
            if (i != j)
            {
                m[k] *= shrink;
            }
        }
    }
    return m;
}

// Lawson-Hanson non-negative least squares, min ||A mu - y|| s.t. mu >= 0.
Eigen::VectorXd nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& y)
{
    const int cols = static_cast<int>(A.cols());
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(cols);
    std::vector<bool> passive(cols, false);
    const double tol = 1e-12 * (1.0 + y.cwiseAbs().maxCoeff());

    for (int guard = 0; guard < 10 * cols + 10; ++guard)
    {
        Eigen::VectorXd w = A.transpose() * (y - A * mu);
        int best = -1;
        double best_w = tol;
        for (int k = 0; k < cols; ++k)
        {
            if (!passive[k] && w[k] > best_w)
            {
                best_w = w[k];
                best = k;
            }
        }
        if (best < 0)
        {
            break;
        }
        passive[best] = true;

        for (;;)
        {
            std::vector<int> idx;
            for (int k = 0; k < cols; ++k)
            {
                if (passive[k])
                {
                    idx.push_back(k);
                }
            }
            Eigen::MatrixXd Ap(A.rows(), idx.size());
            for (std::size_t c = 0; c < idx.size(); ++c)
            {
                Ap.col(c) = A.col(idx[c]);
            }
            Eigen::VectorXd z = Ap.colPivHouseholderQr().solve(y);
            if ((z.array() > 0.0).all())
            {
                mu.setZero();
                for (std::size_t c = 0; c < idx.size(); ++c)
                {
                    mu[idx[c]] = z[c];
                }
                break;
            }
            // Step back to the boundary and retire a variable.
            double alpha = kInf;
            for (std::size_t c = 0; c < idx.size(); ++c)
            {
                if (z[c] <= 0.0)
                {
                    double a = mu[idx[c]] / (mu[idx[c]] - z[c]);
                    alpha = std::min(alpha, a);
                }
            }
            for (std::size_t c = 0; c < idx.size(); ++c)
            {
                mu[idx[c]] += alpha * (z[c] - mu[idx[c]]);
                if (mu[idx[c]] <= 1e-14)
                {
                    mu[idx[c]] = 0.0;
                    passive[idx[c]] = false;
                }
            }
        }
    }
    return mu;
}

void check_inputs(const scorematch::QuadraticForm& q, int d, double lambda)
{
    TriIndex tri(d);
    if (q.H.rows() != tri.size() || q.H.cols() != tri.size() || q.b.size() != tri.size())
    {
        throw dimension_error("solve_dependency_qp: H/b size does not match d(d+1)/2");
    }
    if (!q.H.allFinite() || !q.b.allFinite())
    {
        throw parameter_error("solve_dependency_qp: H or b contains non-finite values");
    }
    if (lambda < 0.0)
    {
        throw parameter_error("solve_dependency_qp: lambda must be non-negative");
    }
}

}  // namespace

Eigen::MatrixXd ConstraintSet::normals() const
{
    TriIndex tri(d);
    const int p = tri.size();
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(p, count());
    C.topLeftCorner(p, p).setIdentity();
    for (int i = 0; i < d; ++i)
    {
        int col = p + i;
        C(tri.flat(i, i), col) = 1.0;
        for (int j = 0; j < d; ++j)
        {
            if (j != i)
            {
                C(tri.flat(i, j), col) = -1.0;
            }
        }
    }
    return C;
}

Eigen::VectorXd ConstraintSet::evaluate(const Eigen::VectorXd& m) const
{
    TriIndex tri(d);
    if (m.size() != tri.size())
    {
        throw dimension_error("ConstraintSet::evaluate: wrong vector size");
    }
    Eigen::VectorXd vals(count());
    vals.head(tri.size()) = m;
    for (int i = 0; i < d; ++i)
    {
        double row = m[tri.flat(i, i)];
        for (int j = 0; j < d; ++j)
        {
            if (j != i)
            {
                row -= m[tri.flat(i, j)];
            }
        }
        vals[tri.size() + i] = row;
    }
    return vals;
}

bool ConstraintSet::feasible(const Eigen::VectorXd& m, double tol) const
{
    return (evaluate(m).array() >= -tol).all();
}

QPSolution solve_dependency_qp(const scorematch::QuadraticForm& q, int d, double lambda,
                               const QPOptions& options)
{
    check_inputs(q, d, lambda);
    ConstraintSet cs(d);
    const int p = cs.vector_size();

    Eigen::MatrixXd H = q.H;
    double ridge = 0.0;
    double trace = H.trace();
    double min_eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(H).eigenvalues().minCoeff();
    if (min_eig < 1e-12 * trace)
    {
        if (!(trace > 0.0))
        {
            throw numerical_error("solve_dependency_qp: H has no usable curvature (trace <= 0)");
        }
        ridge = 1e-10 * trace;
        H.diagonal().array() += ridge;
    }

    Eigen::LLT<Eigen::MatrixXd> llt(H);
    if (llt.info() != Eigen::Success)
    {
        throw numerical_error("solve_dependency_qp: Cholesky factorization of H failed");
    }

    const Eigen::VectorXd a = q.b.array() + lambda;
    const Eigen::MatrixXd C = cs.normals();
    GiSolver solver(llt, H, a, C);
    int cap = options.max_iter > 0 ? options.max_iter : 50 * (p + cs.count()) + 200;
    QPStatus status = solver.run(cap);

    QPSolution sol;
    sol.ridge = ridge;
    sol.iterations = solver.iterations;
    sol.objective_trace = std::move(solver.trace);
    sol.m = repair_feasibility(solver.x, d);
    sol.status = status;
    sol.kkt_residual = kkt_residual(q, d, lambda, sol.m);
    if (status == QPStatus::optimal && sol.kkt_residual > options.kkt_tol)
    {
        sol.status = QPStatus::numerical;
    }
    return sol;
}

double kkt_residual(const scorematch::QuadraticForm& q, int d, double lambda,
                    const Eigen::VectorXd& m)
{
    check_inputs(q, d, lambda);
    ConstraintSet cs(d);
    const Eigen::VectorXd vals = cs.evaluate(m);
    const double scale = 1.0 + m.cwiseAbs().maxCoeff();
    const double feas_tol = 1e-9 * scale;
    if ((vals.array() < -feas_tol).any())
    {
        std::string msg = "kkt_residual: infeasible point; violated constraints:";
        for (int i = 0; i < vals.size(); ++i)
        {
            if (vals[i] < -feas_tol)
            {
                msg += " #" + std::to_string(i) + " (" + std::to_string(vals[i]) + ")";
            }
        }
        throw parameter_error(msg);
    }

    const Eigen::VectorXd grad = q.H * m + q.b + Eigen::VectorXd::Constant(m.size(), lambda);
    const Eigen::MatrixXd C = cs.normals();
    const double act_tol = 1e-8 * scale;
    std::vector<int> active;
    for (int i = 0; i < vals.size(); ++i)
    {
        if (std::abs(vals[i]) <= act_tol)
        {
            active.push_back(i);
        }
    }

    double stationarity;
    double complementarity = 0.0;
    if (active.empty())
    {
        stationarity = grad.cwiseAbs().maxCoeff();
    }
    else
    {
        Eigen::MatrixXd N(m.size(), active.size());
        for (std::size_t c = 0; c < active.size(); ++c)
        {
            N.col(c) = C.col(active[c]);
        }
        Eigen::VectorXd mu = nnls(N, grad);
        stationarity = (grad - N * mu).cwiseAbs().maxCoeff();
        for (std::size_t c = 0; c < active.size(); ++c)
        {
            complementarity = std::max(complementarity, mu[c] * std::abs(vals[active[c]]));
        }
    }
    return std::max(stationarity, complementarity);
}

}  // namespace depca::qpsolve
