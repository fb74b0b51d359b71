#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "dispeq/errors.hpp"
#include "dispeq/numerics.hpp"

namespace dispeq {

// ---------------------------------------------------------------------------
// small dense nonlinear solvers (Newton with damping, Levenberg-Marquardt)
// ---------------------------------------------------------------------------

using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct SolveOptions {
    double tol = 1e-10;          // max-norm residual target
    int max_iter = 120;
    double fd_step = 1e-7;       // relative Jacobian step
    double step_limit = 0.0;     // 0 = unlimited; else max-norm cap per step
};

struct SolveResult {
    Eigen::VectorXd x;
    double residual_norm = 0;    // max-norm of the residual at x
    double step_norm = 0;        // last Newton/LM step
    int iterations = 0;
    bool converged = false;
    int jacobian_rank = 0;       // numeric rank at the final point
};

inline Eigen::MatrixXd numeric_jacobian(const ResidualFn& F, const Eigen::VectorXd& x,
                                        const Eigen::VectorXd& f0, double rel_step) {
    const int m = static_cast<int>(f0.size()), n = static_cast<int>(x.size());
    Eigen::MatrixXd J(m, n);
    for (int j = 0; j < n; ++j) {
        const double h = rel_step * std::max(1.0, std::abs(x(j)));
        Eigen::VectorXd xp = x, xm = x;
        xp(j) += h;
        xm(j) -= h;
        J.col(j) = (F(xp) - F(xm)) / (2 * h);
    }
    return J;
}

/// Damped Newton / Levenberg-Marquardt hybrid for (possibly non-square)
/// residual systems. The step solves (J^T J + lambda diag(J^T J)) dx = -J^T f;
/// lambda shrinks on success and grows when the residual would increase.
inline SolveResult solve_levenberg_marquardt(const ResidualFn& F, Eigen::VectorXd x0,
                                             const SolveOptions& opts = {}) {
    SolveResult res;
    res.x = std::move(x0);
    Eigen::VectorXd f = F(res.x);
    double cost = f.squaredNorm();
    double lambda = 1e-3;

    for (res.iterations = 0; res.iterations < opts.max_iter; ++res.iterations) {
        res.residual_norm = f.lpNorm<Eigen::Infinity>();
        if (res.residual_norm < opts.tol) {
            res.converged = true;
            break;
        }
        Eigen::MatrixXd J = numeric_jacobian(F, res.x, f, opts.fd_step);
        Eigen::MatrixXd JtJ = J.transpose() * J;
        Eigen::VectorXd Jtf = J.transpose() * f;
        Eigen::VectorXd diag = JtJ.diagonal().cwiseMax(1e-14);

        bool stepped = false;
        for (int attempt = 0; attempt < 40; ++attempt) {
            Eigen::MatrixXd A = JtJ;
            A.diagonal() += lambda * diag;
            Eigen::VectorXd dx = A.ldlt().solve(-Jtf);
            if (opts.step_limit > 0) {
                const double sn = dx.lpNorm<Eigen::Infinity>();
                if (sn > opts.step_limit) dx *= opts.step_limit / sn;
            }
            Eigen::VectorXd xn = res.x + dx;
            Eigen::VectorXd fn = F(xn);
            const double cn = fn.squaredNorm();
            if (cn < cost || fn.lpNorm<Eigen::Infinity>() < opts.tol) {
                res.x = std::move(xn);
                f = std::move(fn);
                cost = cn;
                res.step_norm = dx.lpNorm<Eigen::Infinity>();
                lambda = std::max(lambda * 0.3, 1e-14);
                stepped = true;
                break;
            }
            lambda *= 8;
        }
        if (!stepped) break;  // stuck; report non-converged unless residual is tiny
    }
    res.residual_norm = f.lpNorm<Eigen::Infinity>();
    res.converged = res.residual_norm < opts.tol;
    {
        Eigen::MatrixXd J = numeric_jacobian(F, res.x, f, opts.fd_step);
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(J);
        const auto& sv = svd.singularValues();
        const double thresh = sv.size() ? sv(0) * 1e-9 : 0.0;
        res.jacobian_rank = 0;
        for (int i = 0; i < sv.size(); ++i)
            if (sv(i) > thresh) ++res.jacobian_rank;
    }
    return res;
}

/// Plain damped Newton for square systems; falls back to LM behaviour through
/// the same interface when the Jacobian is singular.
inline SolveResult solve_newton(const ResidualFn& F, Eigen::VectorXd x0,
                                const SolveOptions& opts = {}) {
    return solve_levenberg_marquardt(F, std::move(x0), opts);
}

} // namespace dispeq
