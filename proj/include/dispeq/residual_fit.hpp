#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "dispeq/errors.hpp"
#include "dispeq/numerics.hpp"
#include "dispeq/transfer.hpp"

namespace dispeq {

// ---------------------------------------------------------------------------
// how close is a matrix sweep to e^{i theta(w)} I ?
//
// The sampled matrices are split into a scalar phase (from the determinant,
// unwrapped by continuity along the sweep) and a traceless SU(2) generator;
// both are least-squares fitted as Taylor polynomials in (w - w0).
// ---------------------------------------------------------------------------

using MatrixSweep = std::function<TransferMatrix(double)>;

struct ResidualFit {
    double w0 = 0;
    double window = 0;                      // half-width of the fitted interval
    Eigen::VectorXd theta;                  // scalar phase, theta[n] * (w-w0)^n
    Eigen::VectorXd gen_x, gen_y, gen_z;    // traceless generator components
    double condition = 0;                   // Vandermonde condition of the fit
    double fit_residual = 0;                // max Frobenius error of the refit
    double su_defect = 0;                   // worst deviation from SU(2) form

    double theta1() const { return theta(1); }
    double theta2() const { return theta.size() > 2 ? theta(2) : 0.0; }
    /// magnitude of the order-n traceless generator coefficient
    double generator_magnitude(int n) const {
        return std::sqrt(gen_x(n) * gen_x(n) + gen_y(n) * gen_y(n) + gen_z(n) * gen_z(n));
    }
};

namespace detail {

struct Su2Log {
    double a0;              // cos(theta)
    std::array<double, 3> g;  // theta * n_hat
    double defect;          // imaginary contamination
};

/// Generator of a (numerically) SU(2) matrix, principal branch theta in [0, pi].
inline Su2Log su2_log(const Matrix2cd& m) {
    Su2Log out;
    const complexd a0 = 0.5 * (m(0, 0) + m(1, 1));
    const complexd a1 = (m(0, 1) + m(1, 0)) / complexd(0, 2);
    const complexd a2 = (m(0, 1) - m(1, 0)) / complexd(2, 0);
    const complexd a3 = (m(0, 0) - m(1, 1)) / complexd(0, 2);
    out.defect = std::max({std::abs(a0.imag()), std::abs(a1.imag()), std::abs(a2.imag()),
                           std::abs(a3.imag())});
    const double an = std::sqrt(a1.real() * a1.real() + a2.real() * a2.real() +
                                a3.real() * a3.real());
    const double theta = std::atan2(an, a0.real());
    const double sc = an > 1e-300 ? theta / an : 1.0;
    out.a0 = a0.real();
    out.g = {sc * a1.real(), sc * a2.real(), sc * a3.real()};
    return out;
}

} // namespace detail

namespace detail {

inline ResidualFit residual_fit_once(const MatrixSweep& sweep, double w0, double window,
                                     int max_order, int n_samples) {
    if (n_samples % 2 == 0) ++n_samples;
    const int half = n_samples / 2;

    std::vector<double> dws(n_samples);
    std::vector<Matrix2cd> su(n_samples);
    std::vector<double> scalar(n_samples);

    // sample and unwrap the determinant phase from the center outward
    std::vector<double> phidet(n_samples);
    std::vector<Matrix2cd> mats(n_samples);
    for (int i = 0; i < n_samples; ++i) {
        const double dw = window * (i - half) / double(half);
        dws[i] = dw;
        TransferMatrix T = sweep(w0 + dw);
        if (T.dim() != 2) throw std::invalid_argument("residual_fit: two-mode sweeps only");
        const complexd det = T.det();
        if (std::abs(std::abs(det) - 1.0) > 1e-8)
            throw DetNotUnimodularError("residual_fit: sweep matrices must be unimodular");
        mats[i] = T.mat;
        phidet[i] = std::arg(det);
    }
    for (int i = half + 1; i < n_samples; ++i) phidet[i] = unwrap_near(phidet[i - 1], phidet[i]);
    for (int i = half - 1; i >= 0; --i) phidet[i] = unwrap_near(phidet[i + 1], phidet[i]);

    // scalar phase s = phidet/2 with the pi ambiguity fixed at the center so
    // the SU(2) part sits nearest +I
    double s_center = 0.5 * phidet[half];
    {
        const complexd tr = mats[half].trace() * std::exp(complexd(0, -s_center));
        if (tr.real() < 0) s_center += constants::pi;
    }
    const double branch_shift = s_center - 0.5 * phidet[half];

    ResidualFit fit;
    fit.w0 = w0;
    fit.window = window;
    fit.su_defect = 0;

    std::vector<double> gx(n_samples), gy(n_samples), gz(n_samples);
    for (int i = 0; i < n_samples; ++i) {
        scalar[i] = 0.5 * phidet[i] + branch_shift;
        su[i] = std::exp(complexd(0, -scalar[i])) * mats[i];
        auto lg = detail::su2_log(su[i]);
        fit.su_defect = std::max(fit.su_defect, lg.defect);
        const double theta = std::hypot(lg.g[0], lg.g[1], lg.g[2]);  // |g| = principal angle
        if (theta > constants::pi - 0.05)
            throw BranchError("residual_fit: eigenvalues reach -1 inside the window");
        gx[i] = lg.g[0];
        gy[i] = lg.g[1];
        gz[i] = lg.g[2];
    }

    // fit two orders past the requested one so the next Taylor terms cannot
    // leak into the reported coefficients, then truncate
    auto fit_poly = [&](const std::vector<double>& y) {
        PolyFit f = polyfit(dws, y, max_order + 2);
        f.coeffs.conservativeResize(max_order + 1);
        return f;
    };
    PolyFit ps = fit_poly(scalar);
    PolyFit pxf = fit_poly(gx), pyf = fit_poly(gy), pzf = fit_poly(gz);
    fit.theta = ps.coeffs;
    fit.gen_x = pxf.coeffs;
    fit.gen_y = pyf.coeffs;
    fit.gen_z = pzf.coeffs;
    fit.condition = ps.condition;

    // round trip: rebuild each sample from the fitted model
    for (int i = 0; i < n_samples; ++i) {
        double s = 0, vx = 0, vy = 0, vz = 0, p = 1;
        for (int n = 0; n <= max_order; ++n) {
            s += fit.theta(n) * p;
            vx += fit.gen_x(n) * p;
            vy += fit.gen_y(n) * p;
            vz += fit.gen_z(n) * p;
            p *= dws[i];
        }
        const Matrix2cd model = std::exp(complexd(0, s)) * su2_exp(vx, vy, vz);
        fit.fit_residual = std::max(fit.fit_residual, (model - mats[i]).norm());
    }
    return fit;
}

} // namespace detail

/// Sample `sweep` on a symmetric grid about w0 and fit scalar phase and
/// traceless generator to polynomials of degree max_order. Matrices must be
/// unimodular (|det| = 1); BranchError when an eigenvalue pair approaches -1
/// inside the window.
///
/// The window is halved automatically until the reported slope and cubic
/// coefficients stop moving (higher Taylor orders otherwise leak in).
inline ResidualFit residual_fit(const MatrixSweep& sweep, double w0, double window,
                                int max_order = 3, int n_samples = 41) {
    ResidualFit wide = detail::residual_fit_once(sweep, w0, window, max_order, n_samples);
    for (int pass = 0; pass < 5; ++pass) {
        ResidualFit half =
            detail::residual_fit_once(sweep, w0, 0.5 * wide.window, max_order, n_samples);
        auto rel = [](double a, double b) {
            const double s = std::max({std::abs(a), std::abs(b), 1e-12});
            return std::abs(a - b) / s;
        };
        bool stable = rel(wide.theta(1), half.theta(1)) < 1e-6;
        if (max_order >= 3) {
            stable = stable && rel(wide.theta(3), half.theta(3)) < 0.02 &&
                     rel(wide.generator_magnitude(3), half.generator_magnitude(3)) < 0.02;
        }
        if (stable) return wide;
        wide = half;
    }
    return wide;
}

// ---------------------------------------------------------------------------
// residual order
// ---------------------------------------------------------------------------

struct ResidualOrder {
    double slope = 0;
    double r2 = 0;
    std::vector<double> dw;       // sampled offsets (positive side)
    std::vector<double> deviation;  // generator-norm deviation from w0
};

namespace detail {

/// Continuity-tracked generator of D(w) = Tsu(w) Tsu(w0)^dag along one side of
/// the sweep; returns the Frobenius norms ||G(w) - G(w0)|| (G(w0) = 0 by
/// construction of D).
inline std::vector<double> tracked_deviation_2(const std::vector<Matrix2cd>& D) {
    std::vector<double> out(D.size());
    std::array<double, 3> prev{0, 0, 0};
    for (size_t i = 0; i < D.size(); ++i) {
        auto lg = su2_log(D[i]);
        // candidates (theta + 2 pi k) n and (-theta + 2 pi k)(-n) folded copies
        const double th = std::atan2(
            std::sqrt(lg.g[0] * lg.g[0] + lg.g[1] * lg.g[1] + lg.g[2] * lg.g[2]), lg.a0);
        std::array<double, 3> n{0, 0, 0};
        const double gn = std::sqrt(lg.g[0] * lg.g[0] + lg.g[1] * lg.g[1] + lg.g[2] * lg.g[2]);
        if (gn > 1e-300) n = {lg.g[0] / gn, lg.g[1] / gn, lg.g[2] / gn};
        double best_d = std::numeric_limits<double>::infinity();
        std::array<double, 3> best = prev;
        for (int s = -1; s <= 1; s += 2) {
            for (int k = -2; k <= 2; ++k) {
                const double mag = s * th + 2 * constants::pi * k;
                std::array<double, 3> cand{mag * s * n[0], mag * s * n[1], mag * s * n[2]};
                const double d = std::hypot(cand[0] - prev[0], cand[1] - prev[1],
                                            cand[2] - prev[2]);
                if (d < best_d) {
                    best_d = d;
                    best = cand;
                }
            }
        }
        prev = best;
        out[i] = std::sqrt(2.0) * std::hypot(best[0], best[1], best[2]);
    }
    return out;
}

} // namespace detail

enum class SweepSides { both, above, below };

/// Log-log slope of the traceless-generator deviation ||G(w) - G(w0)|| over
/// dw in [dmin, dmax] (relative to w0), sampled log-uniformly. One-sided
/// sampling serves bands whose validity interval is asymmetric about w0.
/// For N = 2 the generator is tracked continuously so deviations beyond pi do
/// not fold; for N > 2 deviations must stay below pi (principal log).
inline ResidualOrder residual_order(const MatrixSweep& sweep, double w0, double rel_min = 1e-3,
                                    double rel_max = 1e-1, int points_per_decade = 12,
                                    SweepSides sides = SweepSides::both) {
    const int decades_pts =
        std::max(6, int(std::log10(rel_max / rel_min) * points_per_decade + 0.5));
    TransferMatrix T0 = sweep(w0);
    const int N = T0.dim();

    auto su_normalize = [&](TransferMatrix T) {
        const complexd det = T.det();
        if (std::abs(std::abs(det) - 1.0) > 1e-6)
            throw DetNotUnimodularError("residual_order: sweep matrices must be unimodular");
        T.mat *= std::exp(complexd(0, -std::arg(det) / N));
        return T;
    };
    const Eigen::MatrixXcd ref = su_normalize(T0).mat.adjoint();

    ResidualOrder out;
    for (int side = -1; side <= 1; side += 2) {
        if (side < 0 && sides == SweepSides::above) continue;
        if (side > 0 && sides == SweepSides::below) continue;
        std::vector<Matrix2cd> D2;
        std::vector<double> dws, devs;
        Eigen::MatrixXcd D_prev = Eigen::MatrixXcd::Identity(N, N);
        for (int i = 0; i <= decades_pts; ++i) {
            const double rel =
                rel_min * std::pow(rel_max / rel_min, double(i) / decades_pts);
            const double dw = side * rel * std::abs(w0);
            Eigen::MatrixXcd D = sweep(w0 + dw).mat * ref;
            // pick the N-th root branch of the determinant phase that keeps D
            // continuous from the previous sample (the raw phase wraps freely
            // along the sweep)
            const double delta = std::arg(D.determinant());
            double best = std::numeric_limits<double>::infinity();
            Eigen::MatrixXcd Dn = D;
            for (int k = 0; k < N; ++k) {
                Eigen::MatrixXcd cand =
                    D * std::exp(complexd(0, -(delta + 2 * constants::pi * k) / N));
                const double dist = (cand - D_prev).norm();
                if (dist < best) {
                    best = dist;
                    Dn = cand;
                }
            }
            D = Dn;
            D_prev = D;
            dws.push_back(std::abs(dw));
            if (N == 2) {
                D2.push_back(D);
            } else {
                Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(D);
                double s2 = 0;
                for (int e = 0; e < N; ++e) {
                    const double th = std::arg(es.eigenvalues()(e));
                    if (std::abs(th) > constants::pi - 0.05)
                        throw BranchError("residual_order: deviation beyond the principal branch");
                    s2 += th * th;
                }
                devs.push_back(std::sqrt(2.0 * s2));
            }
        }
        if (N == 2) devs = detail::tracked_deviation_2(D2);
        for (size_t i = 0; i < dws.size(); ++i) {
            out.dw.push_back(dws[i]);
            out.deviation.push_back(devs[i]);
        }
    }
    SlopeFit s = loglog_slope(out.dw, out.deviation);
    out.slope = s.slope;
    out.r2 = s.r2;
    return out;
}

} // namespace dispeq
