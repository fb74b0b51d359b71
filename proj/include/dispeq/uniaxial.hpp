#pragma once

#include <cmath>
#include <string>

#include "dispeq/constants.hpp"
#include "dispeq/dispersion.hpp"
#include "dispeq/errors.hpp"
#include "dispeq/numerics.hpp"
#include "dispeq/refraction.hpp"

namespace dispeq {

// ---------------------------------------------------------------------------
// uniaxial Lorentz background
//
// x polarization: nx^2 = eps_inf + wp^2/(wrx^2 - w^2)
// y polarization: ny^2 = 1       + wp^2/(wry^2 - w^2)
// Propagation constants kappa_{x,y} = n_{x,y}(w) w / c.
// ---------------------------------------------------------------------------

struct UniaxialMedium {
    double eps_inf;
    double omega_p;   // rad/s
    double omega_rx;  // rad/s
    double omega_ry;  // rad/s

    UniaxialMedium(double einf, double wp, double wrx, double wry)
        : eps_inf(einf), omega_p(wp), omega_rx(wrx), omega_ry(wry) {
        if (wry <= wrx) throw OrderingError("UniaxialMedium: requires omega_ry > omega_rx");
        if (einf <= 1) throw OrderingError("UniaxialMedium: requires eps_inf > 1");
    }

    RefractionModel x_model() const { return LorentzAxis{eps_inf, omega_p, omega_rx}; }
    RefractionModel y_model() const { return LorentzAxis{1.0, omega_p, omega_ry}; }

    double nx(double w) const { return eval_index(x_model(), w); }
    double ny(double w) const { return eval_index(y_model(), w); }

    double kappa_x(double w) const { return nx(w) * w / constants::c0; }
    double kappa_y(double w) const { return ny(w) * w / constants::c0; }

    DispersionLaw law_x() const {
        auto law = make_plane_wave_law(x_model(), constants::c0);
        law.w_min = omega_s();
        law.w_max = omega_ry;
        return law;
    }
    DispersionLaw law_y() const {
        auto law = make_plane_wave_law(y_model(), constants::c0);
        law.w_min = omega_s();
        law.w_max = omega_ry;
        return law;
    }

    /// Frequency where nx returns to zero from the evanescent band:
    /// ws^2 = wrx^2 + wp^2 / eps_inf.
    double omega_s() const {
        return std::sqrt(omega_rx * omega_rx + omega_p * omega_p / eps_inf);
    }
};

// ---------------------------------------------------------------------------
// special frequencies
// ---------------------------------------------------------------------------

struct SpecialFrequencies {
    double omega_s;
    double omega_0A;
    double omega_0B;
    bool degenerate;  // tangency: the two crossings coincide
};

/// Crossings of nx(w) = ny(w) above omega_s. NoRootError when the curves do
/// not meet; a double root (tangency) is reported as degenerate.
inline SpecialFrequencies special_frequencies(double eps_inf, double wrx, double wry, double wp) {
    if (wry <= wrx || eps_inf <= 1)
        throw OrderingError("special_frequencies: requires wry > wrx, eps_inf > 1");
    if (wp == 0)
        throw NoRootError("special_frequencies: vanishing oscillator strength, curves never equal");
    const double ws = std::sqrt(wrx * wrx + wp * wp / eps_inf);
    // n_x^2 - n_y^2 = 0 is a quadratic in u = w^2:
    //   (eps_inf - 1) + wp^2 [ 1/(wrx^2-u) - 1/(wry^2-u) ] = 0
    //   => (eps_inf-1)(wrx^2-u)(wry^2-u) + wp^2 (wry^2 - wrx^2) = 0
    const double A = eps_inf - 1;
    const double b = -(wrx * wrx + wry * wry) * A;
    const double c = A * wrx * wrx * wry * wry + wp * wp * (wry * wry - wrx * wrx);
    const double disc = b * b - 4 * A * c;
    if (disc < 0) throw NoRootError("special_frequencies: index curves never intersect");
    const double su = std::sqrt(disc);
    double u1 = (-b - su) / (2 * A), u2 = (-b + su) / (2 * A);
    if (u1 > u2) std::swap(u1, u2);
    if (u2 <= ws * ws)
        throw NoRootError("special_frequencies: no intersection above omega_s");
    SpecialFrequencies r;
    r.omega_s = ws;
    r.omega_0A = u1 > 0 ? std::sqrt(u1) : std::numeric_limits<double>::quiet_NaN();
    r.omega_0B = std::sqrt(u2);
    const double rel = su / std::max(std::abs(u1), std::abs(u2));
    r.degenerate = rel < 1e-7;
    return r;
}

// ---------------------------------------------------------------------------
// design solve
// ---------------------------------------------------------------------------

/// Curvature balance imposed at the operating point, together with
/// nx(w0) = ny(w0):
///   wavevector_curvature : kx''(w0) + ky''(w0) = 0 for kappa = n w / c,
///                          the condition that equalizes quadratic dispersion
///                          of the two polarization modes;
///   index_curvature      : nx''(w0) + ny''(w0) = 0, balancing the curvatures
///                          of the refractive indices themselves.
/// The two conditions select different operating points of the same medium.
enum class DesignCondition { index_curvature, wavevector_curvature };

struct UniaxialDesignResult {
    double omega_p;
    double omega_0;
    double seed_omega_p;
    double seed_omega_0;
    double residual_equal;      // nx - ny at the solution, relative
    double residual_curvature;  // curvature sum at the solution, relative
    int iterations;
    DesignCondition condition;
};

namespace detail {

inline double index_d2(double eps_inf, double wr, double wp, double w) {
    auto e = rational_eps(eps_inf, wp * wp, wr * wr, w);
    const double n = std::sqrt(e.eps);
    const double n1 = e.d1 / (2 * n);
    return (e.d2 - 2 * n1 * n1) / (2 * n);
}

inline double kappa_d2(double eps_inf, double wr, double wp, double w) {
    auto e = rational_eps(eps_inf, wp * wp, wr * wr, w);
    const double n = std::sqrt(e.eps);
    const double n1 = e.d1 / (2 * n);
    const double n2 = (e.d2 - 2 * n1 * n1) / (2 * n);
    return (2 * n1 + w * n2) / constants::c0;
}

} // namespace detail

/// Solve { nx(w0) = ny(w0), curvature sum = 0 } for (wp, w0) by damped Newton
/// from the closed-form tangency seed
///   wp_seed^2 = (eps_inf - 1)(wry^2 - wrx^2)/4,  w0_seed^2 = (wry^2 + wrx^2)/2.
inline UniaxialDesignResult uniaxial_design_solve(
    double eps_inf, double wrx, double wry,
    DesignCondition condition = DesignCondition::index_curvature, double tol = 1e-9,
    int max_iter = 100) {
    if (wry <= wrx || eps_inf <= 1)
        throw OrderingError("uniaxial_design_solve: requires wry > wrx, eps_inf > 1");

    auto n_of = [&](double einf, double wr, double wp, double w) {
        const double eps = einf + wp * wp / (wr * wr - w * w);
        if (eps <= 0) throw DomainError("uniaxial_design_solve: evanescent band");
        return std::sqrt(eps);
    };
    auto f1 = [&](double wp, double w) {
        return n_of(eps_inf, wrx, wp, w) - n_of(1.0, wry, wp, w);
    };
    auto f2 = [&](double wp, double w) {
        if (condition == DesignCondition::wavevector_curvature)
            return detail::kappa_d2(eps_inf, wrx, wp, w) + detail::kappa_d2(1.0, wry, wp, w) ;
        return detail::index_d2(eps_inf, wrx, wp, w) + detail::index_d2(1.0, wry, wp, w);
    };

    UniaxialDesignResult res;
    res.condition = condition;
    res.seed_omega_p = std::sqrt((eps_inf - 1) * (wry * wry - wrx * wrx) / 4);
    res.seed_omega_0 = std::sqrt((wry * wry + wrx * wrx) / 2);
    double wp = res.seed_omega_p, w0 = res.seed_omega_0;

    // curvature scale for the relative residual
    auto curv_scale = [&](double wpv, double w) {
        if (condition == DesignCondition::wavevector_curvature)
            return std::abs(detail::kappa_d2(eps_inf, wrx, wpv, w)) +
                   std::abs(detail::kappa_d2(1.0, wry, wpv, w));
        return std::abs(detail::index_d2(eps_inf, wrx, wpv, w)) +
               std::abs(detail::index_d2(1.0, wry, wpv, w));
    };

    int it = 0;
    for (; it < max_iter; ++it) {
        const double r1 = f1(wp, w0), r2 = f2(wp, w0);
        const double s1 = 1.0, s2 = curv_scale(wp, w0);
        if (std::abs(r1) / s1 < tol && std::abs(r2) / s2 < tol) break;
        const double h1 = 1e-7 * wp, h2 = 1e-7 * w0;
        const double j11 = (f1(wp + h1, w0) - f1(wp - h1, w0)) / (2 * h1);
        const double j12 = (f1(wp, w0 + h2) - f1(wp, w0 - h2)) / (2 * h2);
        const double j21 = (f2(wp + h1, w0) - f2(wp - h1, w0)) / (2 * h1);
        const double j22 = (f2(wp, w0 + h2) - f2(wp, w0 - h2)) / (2 * h2);
        const double det = j11 * j22 - j12 * j21;
        if (det == 0) throw ConvergenceError("uniaxial_design_solve: singular Jacobian");
        double dwp = (-r1 * j22 + r2 * j12) / det;
        double dw0 = (-j11 * r2 + j21 * r1) / det;
        // damp: keep steps below 5% per iteration to stay in the seed's basin
        const double lim = 0.05;
        const double scale =
            std::max({1.0, std::abs(dwp) / (lim * wp), std::abs(dw0) / (lim * w0)});
        wp += dwp / scale;
        w0 += dw0 / scale;
    }
    if (it >= max_iter) throw ConvergenceError("uniaxial_design_solve: no convergence");

    const double ws = std::sqrt(wrx * wrx + wp * wp / eps_inf);
    if (!(w0 > ws && w0 < wry))
        throw OrderingError("uniaxial_design_solve: w0 outside (omega_s, omega_ry)");

    res.omega_p = wp;
    res.omega_0 = w0;
    res.residual_equal = std::abs(f1(wp, w0)) / n_of(eps_inf, wrx, wp, w0);
    res.residual_curvature = std::abs(f2(wp, w0)) / curv_scale(wp, w0);
    res.iterations = it;
    return res;
}

} // namespace dispeq
