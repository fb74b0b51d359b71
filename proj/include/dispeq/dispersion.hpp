#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "dispeq/errors.hpp"
#include "dispeq/numerics.hpp"
#include "dispeq/refraction.hpp"

namespace dispeq {

// ---------------------------------------------------------------------------
// geometry and dispersion laws
// ---------------------------------------------------------------------------

/// Rectangular guide with conducting walls, cross-section a x b.
struct WaveguideGeometry {
    double a = 2.0;
    double b = 1.0;
    WaveguideGeometry() = default;
    WaveguideGeometry(double a_, double b_) : a(a_), b(b_) {
        if (a <= 0 || b <= 0) throw std::invalid_argument("WaveguideGeometry: a, b must be > 0");
    }
};

/// A single mode's wavevector law kappa(w) with derivative evaluators.
///
/// Derivatives are analytic when the law was built from a RefractionModel;
/// otherwise centered finite differences with Richardson extrapolation
/// (step fd_step_rel * w) are used. kappa must be real and >= 0 on
/// [w_min, w_max].
struct DispersionLaw {
    std::function<double(double)> kappa;
    std::function<double(double)> kappa_d1;  // may be empty -> finite differences
    std::function<double(double)> kappa_d2;
    std::function<double(double)> kappa_d3;
    double w_min = 0;
    double w_max = std::numeric_limits<double>::infinity();
    double fd_step_rel = 1e-4;

    double operator()(double w) const { return kappa(w); }

    double d1(double w) const {
        return kappa_d1 ? kappa_d1(w) : derivative(kappa, w, 1, fd_step_rel * std::abs(w));
    }
    double d2(double w) const {
        return kappa_d2 ? kappa_d2(w) : derivative(kappa, w, 2, fd_step_rel * std::abs(w));
    }
    double d3(double w) const {
        return kappa_d3 ? kappa_d3(w) : derivative(kappa, w, 3, fd_step_rel * std::abs(w));
    }
    /// Derivative of any order; above 3 falls back to finite differences of d3.
    double dn(double w, int order) const {
        switch (order) {
            case 0: return kappa(w);
            case 1: return d1(w);
            case 2: return d2(w);
            case 3: return d3(w);
            default: {
                auto f = [&](double x) { return d3(x); };
                return derivative(f, w, order - 3, fd_step_rel * std::abs(w));
            }
        }
    }
    bool valid_at(double w) const { return w > w_min && w < w_max; }
};

// ---------------------------------------------------------------------------
// mode wavevectors
// ---------------------------------------------------------------------------

namespace detail {

inline double mode_cut(const WaveguideGeometry& g, int l, int j) {
    const double pl = l * constants::pi / g.a, pj = j * constants::pi / g.b;
    return pl * pl + pj * pj;
}

// locate the cutoff of eps(w) w^2 = u above the asked frequency, best effort
inline double locate_cutoff(const RefractionModel& model, double u, double w) {
    auto radicand = [&](double x) { return eval_eps_derivs(model, x).eps * x * x - u; };
    double hi = std::max(w * 2, 1.0);
    for (int i = 0; i < 60 && radicand(hi) <= 0; ++i) hi *= 1.5;
    try {
        return find_root(radicand, w, hi);
    } catch (const NoRootError&) {
        return std::numeric_limits<double>::quiet_NaN();
    }
}

} // namespace detail

/// kappa_{l,j}(w) = sqrt(n^2(w) (w/c)^2 - (l pi/a)^2 - (j pi/b)^2).
/// `c` scales the frequency axis: 1 for normalized units, c0 for SI.
inline double mode_wavevector(const WaveguideGeometry& geom, const RefractionModel& model,
                              int l, int j, double w, double c = 1.0) {
    if (l < 1 || j < 1) throw std::invalid_argument("mode_wavevector: mode indices must be >= 1");
    const double u = detail::mode_cut(geom, l, j);
    const double wc = w / c;
    const double eps = eval_eps_derivs(model, w).eps;
    if (eps <= 0) throw DomainError("mode_wavevector: evanescent material band");
    const double rad = eps * wc * wc - u;
    if (rad <= 0.0)
        throw CutoffError("mode (" + std::to_string(l) + "," + std::to_string(j) +
                              ") below cutoff",
                          detail::locate_cutoff(model, u, wc) * c);
    return std::sqrt(rad);
}

/// DispersionLaw for a guide mode, analytic derivatives through third order.
/// g(w) = eps(w) (w/c)^2;  kappa = sqrt(g - u).
inline DispersionLaw make_mode_law(const WaveguideGeometry& geom, const RefractionModel& model,
                                   int l, int j, double c = 1.0) {
    const double u = detail::mode_cut(geom, l, j);
    auto gd = [model, c](double w) {
        auto e = eval_eps_derivs(model, w);
        const double x = w / c;
        // derivatives of eps(w) x^2 with x = w/c
        double g = e.eps * x * x;
        double g1 = (e.d1 * w + 2 * e.eps) * x / c;
        double g2 = (e.d2 * w * w + 4 * e.d1 * w + 2 * e.eps) / (c * c);
        double g3 = (e.d3 * w * w + 6 * e.d2 * w + 6 * e.d1) / (c * c);
        return std::array<double, 4>{g, g1, g2, g3};
    };
    DispersionLaw law;
    law.kappa = [gd, u, geom, model, l, j, c](double w) {
        const double rad = gd(w)[0] - u;
        if (rad <= 0)
            throw CutoffError("mode below cutoff",
                              detail::locate_cutoff(model, u, w / c) * c);
        return std::sqrt(rad);
    };
    law.kappa_d1 = [gd, u](double w) {
        auto g = gd(w);
        return g[1] / (2 * std::sqrt(g[0] - u));
    };
    law.kappa_d2 = [gd, u](double w) {
        auto g = gd(w);
        const double k = std::sqrt(g[0] - u);
        return g[2] / (2 * k) - g[1] * g[1] / (4 * k * k * k);
    };
    law.kappa_d3 = [gd, u](double w) {
        auto g = gd(w);
        const double k = std::sqrt(g[0] - u);
        const double k3 = k * k * k, k5 = k3 * k * k;
        return g[3] / (2 * k) - 3 * g[1] * g[2] / (4 * k3) + 3 * g[1] * g[1] * g[1] / (8 * k5);
    };
    return law;
}

/// Plane-wave law kappa = n(w) w / c for unbounded propagation along one axis.
inline DispersionLaw make_plane_wave_law(const RefractionModel& model, double c) {
    DispersionLaw law;
    law.kappa = [model, c](double w) {
        return eval_index(model, w) * w / c;
    };
    law.kappa_d1 = [model, c](double w) {
        auto e = eval_eps_derivs(model, w);
        if (e.eps <= 0) throw DomainError("plane-wave law: evanescent band");
        const double n = std::sqrt(e.eps), n1 = e.d1 / (2 * n);
        return (n + w * n1) / c;
    };
    law.kappa_d2 = [model, c](double w) {
        auto e = eval_eps_derivs(model, w);
        if (e.eps <= 0) throw DomainError("plane-wave law: evanescent band");
        const double n = std::sqrt(e.eps);
        const double n1 = e.d1 / (2 * n);
        const double n2 = (e.d2 - 2 * n1 * n1) / (2 * n);
        return (2 * n1 + w * n2) / c;
    };
    law.kappa_d3 = [model, c](double w) {
        auto e = eval_eps_derivs(model, w);
        if (e.eps <= 0) throw DomainError("plane-wave law: evanescent band");
        const double n = std::sqrt(e.eps);
        const double n1 = e.d1 / (2 * n);
        const double n2 = (e.d2 - 2 * n1 * n1) / (2 * n);
        const double n3 = (e.d3 - 6 * n1 * n2) / (2 * n);
        return (3 * n2 + w * n3) / c;
    };
    return law;
}

// ---------------------------------------------------------------------------
// mode-pair coefficients F_I, F_z
// ---------------------------------------------------------------------------

/// Half-sum / half-difference of two mode wavevectors and their Taylor data:
///   F_I = (k1 + k2)/2 generates the common phase, F_z = (k1 - k2)/2 the
///   differential one. fi_taylor[n] multiplies (w - w0)^n.
struct ModePairCoefficients {
    std::function<double(double)> FI;
    std::function<double(double)> FZ;
    double w0 = 0;
    std::vector<double> fi_taylor;
    std::vector<double> fz_taylor;

    double fi0() const { return fi_taylor.at(0); }
    double fz0() const { return fz_taylor.at(0); }
};

inline ModePairCoefficients mode_pair_coefficients(const DispersionLaw& k1,
                                                   const DispersionLaw& k2, double w0,
                                                   int order_k) {
    if (!k1.valid_at(w0) || !k2.valid_at(w0))
        throw DomainError("mode_pair_coefficients: w0 outside a law's validity interval");
    ModePairCoefficients mp;
    mp.w0 = w0;
    mp.FI = [k1, k2](double w) { return 0.5 * (k1(w) + k2(w)); };
    mp.FZ = [k1, k2](double w) { return 0.5 * (k1(w) - k2(w)); };
    double fact = 1;
    for (int n = 0; n <= order_k + 1; ++n) {
        if (n >= 2) fact *= n;
        mp.fi_taylor.push_back(0.5 * (k1.dn(w0, n) + k2.dn(w0, n)) / fact);
        mp.fz_taylor.push_back(0.5 * (k1.dn(w0, n) - k2.dn(w0, n)) / fact);
    }
    return mp;
}

// ---------------------------------------------------------------------------
// zero-curvature operating point
// ---------------------------------------------------------------------------

struct ZeroCurvatureResult {
    double omega0;
    bool degenerate;  // F_I'' identically ~0 on the bracket
};

/// Find w0 with F_I''(w0) = 0 on the bracket. When the curvature sum is
/// below tol relative to the individual curvatures over the whole bracket
/// (exact cancellation at every frequency) the pair is flagged degenerate
/// and the bracket midpoint is returned.
inline ZeroCurvatureResult find_zero_curvature_frequency(const DispersionLaw& k1,
                                                         const DispersionLaw& k2, double lo,
                                                         double hi, double tol = 1e-10) {
    auto fipp = [&](double w) { return 0.5 * (k1.d2(w) + k2.d2(w)); };
    auto scale = [&](double w) {
        return 0.5 * (std::abs(k1.d2(w)) + std::abs(k2.d2(w)));
    };
    double max_rel = 0;
    const int scan = 33;
    for (int i = 0; i < scan; ++i) {
        const double w = lo + (hi - lo) * i / (scan - 1);
        const double s = scale(w);
        if (s > 0) max_rel = std::max(max_rel, std::abs(fipp(w)) / s);
    }
    if (max_rel < tol) return {0.5 * (lo + hi), true};
    double root = find_root(fipp, lo, hi);  // NoRootError propagates
    if (std::abs(fipp(root)) > 1e-9 * std::max(scale(root), 1e-300))
        throw NoRootError("find_zero_curvature_frequency: root refinement failed");
    return {root, false};
}

} // namespace dispeq
