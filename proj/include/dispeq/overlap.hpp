#pragma once

#include <cmath>
#include <complex>

#include "dispeq/dispersion.hpp"
#include "dispeq/numerics.hpp"

namespace dispeq {

// ---------------------------------------------------------------------------
// scatterer perturbation and overlap integrals
// ---------------------------------------------------------------------------

/// Antisymmetric Gaussian index bump pair: a +dn lobe at (x0, y0) and a -dn
/// lobe mirrored to (a - x0, y0), both centered at z = Lz.
struct GaussianPerturbation {
    double dn;      // amplitude
    double x0, y0;  // first lobe center
    double Lz;      // longitudinal center
    double alpha;   // transverse 1/e half-width
    double beta;    // longitudinal 1/e half-width

    double operator()(double x, double y, double a, double z) const {
        auto lobe = [&](double cx) {
            const double dx = (x - cx) / alpha, dy = (y - y0) / alpha, dz = (z - Lz) / beta;
            return std::exp(-dx * dx - dy * dy - dz * dz);
        };
        return dn * (lobe(x0) - lobe(a - x0));
    }
};

/// Overlap coupling V = integral of dn(x,y,z) u1(x,y) u2(x,y) dx dy dz with
/// unit-L2-normalized transverse co-factors u_{l,j}. Tensor Gauss-Legendre,
/// refined until the order-n and order-2n estimates agree to rel_tol.
inline complexd overlap_coupling(const WaveguideGeometry& geom, const GaussianPerturbation& pert,
                                 int l1, int j1, int l2, int j2, double rel_tol = 1e-8) {
    if (l1 < 1 || j1 < 1 || l2 < 1 || j2 < 1)
        throw std::invalid_argument("overlap_coupling: invalid mode indices");
    const double norm = 2.0 / std::sqrt(geom.a * geom.b);  // unit L2 norm of sin*sin
    auto cofactor = [&](int l, int j, double x, double y) {
        return norm * std::sin(l * constants::pi * x / geom.a) *
               std::sin(j * constants::pi * y / geom.b);
    };
    const double zlo = pert.Lz - 8 * pert.beta, zhi = pert.Lz + 8 * pert.beta;

    auto evaluate = [&](int n) {
        const auto rule = gauss_legendre(n);
        auto inner_y = [&](double x, double z) {
            return integrate_gl(
                [&](double y) {
                    return pert(x, y, geom.a, z) * cofactor(l1, j1, x, y) * cofactor(l2, j2, x, y);
                },
                0.0, geom.b, rule);
        };
        auto inner_xy = [&](double z) {
            return integrate_gl([&](double x) { return inner_y(x, z); }, 0.0, geom.a, rule);
        };
        return integrate_gl(inner_xy, zlo, zhi, rule);
    };

    // resolve the narrower of the Gaussian widths and the fastest mode
    // oscillation; the point cap keeps the n^3 tensor cost bounded
    const int n_max = 384;
    int n = std::max({16, int(8 * geom.a / pert.alpha), 4 * std::max({l1, l2, j1, j2})});
    n = std::min(n, n_max / 2);
    double prev = evaluate(n);
    while (2 * n <= n_max) {
        n *= 2;
        const double cur = evaluate(n);
        const double err = std::abs(cur - prev);
        const double scale = std::max(std::abs(cur), std::abs(pert.dn) * 1e-6);
        if (err <= rel_tol * scale) return complexd(cur, 0.0);
        prev = cur;
    }
    throw QuadratureError("overlap_coupling: quadrature did not reach requested tolerance",
                          std::abs(prev));
}

} // namespace dispeq
