#pragma once

#include <cmath>
#include <vector>

#include "dispeq/graphene.hpp"
#include "dispeq/numerics.hpp"
#include "dispeq/transfer.hpp"
#include "dispeq/uniaxial.hpp"

namespace dispeq {

// ---------------------------------------------------------------------------
// flake-stack layout: per half-scheme, a background drift L_m/2, one flake of
// tilt chi, a stack of N flakes spaced L_g/N, another drift L_m/2 and a
// reversed flake (-chi). The full device is the half-scheme squared.
// ---------------------------------------------------------------------------

struct StackDesign {
    int N = 100;        // flakes in the central stack
    double chi = 0;     // per-flake tilt, pi/(2N)
    double L_g = 0;     // stack length, m
    double L_m = 0;     // background length per half-scheme, m
    double omega_0 = 0; // operating frequency, rad/s
};

/// Closed-form background/stack length ratio that cancels the quadratic
/// frequency dependence of the period's trace:
///   L_m/L_g = (2 csc 2chi / pi) (2 cos^2 chi
///             + sqrt(cos chi (3 cos chi + cos 3chi + 2 pi sin chi)))
inline double length_ratio(double chi) {
    if (!(chi > 0 && chi < constants::pi / 2))
        throw std::invalid_argument("length_ratio: requires 0 < chi < pi/2");
    const double c = std::cos(chi), s = std::sin(chi);
    const double inner = c * (3 * c + std::cos(3 * chi) + 2 * constants::pi * s);
    return (2.0 / (std::sin(2 * chi) * constants::pi)) *
           (2 * c * c + std::sqrt(inner));
}

/// Fix chi = pi/(2N) and L_m from the length ratio.
inline StackDesign design_stack(int N, double L_g, double omega_0) {
    if (N < 1 || L_g <= 0) throw std::invalid_argument("design_stack: N >= 1, L_g > 0");
    StackDesign d;
    d.N = N;
    d.chi = constants::pi / (2.0 * N);
    d.L_g = L_g;
    d.L_m = length_ratio(d.chi) * L_g;
    d.omega_0 = omega_0;
    return d;
}

// ---------------------------------------------------------------------------
// full (lossy) device matrix
// ---------------------------------------------------------------------------

struct OverallMatrices {
    TransferMatrix full;       // exact product, common phases included
    TransferMatrix stripped;   // full with e^{-i (kx+ky)(Lm+Lg)} divided out
    double common_phase = 0;   // the phase removed from `stripped`
};

/// P = (S^T U_{Lm/2} (U_{Lg/N} S)^N S U_{Lm/2})^2, rightmost factor first.
inline OverallMatrices overall_matrix(const StackDesign& design, const UniaxialMedium& medium,
                                      const GrapheneFlake& flake,
                                      const ConductivityProvider& provider, double w) {
    if (design.N < 1 || design.L_g <= 0 || design.L_m <= 0)
        throw std::invalid_argument("overall_matrix: lengths must be positive, N >= 1");
    const double kx = medium.kappa_x(w), ky = medium.kappa_y(w);
    auto drift = [&](double L) {
        Matrix2cd u;
        u << std::exp(complexd(0, -kx * L)), 0, 0, std::exp(complexd(0, -ky * L));
        return u;
    };
    const Matrix2cd S = graphene_transfer(flake, medium, provider, w).mat;
    GrapheneFlake reversed = flake;
    reversed.orientation = -flake.orientation;
    const Matrix2cd St = graphene_transfer(reversed, medium, provider, w).mat;

    Matrix2cd stack = Matrix2cd::Identity();
    const Matrix2cd cell = drift(design.L_g / design.N) * S;
    for (int i = 0; i < design.N; ++i) stack = cell * stack;

    const Matrix2cd half = St * drift(design.L_m / 2) * stack * S * drift(design.L_m / 2);
    OverallMatrices out;
    out.full = TransferMatrix(MatrixXcd(half * half));
    out.common_phase = -(kx + ky) * (design.L_m + design.L_g);
    out.stripped =
        TransferMatrix(MatrixXcd(std::exp(complexd(0, -out.common_phase)) * out.full.mat));
    return out;
}

// ---------------------------------------------------------------------------
// idealized reduced matrix
// ---------------------------------------------------------------------------

/// Idealized SU(2) limit of one period (lossless flakes, Trotter stack):
///   T = e^{i chi sy} e^{-i h Lm/2 sz} e^{-i h Lg sz - i pi/2 sy}
///       e^{-i chi sy} e^{-i h Lm/2 sz}
/// with h(w) = (kx'(w0) - ky'(w0)) dw / 2 + kx''(w0) dw^2. Accepts complex dw
/// so trace derivatives can be taken by Cauchy integration.
inline Matrix2cd reduced_matrix(const StackDesign& design, const UniaxialMedium& medium,
                                complexd dw) {
    auto lx = medium.law_x();
    auto ly = medium.law_y();
    const double w0 = design.omega_0;
    const double a = 0.5 * (lx.d1(w0) - ly.d1(w0));
    const double b = lx.d2(w0);
    const complexd h = a * dw + b * dw * dw;
    const complexd zero(0, 0);
    const Matrix2cd ry_p = su2_exp(zero, complexd(design.chi, 0), zero);
    const Matrix2cd ry_m = su2_exp(zero, complexd(-design.chi, 0), zero);
    const Matrix2cd drift_half = su2_exp(zero, zero, -h * (design.L_m / 2.0));
    const Matrix2cd stack =
        su2_exp(zero, complexd(-constants::pi / 2, 0), -h * design.L_g);
    return ry_p * drift_half * stack * ry_m * drift_half;
}

/// d^2 c1 / d w^2 at w0 of the reduced period, c1 = -trace, by Cauchy-circle
/// differentiation (exact to roundoff; no FD cancellation).
inline double reduced_c1_second_derivative(const StackDesign& design,
                                           const UniaxialMedium& medium) {
    auto c1 = [&](complexd dw) -> complexd { return -reduced_matrix(design, medium, dw).trace(); };
    // radius: keep |h(dw)| (L_m + L_g) well below 1 for both terms of h
    auto lx = medium.law_x();
    auto ly = medium.law_y();
    const double Ltot = design.L_m + design.L_g;
    const double a = std::abs(0.5 * (lx.d1(design.omega_0) - ly.d1(design.omega_0)));
    const double b = std::abs(lx.d2(design.omega_0));
    const double r_lin = 0.05 / std::max(a * Ltot, 1e-300);
    const double r_quad = std::sqrt(0.05 / std::max(b * Ltot, 1e-300));
    const double radius = std::min({r_lin, r_quad, 0.3 * design.omega_0});
    return cauchy_derivative(c1, complexd(0, 0), 2, radius, 64).real();
}

// ---------------------------------------------------------------------------
// transmissivity sweep
// ---------------------------------------------------------------------------

struct SweepRow {
    double w_over_w0;
    double p11, p12, p21, p22;  // squared magnitudes of the overall matrix
};

/// |P_ij|^2 over a frequency grid. The matrix is kept as computed: the two
/// off-diagonal columns differ under magnetic bias (non-reciprocity).
inline std::vector<SweepRow> transmissivity_sweep(const StackDesign& design,
                                                  const UniaxialMedium& medium,
                                                  const GrapheneFlake& flake,
                                                  const ConductivityProvider& provider,
                                                  const std::vector<double>& grid,
                                                  int threads = 1) {
    std::vector<SweepRow> rows(grid.size());
    parallel_for(static_cast<int>(grid.size()), threads, [&](int i) {
        const double w = grid[i];
        const Matrix2cd P = overall_matrix(design, medium, flake, provider, w).full.mat;
        rows[i] = {w / design.omega_0, std::norm(P(0, 0)), std::norm(P(0, 1)),
                   std::norm(P(1, 0)), std::norm(P(1, 1))};
    });
    return rows;
}

} // namespace dispeq
