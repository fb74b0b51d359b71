#pragma once

#include <cmath>
#include <complex>
#include <functional>

#include <Eigen/Dense>

#include "dispeq/constants.hpp"
#include "dispeq/errors.hpp"
#include "dispeq/transfer.hpp"
#include "dispeq/uniaxial.hpp"

namespace dispeq {

// ---------------------------------------------------------------------------
// magnetically biased graphene flake as an imperfect polarization scatterer
// ---------------------------------------------------------------------------

struct GrapheneFlake {
    double mu_c_eV = 0.05;   // chemical potential, eV
    double B0_T = 1.0;       // normal magnetic bias, T
    double tau_s = 0.2e-12;  // transport scattering time, s
    double T_K = 300.0;      // temperature, K
    double v_F = 1e6;        // Fermi velocity, m/s
    int orientation = +1;    // -1: flake flipped, i.e. bias reversed (transposed matrix)
};

struct Conductivity {
    complexd gamma_d;  // diagonal surface conductivity, S
    complexd gamma_o;  // off-diagonal (Hall) surface conductivity, S
};

/// Pluggable conductivity model: (flake, w) -> (gamma_d, gamma_o).
using ConductivityProvider = std::function<Conductivity(const GrapheneFlake&, double)>;

/// Default model: intraband (Drude-limit) magneto-optical conductivity under
/// the e^{+i w t} convention,
///   D  = (e^2 k_B T / pi hbar^2) * 2 ln(2 cosh(mu_c / 2 k_B T))
///   wc = e B0 v_F^2 / mu_c
///   gamma_d = D (1/tau + i w) / ((1/tau + i w)^2 + wc^2)
///   gamma_o = -D wc / ((1/tau + i w)^2 + wc^2)
inline Conductivity intraband_conductivity(const GrapheneFlake& f, double w) {
    namespace k = constants;
    if (f.tau_s <= 0 || f.T_K <= 0)
        throw std::invalid_argument("intraband_conductivity: tau and T must be > 0");
    const double mu_J = f.mu_c_eV * k::eV;
    const double kt = k::k_B * f.T_K;
    const double drude =
        (k::e_charge * k::e_charge * kt / (k::pi * k::hbar * k::hbar)) *
        2.0 * std::log(2.0 * std::cosh(mu_J / (2.0 * kt)));
    const double wc = k::e_charge * f.B0_T * f.v_F * f.v_F / std::abs(mu_J);
    const complexd g(1.0 / f.tau_s, w);
    const complexd den = g * g + wc * wc;
    return {drude * g / den, -drude * wc / den};
}

inline ConductivityProvider default_conductivity_provider() {
    return [](const GrapheneFlake& f, double w) { return intraband_conductivity(f, w); };
}

/// Transfer matrix of one flake embedded in the uniaxial background:
///   S = 2/[(2nx + e0 gd)(2ny + e0 gd) + e0^2 go^2] *
///       [[ nx (2ny + e0 gd), -ny e0 go ], [ nx e0 go, ny (2nx + e0 gd) ]]
/// with e0 the free-space wave impedance. Generally non-unitary (lossy).
///
/// orientation = -1 returns the literal transpose (the flipped flake used at
/// the half-scheme ends). Reversing the bias instead flips gamma_o, which
/// equals diag(nx,ny)^-1 S^T diag(nx,ny): a pure transpose where nx = ny.
inline TransferMatrix graphene_transfer(const GrapheneFlake& flake, const UniaxialMedium& medium,
                                        const ConductivityProvider& provider, double w) {
    const double nx = medium.nx(w), ny = medium.ny(w);  // DomainError if evanescent
    const Conductivity g = provider(flake, w);
    const complexd gd = constants::eta0 * g.gamma_d;
    const complexd go = constants::eta0 * g.gamma_o;
    const complexd pref = 2.0 / ((2.0 * nx + gd) * (2.0 * ny + gd) + go * go);
    Matrix2cd m;
    m << nx * (2.0 * ny + gd), -ny * go, nx * go, ny * (2.0 * nx + gd);
    if (flake.orientation < 0) m.transposeInPlace();
    return TransferMatrix(MatrixXcd(pref * m));
}

struct TiltResult {
    double tilt_rad;         // rotation of the major polarization axis
    double transmissivity;   // output power over input power
};

/// Send an x-polarized unit field through one flake; report the rotation of
/// the transmitted polarization ellipse's major axis and the power ratio.
/// For a lossless flake this reduces to atan(Ey/Ex).
inline TiltResult tilt_and_transmissivity(const GrapheneFlake& flake,
                                          const UniaxialMedium& medium,
                                          const ConductivityProvider& provider, double w) {
    const TransferMatrix S = graphene_transfer(flake, medium, provider, w);
    const complexd ex = S.mat(0, 0), ey = S.mat(1, 0);
    TiltResult r;
    r.tilt_rad = 0.5 * std::atan2(2.0 * (ex * std::conj(ey)).real(),
                                  std::norm(ex) - std::norm(ey));
    r.transmissivity = std::norm(ex) + std::norm(ey);
    return r;
}

/// Chemical potential at which one flake tilts by `target_tilt` at fixed bias
/// (the working line of the stack design); 1-D bracketed root find.
inline double find_working_chemical_potential(double B0_T, double target_tilt,
                                              const UniaxialMedium& medium,
                                              const ConductivityProvider& provider, double w,
                                              const GrapheneFlake& base = {},
                                              double mu_lo = 1e-4, double mu_hi = 1.0) {
    auto tilt_of = [&](double mu) {
        GrapheneFlake f = base;
        f.mu_c_eV = mu;
        f.B0_T = B0_T;
        return std::abs(tilt_and_transmissivity(f, medium, provider, w).tilt_rad) -
               std::abs(target_tilt);
    };
    return find_root(tilt_of, mu_lo, mu_hi, 1e-12);
}

} // namespace dispeq
