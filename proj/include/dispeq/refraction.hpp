#pragma once

#include <cmath>
#include <string>
#include <variant>

#include "dispeq/errors.hpp"

namespace dispeq {

// ---------------------------------------------------------------------------
// refraction-index models
//
// Each model exposes the squared index (the permittivity seen by the mode)
// and its first three frequency derivatives in closed form, so dispersion
// laws built on top of them stay noise-free to third order.
// ---------------------------------------------------------------------------

/// eps(W) = 1 + S / (pole - W^2), W the normalized frequency.
struct RationalPermittivity {
    double strength;  // S, dimensionless
    double pole;      // Omega_r^2, normalized-frequency squared
};

/// Lorentz axis: eps(w) = eps_inf + wp^2 / (wr^2 - w^2), w in rad/s.
struct LorentzAxis {
    double eps_inf;
    double omega_p;  // rad/s
    double omega_r;  // rad/s
};

struct ConstantIndex {
    double n;
};

using RefractionModel = std::variant<RationalPermittivity, LorentzAxis, ConstantIndex>;

namespace detail {

struct EpsDerivs {
    double eps, d1, d2, d3;
};

// rational family eps = base + S/(P - w^2); derivatives of S/(P - w^2):
//   d1 = 2 S w / D^2
//   d2 = 2 S (P + 3 w^2) / D^3
//   d3 = 24 S w (P + w^2) / D^4        with D = P - w^2
inline EpsDerivs rational_eps(double base, double S, double P, double w) {
    const double D = P - w * w;
    if (D == 0.0) throw DomainError("permittivity pole at this frequency");
    const double D2 = D * D, D3 = D2 * D, D4 = D3 * D;
    return {base + S / D, 2 * S * w / D2, 2 * S * (P + 3 * w * w) / D3,
            24 * S * w * (P + w * w) / D4};
}

} // namespace detail

/// Squared index and derivatives for any model.
inline detail::EpsDerivs eval_eps_derivs(const RefractionModel& model, double w) {
    return std::visit(
        [&](const auto& m) -> detail::EpsDerivs {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, RationalPermittivity>)
                return detail::rational_eps(1.0, m.strength, m.pole, w);
            else if constexpr (std::is_same_v<T, LorentzAxis>)
                return detail::rational_eps(m.eps_inf, m.omega_p * m.omega_p,
                                            m.omega_r * m.omega_r, w);
            else
                return {m.n * m.n, 0, 0, 0};
        },
        model);
}

/// n(w) = sqrt(eps(w)); DomainError in evanescent bands (eps <= 0).
inline double eval_index(const RefractionModel& model, double w) {
    const double eps = eval_eps_derivs(model, w).eps;
    if (eps <= 0.0)
        throw DomainError("eval_index: permittivity is not positive at w=" + std::to_string(w) +
                          " (evanescent band)");
    return std::sqrt(eps);
}

} // namespace dispeq
