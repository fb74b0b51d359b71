#pragma once

#include <cmath>
#include <optional>
#include <variant>
#include <vector>

#include "dispeq/newton.hpp"
#include "dispeq/transfer.hpp"

namespace dispeq {

// ---------------------------------------------------------------------------
// scatterer placement: choose interval lengths {L_l} so the composite period
// matrix is a nondegenerate root of the identity through order k in (w - w0).
// ---------------------------------------------------------------------------

/// Residuals of the reduced two-mode system in X_l = F_z(w0) L_l:
///   r1 = cos(X1-X2-X3) + cos(X1+X2-X3) + cos(X1-X2+X3)
///   r2 = sum of (same argument) * sin(same argument)
inline std::pair<double, double> reduced_system_residuals(double X1, double X2, double X3) {
    const double A1 = X1 - X2 - X3, A2 = X1 + X2 - X3, A3 = X1 - X2 + X3;
    const double r1 = std::cos(A1) + std::cos(A2) + std::cos(A3);
    const double r2 = A1 * std::sin(A1) + A2 * std::sin(A2) + A3 * std::sin(A3);
    return {r1, r2};
}

struct PlacementSolution {
    std::vector<double> X;         // dimensionless positions (two-mode: F_z(w0) L_l)
    std::vector<double> L;         // interval lengths
    Eigen::VectorXd residuals;     // all imposed conditions at the solution
    double winding_value = 0;      // (sum L) F_I(w0), or N kappa0(w0) sum L
    double sum_L = 0;
    int iterations = 0;
    int seed_index = -1;           // which multi-start seed converged
    double final_step_norm = 0;
    bool degenerate_satisfied = false;  // conditions held at the seed already
};

struct MultiStartOptions {
    int seed_count = 64;
    std::vector<Eigen::VectorXd> explicit_seeds;  // tried first, in order
    double tol = 1e-10;
    int max_iter = 200;
};

// ---------------------------------------------------------------------------
// reduced two-mode solve
// ---------------------------------------------------------------------------

/// Solve {r1 = 0, r2 = 0, (X1+X2+X3) F_I/F_z = 2 m pi} by damped Newton with
/// deterministic low-discrepancy multi-start. Seeds are scaled onto the
/// constraint simplex sum X = 2 m pi F_z / F_I; solutions must have X_l > 0.
inline PlacementSolution solve_reduced(int m, double FI0, double FZ0,
                                       const MultiStartOptions& opts = {}) {
    if (FZ0 == 0) throw std::invalid_argument("solve_reduced: F_z(w0) must be nonzero");
    const double target_sum = 2.0 * m * constants::pi * FZ0 / FI0;
    if (target_sum <= 0)
        throw InfeasibleError("solve_reduced: winding target forces sum X <= 0");

    ResidualFn F = [&](const Eigen::VectorXd& X) {
        auto [r1, r2] = reduced_system_residuals(X(0), X(1), X(2));
        Eigen::VectorXd r(3);
        r << r1, r2, ((X(0) + X(1) + X(2)) * FI0 / FZ0 - 2.0 * m * constants::pi) /
                         (2 * constants::pi);
        return r;
    };

    std::vector<Eigen::VectorXd> seeds = opts.explicit_seeds;
    {
        Eigen::VectorXd lo = Eigen::VectorXd::Constant(3, 0.02 * target_sum);
        Eigen::VectorXd hi = Eigen::VectorXd::Constant(3, target_sum);
        for (auto& p : halton_points(3, opts.seed_count, lo, hi)) {
            p *= target_sum / p.sum();  // project onto the constraint simplex
            seeds.push_back(p);
        }
    }

    SolveOptions sopt;
    sopt.tol = opts.tol;
    sopt.max_iter = opts.max_iter;
    sopt.step_limit = 0.5 * target_sum;

    for (size_t si = 0; si < seeds.size(); ++si) {
        SolveResult r = solve_newton(F, seeds[si], sopt);
        if (!r.converged) continue;
        if (r.x.minCoeff() <= 0) continue;  // lengths must be physical
        PlacementSolution sol;
        sol.X = {r.x(0), r.x(1), r.x(2)};
        sol.L = {r.x(0) / FZ0, r.x(1) / FZ0, r.x(2) / FZ0};
        sol.residuals = F(r.x);
        sol.residuals(2) *= 2 * constants::pi;  // report the raw winding gap
        sol.winding_value = (r.x.sum()) * FI0 / FZ0;
        sol.sum_L = r.x.sum() / FZ0;
        sol.iterations = r.iterations;
        sol.seed_index = static_cast<int>(si);
        sol.final_step_norm = r.step_norm;
        return sol;
    }
    throw ConvergenceError("solve_reduced: no multi-start seed converged to a positive solution");
}

// ---------------------------------------------------------------------------
// general problem
// ---------------------------------------------------------------------------

/// Two-mode problems carry ModePairCoefficients; N-mode problems a
/// PhaseGenerator. The scatterer count defaults to N*k.
struct PlacementProblem {
    std::variant<ModePairCoefficients, PhaseGenerator> modes;
    ScattererSpec scatterer;
    double w0 = 0;
    int k = 1;
    std::optional<int> winding_m;
    int scatterer_count = 0;  // 0 -> N*k

    int dim() const {
        return std::holds_alternative<ModePairCoefficients>(modes)
                   ? 2
                   : std::get<PhaseGenerator>(modes).dim();
    }
    int count() const { return scatterer_count > 0 ? scatterer_count : dim() * k; }

    CompositeResult composite(const std::vector<double>& L, double w) const {
        if (std::holds_alternative<ModePairCoefficients>(modes))
            return composite_matrix(L, scatterer, std::get<ModePairCoefficients>(modes), w);
        return composite_matrix(L, scatterer, std::get<PhaseGenerator>(modes), w);
    }
    double kappa0(double w) const {
        if (std::holds_alternative<ModePairCoefficients>(modes))
            return std::get<ModePairCoefficients>(modes).FI(w);
        return std::get<PhaseGenerator>(modes).kappa0(w);
    }
};

/// Evaluate the full condition stack at given lengths without solving:
/// Re/Im of d^p c_n / dw^p at w0 for p = 0..k-1, n = 1..N-1, then the
/// determinant-phase rows, then (when winding_m is set) the scaled winding row.
/// Frequency derivatives are centered differences with Richardson
/// extrapolation; the second-derivative step is widened to keep the roundoff
/// floor below the solver tolerance.
inline Eigen::VectorXd condition_stack(const PlacementProblem& problem,
                                       const std::vector<double>& L) {
    const int n = problem.dim(), k = problem.k;
    const double w0 = problem.w0;

    auto coeff = [&](double w, int idx) -> complexd {
        CompositeResult c = problem.composite(L, w);
        auto cp = char_poly_coeffs(c.su, 1e-6);
        return cp.c[idx];
    };
    auto detphase = [&](double w) -> double {
        CompositeResult c = problem.composite(L, w);
        return std::arg(c.su.det());
    };

    const double step_of[3] = {0.0, 1e-5 * std::abs(w0), 1e-4 * std::abs(w0)};
    std::vector<double> rows;
    for (int idx = 1; idx <= n - 1; ++idx) {
        for (int p = 0; p < k; ++p) {
            complexd v;
            if (p == 0) {
                v = coeff(w0, idx);
            } else {
                auto fre = [&](double w) { return coeff(w, idx).real(); };
                auto fim = [&](double w) { return coeff(w, idx).imag(); };
                const double h = step_of[std::min(p, 2)];
                v = complexd(derivative(fre, w0, p, h), derivative(fim, w0, p, h));
            }
            // raw w-derivatives; pose problems in units where w0 ~ O(1)
            rows.push_back(v.real());
            rows.push_back(v.imag());
        }
    }
    // determinant-phase rows; the composite strips scalar generators, so these
    // measure numerical drift of the SU-projected product
    {
        const double p0 = detphase(w0);
        rows.push_back(p0 - 2 * constants::pi * std::round(p0 / (2 * constants::pi)));
        for (int p = 1; p < k; ++p) {
            const double h = step_of[std::min(p, 2)];
            rows.push_back(derivative(detphase, w0, p, h));
        }
    }
    if (problem.winding_m) {
        double sumL = 0;
        for (double l : L) sumL += l;
        rows.push_back((sumL * problem.kappa0(w0) - 2.0 * *problem.winding_m * constants::pi) /
                       (2 * constants::pi));
    }
    return Eigen::Map<Eigen::VectorXd>(rows.data(), rows.size());
}

/// Multi-start Levenberg-Marquardt over the condition stack. Seeds whose
/// residual already satisfies the tolerance are returned immediately with the
/// degenerate_satisfied flag (zero iterations). Among converged seeds the
/// smallest total length wins; ties resolve by seed index, so parallel and
/// serial runs agree.
inline PlacementSolution solve_general(const PlacementProblem& problem,
                                       const MultiStartOptions& opts_in = {}) {
    MultiStartOptions opts = opts_in;
    if (opts.tol == 1e-10) opts.tol = 1e-8;  // FD-limited default for the general path
    const int M = problem.count();

    ResidualFn F = [&](const Eigen::VectorXd& Lv) {
        std::vector<double> L(Lv.data(), Lv.data() + Lv.size());
        for (double& l : L) l = std::abs(l);  // reflect: keeps LM off the boundary
        return condition_stack(problem, L);
    };

    // seed box from the phase-generator spread at w0
    double spread = 0;
    if (std::holds_alternative<ModePairCoefficients>(problem.modes)) {
        spread = std::abs(std::get<ModePairCoefficients>(problem.modes).FZ(problem.w0)) * 2;
    } else {
        auto phi = std::get<PhaseGenerator>(problem.modes).phi(problem.w0);
        spread = 2 * phi.cwiseAbs().maxCoeff();
    }
    if (spread <= 0) throw DegenerateSystemError("solve_general: degenerate phase generator");
    const double Lscale = 2 * constants::pi / spread;

    std::vector<Eigen::VectorXd> seeds = opts.explicit_seeds;
    {
        Eigen::VectorXd lo = Eigen::VectorXd::Constant(M, 0.05 * Lscale);
        Eigen::VectorXd hi = Eigen::VectorXd::Constant(M, 2.0 * Lscale * std::max(1, problem.k));
        for (auto& p : halton_points(M, opts.seed_count, lo, hi)) seeds.push_back(p);
    }

    SolveOptions sopt;
    sopt.tol = opts.tol;
    sopt.max_iter = opts.max_iter;
    sopt.fd_step = 1e-6;

    std::optional<PlacementSolution> best;
    bool any_progress = false;

    for (size_t si = 0; si < seeds.size(); ++si) {
        Eigen::VectorXd f0 = F(seeds[si]);
        PlacementSolution sol;
        SolveResult r;
        if (f0.lpNorm<Eigen::Infinity>() < opts.tol) {
            // nothing to solve at this seed: conditions hold identically
            r.x = seeds[si];
            r.converged = true;
            r.iterations = 0;
            r.residual_norm = f0.lpNorm<Eigen::Infinity>();
            sol.degenerate_satisfied = true;
        } else {
            r = solve_levenberg_marquardt(F, seeds[si], sopt);
            any_progress = any_progress || r.iterations > 0;
        }
        if (!r.converged) continue;
        if (r.x.cwiseAbs().minCoeff() <= 0) continue;

        sol.L.assign(r.x.size(), 0.0);
        for (int i = 0; i < r.x.size(); ++i) sol.L[i] = std::abs(r.x(i));
        sol.X = sol.L;
        if (std::holds_alternative<ModePairCoefficients>(problem.modes)) {
            const double fz = std::get<ModePairCoefficients>(problem.modes).FZ(problem.w0);
            for (size_t i = 0; i < sol.X.size(); ++i) sol.X[i] = sol.L[i] * fz;
        }
        sol.residuals = condition_stack(problem, sol.L);
        sol.sum_L = 0;
        for (double l : sol.L) sol.sum_L += l;
        sol.winding_value = sol.sum_L * problem.kappa0(problem.w0);
        sol.iterations = r.iterations;
        sol.seed_index = static_cast<int>(si);
        sol.final_step_norm = r.step_norm;

        if (!best || sol.sum_L < best->sum_L - 1e-12 * best->sum_L) best = std::move(sol);
        if (best->degenerate_satisfied) break;  // every point satisfies the stack
    }

    if (!best) {
        if (!any_progress)
            throw DegenerateSystemError(
                "solve_general: system stalled at every seed; the degeneracy is lifted when "
                "either the pi/2 scattering angle or the pure sigma_x action is relaxed");
        throw ConvergenceError("solve_general: no seed converged below tolerance");
    }
    return *best;
}

} // namespace dispeq
