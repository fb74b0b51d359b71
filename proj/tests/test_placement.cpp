#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "dispeq/dispersion.hpp"
#include "dispeq/placement.hpp"

using namespace dispeq;
using doctest::Approx;

namespace {

const WaveguideGeometry kGeom{2.0, 1.0};
const RefractionModel kModel = RationalPermittivity{15.0, 16.0};
const double kX1 = 2.10269, kX2 = 0.776642, kX3 = 7.35977;  // reference triple

double op_frequency() {
    static const double w0 = find_zero_curvature_frequency(make_mode_law(kGeom, kModel, 1, 1),
                                                           make_mode_law(kGeom, kModel, 2, 1),
                                                           2.5, 3.5)
                                 .omega0;
    return w0;
}

ModePairCoefficients reference_pair() {
    return mode_pair_coefficients(make_mode_law(kGeom, kModel, 1, 1),
                                  make_mode_law(kGeom, kModel, 2, 1), op_frequency(), 3);
}

Pauli2Scatterer pauli_scatterer(double w0, double fx0, double slope) {
    Pauli2Scatterer s;
    s.w0 = w0;
    s.fx_taylor = {fx0, slope};
    return s;
}

std::vector<DispersionLaw> linear_laws(const std::vector<double>& k0,
                                       const std::vector<double>& v) {
    std::vector<DispersionLaw> laws;
    for (size_t i = 0; i < k0.size(); ++i) {
        DispersionLaw l;
        double a = k0[i], b = v[i];
        l.kappa = [a, b](double w) { return a + b * w; };
        l.kappa_d1 = [b](double) { return b; };
        l.kappa_d2 = [](double) { return 0.0; };
        l.kappa_d3 = [](double) { return 0.0; };
        laws.push_back(l);
    }
    return laws;
}

} // namespace

TEST_CASE("reduced residuals: trivial point and the reference triple") {
    auto [r1, r2] = reduced_system_residuals(0, 0, 0);
    CHECK(r1 == 3.0);
    CHECK(r2 == 0.0);

    auto [p1, p2] = reduced_system_residuals(kX1, kX2, kX3);
    // the reference values are rounded to 6 digits; residuals sit at that floor
    CHECK(std::abs(p1) < 2e-3);
    CHECK(std::abs(p2) < 2e-3);
    CHECK(std::abs(p1) == Approx(4.69e-4).epsilon(0.05));
    CHECK(std::abs(p2) == Approx(3.97e-4).epsilon(0.05));
}

TEST_CASE("reduced residuals: symmetry under X1 <-> X3 swap") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 4 * constants::pi);
    for (int i = 0; i < 200; ++i) {
        double a = u(rng), b = u(rng), c = u(rng);
        auto [r1, r2] = reduced_system_residuals(a, b, c);
        auto [s1, s2] = reduced_system_residuals(c, b, a);
        CHECK(r1 == Approx(s1).epsilon(1e-12).scale(1.0));
        CHECK(r2 == Approx(s2).epsilon(1e-12).scale(1.0));
    }
}

TEST_CASE("reduced residuals: 2pi argument shifts preserve r1 but shift r2") {
    // X -> X + (0, -pi, -pi) advances the first argument by 2 pi exactly
    auto [r1, r2] = reduced_system_residuals(kX1, kX2, kX3);
    auto [s1, s2] = reduced_system_residuals(kX1, kX2 - constants::pi, kX3 - constants::pi);
    CHECK(s1 == Approx(r1).epsilon(1e-12));
    const double A1 = kX1 - kX2 - kX3;
    CHECK(s2 - r2 == Approx(2 * constants::pi * std::sin(A1)).epsilon(1e-10));
    // so the shifted triple is NOT automatically a solution: family membership
    // has to come from the solver, not from shift symmetry
    CHECK(std::abs(s2) > 1.0);
}

TEST_CASE("grid scan locates the solution family; solver solutions belong to it") {
    auto mp = reference_pair();
    PlacementSolution sol = solve_reduced(10, mp.fi0(), mp.fz0());

    // freeze X3 at the solver's value; 2-D Newton on (r1, r2) from each grid
    // node finds the isolated family points in the (X1, X2) slice
    std::vector<std::pair<double, double>> roots;
    const int n = 12;
    for (int i = 1; i < n; ++i)
        for (int j = 1; j < n; ++j) {
            double x1 = 4 * constants::pi * i / n, x2 = 4 * constants::pi * j / n;
            bool ok = true;
            for (int it = 0; it < 60; ++it) {
                auto [r1, r2] = reduced_system_residuals(x1, x2, sol.X[2]);
                if (std::abs(r1) + std::abs(r2) < 1e-11) break;
                const double h = 1e-7;
                auto [a1, a2] = reduced_system_residuals(x1 + h, x2, sol.X[2]);
                auto [b1, b2] = reduced_system_residuals(x1, x2 + h, sol.X[2]);
                const double j11 = (a1 - r1) / h, j12 = (b1 - r1) / h;
                const double j21 = (a2 - r2) / h, j22 = (b2 - r2) / h;
                const double det = j11 * j22 - j12 * j21;
                if (std::abs(det) < 1e-12) { ok = false; break; }
                x1 -= (r1 * j22 - r2 * j12) / det;
                x2 -= (j11 * r2 - j21 * r1) / det;
                if (it == 59) ok = false;
            }
            auto [f1, f2] = reduced_system_residuals(x1, x2, sol.X[2]);
            if (!ok || std::abs(f1) + std::abs(f2) > 1e-10) continue;
            bool dup = false;
            for (auto& r : roots)
                if (std::abs(r.first - x1) + std::abs(r.second - x2) < 1e-6) dup = true;
            if (!dup) roots.emplace_back(x1, x2);
        }
    CHECK(roots.size() > 1);  // several family points cross the slice

    // the solver's point is one of them
    bool found = false;
    for (auto& r : roots)
        if (std::abs(r.first - sol.X[0]) + std::abs(r.second - sol.X[1]) < 1e-6) found = true;
    CHECK(found);

    auto [q1, q2] = reduced_system_residuals(sol.X[0], sol.X[1], sol.X[2]);
    CHECK(std::abs(q1) < 1e-10);
    CHECK(std::abs(q2) < 1e-10);
}

TEST_CASE("solve_reduced: m=10 reproduces the reference configuration") {
    auto mp = reference_pair();
    const double FI0 = mp.fi0(), FZ0 = mp.fz0();

    PlacementSolution sol = solve_reduced(10, FI0, FZ0);
    const double sumX = sol.X[0] + sol.X[1] + sol.X[2];
    CHECK(sumX == Approx(20 * constants::pi * FZ0 / FI0).epsilon(1e-12));
    CHECK(sumX == Approx(10.23910).epsilon(2e-5));
    CHECK(sol.residuals.cwiseAbs().maxCoeff() < 1e-10);
    CHECK(std::abs(sol.winding_value - 20 * constants::pi) < 1e-9);
    for (double x : sol.X) CHECK(x > 0);

    // seeded at the reference triple it converges to the exact version of it
    MultiStartOptions seeded;
    seeded.explicit_seeds = {(Eigen::VectorXd(3) << kX1, kX2, kX3).finished()};
    PlacementSolution ps = solve_reduced(10, FI0, FZ0, seeded);
    CHECK(ps.seed_index == 0);
    CHECK(ps.X[0] == Approx(kX1).epsilon(2e-5));
    CHECK(ps.X[1] == Approx(kX2).epsilon(2e-5));
    CHECK(ps.X[2] == Approx(kX3).epsilon(2e-5));
    CHECK(2 * ps.sum_L == Approx(37.2905).epsilon(3e-5));  // period 18.645 a, a = 2
}

TEST_CASE("solve_reduced: infeasible winding and zero F_z are rejected") {
    CHECK_THROWS_AS(solve_reduced(0, 3.37, 0.549), InfeasibleError);
    CHECK_THROWS_AS(solve_reduced(-3, 3.37, 0.549), InfeasibleError);
    CHECK_THROWS_AS(solve_reduced(10, 3.37, 0.0), std::invalid_argument);
}

TEST_CASE("solve_reduced: deterministic across runs") {
    auto mp = reference_pair();
    PlacementSolution a = solve_reduced(10, mp.fi0(), mp.fz0());
    PlacementSolution b = solve_reduced(10, mp.fi0(), mp.fz0());
    CHECK(a.seed_index == b.seed_index);
    CHECK(a.X[0] == b.X[0]);
    CHECK(a.X[1] == b.X[1]);
    CHECK(a.X[2] == b.X[2]);
}

TEST_CASE("condition_stack: reference triple at k=3 sits at the rounding floor") {
    auto mp = reference_pair();
    PlacementProblem prob;
    prob.modes = mp;
    prob.scatterer = pauli_scatterer(op_frequency(), constants::pi / 2, 0.1);
    prob.w0 = op_frequency();
    prob.k = 3;
    const double fz = mp.fz0();
    auto res = condition_stack(prob, {kX1 / fz, kX2 / fz, kX3 / fz});
    CHECK(res.cwiseAbs().maxCoeff() < 2e-3);
}

TEST_CASE("condition_stack: flip scatterer with zero slope is identically zero") {
    auto mp = reference_pair();
    PlacementProblem prob;
    prob.modes = mp;
    prob.scatterer = pauli_scatterer(op_frequency(), constants::pi / 2, 0.0);
    prob.w0 = op_frequency();
    prob.k = 3;
    auto res = condition_stack(prob, {0.0, 0.0, 0.0});
    CHECK(res.cwiseAbs().maxCoeff() < 1e-10);
    auto res2 = condition_stack(prob, {1.7, 0.3, 2.9});
    CHECK(res2.cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("condition_stack: symbolic derivative oracle for the truncated system") {
    // truncated c1(w) = 2 cos Fx(w) G(w), G = sum of cos(F_z(w) C_i):
    //   dc1/dw|w0   = -2 Fx' G0
    //   d2c1/dw2|w0 = -2 Fx'' G0 - 4 Fx' G'0,  G'0 = -(F_z'/F_z0) * r2-sum
    auto mp = reference_pair();
    const double w0 = op_frequency();
    const double fz0 = mp.fz0(), fzp = mp.fz_taylor[1];
    const double fxp = 0.1;

    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(0.2, 9.0);
    for (int rep = 0; rep < 12; ++rep) {
        const double X1 = u(rng), X2 = u(rng), X3 = u(rng);
        PlacementProblem prob;
        prob.modes = mp;
        prob.scatterer = pauli_scatterer(w0, constants::pi / 2, fxp);
        prob.w0 = w0;
        prob.k = 3;
        auto res = condition_stack(prob, {X1 / fz0, X2 / fz0, X3 / fz0});

        auto [r1, r2] = reduced_system_residuals(X1, X2, X3);
        const double d1_expect = -2 * fxp * r1;
        const double gp0 = -(fzp / fz0) * r2;
        const double d2_expect = -4 * fxp * gp0;

        // rows: Re c1, Im c1, Re dc1, Im dc1, Re d2c1, Im d2c1, detphase...
        CHECK(std::abs(res(0)) < 1e-12);  // c1(w0) = 0 exactly at the flip angle
        CHECK(res(2) == Approx(d1_expect).epsilon(1e-8).scale(1.0));
        CHECK(res(4) == Approx(d2_expect).epsilon(1e-6).scale(1.0));
    }
}

TEST_CASE("condition_stack: scaling invariance kappa*c, L/c") {
    const double c = 3.7;
    auto laws1 = linear_laws({3.0, 2.0}, {1.1, 0.4});
    auto laws2 = linear_laws({3.0 * c, 2.0 * c}, {1.1 * c, 0.4 * c});
    const double w0 = 1.0;
    auto mp1 = mode_pair_coefficients(laws1[0], laws1[1], w0, 3);
    auto mp2 = mode_pair_coefficients(laws2[0], laws2[1], w0, 3);

    PlacementProblem p1, p2;
    p1.modes = mp1;
    p2.modes = mp2;
    p1.scatterer = p2.scatterer = pauli_scatterer(w0, constants::pi / 2, 0.1);
    p1.w0 = p2.w0 = w0;
    p1.scatterer_count = p2.scatterer_count = 4;
    std::vector<double> L{1.3, 0.7, 2.1, 0.5};
    std::vector<double> Lc = L;
    for (double& l : Lc) l /= c;

    // k = 1: analytic rows only, exact invariance
    p1.k = p2.k = 1;
    auto r1 = condition_stack(p1, L);
    auto r2 = condition_stack(p2, Lc);
    CHECK((r1 - r2).cwiseAbs().maxCoeff() < 1e-12);

    // k = 2 adds finite-difference rows, invariant to the FD noise floor
    p1.k = p2.k = 2;
    auto d1 = condition_stack(p1, L);
    auto d2 = condition_stack(p2, Lc);
    CHECK((d1 - d2).cwiseAbs().maxCoeff() < 2e-9);
}

TEST_CASE("solve_general: N=3, k=1 generic problem converges and cubes to identity") {
    auto laws = linear_laws({5.0, 4.4, 6.1}, {1.3, 2.1, 0.7});
    PhaseGenerator gen(laws);

    std::mt19937 rng(17);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    MatrixXcd H(3, 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) H(i, j) = complexd(u(rng), u(rng));
    MatrixXcd H0 = 0.5 * (H + H.adjoint()).eval();
    GenericNScatterer g{3, [H0](double w) { return MatrixXcd((1.0 + 0.1 * (w - 1.0)) * H0); }};

    PlacementProblem prob;
    prob.modes = gen;
    prob.scatterer = g;
    prob.w0 = 1.0;
    prob.k = 1;

    PlacementSolution sol = solve_general(prob);
    CHECK(sol.residuals.cwiseAbs().maxCoeff() < 1e-8);
    CHECK(sol.L.size() == 3);
    for (double l : sol.L) CHECK(l > 0);

    // direct verification: T^3 proportional to the identity at w0
    auto comp = prob.composite(sol.L, prob.w0);
    MatrixXcd T3 = comp.su.mat * comp.su.mat * comp.su.mat;
    CHECK((T3 - T3(0, 0) * MatrixXcd::Identity(3, 3)).norm() < 1e-6);
    CHECK(std::abs(std::abs(T3(0, 0)) - 1.0) < 1e-9);

    // round trip through condition_stack
    CHECK(condition_stack(prob, sol.L).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("solve_general: k=1 flip-angle two-mode case is degenerate but satisfied") {
    auto mp = reference_pair();
    PlacementProblem prob;
    prob.modes = mp;
    prob.scatterer = pauli_scatterer(op_frequency(), constants::pi / 2, 0.0);
    prob.w0 = op_frequency();
    prob.k = 1;
    prob.scatterer_count = 3;

    PlacementSolution sol = solve_general(prob);
    CHECK(sol.degenerate_satisfied);
    CHECK(sol.iterations == 0);
    CHECK(sol.residuals.cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("solve_general: N=2 k=3 with winding recovers a family member") {
    auto mp = reference_pair();
    PlacementProblem prob;
    prob.modes = mp;
    prob.scatterer = pauli_scatterer(op_frequency(), constants::pi / 2, 0.1);
    prob.w0 = op_frequency();
    prob.k = 3;
    prob.winding_m = 10;
    prob.scatterer_count = 3;

    MultiStartOptions opts;
    const double fz = mp.fz0();
    opts.explicit_seeds = {(Eigen::VectorXd(3) << kX1 / fz, kX2 / fz, kX3 / fz).finished()};
    PlacementSolution sol = solve_general(prob, opts);
    CHECK(sol.residuals.cwiseAbs().maxCoeff() < 1e-8);
    // lands on the reference triple up to the X1 <-> X3 mirror (same family)
    std::vector<double> got = sol.X, want{kX1, kX2, kX3};
    std::sort(got.begin(), got.end());
    std::sort(want.begin(), want.end());
    for (int i = 0; i < 3; ++i) CHECK(got[i] == Approx(want[i]).epsilon(1e-4));
    CHECK(std::abs(sol.winding_value - 20 * constants::pi) < 1e-7);
}

TEST_CASE("solve_general: frequency-flat flip angle makes k=3 a full family") {
    // with the scattering angle exactly pi/2 at every frequency the whole
    // condition stack vanishes identically: any positive triple is a
    // solution, and the reference triple is returned untouched when seeded
    auto mp = reference_pair();
    PlacementProblem prob;
    prob.modes = mp;
    prob.scatterer = pauli_scatterer(op_frequency(), constants::pi / 2, 0.0);
    prob.w0 = op_frequency();
    prob.k = 3;
    prob.scatterer_count = 3;

    MultiStartOptions opts;
    const double fz = mp.fz0();
    opts.explicit_seeds = {(Eigen::VectorXd(3) << kX1 / fz, kX2 / fz, kX3 / fz).finished()};
    PlacementSolution sol = solve_general(prob, opts);
    CHECK(sol.degenerate_satisfied);
    CHECK(sol.iterations == 0);
    CHECK(sol.X[0] == Approx(kX1).epsilon(1e-12));
    CHECK(sol.X[1] == Approx(kX2).epsilon(1e-12));
    CHECK(sol.X[2] == Approx(kX3).epsilon(1e-12));
}
