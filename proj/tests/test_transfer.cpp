#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "dispeq/dispersion.hpp"
#include "dispeq/transfer.hpp"

using namespace dispeq;
using doctest::Approx;

namespace {

const WaveguideGeometry kGeom{2.0, 1.0};
const RefractionModel kModel = RationalPermittivity{15.0, 16.0};

ModePairCoefficients reference_pair(double w0 = 2.98307) {
    auto k1 = make_mode_law(kGeom, kModel, 1, 1);
    auto k2 = make_mode_law(kGeom, kModel, 2, 1);
    return mode_pair_coefficients(k1, k2, w0, 3);
}

Pauli2Scatterer flip_scatterer(double w0, double slope = 0.0) {
    Pauli2Scatterer s;
    s.w0 = w0;
    s.fx_taylor = {constants::pi / 2, slope};
    return s;
}

// linear synthetic laws for N-mode tests
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

TEST_CASE("propagation_matrix: identity at L=0 and sigma_z exponential") {
    auto mp = reference_pair();
    auto T0 = propagation_matrix(mp, 0.0, 2.98307);
    CHECK((T0.mat - MatrixXcd::Identity(2, 2)).norm() == 0.0);

    // common phase dropped, F_z L = pi/2 -> diag(e^{-i pi/2}, e^{+i pi/2})
    const double w = 2.98307;
    const double L = (constants::pi / 2) / mp.FZ(w);
    auto T = propagation_matrix(mp, L, w);
    CHECK(std::abs(T.mat(0, 0) - complexd(0, -1)) < 1e-12);
    CHECK(std::abs(T.mat(1, 1) - complexd(0, 1)) < 1e-12);
    CHECK(std::abs(T.mat(0, 1)) == 0.0);
}

TEST_CASE("propagation_matrix: the solved X1 gives relative phase 2 X1") {
    auto mp = reference_pair();
    const double w = 2.98307;
    const double X1 = 2.10269;
    const double L = X1 / mp.FZ(w);
    auto T = propagation_matrix(mp, L, w);
    const double rel = std::arg(T.mat(1, 1) / T.mat(0, 0));
    CHECK(std::remainder(rel - 2 * X1, 2 * constants::pi) == Approx(0.0).epsilon(1e-10));
}

TEST_CASE("scatterer_matrix: flip, identity, exponential law") {
    auto w0 = 2.98307;
    auto flip = scatterer_matrix(flip_scatterer(w0), w0);
    CHECK((flip.mat - complexd(0, 1) * pauli_x()).norm() < 1e-15);

    Pauli2Scatterer zero;
    zero.w0 = w0;
    zero.fx_taylor = {0.0};
    CHECK((scatterer_matrix(zero, w0).mat - MatrixXcd::Identity(2, 2)).norm() == 0.0);

    // GenericN: s = 0 -> identity; doubling a fixed Hermitian action squares S
    MatrixXcd H = MatrixXcd::Zero(3, 3);
    H(0, 1) = complexd(0.3, 0.1);
    H(1, 0) = std::conj(H(0, 1));
    H(2, 2) = 0.4;
    GenericNScatterer g0{3, [](double) { return MatrixXcd(MatrixXcd::Zero(3, 3)); }};
    CHECK((scatterer_matrix(g0, 1.0).mat - MatrixXcd::Identity(3, 3)).norm() < 1e-15);
    GenericNScatterer g{3, [H](double) { return MatrixXcd(H); }};
    GenericNScatterer g2{3, [H](double) { return MatrixXcd(2 * H); }};
    auto S1 = scatterer_matrix(g, 1.0), S2 = scatterer_matrix(g2, 1.0);
    CHECK((S2.mat - S1.mat * S1.mat).norm() < 1e-13);
}

TEST_CASE("composite_matrix: pure flips square to -I") {
    auto w0 = 2.98307;
    auto mp = reference_pair();
    auto c = composite_matrix({0.0, 0.0, 0.0}, flip_scatterer(w0), mp, w0, 2);
    // (i sx)^6 = -I
    CHECK((c.su.mat + MatrixXcd::Identity(2, 2)).norm() < 1e-14);
    CHECK(c.common_phase == 0.0);
}

TEST_CASE("composite_matrix: repetitions equal repeated products") {
    auto w0 = 2.98307;
    auto mp = reference_pair();
    std::vector<double> L{1.3, 0.4, 2.2};
    auto one = composite_matrix(L, flip_scatterer(w0, 0.1), mp, w0, 1);
    auto three = composite_matrix(L, flip_scatterer(w0, 0.1), mp, w0, 3);
    CHECK((three.su.mat - one.su.mat * one.su.mat * one.su.mat).norm() < 1e-12);
    CHECK(three.common_phase == Approx(3 * one.common_phase).epsilon(1e-15));
}

TEST_CASE("composite_matrix: unitarity property over random draws") {
    std::mt19937_64 rng(20260808);
    std::uniform_real_distribution<double> uL(0.0, 5.0), uf(0.0, constants::pi), uw(2.8, 3.1);
    auto mp = reference_pair();
    double worst = 0;
    for (int i = 0; i < 10000; ++i) {
        Pauli2Scatterer s;
        const double w = uw(rng);
        s.w0 = w;
        s.fx_taylor = {uf(rng)};
        auto c = composite_matrix({uL(rng), uL(rng), uL(rng)}, s, mp, w);
        worst = std::max(worst, c.su.unitarity_defect());
    }
    CHECK(worst < 2e-12);
}

TEST_CASE("determinant of traceless-generator propagation is exactly 1") {
    auto laws = linear_laws({3.0, 2.0, 4.5}, {1.0, 1.7, 0.4});
    PhaseGenerator gen(laws);
    for (double w : {0.5, 1.0, 2.0}) {
        CHECK(std::abs(gen.phi(w).sum()) < 1e-12);
        auto P = propagation_matrix(gen, 2.7, w);
        CHECK(std::abs(P.det() - complexd(1, 0)) < 1e-12);
    }
}

TEST_CASE("char_poly_c1: trivial values") {
    CHECK(char_poly_c1(TransferMatrix(MatrixXcd::Identity(2, 2))) == complexd(-2, 0));
    CHECK(std::abs(char_poly_c1(TransferMatrix(MatrixXcd(complexd(0, 1) * pauli_x())))) <
          1e-15);
}

TEST_CASE("char_poly_coeffs: identity, cube root of identity, random oracle") {
    auto cp3 = char_poly_coeffs(TransferMatrix(MatrixXcd::Identity(3, 3)));
    CHECK(cp3.c[2] == complexd(-3, 0));
    CHECK(cp3.c[1] == complexd(3, 0));
    CHECK(cp3.phi_det == 0.0);

    // nondegenerate cube root of identity: lambda^3 - 1
    MatrixXcd D = MatrixXcd::Zero(3, 3);
    D(0, 0) = 1;
    D(1, 1) = std::exp(complexd(0, 2 * constants::pi / 3));
    D(2, 2) = std::exp(complexd(0, 4 * constants::pi / 3));
    auto cpd = char_poly_coeffs(TransferMatrix(D));
    CHECK(std::abs(cpd.c[1]) < 1e-15);
    CHECK(std::abs(cpd.c[2]) < 1e-15);
    CHECK(std::abs(cpd.phi_det) < 1e-15);

    // oracle: polynomial evaluation at sample lambda equals det(lambda I - T)
    std::mt19937_64 rng(7);
    std::normal_distribution<double> n01;
    for (int rep = 0; rep < 20; ++rep) {
        MatrixXcd A(3, 3);
        for (int i = 0; i < 9; ++i) A(i / 3, i % 3) = complexd(n01(rng), n01(rng));
        Eigen::HouseholderQR<MatrixXcd> qr(A);
        MatrixXcd Q = qr.householderQ();
        auto cp = char_poly_coeffs(TransferMatrix(Q));
        for (complexd lam : {complexd(0.3, 0.2), complexd(-1.1, 0.7), complexd(0.0, -0.9)}) {
            complexd poly = lam * lam * lam + cp.c[2] * lam * lam + cp.c[1] * lam + cp.c[0];
            complexd direct = (lam * MatrixXcd::Identity(3, 3) - Q).determinant();
            CHECK(std::abs(poly - direct) < 1e-12);
        }
    }

    CHECK_THROWS_AS(
        char_poly_coeffs(TransferMatrix(MatrixXcd(0.5 * MatrixXcd::Identity(3, 3)))),
        DetNotUnimodularError);
}

TEST_CASE("analytic_c1: flip angle kills every term; matrix-product oracle") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> uX(0.0, 4 * constants::pi),
        uf(0.2, constants::pi - 0.2);
    for (int i = 0; i < 10; ++i)
        CHECK(analytic_c1(uX(rng), uX(rng), uX(rng), constants::pi / 2) == Approx(0.0));

    // randomized equivalence with the composite product at matched X
    auto mp = reference_pair();
    const double w0 = 2.98307;
    const double fz = mp.FZ(w0);
    for (int i = 0; i < 100; ++i) {
        const double X1 = uX(rng), X2 = uX(rng), X3 = uX(rng), fx = uf(rng);
        Pauli2Scatterer s;
        s.w0 = w0;
        s.fx_taylor = {fx};
        auto c = composite_matrix({X1 / fz, X2 / fz, X3 / fz}, s, mp, w0);
        const complexd c1 = char_poly_c1(c.su);
        CHECK(std::abs(c1.imag()) < 1e-12);
        CHECK(analytic_c1(X1, X2, X3, fx) == Approx(c1.real()).epsilon(1e-10));
    }
}

TEST_CASE("analytic_c1: first-order expansion near the flip angle") {
    // cos Fx ~ -delta near pi/2, so c1 ~ -2 delta (sum of three cosines)
    const double X1 = 2.10269, X2 = 0.776642, X3 = 7.35977;
    const double delta = 1e-3;
    const double sum3 =
        std::cos(X1 - X2 - X3) + std::cos(X1 + X2 - X3) + std::cos(X1 - X2 + X3);
    CHECK(std::abs(sum3) < 1.5e-3);  // near-solution triple
    const double c1 = analytic_c1(X1, X2, X3, constants::pi / 2 + delta);
    CHECK(c1 == Approx(-2 * delta * sum3).epsilon(1e-4));
}

TEST_CASE("pauli_decompose: closed forms and recomposition") {
    auto dI = pauli_decompose(TransferMatrix(MatrixXcd::Identity(2, 2)));
    CHECK(dI.cI == complexd(1, 0));
    CHECK(std::abs(dI.cx) + std::abs(dI.cy) + std::abs(dI.cz) == 0.0);

    auto dx = pauli_decompose(TransferMatrix(MatrixXcd(complexd(0, 1) * pauli_x())));
    CHECK(dx.cx == complexd(0, 1));

    const double th = 0.77;
    Matrix2cd ez = su2_exp(0.0, 0.0, th);
    auto dz = pauli_decompose(TransferMatrix(MatrixXcd(ez)));
    CHECK(dz.cI.real() == Approx(std::cos(th)).epsilon(1e-15));
    CHECK(dz.cz.imag() == Approx(std::sin(th)).epsilon(1e-15));

    std::mt19937_64 rng(5);
    std::normal_distribution<double> n01;
    for (int i = 0; i < 50; ++i) {
        Matrix2cd m;
        for (int e = 0; e < 4; ++e) m(e / 2, e % 2) = complexd(n01(rng), n01(rng));
        auto d = pauli_decompose(TransferMatrix(MatrixXcd(m)));
        CHECK((d.recompose() - m).norm() < 1e-13);
    }
}

TEST_CASE("generic-N composite tracks the scatterer trace as common phase") {
    auto laws = linear_laws({3.0, 2.0, 4.5}, {1.0, 1.7, 0.4});
    PhaseGenerator gen(laws);
    MatrixXcd H = MatrixXcd::Zero(3, 3);
    H(0, 0) = 0.5;
    H(1, 1) = 0.2;
    H(0, 2) = complexd(0.1, 0.2);
    H(2, 0) = std::conj(H(0, 2));
    GenericNScatterer g{3, [H](double) { return MatrixXcd(H); }};

    const double w = 1.3;
    auto c = composite_matrix({0.7, 1.1, 0.4}, g, gen, w);
    CHECK(std::abs(c.su.det() - complexd(1, 0)) < 1e-12);

    // brute-force product with full phases
    MatrixXcd full = MatrixXcd::Identity(3, 3);
    MatrixXcd S = scatterer_matrix(g, w).mat;
    for (double L : {0.7, 1.1, 0.4}) {
        MatrixXcd P = MatrixXcd::Zero(3, 3);
        for (int i = 0; i < 3; ++i) P(i, i) = std::exp(complexd(0, -L * laws[i](w)));
        full = P * S * full;
    }
    CHECK((c.full() - full).norm() < 1e-12);
}

TEST_CASE("nondegenerate root-of-identity detection") {
    // identity is a *degenerate* root for N > 1: all eigenvalues coincide
    CHECK_FALSE(is_nondegenerate_root_of_identity(TransferMatrix(MatrixXcd::Identity(3, 3))));

    MatrixXcd D = MatrixXcd::Zero(3, 3);
    D(0, 0) = 1;
    D(1, 1) = std::exp(complexd(0, 2 * constants::pi / 3));
    D(2, 2) = std::exp(complexd(0, 4 * constants::pi / 3));
    CHECK(is_nondegenerate_root_of_identity(TransferMatrix(D)));

    // global phase does not matter
    CHECK(is_nondegenerate_root_of_identity(
        TransferMatrix(MatrixXcd(std::exp(complexd(0, 0.37)) * D))));

    // a slightly detuned eigenvalue fails at tight tolerance, passes at loose
    MatrixXcd D2 = D;
    D2(1, 1) *= std::exp(complexd(0, 1e-5));
    CHECK_FALSE(is_nondegenerate_root_of_identity(TransferMatrix(D2), 1e-8));
    CHECK(is_nondegenerate_root_of_identity(TransferMatrix(D2), 1e-3));

    // two-mode flip composite: an exact square root of the identity
    auto mp = reference_pair();
    auto c = composite_matrix({1.1, 0.3, 2.0}, flip_scatterer(2.98307), mp, 2.98307);
    CHECK(is_nondegenerate_root_of_identity(c.su, 1e-10));
}
