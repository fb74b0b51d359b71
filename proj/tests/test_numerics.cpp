#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dispeq/numerics.hpp"

using namespace dispeq;

TEST_CASE("finite differences against analytic derivatives of sin") {
    auto f = [](double x) { return std::sin(x); };
    const double x = 0.7;
    CHECK(derivative(f, x, 1, 1e-3) == doctest::Approx(std::cos(x)).epsilon(1e-10));
    CHECK(derivative(f, x, 2, 1e-3) == doctest::Approx(-std::sin(x)).epsilon(1e-9));
    // third derivatives need a wider step: roundoff grows as eps/h^3
    CHECK(derivative(f, x, 3, 3e-2) == doctest::Approx(-std::cos(x)).epsilon(1e-9));
}

TEST_CASE("find_root brackets and converges") {
    auto f = [](double x) { return x * x - 2.0; };
    CHECK(find_root(f, 0.0, 2.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK_THROWS_AS(find_root(f, 2.0, 3.0), NoRootError);
}

TEST_CASE("Gauss-Legendre integrates polynomials of degree 2n-1 exactly") {
    auto rule = gauss_legendre(6);
    // x^11 over [0,1] -> 1/12
    auto f = [](double x) { return std::pow(x, 11); };
    CHECK(integrate_gl(f, 0.0, 1.0, rule) == doctest::Approx(1.0 / 12).epsilon(1e-14));
    // smooth non-polynomial needs more points
    auto g = [](double x) { return std::exp(-x * x); };
    auto fine = gauss_legendre(32);
    CHECK(integrate_gl(g, -5.0, 5.0, fine) ==
          doctest::Approx(std::sqrt(constants::pi)).epsilon(1e-12));
}

TEST_CASE("polyfit recovers exact polynomial coefficients") {
    std::vector<double> xs, ys;
    for (int i = -10; i <= 10; ++i) {
        double x = 0.1 * i;
        xs.push_back(x);
        ys.push_back(2.0 - 3.0 * x + 0.5 * x * x * x);
    }
    auto fit = polyfit(xs, ys, 3);
    CHECK(fit.coeffs(0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(fit.coeffs(1) == doctest::Approx(-3.0).epsilon(1e-12));
    CHECK(std::abs(fit.coeffs(2)) < 1e-12);
    CHECK(fit.coeffs(3) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(fit.rms_residual < 1e-13);
}

TEST_CASE("loglog_slope measures power laws") {
    std::vector<double> xs, ys;
    for (int i = 1; i <= 40; ++i) {
        double x = 1e-3 * std::pow(100.0, i / 40.0);
        xs.push_back(x);
        ys.push_back(7.0 * x * x * x);
    }
    auto s = loglog_slope(xs, ys);
    CHECK(s.slope == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(s.r2 > 0.999999);
}

TEST_CASE("halton points are deterministic and in range") {
    Eigen::VectorXd lo = Eigen::VectorXd::Zero(3), hi = Eigen::VectorXd::Ones(3);
    auto a = halton_points(3, 16, lo, hi);
    auto b = halton_points(3, 16, lo, hi);
    REQUIRE(a.size() == 16);
    for (int i = 0; i < 16; ++i) {
        CHECK((a[i] - b[i]).norm() == 0.0);
        CHECK(a[i].minCoeff() >= 0.0);
        CHECK(a[i].maxCoeff() <= 1.0);
    }
}

TEST_CASE("cauchy_derivative differentiates exp exactly") {
    auto f = [](complexd z) { return std::exp(z); };
    for (int order : {1, 2, 3}) {
        complexd d = cauchy_derivative(f, complexd(0.3, 0.0), order, 0.1);
        CHECK(std::abs(d - std::exp(complexd(0.3, 0.0))) < 1e-10);
    }
}

TEST_CASE("unwrap_near keeps phases continuous") {
    CHECK(unwrap_near(6.2, 0.1) == doctest::Approx(0.1 + 2 * constants::pi));
    CHECK(unwrap_near(-6.2, -0.1) == doctest::Approx(-0.1 - 2 * constants::pi));
    CHECK(unwrap_near(0.0, 0.2) == doctest::Approx(0.2));
}

TEST_CASE("parallel_for matches serial execution") {
    std::vector<int> serial(100), parallel(100);
    parallel_for(100, 1, [&](int i) { serial[i] = i * i; });
    parallel_for(100, 4, [&](int i) { parallel[i] = i * i; });
    CHECK(serial == parallel);
}
