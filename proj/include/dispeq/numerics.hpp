#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <functional>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "dispeq/constants.hpp"
#include "dispeq/errors.hpp"

namespace dispeq {

using complexd = std::complex<double>;

// ---------------------------------------------------------------------------
// finite differences
// ---------------------------------------------------------------------------

/// Centered finite difference of order 1..3, 5/7-point stencils (O(h^4)).
template <class F>
double finite_difference(F&& f, double x, int order, double h) {
    switch (order) {
        case 0:
            return f(x);
        case 1:
            return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
        case 2:
            return (-f(x + 2 * h) + 16 * f(x + h) - 30 * f(x) + 16 * f(x - h) - f(x - 2 * h)) /
                   (12 * h * h);
        case 3:
            return (-f(x + 3 * h) + 8 * f(x + 2 * h) - 13 * f(x + h) + 13 * f(x - h) -
                    8 * f(x - 2 * h) + f(x - 3 * h)) /
                   (8 * h * h * h);
        default:
            throw std::invalid_argument("finite_difference: order must be 0..3");
    }
}

/// Richardson-extrapolated centered difference: combines steps h and h/2 of the
/// O(h^4) stencils above into an O(h^6) estimate.
template <class F>
double derivative(F&& f, double x, int order, double h) {
    if (order == 0) return f(x);
    const double d1 = finite_difference(f, x, order, h);
    const double d2 = finite_difference(f, x, order, h / 2);
    return (16.0 * d2 - d1) / 15.0;
}

// ---------------------------------------------------------------------------
// root finding
// ---------------------------------------------------------------------------

/// Bisection/secant hybrid on a bracketing interval. Throws NoRootError when
/// the bracket does not change sign.
template <class F>
double find_root(F&& f, double lo, double hi, double xtol = 1e-14, int max_iter = 200) {
    double flo = f(lo), fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0) == (fhi > 0))
        throw NoRootError("find_root: no sign change on bracket");
    for (int i = 0; i < max_iter && (hi - lo) > xtol * std::max(1.0, std::abs(lo)); ++i) {
        // secant proposal, clamped into the middle 90% of the bracket
        double xs = hi - fhi * (hi - lo) / (fhi - flo);
        double xm = 0.5 * (lo + hi);
        double x = (xs > lo + 0.05 * (hi - lo) && xs < hi - 0.05 * (hi - lo)) ? xs : xm;
        double fx = f(x);
        if (fx == 0.0) return x;
        if ((fx > 0) == (flo > 0)) {
            lo = x;
            flo = fx;
        } else {
            hi = x;
            fhi = fx;
        }
    }
    return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Gauss-Legendre quadrature
// ---------------------------------------------------------------------------

struct QuadratureRule {
    std::vector<double> nodes;   // on [-1, 1]
    std::vector<double> weights;
};

/// Nodes/weights by Newton iteration on the Legendre polynomial.
inline QuadratureRule gauss_legendre(int n) {
    QuadratureRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(constants::pi * (i + 0.75) / (n + 0.5));
        double pp = 0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        r.nodes[i] = x;
        r.weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
    }
    return r;
}

/// Integrate f over [a, b] with an n-point rule.
template <class F>
double integrate_gl(F&& f, double a, double b, const QuadratureRule& rule) {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0;
    for (size_t i = 0; i < rule.nodes.size(); ++i)
        s += rule.weights[i] * f(mid + half * rule.nodes[i]);
    return s * half;
}

// ---------------------------------------------------------------------------
// polynomial least squares
// ---------------------------------------------------------------------------

struct PolyFit {
    Eigen::VectorXd coeffs;   // coeffs[k] multiplies x^k
    double condition = 0;     // condition estimate of the Vandermonde factor
    double rms_residual = 0;
};

inline PolyFit polyfit(const std::vector<double>& x, const std::vector<double>& y, int degree) {
    const int m = static_cast<int>(x.size());
    Eigen::MatrixXd V(m, degree + 1);
    Eigen::VectorXd b(m);
    for (int i = 0; i < m; ++i) {
        double p = 1;
        for (int k = 0; k <= degree; ++k) {
            V(i, k) = p;
            p *= x[i];
        }
        b(i) = y[i];
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(V, Eigen::ComputeThinU | Eigen::ComputeThinV);
    PolyFit fit;
    fit.coeffs = svd.solve(b);
    const auto& sv = svd.singularValues();
    fit.condition = sv(0) / sv(sv.size() - 1);
    fit.rms_residual = std::sqrt((V * fit.coeffs - b).squaredNorm() / m);
    return fit;
}

struct SlopeFit {
    double slope = 0;
    double intercept = 0;
    double r2 = 0;
};

/// Linear regression of log(y) against log(x); points with y<=0 are skipped.
inline SlopeFit loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> lx, ly;
    for (size_t i = 0; i < x.size(); ++i)
        if (x[i] > 0 && y[i] > 0) {
            lx.push_back(std::log(x[i]));
            ly.push_back(std::log(y[i]));
        }
    const size_t n = lx.size();
    if (n < 3) throw std::invalid_argument("loglog_slope: fewer than 3 usable points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (size_t i = 0; i < n; ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
        syy += ly[i] * ly[i];
    }
    SlopeFit s;
    const double den = n * sxx - sx * sx;
    s.slope = (n * sxy - sx * sy) / den;
    s.intercept = (sy - s.slope * sx) / n;
    double ss_res = 0, ss_tot = 0, ym = sy / n;
    for (size_t i = 0; i < n; ++i) {
        double fy = s.intercept + s.slope * lx[i];
        ss_res += (ly[i] - fy) * (ly[i] - fy);
        ss_tot += (ly[i] - ym) * (ly[i] - ym);
    }
    s.r2 = (ss_tot > 0) ? 1.0 - ss_res / ss_tot : 1.0;
    return s;
}

// ---------------------------------------------------------------------------
// low-discrepancy sequence
// ---------------------------------------------------------------------------

/// Halton radical inverse, bases 2,3,5,... per dimension.
inline double halton(unsigned index, unsigned base) {
    double f = 1.0, r = 0.0;
    while (index > 0) {
        f /= base;
        r += f * (index % base);
        index /= base;
    }
    return r;
}

inline std::vector<Eigen::VectorXd> halton_points(int dim, int count,
                                                  const Eigen::VectorXd& lo,
                                                  const Eigen::VectorXd& hi) {
    static const unsigned primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29};
    std::vector<Eigen::VectorXd> pts;
    pts.reserve(count);
    for (int i = 0; i < count; ++i) {
        Eigen::VectorXd p(dim);
        for (int d = 0; d < dim; ++d)
            p(d) = lo(d) + (hi(d) - lo(d)) * halton(i + 1, primes[d % 10]);
        pts.push_back(std::move(p));
    }
    return pts;
}

// ---------------------------------------------------------------------------
// Cauchy-integral differentiation
// ---------------------------------------------------------------------------

/// n-th derivative at z0 of a function analytic on |z-z0|<=radius, by trapezoid
/// sampling of the Cauchy integral. Spectrally accurate; immune to the
/// cancellation that breaks high-order real finite differences.
template <class F>
complexd cauchy_derivative(F&& f, complexd z0, int order, double radius, int samples = 32) {
    complexd acc = 0;
    for (int k = 0; k < samples; ++k) {
        double th = 2 * constants::pi * k / samples;
        complexd z = std::polar(radius, th);
        acc += f(z0 + z) * std::exp(complexd(0, -order * th));
    }
    double fact = 1;
    for (int k = 2; k <= order; ++k) fact *= k;
    return acc * fact / (double(samples) * std::pow(radius, order));
}

// ---------------------------------------------------------------------------
// misc
// ---------------------------------------------------------------------------

/// Shift `raw` by a multiple of 2*pi so it lands nearest `prev`.
inline double unwrap_near(double prev, double raw) {
    const double tau = 2 * constants::pi;
    return raw + tau * std::round((prev - raw) / tau);
}

/// Deterministic parallel map: results land in index order regardless of the
/// thread count.
template <class Fn>
void parallel_for(int n, int threads, Fn&& fn) {
    if (threads <= 1 || n < 2) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    int workers = std::min(threads, n);
    for (int t = 0; t < workers; ++t)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
        });
    for (auto& th : pool) th.join();
}

} // namespace dispeq
