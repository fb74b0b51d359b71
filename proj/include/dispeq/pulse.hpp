#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "dispeq/errors.hpp"
#include "dispeq/numerics.hpp"

namespace dispeq {

// ---------------------------------------------------------------------------
// time-domain pulse propagation through an exact frequency-dependent matrix
// ---------------------------------------------------------------------------

/// Gaussian input pulse, carrier w0, spectral amplitude exp(-nu^2/(4 sigma^2))
/// so |A|^2 has RMS width sigma.
struct PulseSpec {
    double w0 = 0;
    double rms_bandwidth = 0;                 // sigma of the power spectrum
    Eigen::Vector2cd amplitudes{1.0, 0.0};    // mode weights, normalized internally
    int samples = 4096;                       // power of two
    double window = 0;                        // spectral half-width; 0 -> 8 sigma
};

struct PulseStructure {
    std::function<Eigen::Matrix2cd(double)> period;  // full matrix, common phase included
    int periods = 1;
    std::function<Eigen::Matrix2cd(double)> reference;  // optional bare comparison
};

struct ModeMetrics {
    double energy = 0;
    double centroid = 0;   // arrival-time centroid
    double rms_width = 0;
};

struct PulseResult {
    std::vector<double> t;
    std::array<std::vector<complexd>, 2> series;
    std::array<ModeMetrics, 2> modes;
    double input_energy = 0;
    double output_energy = 0;
    double input_rms_width = 0;
    std::optional<std::array<ModeMetrics, 2>> reference_modes;
};

namespace detail {

/// In-place radix-2 FFT, e^{+i sign w t} convention via `sign`.
inline void fft_radix2(std::vector<complexd>& a, int sign) {
    const size_t n = a.size();
    if (n & (n - 1)) throw std::invalid_argument("fft: size must be a power of two");
    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (size_t len = 2; len <= n; len <<= 1) {
        const double ang = sign * 2 * constants::pi / double(len);
        const complexd wl(std::cos(ang), std::sin(ang));
        for (size_t i = 0; i < n; i += len) {
            complexd w(1, 0);
            for (size_t k = 0; k < len / 2; ++k) {
                complexd u = a[i + k], v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

inline Eigen::Matrix2cd matrix_power(Eigen::Matrix2cd m, int p) {
    Eigen::Matrix2cd r = Eigen::Matrix2cd::Identity();
    while (p > 0) {
        if (p & 1) r = r * m;
        m = m * m;
        p >>= 1;
    }
    return r;
}

inline ModeMetrics metrics_of(const std::vector<double>& t, const std::vector<complexd>& a,
                              double dt) {
    ModeMetrics m;
    double e = 0, c = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double p = std::norm(a[i]);
        e += p;
        c += t[i] * p;
    }
    m.energy = e * dt;
    if (e > 0) {
        m.centroid = c / e;
        double v = 0;
        for (size_t i = 0; i < a.size(); ++i) v += std::norm(a[i]) * (t[i] - m.centroid) * (t[i] - m.centroid);
        m.rms_width = std::sqrt(v / e);
    }
    return m;
}

} // namespace detail

/// Multiply the input spectrum by structure.period(w)^periods, inverse
/// transform, and report per-mode arrival centroid and RMS width. Signals
/// follow the e^{+i w t} convention, so a factor e^{-i kappa' L (w - w0)}
/// delays the envelope by +kappa' L.
inline PulseResult propagate_pulse(const PulseSpec& spec, const PulseStructure& structure) {
    const int n = spec.samples;
    if (n < 8 || (n & (n - 1)))
        throw std::invalid_argument("propagate_pulse: samples must be a power of two >= 8");
    const double sigma = spec.rms_bandwidth;
    if (sigma <= 0) throw std::invalid_argument("propagate_pulse: bandwidth must be > 0");
    const double W = spec.window > 0 ? spec.window : 8 * sigma;
    if (2 * W < 6 * sigma)
        throw std::invalid_argument("propagate_pulse: spectral window must cover 6x bandwidth");

    const double dnu = 2 * W / n;
    const double dt = 2 * constants::pi / (n * dnu);

    // normalized input spectrum: total energy sum |A|^2 |S|^2 dnu = 1
    Eigen::Vector2cd S = spec.amplitudes.normalized();
    std::vector<double> nu(n), amp(n);
    double norm2 = 0;
    for (int i = 0; i < n; ++i) {
        nu[i] = (i - n / 2) * dnu;
        amp[i] = std::exp(-nu[i] * nu[i] / (4 * sigma * sigma));
        norm2 += amp[i] * amp[i] * dnu;
    }
    const double scale = 1.0 / std::sqrt(norm2);
    for (double& a : amp) a *= scale;

    auto run = [&](const std::function<Eigen::Matrix2cd(double)>& fn,
                   PulseResult* fill_series) -> std::array<ModeMetrics, 2> {
        std::array<std::vector<complexd>, 2> b{std::vector<complexd>(n), std::vector<complexd>(n)};
        double eout = 0;
        for (int i = 0; i < n; ++i) {
            Eigen::Matrix2cd M = detail::matrix_power(fn(spec.w0 + nu[i]), structure.periods);
            Eigen::Vector2cd v = M * (S * amp[i]);
            b[0][i] = v(0);
            b[1][i] = v(1);
            eout += v.squaredNorm() * dnu;
        }
        // inverse transform: a(t_j) = sum_k b_k e^{+i nu_k t_j} dnu/(2 pi) with
        // nu_k = (k - n/2) dnu, t_j = (j - n/2) dt reduces to a plain DFT after
        // (-1)^k / (-1)^j modulation (and a global i^n, unit magnitude).
        std::vector<double> tgrid(n);
        for (int j = 0; j < n; ++j) tgrid[j] = (j - n / 2) * dt;
        const complexd global = std::pow(complexd(0, 1), n % 4);
        std::array<std::vector<complexd>, 2> series;
        for (int m = 0; m < 2; ++m) {
            std::vector<complexd> work(n);
            for (int k = 0; k < n; ++k) work[k] = (k % 2 ? -b[m][k] : b[m][k]);
            detail::fft_radix2(work, +1);
            series[m].resize(n);
            for (int j = 0; j < n; ++j) {
                const double sj = (j % 2 ? -1.0 : 1.0);
                series[m][j] = work[j] * sj * global * dnu / (2 * constants::pi);
            }
        }
        std::array<ModeMetrics, 2> mm{detail::metrics_of(tgrid, series[0], dt),
                                      detail::metrics_of(tgrid, series[1], dt)};
        // alias guard: energy within the outer 2% of the window
        const int edge = std::max(1, n / 50);
        double eedge = 0, etot = 0;
        for (int m = 0; m < 2; ++m)
            for (int j = 0; j < n; ++j) {
                const double p = std::norm(series[m][j]);
                etot += p;
                if (j < edge || j >= n - edge) eedge += p;
            }
        if (etot > 0 && eedge > 1e-6 * etot)
            throw AliasError("propagate_pulse: output energy touches the time-window edge");
        if (fill_series) {
            fill_series->t = tgrid;
            fill_series->series = std::move(series);
            fill_series->output_energy = eout;
        }
        return mm;
    };

    PulseResult res;
    res.input_energy = 1.0;
    res.input_rms_width = 1.0 / (2 * sigma);
    res.modes = run(structure.period, &res);
    if (structure.reference) res.reference_modes = run(structure.reference, nullptr);
    return res;
}

} // namespace dispeq
