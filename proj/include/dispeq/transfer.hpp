#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "dispeq/dispersion.hpp"
#include "dispeq/errors.hpp"
#include "dispeq/numerics.hpp"

namespace dispeq {

using Eigen::Matrix2cd;
using Eigen::MatrixXcd;
using Eigen::Vector2cd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Pauli basis
// ---------------------------------------------------------------------------

inline const Matrix2cd& pauli_x() {
    static const Matrix2cd s = (Matrix2cd() << 0, 1, 1, 0).finished();
    return s;
}
inline const Matrix2cd& pauli_y() {
    static const Matrix2cd s = (Matrix2cd() << 0, complexd(0, -1), complexd(0, 1), 0).finished();
    return s;
}
inline const Matrix2cd& pauli_z() {
    static const Matrix2cd s = (Matrix2cd() << 1, 0, 0, -1).finished();
    return s;
}

/// exp(i (vx sx + vy sy + vz sz)) in closed form (Rodrigues).
inline Matrix2cd su2_exp(double vx, double vy, double vz) {
    const double t = std::sqrt(vx * vx + vy * vy + vz * vz);
    Matrix2cd m = std::cos(t) * Matrix2cd::Identity();
    if (t > 0) {
        const complexd is = complexd(0, 1) * std::sin(t) / t;
        m += is * (vx * pauli_x() + vy * pauli_y() + vz * pauli_z());
    }
    return m;
}

/// Same, complex rotation vector (needed for analytic continuation in
/// frequency); sqrt/sin/cos taken on the principal branch.
inline Matrix2cd su2_exp(complexd vx, complexd vy, complexd vz) {
    const complexd t = std::sqrt(vx * vx + vy * vy + vz * vz);
    Matrix2cd m = std::cos(t) * Matrix2cd::Identity();
    const complexd sinc = (std::abs(t) > 0) ? std::sin(t) / t : complexd(1, 0);
    m += complexd(0, 1) * sinc * (vx * pauli_x() + vy * pauli_y() + vz * pauli_z());
    return m;
}

// ---------------------------------------------------------------------------
// transfer matrix
// ---------------------------------------------------------------------------

/// N x N complex transfer matrix plus its unitarity diagnostics.
struct TransferMatrix {
    MatrixXcd mat;

    TransferMatrix() = default;
    explicit TransferMatrix(MatrixXcd m) : mat(std::move(m)) {}

    int dim() const { return static_cast<int>(mat.rows()); }

    /// Frobenius norm of M^dag M - I.
    double unitarity_defect() const {
        return (mat.adjoint() * mat - MatrixXcd::Identity(mat.rows(), mat.cols())).norm();
    }
    complexd det() const { return mat.determinant(); }

    TransferMatrix operator*(const TransferMatrix& rhs) const {
        return TransferMatrix(mat * rhs.mat);
    }
};

// ---------------------------------------------------------------------------
// generators
// ---------------------------------------------------------------------------

/// Traceless diagonal propagation generator phi(w) for N dispersion laws,
/// phi_ll = kappa_l - mean(kappa), plus the common phase kappa0 = mean(kappa).
struct PhaseGenerator {
    std::vector<DispersionLaw> laws;

    explicit PhaseGenerator(std::vector<DispersionLaw> ls) : laws(std::move(ls)) {
        if (laws.size() < 2) throw std::invalid_argument("PhaseGenerator: need >= 2 laws");
    }
    int dim() const { return static_cast<int>(laws.size()); }

    double kappa0(double w) const {
        double s = 0;
        for (const auto& l : laws) s += l(w);
        return s / laws.size();
    }
    VectorXd phi(double w) const {
        VectorXd v(dim());
        for (int i = 0; i < dim(); ++i) v(i) = laws[i](w);
        v.array() -= v.mean();
        return v;
    }
};

/// Two-mode scatterer: action Fx(w) sigma_x with Fx given by its Taylor
/// coefficients at w0 (fx_taylor[n] multiplies (w - w0)^n). The design default
/// is fx_taylor[0] = pi/2, a full mode flip at the operating point.
struct Pauli2Scatterer {
    std::vector<double> fx_taylor{constants::pi / 2};
    double w0 = 0;

    double fx(double w) const {
        double p = 1, s = 0;
        for (double c : fx_taylor) {
            s += c * p;
            p *= (w - w0);
        }
        return s;
    }
    complexd fx(complexd w) const {
        complexd p = 1, s = 0;
        for (double c : fx_taylor) {
            s += c * p;
            p *= (w - w0);
        }
        return s;
    }
};

/// N-mode scatterer with a Hermitian action matrix evaluator.
struct GenericNScatterer {
    int n = 0;
    std::function<MatrixXcd(double)> action;

    MatrixXcd action_checked(double w) const {
        MatrixXcd s = action(w);
        if (s.rows() != n || s.cols() != n)
            throw std::invalid_argument("GenericNScatterer: wrong action dimension");
        if ((s - s.adjoint()).norm() > 1e-12 * std::max(1.0, s.norm()))
            throw std::invalid_argument("GenericNScatterer: action matrix not Hermitian");
        return s;
    }
};

using ScattererSpec = std::variant<Pauli2Scatterer, GenericNScatterer>;

inline int scatterer_dim(const ScattererSpec& s) {
    return std::holds_alternative<Pauli2Scatterer>(s) ? 2
                                                      : std::get<GenericNScatterer>(s).n;
}

// ---------------------------------------------------------------------------
// elementary matrices
// ---------------------------------------------------------------------------

/// Propagation over length L >= 0. With include_common_phase the full
/// diag(e^{-i kappa_l L}) is returned; otherwise the common phase
/// e^{-i kappa0 L} is dropped and only the traceless part remains.
inline TransferMatrix propagation_matrix(const PhaseGenerator& gen, double L, double w,
                                         bool include_common_phase = false) {
    if (L < 0) throw std::invalid_argument("propagation_matrix: L must be >= 0");
    VectorXd v = gen.phi(w);
    if (include_common_phase) v.array() += gen.kappa0(w);
    MatrixXcd m = MatrixXcd::Zero(gen.dim(), gen.dim());
    for (int i = 0; i < gen.dim(); ++i) m(i, i) = std::exp(complexd(0, -L * v(i)));
    return TransferMatrix(std::move(m));
}

/// Two-mode convenience overload on (F_I, F_z).
inline TransferMatrix propagation_matrix(const ModePairCoefficients& mp, double L, double w,
                                         bool include_common_phase = false) {
    if (L < 0) throw std::invalid_argument("propagation_matrix: L must be >= 0");
    const double fz = mp.FZ(w);
    const double common = include_common_phase ? mp.FI(w) : 0.0;
    Matrix2cd m;
    m << std::exp(complexd(0, -L * (common + fz))), 0, 0,
         std::exp(complexd(0, -L * (common - fz)));
    return TransferMatrix(MatrixXcd(m));
}

/// S = exp(i s(w)). Pauli2 uses the closed form
/// [[cos Fx, i sin Fx], [i sin Fx, cos Fx]]; GenericN exponentiates through a
/// Hermitian eigendecomposition, so the result is unitary by construction.
inline TransferMatrix scatterer_matrix(const ScattererSpec& spec, double w) {
    if (const auto* p = std::get_if<Pauli2Scatterer>(&spec)) {
        const double fx = p->fx(w);
        Matrix2cd m;
        m << std::cos(fx), complexd(0, 1) * std::sin(fx), complexd(0, 1) * std::sin(fx),
            std::cos(fx);
        return TransferMatrix(MatrixXcd(m));
    }
    const auto& g = std::get<GenericNScatterer>(spec);
    MatrixXcd s = g.action_checked(w);
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(s);
    VectorXcd ph(g.n);
    for (int i = 0; i < g.n; ++i) ph(i) = std::exp(complexd(0, es.eigenvalues()(i)));
    return TransferMatrix(es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint());
}

// ---------------------------------------------------------------------------
// composite product
// ---------------------------------------------------------------------------

/// Composite period matrix: scatter, propagate L1, scatter, propagate L2, ...
/// repeated `repetitions` times (right-to-left action on column vectors).
///
/// The scalar pieces never enter the product: the mean wavevector kappa0 and
/// the trace part of the scatterer action are accumulated in common_phase, so
/// `su` has unit determinant and full() = e^{i common_phase} su.
struct CompositeResult {
    TransferMatrix su;
    double common_phase = 0;

    MatrixXcd full() const { return std::exp(complexd(0, common_phase)) * su.mat; }
};

inline CompositeResult composite_matrix(const std::vector<double>& intervals,
                                        const ScattererSpec& spec, const PhaseGenerator& gen,
                                        double w, int repetitions = 1) {
    const int n = gen.dim();
    if (scatterer_dim(spec) != n)
        throw std::invalid_argument("composite_matrix: scatterer/phase dimension mismatch");

    // per-period pieces
    MatrixXcd period = MatrixXcd::Identity(n, n);
    double phase = 0;

    MatrixXcd smat = scatterer_matrix(spec, w).mat;
    if (const auto* g = std::get_if<GenericNScatterer>(&spec)) {
        const complexd tr = g->action_checked(w).trace();
        const double mean = tr.real() / n;  // Hermitian -> real trace
        smat *= std::exp(complexd(0, -mean));
        phase += mean * static_cast<double>(intervals.size());
    }

    const VectorXd phi = gen.phi(w);
    const double k0 = gen.kappa0(w);
    for (double L : intervals) {
        if (L < 0) throw std::invalid_argument("composite_matrix: negative interval");
        MatrixXcd prop = MatrixXcd::Zero(n, n);
        for (int i = 0; i < n; ++i) prop(i, i) = std::exp(complexd(0, -L * phi(i)));
        period = prop * smat * period;  // scatter first, then propagate
        phase += -k0 * L;
    }

    CompositeResult res;
    res.su = TransferMatrix(MatrixXcd::Identity(n, n));
    for (int r = 0; r < repetitions; ++r) res.su.mat = period * res.su.mat;
    res.common_phase = phase * repetitions;
    return res;
}

/// Two-mode overload: phi = diag(F_z, -F_z), kappa0 = F_I.
inline CompositeResult composite_matrix(const std::vector<double>& intervals,
                                        const ScattererSpec& spec,
                                        const ModePairCoefficients& mp, double w,
                                        int repetitions = 1) {
    if (scatterer_dim(spec) != 2)
        throw std::invalid_argument("composite_matrix: two-mode path needs a 2x2 scatterer");
    const double fz = mp.FZ(w), fi = mp.FI(w);
    MatrixXcd smat = scatterer_matrix(spec, w).mat;
    MatrixXcd period = MatrixXcd::Identity(2, 2);
    double phase = 0;
    for (double L : intervals) {
        if (L < 0) throw std::invalid_argument("composite_matrix: negative interval");
        Matrix2cd prop;
        prop << std::exp(complexd(0, -L * fz)), 0, 0, std::exp(complexd(0, L * fz));
        period = prop * smat * period;
        phase += -fi * L;
    }
    CompositeResult res;
    res.su = TransferMatrix(MatrixXcd::Identity(2, 2));
    for (int r = 0; r < repetitions; ++r) res.su.mat = period * res.su.mat;
    res.common_phase = phase * repetitions;
    return res;
}

// ---------------------------------------------------------------------------
// characteristic polynomial
// ---------------------------------------------------------------------------

/// Linear coefficient of det(lambda I - T) for N = 2: c1 = -trace(T).
inline complexd char_poly_c1(const TransferMatrix& T) {
    if (T.dim() != 2) throw std::invalid_argument("char_poly_c1: requires N = 2");
    return -T.mat.trace();
}

/// Coefficients of det(lambda I - T) = lambda^N + sum_n c[n] lambda^n + c[0],
/// Faddeev-LeVerrier recursion, plus the determinant phase.
struct CharPolyCoeffs {
    std::vector<complexd> c;  // c[n] for n = 0..N-1 (c[0] = (-1)^N det T)
    double phi_det = 0;       // principal arg det T; sweeps unwrap externally
};

inline CharPolyCoeffs char_poly_coeffs(const TransferMatrix& T, double det_tol = 1e-8) {
    const int n = T.dim();
    const complexd det = T.det();
    if (std::abs(std::abs(det) - 1.0) > det_tol)
        throw DetNotUnimodularError("char_poly_coeffs: |det T| deviates from 1 by more than " +
                                    std::to_string(det_tol));
    CharPolyCoeffs out;
    out.c.assign(n, complexd(0, 0));
    // Faddeev-LeVerrier: M_1 = T, a_k = -tr(M_k)/k, M_{k+1} = T (M_k + a_k I);
    // det(lambda I - T) = lambda^n + a_1 lambda^{n-1} + ... + a_n
    MatrixXcd M = T.mat;
    std::vector<complexd> a(n + 1);
    for (int k = 1; k <= n; ++k) {
        a[k] = -M.trace() / double(k);
        if (k < n) M = T.mat * (M + a[k] * MatrixXcd::Identity(n, n));
    }
    for (int k = 1; k <= n; ++k) out.c[n - k] = a[k];
    out.phi_det = std::arg(det);
    return out;
}

/// Closed-form c1 of the two-mode, three-scatterer composite:
///   c1 = 2 (cos Fx - cos^3 Fx) [cos(X1-X2-X3) + cos(X1+X2-X3) + cos(X1-X2+X3)]
///        - 2 cos^3 Fx cos(X1+X2+X3)
/// with X_l = F_z L_l. `truncated` drops the cos^3 terms (the form whose
/// zero set the reduced design equations describe).
inline double analytic_c1(double X1, double X2, double X3, double Fx, bool truncated = false) {
    const double c = std::cos(Fx);
    const double sum3 =
        std::cos(X1 - X2 - X3) + std::cos(X1 + X2 - X3) + std::cos(X1 - X2 + X3);
    if (truncated) return 2 * c * sum3;
    const double c3 = c * c * c;
    return 2 * (c - c3) * sum3 - 2 * c3 * std::cos(X1 + X2 + X3);
}

/// Is T a nondegenerate N-th root of the identity up to a global phase?
/// After stripping the determinant phase the eigenvalues must cover all N
/// distinct N-th roots of unity exactly once; clustered (repeated) roots are
/// rejected. `tol` bounds the distance of each eigenvalue from its root.
inline bool is_nondegenerate_root_of_identity(const TransferMatrix& T, double tol = 1e-8) {
    const int n = T.dim();
    MatrixXcd m = T.mat * std::exp(complexd(0, -std::arg(T.det()) / n));
    Eigen::ComplexEigenSolver<MatrixXcd> es(m);
    if (es.info() != Eigen::Success) return false;
    // the det-phase root choice leaves an n-fold ambiguity in the global
    // phase; anchor it on the first eigenvalue
    const complexd anchor = es.eigenvalues()(0) / std::abs(es.eigenvalues()(0));
    std::vector<bool> taken(n, false);
    for (int i = 0; i < n; ++i) {
        const complexd lam = es.eigenvalues()(i) / anchor;
        bool placed = false;
        for (int k = 0; k < n && !placed; ++k) {
            const complexd root = std::exp(complexd(0, 2 * constants::pi * k / n));
            if (std::abs(lam - root) < tol) {
                if (taken[k]) return false;  // clustered eigenvalues: degenerate
                taken[k] = true;
                placed = true;
            }
        }
        if (!placed) return false;  // not a root of unity at all
    }
    return true;
}

// ---------------------------------------------------------------------------
// Pauli decomposition
// ---------------------------------------------------------------------------

struct PauliDecomposition {
    complexd cI, cx, cy, cz;

    Matrix2cd recompose() const {
        return cI * Matrix2cd::Identity() + cx * pauli_x() + cy * pauli_y() + cz * pauli_z();
    }
};

inline PauliDecomposition pauli_decompose(const TransferMatrix& T) {
    if (T.dim() != 2) throw std::invalid_argument("pauli_decompose: requires N = 2");
    PauliDecomposition d;
    d.cI = T.mat.trace() / 2.0;
    d.cx = (pauli_x() * T.mat).trace() / 2.0;
    d.cy = (pauli_y() * T.mat).trace() / 2.0;
    d.cz = (pauli_z() * T.mat).trace() / 2.0;
    return d;
}

} // namespace dispeq
