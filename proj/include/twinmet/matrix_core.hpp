#pragma once

#include <cmath>
#include <complex>
#include <utility>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "twinmet/errors.hpp"

namespace twinmet {

/// Symmetric nondegenerate real matrix; symmetrized exactly on construction.
class SymMatrix {
public:
    SymMatrix() = default;

    static SymMatrix make(const Eigen::MatrixXd& m) {
        if (m.rows() != m.cols()) throw Error("SymMatrix: not square");
        const double scale = m.cwiseAbs().maxCoeff();
        const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
        if (scale > 0 && asym > 1e-12 * scale)
            throw PreconditionError("matrix symmetric", asym / scale);
        SymMatrix s;
        s.m_ = 0.5 * (m + m.transpose());
        return s;
    }

    int n() const { return static_cast<int>(m_.rows()); }
    const Eigen::MatrixXd& mat() const { return m_; }

private:
    Eigen::MatrixXd m_;
};

namespace detail {

inline double rel_residual(const Eigen::MatrixXd& diff, const Eigen::MatrixXd& ref) {
    const double r = ref.norm();
    return diff.norm() / (r > 0 ? r : 1.0);
}

inline double rel_residual(const Eigen::MatrixXcd& diff, const Eigen::MatrixXcd& ref) {
    const double r = ref.norm();
    return diff.norm() / (r > 0 ? r : 1.0);
}

} // namespace detail

/// g = hK, the twin of h under the K-structure (ε = ±1). Preconditions
/// K² = εI and KᵗhK = εh are checked and named on failure.
inline SymMatrix twin_from_k(const SymMatrix& h, const Eigen::MatrixXd& K, int eps,
                             double tol = 1e-9) {
    const int n = h.n();
    if (K.rows() != n || K.cols() != n) throw Error("twin_from_k: size mismatch");
    if (eps != 1 && eps != -1) throw Error("twin_from_k: eps must be +1 or -1");
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);

    const double r_invol =
        (K * K - double(eps) * I).norm() / std::max(1.0, K.squaredNorm());
    if (r_invol > tol) throw PreconditionError("K^2 = eps*I", r_invol);

    const double r_compat = (K.transpose() * h.mat() * K - double(eps) * h.mat()).norm() /
                            (std::max(1.0, K.squaredNorm()) * h.mat().norm());
    if (r_compat > tol) throw PreconditionError("K^t h K = eps*h", r_compat);

    Eigen::MatrixXd g = h.mat() * K;
    const double r_sym = detail::rel_residual(Eigen::MatrixXd(g - g.transpose()), g);
    if (r_sym > tol) throw PreconditionError("hK symmetric", r_sym);
    g = 0.5 * (g + g.transpose());
    return SymMatrix::make(g);
}

struct KPair {
    Eigen::MatrixXd K;
    double epsilon;
};

/// Recover K = h⁻¹g and the ε with (h⁻¹g)² = εI from a twin pair.
inline KPair k_from_pair(const SymMatrix& h, const SymMatrix& g, double tol = 1e-9) {
    const int n = h.n();
    if (g.n() != n) throw Error("k_from_pair: size mismatch");
    Eigen::FullPivLU<Eigen::MatrixXd> lu(h.mat());
    if (!lu.isInvertible()) throw SingularError("k_from_pair: h is singular");
    const Eigen::MatrixXd K = lu.solve(g.mat());
    const Eigen::MatrixXd K2 = K * K;
    const double eps = K2.trace() / n;
    const Eigen::MatrixXd dev = K2 - eps * Eigen::MatrixXd::Identity(n, n);
    // the rounding error of K*K scales with ||K||^2, so measure against it
    const double knorm2 = K.squaredNorm();
    const double rel = dev.norm() / std::max(1.0, knorm2);
    if (rel > tol)
        throw PreconditionError("(h^-1 g)^2 proportional to identity", rel);
    if (std::abs(eps) < 1e-300) throw AlmostTangentError();
    if (eps < 0 && n % 2 != 0) throw ParityError(n);
    return {K, eps};
}

struct RescaledPair {
    SymMatrix h;
    SymMatrix g;
    int sign; // sign of the original epsilon
};

/// Rescale g by sqrt(|ε|) so that (h⁻¹g')² = sign(ε)·I.
inline RescaledPair rescale_to_canonical(const SymMatrix& h, const SymMatrix& g, double eps) {
    if (eps == 0.0) throw AlmostTangentError();
    const double s = std::sqrt(std::abs(eps));
    return {h, SymMatrix::make(g.mat() / s), eps > 0 ? 1 : -1};
}

// ---------------------------------------------------------------------------
// Involutions and the canonical complex structure
// ---------------------------------------------------------------------------

inline Eigen::MatrixXd canonical_d_k(int n, int k) {
    Eigen::VectorXd d = Eigen::VectorXd::Ones(n);
    d.head(k).setConstant(-1.0);
    return d.asDiagonal();
}

inline Eigen::MatrixXd canonical_j0(int n) {
    if (n % 2 != 0) throw ParityError(n);
    const int m = n / 2;
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    J.topRightCorner(m, m) = Eigen::MatrixXd::Identity(m, m);
    J.bottomLeftCorner(m, m) = -Eigen::MatrixXd::Identity(m, m);
    return J;
}

struct InvolutionDecomposition {
    enum class Kind { Product, Complex };
    Kind kind;
    Eigen::MatrixXd M; // P = M D_k M^-1 (product) or P = M J0 M^-1 (complex)
    int k = 0;         // dimension of the -1 eigenspace (product case)
};

/// Decompose P with P² = εI into its canonical conjugation form.
inline InvolutionDecomposition involution_decompose(const Eigen::MatrixXd& P, int eps,
                                                    double tol = 1e-9) {
    const int n = static_cast<int>(P.rows());
    if (P.cols() != n) throw Error("involution_decompose: not square");
    if (eps != 1 && eps != -1) throw Error("involution_decompose: eps must be +1 or -1");
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
    const double r = (P * P - double(eps) * I).norm() / std::max(1.0, P.squaredNorm());
    if (r > tol) throw PreconditionError("P^2 = eps*I", r);

    // Newton-Schulz refinement pushes P^2 toward eps*I at quadratic rate,
    // recovering accuracy lost to the conditioning of the defining pair.
    Eigen::MatrixXd Pr = P;
    for (int it = 0; it < 3; ++it) {
        const Eigen::MatrixXd P2 = Pr * Pr;
        const double res = (P2 - double(eps) * I).norm();
        if (res < 1e-14 * std::max(1.0, Pr.squaredNorm())) break;
        Pr = 0.5 * Pr * (3.0 * I - double(eps) * P2);
    }

    InvolutionDecomposition out;
    if (eps == 1) {
        out.kind = InvolutionDecomposition::Kind::Product;
        // eigenprojectors of an involution: (I -+ P)/2
        const Eigen::MatrixXd proj_minus = 0.5 * (I - Pr);
        const Eigen::MatrixXd proj_plus = 0.5 * (I + Pr);
        const int k = static_cast<int>(std::lround(0.5 * (n - Pr.trace())));
        out.k = k;

        Eigen::MatrixXd M(n, n);
        if (k > 0) {
            Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(proj_minus);
            Eigen::MatrixXd Q = qr.householderQ();
            M.leftCols(k) = Q.leftCols(k);
        }
        if (k < n) {
            Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(proj_plus);
            Eigen::MatrixXd Q = qr.householderQ();
            M.rightCols(n - k) = Q.leftCols(n - k);
        }
        const double rc = detail::rel_residual(Pr * M - M * canonical_d_k(n, k), M);
        if (rc > 1e4 * tol) throw Error("involution_decompose: eigenspace extraction degenerate");
        out.M = M;
        return out;
    }

    if (n % 2 != 0) throw ParityError(n);
    out.kind = InvolutionDecomposition::Kind::Complex;
    const int m = n / 2;

    // Build M by pairing v with -Pv on top of an orthonormalized completion:
    // the span of chosen columns is P-invariant, so any vector with a large
    // component outside it extends the basis.
    Eigen::MatrixXd V(n, m), W(n, m);
    Eigen::MatrixXd ortho(n, 0);
    for (int j = 0; j < m; ++j) {
        Eigen::VectorXd best;
        double best_norm = -1.0;
        for (int c = 0; c < n; ++c) {
            Eigen::VectorXd cand = Eigen::VectorXd::Unit(n, c);
            if (ortho.cols() > 0) cand -= ortho * (ortho.transpose() * cand);
            const double nn = cand.norm();
            if (nn > best_norm) {
                best_norm = nn;
                best = cand;
            }
        }
        if (best_norm < 1e-8)
            throw Error("involution_decompose: basis completion degenerate");
        Eigen::VectorXd v = best / best_norm;
        Eigen::VectorXd w = -Pr * v;
        V.col(j) = v;
        W.col(j) = w;
        // extend the orthonormal tracker by v and w
        for (const Eigen::VectorXd* u : {&v, &w}) {
            Eigen::VectorXd q = *u;
            if (ortho.cols() > 0) q -= ortho * (ortho.transpose() * q);
            if (ortho.cols() > 0) q -= ortho * (ortho.transpose() * q); // re-orthogonalize
            const double qn = q.norm();
            if (qn > 1e-12) {
                ortho.conservativeResize(Eigen::NoChange, ortho.cols() + 1);
                ortho.col(ortho.cols() - 1) = q / qn;
            }
        }
    }
    Eigen::MatrixXd M(n, n);
    M.leftCols(m) = V;
    M.rightCols(m) = W;
    const double rc = detail::rel_residual(Pr * M - M * canonical_j0(n), M);
    if (rc > 1e4 * tol) throw Error("involution_decompose: pairing construction degenerate");
    out.M = M;
    return out;
}

// ---------------------------------------------------------------------------
// Takagi-like factorization of a complex symmetric matrix
// ---------------------------------------------------------------------------

struct TakagiFactor {
    Eigen::MatrixXcd C;
    Eigen::MatrixXcd N; // N^t N = C
};

/// Factor a nondegenerate complex symmetric C as NᵗN via the Takagi
/// decomposition C = U Σ Uᵗ (SVD + symmetric square root of U^H V̄).
inline TakagiFactor takagi_like_factor(const Eigen::MatrixXcd& C, double tol = 1e-9) {
    using CM = Eigen::MatrixXcd;
    const int m = static_cast<int>(C.rows());
    if (C.cols() != m) throw Error("takagi_like_factor: not square");
    const double sym = detail::rel_residual(CM(C - C.transpose()), C);
    if (sym > 1e-10) throw PreconditionError("C symmetric", sym);

    const double cnorm = C.norm();
    if (cnorm == 0.0) throw SingularError("takagi_like_factor: zero matrix");

    // A global phase keeps the square root of W away from its branch point
    // (W unitary with an eigenvalue at -1); retry over a fixed phase list.
    const double phase_list[] = {0.0, 0.731, 1.417, 2.089, 2.771};
    TakagiFactor best;
    double best_res = 1e300;
    for (double theta : phase_list) {
        const std::complex<double> ph = std::polar(1.0, theta);
        CM Cp = ph * C;
        Eigen::JacobiSVD<CM> svd(Cp, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const Eigen::VectorXd sv = svd.singularValues();
        if (sv(m - 1) < 1e-13 * sv(0))
            throw SingularError("takagi_like_factor: singular input");
        CM U = svd.matrixU();
        CM V = svd.matrixV();
        CM W = U.adjoint() * V.conjugate();
        CM Wsqrt = W.sqrt();
        CM Utak = U * Wsqrt;
        CM N = sv.array().sqrt().matrix().asDiagonal();
        N = CM(N * Utak.transpose());
        N *= std::sqrt(std::conj(ph)); // undo the phase: N^t N = conj(ph) * Cp = C
        const double res = detail::rel_residual(CM(N.transpose() * N - C), C);
        if (res < best_res) {
            best_res = res;
            best = {C, N};
        }
        if (best_res <= tol) break;
    }
    if (best_res > tol)
        throw Error("takagi_like_factor: factorization residual " + std::to_string(best_res));
    return best;
}

// ---------------------------------------------------------------------------
// Simultaneous congruence (the constructive content of the canonical forms)
// ---------------------------------------------------------------------------

struct CongruenceInternals {
    Eigen::MatrixXd M; // involution conjugator
    Eigen::MatrixXd S; // block congruence assembler
    Eigen::MatrixXd a, b;  // complex case blocks of h-tilde
    Eigen::MatrixXcd N;    // complex factor with N^t N = a + ib
};

struct CongruenceDecomposition {
    enum class Case { Product, Complex };
    Case case_tag;
    Eigen::MatrixXd R, D_h, D_g;
    int k = 0; // product case: dimension of the -1 eigenspace of h^-1 g
    CongruenceInternals internals;
    double residual_h = 0.0, residual_g = 0.0;
};

namespace detail {

/// Sylvester step: B = SᵗDS with D = diag(±1), via spectral decomposition.
inline void sylvester_pm1(const Eigen::MatrixXd& B, Eigen::MatrixXd& S, Eigen::VectorXd& D,
                          double degeneracy_tol = 1e-12) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B);
    const Eigen::VectorXd lam = es.eigenvalues();
    const double lmax = lam.cwiseAbs().maxCoeff();
    if (lmax == 0.0 || lam.cwiseAbs().minCoeff() < degeneracy_tol * lmax)
        throw SingularError("block diagonalization lost rank");
    D = lam.array().sign().matrix();
    S = lam.array().abs().sqrt().matrix().asDiagonal() * es.eigenvectors().transpose();
}

} // namespace detail

namespace detail {

/// One pass of the canonical-form construction. Residuals are recorded but
/// not enforced; the public wrapper refines and enforces.
inline CongruenceDecomposition congruence_pass(const SymMatrix& h, const SymMatrix& g,
                                               double tol) {
    const int n = h.n();
    if (g.n() != n) throw Error("simultaneous_congruence: size mismatch");
    Eigen::FullPivLU<Eigen::MatrixXd> lu(h.mat());
    if (!lu.isInvertible()) throw SingularError("simultaneous_congruence: h singular");
    const Eigen::MatrixXd P = lu.solve(g.mat());
    const Eigen::MatrixXd P2 = P * P;
    const double eps_est = P2.trace() / n;
    const int eps = eps_est >= 0 ? 1 : -1;
    const double pre = (P2 - double(eps) * Eigen::MatrixXd::Identity(n, n)).norm() /
                       std::max(1.0, P.squaredNorm());
    if (pre > 1e-7)
        throw PreconditionError("(h^-1 g)^2 = +-I", pre);

    CongruenceDecomposition out;
    const InvolutionDecomposition idec = involution_decompose(P, eps, 1e-7);
    const Eigen::MatrixXd& M = idec.M;
    const Eigen::MatrixXd htilde = M.transpose() * h.mat() * M;

    if (eps == 1) {
        out.case_tag = CongruenceDecomposition::Case::Product;
        out.k = idec.k;
        const int k = idec.k;
        // commutation with D_k forces block-diagonal structure
        Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, n);
        Eigen::VectorXd dh(n);
        if (k > 0) {
            Eigen::MatrixXd S1;
            Eigen::VectorXd D1;
            detail::sylvester_pm1(htilde.topLeftCorner(k, k), S1, D1);
            S.topLeftCorner(k, k) = S1;
            dh.head(k) = D1;
        }
        if (k < n) {
            Eigen::MatrixXd S2;
            Eigen::VectorXd D2;
            detail::sylvester_pm1(htilde.bottomRightCorner(n - k, n - k), S2, D2);
            S.bottomRightCorner(n - k, n - k) = S2;
            dh.tail(n - k) = D2;
        }
        out.D_h = dh.asDiagonal();
        // g-tilde = h-tilde D_k, so the g signs flip on the -1 eigenblock
        Eigen::VectorXd dg = dh;
        dg.head(k) *= -1.0;
        out.D_g = dg.asDiagonal();
        out.internals.M = M;
        out.internals.S = S;
        out.R = S * M.inverse();
    } else {
        out.case_tag = CongruenceDecomposition::Case::Complex;
        const int m = n / 2;
        const Eigen::MatrixXd a = 0.5 * (htilde.topLeftCorner(m, m) +
                                         htilde.topLeftCorner(m, m).transpose());
        const Eigen::MatrixXd b = 0.5 * (htilde.topRightCorner(m, m) +
                                         htilde.topRightCorner(m, m).transpose());
        // anticommutation with J0 gives h-tilde = [[a, b], [b, -a]]
        Eigen::MatrixXd model(n, n);
        model.topLeftCorner(m, m) = a;
        model.topRightCorner(m, m) = b;
        model.bottomLeftCorner(m, m) = b;
        model.bottomRightCorner(m, m) = -a;
        const double block_res = detail::rel_residual(htilde - model, htilde);
        if (block_res > 1e-7)
            throw Error("simultaneous_congruence: anticommutation block structure failed");

        Eigen::MatrixXcd C = a.cast<std::complex<double>>() +
                             std::complex<double>(0, 1) * b.cast<std::complex<double>>();
        const TakagiFactor tf = takagi_like_factor(C, tol);
        const Eigen::MatrixXd s = tf.N.real();
        const Eigen::MatrixXd u = tf.N.imag();
        Eigen::MatrixXd S(n, n);
        S.topLeftCorner(m, m) = s;
        S.topRightCorner(m, m) = u;
        S.bottomLeftCorner(m, m) = -u;
        S.bottomRightCorner(m, m) = s;

        Eigen::MatrixXd Kh = Eigen::MatrixXd::Zero(n, n);
        Kh.topLeftCorner(m, m) = Eigen::MatrixXd::Identity(m, m);
        Kh.bottomRightCorner(m, m) = -Eigen::MatrixXd::Identity(m, m);
        Eigen::MatrixXd Kg = Eigen::MatrixXd::Zero(n, n);
        Kg.topRightCorner(m, m) = Eigen::MatrixXd::Identity(m, m);
        Kg.bottomLeftCorner(m, m) = Eigen::MatrixXd::Identity(m, m);
        out.D_h = Kh;
        out.D_g = Kg;
        out.internals.M = M;
        out.internals.S = S;
        out.internals.a = a;
        out.internals.b = b;
        out.internals.N = tf.N;
        out.R = S * M.inverse();
    }

    out.residual_h =
        detail::rel_residual(h.mat() - out.R.transpose() * out.D_h * out.R, h.mat());
    out.residual_g =
        detail::rel_residual(g.mat() - out.R.transpose() * out.D_g * out.R, g.mat());
    return out;
}

} // namespace detail

/// Simultaneous reduction of a twin pair to canonical ±1 forms:
/// h = Rᵗ D_h R, g = Rᵗ D_g R. Product case k is congruence-invariant.
inline CongruenceDecomposition simultaneous_congruence(const SymMatrix& h, const SymMatrix& g,
                                                       double tol = 1e-9) {
    CongruenceDecomposition dec = detail::congruence_pass(h, g, tol);
    // A skewed eigenbasis of h^-1 g amplifies block-truncation error by
    // cond(M)^2; one more pass on the nearly canonical pair removes it.
    for (int pass = 0; pass < 4 && std::max(dec.residual_h, dec.residual_g) > 0.05 * tol;
         ++pass) {
        Eigen::FullPivLU<Eigen::MatrixXd> lu(dec.R);
        if (!lu.isInvertible()) break;
        const Eigen::MatrixXd A = lu.inverse();
        const Eigen::MatrixXd h2a = A.transpose() * h.mat() * A;
        const Eigen::MatrixXd g2a = A.transpose() * g.mat() * A;
        const Eigen::MatrixXd h2 = 0.5 * (h2a + h2a.transpose());
        const Eigen::MatrixXd g2 = 0.5 * (g2a + g2a.transpose());
        CongruenceDecomposition fine;
        try {
            fine = detail::congruence_pass(SymMatrix::make(h2), SymMatrix::make(g2), tol);
        } catch (const Error&) {
            break;
        }
        if (fine.case_tag != dec.case_tag || fine.k != dec.k) break;
        CongruenceDecomposition merged = dec;
        merged.R = fine.R * dec.R;
        merged.D_h = fine.D_h;
        merged.D_g = fine.D_g;
        merged.internals.S = fine.R * dec.R * dec.internals.M; // keeps R = S M^-1
        merged.residual_h = detail::rel_residual(
            h.mat() - merged.R.transpose() * merged.D_h * merged.R, h.mat());
        merged.residual_g = detail::rel_residual(
            g.mat() - merged.R.transpose() * merged.D_g * merged.R, g.mat());
        if (std::max(merged.residual_h, merged.residual_g) <
            std::max(dec.residual_h, dec.residual_g))
            dec = merged;
        else
            break;
    }
    if (dec.residual_h > tol || dec.residual_g > tol)
        throw Error("simultaneous_congruence: reconstruction residual exceeds tolerance (" +
                    std::to_string(std::max(dec.residual_h, dec.residual_g)) + ")");
    return dec;
}

/// Eigenvalue sign counts (p, q) of a nondegenerate symmetric matrix.
inline std::pair<int, int> signature(const SymMatrix& h) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h.mat());
    const Eigen::VectorXd lam = es.eigenvalues();
    const double lmax = lam.cwiseAbs().maxCoeff();
    if (lmax == 0.0 || lam.cwiseAbs().minCoeff() < 1e-12 * lmax)
        throw SingularError("signature: singular input");
    int p = 0, q = 0;
    for (int i = 0; i < lam.size(); ++i) (lam[i] > 0 ? p : q)++;
    return {p, q};
}

} // namespace twinmet
