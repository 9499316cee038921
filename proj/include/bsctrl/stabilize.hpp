#pragma once

// Mean-square stability tests, generalized Lyapunov solves, and stabilizer
// synthesis through the differential Riccati flow
//
//   P' = P A + A^T P + C^T P C + M
//        - (P B + C^T P D)(N + D^T P D)^{-1}(B^T P + D^T P C),   P(0) = P0,
//
// integrated to steady state with horizon doubling. The flow converges
// exactly when the system [A,C;B,D] is stabilizable, diverges otherwise.
// The backward-structured system embeds as [A, 0; (B C), (0 I)] with the
// combined control v = (u, z).

#include "bsctrl/hautus.hpp"
#include "bsctrl/reachability.hpp"
#include "bsctrl/symspace.hpp"
#include "bsctrl/types.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>

namespace bsctrl {

/// The general controlled system dX = [AX + Bu]dt + [CX + Du]dW, denoted
/// [A,C;B,D].
struct GeneralSystem {
    Matrix A;  // n x n
    Matrix C;  // n x n
    Matrix B;  // n x m
    Matrix D;  // n x m

    [[nodiscard]] int n() const noexcept { return static_cast<int>(A.rows()); }
    [[nodiscard]] int m() const noexcept { return static_cast<int>(B.cols()); }

    void validate() const {
        check_square(A, "A");
        check_square(C, "C");
        if (C.rows() != A.rows()) throw DimensionError("general system: A and C sizes differ");
        if (B.rows() != A.rows() || D.rows() != A.rows() || D.cols() != B.cols()) {
            throw DimensionError("general system: B and D must be n x m");
        }
        if (B.cols() < 1) throw DimensionError("general system: control dimension must be positive");
        check_finite(A, "A");
        check_finite(B, "B");
        check_finite(C, "C");
        check_finite(D, "D");
    }
};

/// [A, 0; (B C), (0 I)]: the diffusion control z joins u in one control
/// vector, so closing the loop with v = (F; K) X gives drift A + BF + CK and
/// diffusion K X.
[[nodiscard]] inline GeneralSystem embed_backward(const BackwardSystem& sys) {
    sys.validate();
    const int n = sys.n();
    const int m = sys.m();
    GeneralSystem g;
    g.A = sys.A;
    g.C = Matrix::Zero(n, n);
    g.B = Matrix(n, m + n);
    g.B << sys.B, sys.C;
    g.D = Matrix(n, m + n);
    g.D << Matrix::Zero(n, m), Matrix::Identity(n, n);
    return g;
}

/// Solve P A + A^T P + C^T P C + Lam = 0 through the coordinate
/// representation. Unique whenever [A,C] is mean-square stable.
[[nodiscard]] inline SymMatrix lyapunov_solve(const Matrix& A, const Matrix& C,
                                              const SymMatrix& Lam) {
    check_square(A, "A");
    if (A.rows() != C.rows() || A.rows() != Lam.dim()) {
        throw DimensionError("lyapunov_solve: dimension mismatch");
    }
    const LyapunovOperatorRep rep = build_lyap_op(A, C, DriftSign::plus);
    const Vector b = -detail::svec_raw(Lam.mat());
    Eigen::ColPivHouseholderQR<Matrix> qr(rep.mat);
    const Vector x = qr.solve(b);
    const double residual = (rep.mat * x - b).norm();
    if (!x.allFinite() || residual > 1e-9 * (1.0 + Lam.norm())) {
        throw SingularOperatorError("lyapunov_solve: operator is singular or ill-conditioned");
    }
    return SymMatrix(detail::smat_raw(static_cast<int>(A.rows()), x));
}

/// Mean-square stability of [A,C], decided by the spectral abscissa of
/// L_(A,C) and cross-checked by solving L(P) = -I for P > 0. Disagreement or
/// a near-singular solve yields an indeterminate verdict.
[[nodiscard]] inline Tristate is_ms_stable(const Matrix& A, const Matrix& C) {
    check_square(A, "A");
    if (A.rows() != C.rows()) throw DimensionError("is_ms_stable: A and C sizes differ");
    const LyapunovOperatorRep rep = build_lyap_op(A, C, DriftSign::plus);
    const double abscissa = spectral_abscissa(rep);
    const bool spectral_stable = abscissa < -1e-10;

    bool lyap_stable = false;
    try {
        const SymMatrix P = lyapunov_solve(A, C, SymMatrix::identity(static_cast<int>(A.rows())));
        lyap_stable = P.min_eigenvalue() > 1e-12 * (1.0 + P.norm());
    } catch (const SingularOperatorError&) {
        if (std::abs(abscissa) <= 1e-8) return Tristate::indeterminate;
        return spectral_stable ? Tristate::indeterminate : Tristate::no;
    }
    if (spectral_stable != lyap_stable) return Tristate::indeterminate;
    return to_tristate(spectral_stable);
}

enum class StabilizerStatus { stabilizable, not_stabilizable, indeterminate };

[[nodiscard]] constexpr const char* to_string(StabilizerStatus s) noexcept {
    switch (s) {
        case StabilizerStatus::stabilizable: return "stabilizable";
        case StabilizerStatus::not_stabilizable: return "not_stabilizable";
        case StabilizerStatus::indeterminate: return "indeterminate";
    }
    return "indeterminate";
}

struct RiccatiOptions {
    double tol_ss = 1e-10;     // steady state when |P'| < tol_ss (1 + |P|)
    double div_bound = 1e8;    // divergence when |P| exceeds this
    double t_max = 1024.0;     // horizon doubling 1, 2, 4, ..., t_max
    double dt_base = 1.0 / 128.0;
    std::optional<Matrix> P0;  // start of the flow, zero when absent
    // Called once per doubling segment; return false to cancel.
    std::function<bool(long steps, double t, double p_norm)> progress;
};

struct RiccatiResult {
    StabilizerStatus status = StabilizerStatus::indeterminate;
    std::optional<SymMatrix> P;
    Matrix theta;  // m x n gain, valid when stabilizable
    double closed_loop_abscissa = 0.0;
    double residual = 0.0;  // Riccati equation residual at the returned P
    double horizon = 0.0;
    long steps = 0;
    bool cancelled = false;
};

namespace detail {

inline Matrix riccati_rhs(const GeneralSystem& g, const Matrix& M, const Matrix& N,
                          const Matrix& P) {
    const Matrix G = N + g.D.transpose() * P * g.D;
    const Eigen::LLT<Matrix> llt(G);
    if (llt.info() != Eigen::Success) {
        // N > 0 keeps G positive definite along the flow; losing that means
        // the iterate left the admissible region, treated as divergence.
        return Matrix::Constant(P.rows(), P.cols(), std::numeric_limits<double>::quiet_NaN());
    }
    const Matrix S = g.B.transpose() * P + g.D.transpose() * P * g.C;
    return P * g.A + g.A.transpose() * P + g.C.transpose() * P * g.C + M -
           S.transpose() * llt.solve(S);
}

}  // namespace detail

/// Integrate the Riccati flow from P0 until steady state, divergence, or the
/// horizon cap. M and N are the state and control weights (positive definite,
/// identity when defaulted).
[[nodiscard]] inline RiccatiResult riccati_stabilize(const GeneralSystem& gsys,
                                                     std::optional<SymMatrix> M_opt = {},
                                                     std::optional<SymMatrix> N_opt = {},
                                                     const RiccatiOptions& opt = {}) {
    gsys.validate();
    const int n = gsys.n();
    const int m = gsys.m();
    const Matrix M = M_opt ? M_opt->mat() : Matrix(Matrix::Identity(n, n));
    const Matrix N = N_opt ? N_opt->mat() : Matrix(Matrix::Identity(m, m));
    if (M.rows() != n || N.rows() != m) throw DimensionError("riccati_stabilize: weight sizes");

    RiccatiResult res;
    // Step size scaled to the local growth rate of the flow.
    const double scale = 1.0 + gsys.A.norm() + gsys.C.norm() * gsys.C.norm();
    const double dt = opt.dt_base / std::max(1.0, scale / 4.0);

    Matrix P = opt.P0 ? *opt.P0 : Matrix(Matrix::Zero(n, n));
    double t = 0.0;
    bool converged = false;
    bool diverged = false;
    double segment_end = 1.0;
    while (true) {
        while (t < segment_end) {
            const Matrix k1 = detail::riccati_rhs(gsys, M, N, P);
            if (!k1.allFinite()) { diverged = true; break; }
            if (k1.norm() < opt.tol_ss * (1.0 + P.norm())) { converged = true; break; }
            const Matrix k2 = detail::riccati_rhs(gsys, M, N, P + 0.5 * dt * k1);
            const Matrix k3 = detail::riccati_rhs(gsys, M, N, P + 0.5 * dt * k2);
            const Matrix k4 = detail::riccati_rhs(gsys, M, N, P + dt * k3);
            if (!k2.allFinite() || !k3.allFinite() || !k4.allFinite()) { diverged = true; break; }
            P += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            P = 0.5 * (P + P.transpose());
            t += dt;
            ++res.steps;
            if (!P.allFinite() || P.norm() > opt.div_bound) { diverged = true; break; }
        }
        res.horizon = t;
        if (converged || diverged) break;
        if (opt.progress && !opt.progress(res.steps, t, P.norm())) {
            res.cancelled = true;
            break;
        }
        if (segment_end >= opt.t_max) break;
        segment_end *= 2.0;
    }

    if (diverged) {
        res.status = StabilizerStatus::not_stabilizable;
        return res;
    }
    if (!converged) {
        res.status = StabilizerStatus::indeterminate;
        return res;
    }

    const SymMatrix Pss(P);
    res.residual = detail::riccati_rhs(gsys, M, N, P).norm();
    const Matrix G = N + gsys.D.transpose() * P * gsys.D;
    res.theta = -Eigen::LLT<Matrix>(G).solve(gsys.B.transpose() * P +
                                             gsys.D.transpose() * P * gsys.C);
    const LyapunovOperatorRep closed =
        build_lyap_op(gsys.A + gsys.B * res.theta, gsys.C + gsys.D * res.theta, DriftSign::plus);
    res.closed_loop_abscissa = spectral_abscissa(closed);

    const bool pd = Pss.min_eigenvalue() > 0.0;
    const bool residual_ok = res.residual <= 1e-6 * (1.0 + Pss.norm());
    if (pd && residual_ok && res.closed_loop_abscissa < 0.0) {
        res.status = StabilizerStatus::stabilizable;
        res.P = Pss;
    } else {
        res.status = StabilizerStatus::indeterminate;
        res.P = Pss;
    }
    return res;
}

/// Synthesized stabilizer for the backward-structured system.
struct StabilizerResult {
    StabilizerStatus status = StabilizerStatus::indeterminate;
    std::optional<SymMatrix> P;
    Matrix F;  // m x n gain on u
    Matrix K;  // n x n gain on z
    double closed_loop_abscissa = 0.0;
    double residual = 0.0;
    Tristate closed_loop_stable = Tristate::indeterminate;  // is_ms_stable(A+BF+CK, K)
    Tristate hautus_agrees = Tristate::indeterminate;       // cross-check vs the eigenmatrix test
};

/// Embed, run the Riccati flow with identity weights, verify the closed loop,
/// and cross-check the verdict against the eigenmatrix test.
[[nodiscard]] inline StabilizerResult stabilize_backward(const BackwardSystem& sys,
                                                         const RiccatiOptions& ropt = {},
                                                         const HautusOptions& hopt = {}) {
    sys.validate();
    const int n = sys.n();
    const int m = sys.m();
    const RiccatiResult rr = riccati_stabilize(embed_backward(sys), {}, {}, ropt);

    StabilizerResult out;
    out.status = rr.status;
    out.P = rr.P;
    out.residual = rr.residual;
    out.closed_loop_abscissa = rr.closed_loop_abscissa;
    if (rr.status == StabilizerStatus::stabilizable) {
        out.F = rr.theta.topRows(m);
        out.K = rr.theta.bottomRows(n);
        out.closed_loop_stable = is_ms_stable(sys.A + sys.B * out.F + sys.C * out.K, out.K);
        if (out.closed_loop_stable != Tristate::yes) {
            // a stabilizable verdict must come with a verified closed loop;
            // borderline loops whose stability cannot be confirmed stay open
            out.status = StabilizerStatus::indeterminate;
        }
    } else {
        out.F = Matrix::Zero(m, n);
        out.K = Matrix::Zero(n, n);
    }

    const Tristate hautus = hautus_stabilizability(sys, hopt).verdict();
    const Tristate riccati =
        rr.status == StabilizerStatus::stabilizable
            ? Tristate::yes
            : (rr.status == StabilizerStatus::not_stabilizable ? Tristate::no
                                                               : Tristate::indeterminate);
    if (!is_determinate(hautus) || !is_determinate(riccati)) {
        out.hautus_agrees = Tristate::indeterminate;
    } else {
        out.hautus_agrees = to_tristate(hautus == riccati);
    }
    return out;
}

/// Uncontrolled stabilizability test: true exactly when every real eigenvalue
/// lambda <= tol_eig of L_(-A,C) carries no nonzero PSD eigenmatrix.
[[nodiscard]] inline Tristate b_zero_spectral_test(const Matrix& A, const Matrix& C,
                                                   const HautusOptions& opt = {}) {
    check_square(A, "A");
    if (A.rows() != C.rows()) throw DimensionError("b_zero_spectral_test: A and C sizes differ");
    const LyapunovOperatorRep rep = build_lyap_op(A, C, DriftSign::minus);
    const detail::ClusterScan scan =
        detail::scan_psd_eigenmatrices(rep, nullptr, opt.tol_eig, opt);
    switch (scan.obstructed) {
        case Tristate::yes: return Tristate::no;
        case Tristate::no: return Tristate::yes;
        case Tristate::indeterminate: return Tristate::indeterminate;
    }
    return Tristate::indeterminate;
}

/// Stabilizability through the controllability decomposition: a split system
/// is stabilizable iff its uncontrollable tail is.
[[nodiscard]] inline Tristate stabilizability_via_decomposition(const BackwardSystem& sys,
                                                                double tol_rank = kDefaultRankTol,
                                                                const HautusOptions& opt = {}) {
    const Decomposition dec = controllability_decomposition(sys, tol_rank);
    switch (dec.kind) {
        case DecompositionKind::fully_controllable: return Tristate::yes;
        case DecompositionKind::fully_uncontrollable:
            return b_zero_spectral_test(sys.A, sys.C, opt);
        case DecompositionKind::split: return b_zero_spectral_test(dec.A22, dec.C22, opt);
    }
    return Tristate::indeterminate;
}

}  // namespace bsctrl
