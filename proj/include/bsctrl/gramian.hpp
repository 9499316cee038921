#pragma once

// Controllability Gramian G(T) of the backward-structured system, computed two
// independent ways: classical RK4 on the time-reversed Lyapunov ODE
//
//   Q'(s) = -A Q - Q A^T + C Q C^T + B B^T,   Q(0) = 0,   G(T) = Q(T),
//
// and in closed form as the integrated semigroup of the adjoint operator for
// the -A orientation, via a block matrix exponential in svec coordinates.

#include "bsctrl/reachability.hpp"
#include "bsctrl/symspace.hpp"
#include "bsctrl/types.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace bsctrl {

enum class GramianMethod { ode_rk4, svec_expm };

[[nodiscard]] constexpr const char* to_string(GramianMethod m) noexcept {
    return m == GramianMethod::ode_rk4 ? "ode_rk4" : "svec_expm";
}

struct GramianResult {
    double T = 0.0;
    int steps = 0;
    SymMatrix G;       // primary value (RK4)
    SymMatrix G_expm;  // closed-form cross-check
    double min_eig = 0.0;
    GramianMethod method = GramianMethod::ode_rk4;
    double cross_rel_diff = 0.0;  // |G - G_expm| relative to the larger norm
};

[[nodiscard]] inline int default_gramian_steps(double T) {
    return std::max(200, static_cast<int>(std::ceil(1000.0 * T)));
}

namespace detail {

inline Matrix gramian_rhs(const BackwardSystem& sys, const Matrix& Q, const Matrix& BBt) {
    return -sys.A * Q - Q * sys.A.transpose() + sys.C * Q * sys.C.transpose() + BBt;
}

// integral_0^T e^{sR} ds through the block exponential
//   exp([R I; 0 0] T) = [e^{RT}  int_0^T e^{sR} ds; 0  I].
inline Matrix integrated_exp(const Matrix& R, double T) {
    const int N = static_cast<int>(R.rows());
    Matrix block = Matrix::Zero(2 * N, 2 * N);
    block.topLeftCorner(N, N) = R;
    block.topRightCorner(N, N) = Matrix::Identity(N, N);
    const Matrix e = (T * block).exp();
    return e.topRightCorner(N, N);
}

}  // namespace detail

/// Gramian over [0, T]. steps < 1 selects the default substep count.
[[nodiscard]] inline GramianResult gramian(const BackwardSystem& sys, double T, int steps = -1) {
    sys.validate();
    if (!(T > 0.0)) throw DimensionError("gramian: horizon must be positive");
    if (steps < 1) steps = default_gramian_steps(T);

    const int n = sys.n();
    const Matrix BBt = sys.B * sys.B.transpose();
    const double h = T / steps;

    Matrix Q = Matrix::Zero(n, n);
    for (int i = 0; i < steps; ++i) {
        const Matrix k1 = detail::gramian_rhs(sys, Q, BBt);
        const Matrix k2 = detail::gramian_rhs(sys, Q + 0.5 * h * k1, BBt);
        const Matrix k3 = detail::gramian_rhs(sys, Q + 0.5 * h * k2, BBt);
        const Matrix k4 = detail::gramian_rhs(sys, Q + h * k3, BBt);
        Q += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        Q = 0.5 * (Q + Q.transpose());
        if (!Q.allFinite()) throw NumericalError("gramian: integration produced non-finite values");
    }

    GramianResult res;
    res.T = T;
    res.steps = steps;
    res.method = GramianMethod::ode_rk4;
    res.G = SymMatrix(Q);
    res.min_eig = res.G.min_eigenvalue();

    const LyapunovOperatorRep adj = build_lyap_op(sys.A, sys.C, DriftSign::minus, true);
    const Vector g = detail::integrated_exp(adj.mat, T) * detail::svec_raw(BBt);
    res.G_expm = SymMatrix(detail::smat_raw(n, g));

    const double denom = std::max({res.G.norm(), res.G_expm.norm(), 1e-300});
    res.cross_rel_diff = (res.G.mat() - res.G_expm.mat()).norm() / denom;
    return res;
}

/// Positive definiteness with a scale-relative floor on the smallest eigenvalue.
[[nodiscard]] inline bool is_gramian_pd(const GramianResult& res, double tol = 1e-9) {
    return res.min_eig > tol * res.G.norm();
}

/// Whether the two computation routes produced a trustworthy value. Fails on
/// overflowed exponentials or a route disagreement beyond numerical noise,
/// in which case the PD verdict should not be relied on.
[[nodiscard]] inline bool gramian_routes_agree(const GramianResult& res, double tol = 1e-6) {
    return res.G.mat().allFinite() && res.G_expm.mat().allFinite() &&
           std::isfinite(res.cross_rel_diff) && res.cross_rel_diff <= tol;
}

struct TargetFeasibility {
    bool feasible = false;
    double residual = 0.0;
};

/// Whether the deterministic target xi is reachable from x over [0, T]:
/// the defect r = x - e^{-AT} xi must lie in im G(T). Membership is tested by
/// projecting onto the eigenvectors of G above the rank cutoff.
[[nodiscard]] inline TargetFeasibility deterministic_target_feasible(
    const BackwardSystem& sys, double T, const Vector& x, const Vector& xi,
    double tol_rank = kDefaultRankTol, int steps = -1) {
    sys.validate();
    if (x.size() != sys.n() || xi.size() != sys.n()) {
        throw DimensionError("deterministic_target_feasible: state vectors must have length n");
    }
    const GramianResult res = gramian(sys, T, steps);

    // E[Phi(T)] solves dM/dt = -M A, so it equals e^{-AT}.
    const Matrix mean_phi = Matrix((-T) * sys.A).exp();
    const Vector r = x - mean_phi * xi;

    Eigen::SelfAdjointEigenSolver<Matrix> es(res.G.mat());
    if (es.info() != Eigen::Success) throw EigensolverError("target feasibility: eigensolver failed");
    const Vector evals = es.eigenvalues();
    const double emax = evals.size() > 0 ? evals.maxCoeff() : 0.0;

    Vector proj = Vector::Zero(sys.n());
    for (int i = 0; i < evals.size(); ++i) {
        if (evals(i) > tol_rank * emax) {
            const Vector v = es.eigenvectors().col(i);
            proj += v.dot(r) * v;
        }
    }
    TargetFeasibility out;
    out.residual = (r - proj).norm();
    out.feasible = out.residual <= 1e-8 * (1.0 + r.norm());
    return out;
}

}  // namespace bsctrl
