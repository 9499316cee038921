#pragma once

// Real eigenstructure of the Lyapunov-type operator on S^n and the two
// eigenmatrix tests built on it:
//
//   exact controllability  <=>  no nonzero H >= 0 with
//                               L_(-A,C)(H) = lambda H and B^T H = 0;
//   stabilizability        <=>  the same, restricted to lambda <= 0.
//
// Only real eigenvalues are examined: a real symmetric eigenmatrix forces its
// eigenvalue to be real, so complex spectrum cannot carry an obstruction.
// Cone membership inside an eigenspace is decided by alternating projections
// (Dykstra) between the positive semidefinite cone and the trace-one slice of
// the subspace.

#include "bsctrl/reachability.hpp"
#include "bsctrl/symspace.hpp"
#include "bsctrl/types.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <vector>

namespace bsctrl {

inline constexpr double kDefaultEigCutoffTol = 1e-9;   // lambda <= tol counts as nonstable
inline constexpr double kWitnessPsdTol = 1e-8;         // min eigenvalue bound for |H| = 1
inline constexpr double kWitnessEigResidualTol = 1e-6; // |L(H) - lambda H| bound
inline constexpr double kWitnessBResidualTol = 1e-6;   // |B^T H| bound

/// A real eigenvalue of the operator together with an orthonormal basis of
/// its eigenspace inside S^n. `clean` drops to false when numerically dubious
/// directions had to be discarded.
struct EigenmatrixCluster {
    double lambda = 0.0;
    int multiplicity = 0;
    std::vector<SymMatrix> basis;
    bool clean = true;
};

[[nodiscard]] inline std::vector<EigenmatrixCluster> real_eigenclusters(
    const LyapunovOperatorRep& rep) {
    const int N = static_cast<int>(rep.mat.rows());
    if (N == 0) throw DimensionError("real_eigenclusters: empty representation");

    Eigen::EigenSolver<Matrix> es(rep.mat, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success) {
        throw EigensolverError("real_eigenclusters: eigensolver did not converge");
    }

    std::vector<double> real_eigs;
    for (int i = 0; i < N; ++i) {
        const std::complex<double> z = es.eigenvalues()(i);
        if (std::abs(z.imag()) <= 1e-8 * (1.0 + std::abs(z))) real_eigs.push_back(z.real());
    }
    std::sort(real_eigs.begin(), real_eigs.end());
    if (real_eigs.empty()) return {};

    const double spread = real_eigs.back() - real_eigs.front();
    const double tol_cluster = 1e-6 * (1.0 + spread);

    std::vector<EigenmatrixCluster> clusters;
    std::size_t i = 0;
    while (i < real_eigs.size()) {
        std::size_t j = i + 1;
        double sum = real_eigs[i];
        while (j < real_eigs.size() && real_eigs[j] - real_eigs[j - 1] <= tol_cluster) {
            sum += real_eigs[j];
            ++j;
        }
        EigenmatrixCluster cl;
        cl.multiplicity = static_cast<int>(j - i);
        cl.lambda = sum / cl.multiplicity;

        // Eigenspace from the SVD null space of (rep - lambda I). The cutoff
        // scales with the in-cluster eigenvalue scatter so that merged
        // near-multiple eigenvalues keep all their directions.
        double scatter = 0.0;
        for (std::size_t k = i; k < j; ++k) scatter = std::max(scatter, std::abs(real_eigs[k] - cl.lambda));
        Eigen::JacobiSVD<Matrix> svd(rep.mat - cl.lambda * Matrix::Identity(N, N),
                                     Eigen::ComputeFullV);
        const Vector sv = svd.singularValues();
        const double smax = sv.size() > 0 ? sv(0) : 0.0;
        const double null_tol = std::max(1e-8 * (1.0 + smax), 2.0 * scatter);

        const double res_tol = 1e-8 * (1.0 + std::abs(cl.lambda));
        for (int k = N - 1; k >= 0 && static_cast<int>(cl.basis.size()) < cl.multiplicity; --k) {
            if (sv(k) > null_tol) break;
            const SymMatrix E(detail::smat_raw(rep.n, svd.matrixV().col(k)));
            const double res = (apply_op(rep, E).mat() - cl.lambda * E.mat()).norm();
            if (res <= res_tol) {
                cl.basis.push_back(E);
            } else {
                cl.clean = false;
            }
        }
        clusters.push_back(std::move(cl));
        i = j;
    }
    // largest eigenvalue first; scan order is part of the contract
    std::sort(clusters.begin(), clusters.end(),
              [](const EigenmatrixCluster& a, const EigenmatrixCluster& b) {
                  return a.lambda > b.lambda;
              });
    return clusters;
}

enum class Feasibility { feasible, infeasible, indeterminate };

[[nodiscard]] constexpr const char* to_string(Feasibility f) noexcept {
    switch (f) {
        case Feasibility::feasible: return "feasible";
        case Feasibility::infeasible: return "infeasible";
        case Feasibility::indeterminate: return "indeterminate";
    }
    return "indeterminate";
}

struct PsdSearchResult {
    Feasibility status = Feasibility::indeterminate;
    std::optional<SymMatrix> witness;  // trace one when present
    int iterations = 0;
    double gap = 0.0;
};

/// Decide whether span(basis) meets the positive semidefinite cone outside
/// the origin; basis columns must be orthonormal in the Frobenius sense.
/// Infeasibility is declared once the inter-projection gap stalls above
/// 10 * tol_feas for 500 consecutive iterations.
[[nodiscard]] inline PsdSearchResult psd_in_subspace(const std::vector<SymMatrix>& basis,
                                                     double tol_feas = 1e-9, int max_iter = 5000) {
    PsdSearchResult out;
    if (basis.empty()) {
        out.status = Feasibility::infeasible;
        return out;
    }
    const int n = basis.front().dim();
    const int d = static_cast<int>(basis.size());

    // Exact shortcut on the basis elements themselves. When +-E is PSD the
    // trace-one witness is E / tr(E) in either case.
    for (const SymMatrix& E : basis) {
        if (E.dim() != n) throw DimensionError("psd_in_subspace: mixed dimensions in basis");
        const Vector ev = E.eigenvalues();
        if (ev(0) >= -1e-10 || ev(ev.size() - 1) <= 1e-10) {
            out.status = Feasibility::feasible;
            out.witness = (1.0 / E.trace()) * E;
            return out;
        }
    }
    if (d == 1) {
        // a line through an indefinite matrix misses the cone entirely
        out.status = Feasibility::infeasible;
        return out;
    }

    const int N = sym_dim(n);
    Matrix basis_coords(N, d);
    for (int k = 0; k < d; ++k) basis_coords.col(k) = detail::svec_raw(basis[k].mat());

    // trace functional in subspace coordinates
    Vector t(d);
    for (int k = 0; k < d; ++k) t(k) = basis[k].trace();
    const double tnorm2 = t.squaredNorm();
    if (tnorm2 <= 1e-24) {
        // every element of the span is traceless, so none is PSD and nonzero
        out.status = Feasibility::infeasible;
        return out;
    }

    const auto project_affine = [&](const Vector& y) {
        Vector c = basis_coords.transpose() * y;
        c += t * ((1.0 - t.dot(c)) / tnorm2);
        return Vector(basis_coords * c);
    };
    const auto project_cone = [&](const Vector& y) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(detail::smat_raw(n, y));
        const Vector ev = es.eigenvalues().cwiseMax(0.0);
        const Matrix clipped =
            es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
        return detail::svec_raw(clipped);
    };

    Vector z = project_affine(Vector::Zero(N));
    Vector correction = Vector::Zero(N);  // Dykstra correction on the cone side
    int stall = 0;
    double stall_anchor = 0.0;
    for (int iter = 1; iter <= max_iter; ++iter) {
        const Vector u = project_cone(z + correction);
        correction = z + correction - u;
        z = project_affine(u);
        const double gap = (u - z).norm();
        out.iterations = iter;
        out.gap = gap;
        if (gap <= tol_feas) {
            out.status = Feasibility::feasible;
            out.witness = SymMatrix(detail::smat_raw(n, z));
            return out;
        }
        if (gap > 10.0 * tol_feas) {
            if (stall == 0) stall_anchor = gap;
            ++stall;
            if (stall >= 500) {
                if (gap >= 0.99 * stall_anchor) {
                    out.status = Feasibility::infeasible;
                    return out;
                }
                stall = 0;  // still shrinking, keep going
            }
        } else {
            stall = 0;
        }
    }
    out.status = Feasibility::indeterminate;
    return out;
}

enum class HautusMode { controllability, stabilizability };

[[nodiscard]] constexpr const char* to_string(HautusMode m) noexcept {
    return m == HautusMode::controllability ? "controllability" : "stabilizability";
}

struct HautusWitness {
    double lambda = 0.0;
    SymMatrix H;  // unit Frobenius norm
    double eig_residual = 0.0;
    double b_residual = 0.0;
    double min_eig = 0.0;
};

struct HautusVerdict {
    HautusMode mode = HautusMode::controllability;
    Tristate obstructed = Tristate::indeterminate;
    std::optional<HautusWitness> witness;
    std::vector<double> clusters_checked;

    /// The system-level answer: controllable (resp. stabilizable) iff no
    /// obstruction was found.
    [[nodiscard]] Tristate verdict() const noexcept {
        switch (obstructed) {
            case Tristate::yes: return Tristate::no;
            case Tristate::no: return Tristate::yes;
            case Tristate::indeterminate: return Tristate::indeterminate;
        }
        return Tristate::indeterminate;
    }
};

struct HautusOptions {
    double tol_eig = kDefaultEigCutoffTol;
    double tol_feas = 1e-9;
    int max_iter = 5000;
};

namespace detail {

// Orthonormal basis of {H in span(cluster basis) : B^T H = 0}. Column k of
// the constraint matrix stacks B^T E_k; its null space combines the basis.
inline std::vector<SymMatrix> constrain_b_orthogonal(const std::vector<SymMatrix>& basis,
                                                     const Matrix& B) {
    if (basis.empty()) return {};
    const int d = static_cast<int>(basis.size());
    Matrix K(B.cols() * basis.front().dim(), d);
    for (int k = 0; k < d; ++k) {
        const Matrix bh = B.transpose() * basis[k].mat();
        K.col(k) = Eigen::Map<const Vector>(bh.data(), bh.size());
    }
    Eigen::JacobiSVD<Matrix> svd(K, Eigen::ComputeFullV);
    const Vector sv = svd.singularValues();
    const double smax = sv.size() > 0 ? sv(0) : 0.0;
    const double tol = std::max(1e-12 * (1.0 + B.norm()), 1e-9 * smax);

    std::vector<SymMatrix> out;
    const int n = basis.front().dim();
    const int N = sym_dim(n);
    Matrix coords(N, d);
    for (int k = 0; k < d; ++k) coords.col(k) = svec_raw(basis[k].mat());
    for (int k = 0; k < d; ++k) {
        const double s = k < sv.size() ? sv(k) : 0.0;
        if (s <= tol) {
            out.emplace_back(smat_raw(n, coords * svd.matrixV().col(k)));
        }
    }
    return out;
}

struct ClusterScan {
    Tristate obstructed = Tristate::no;
    std::optional<HautusWitness> witness;
    std::vector<double> checked;
};

// Shared engine for both Hautus tests, the B = 0 spectral test and the
// guaranteed-eigenmatrix search. `B` null means no orthogonality constraint;
// `cutoff` set means only clusters with lambda <= cutoff are examined.
inline ClusterScan scan_psd_eigenmatrices(const LyapunovOperatorRep& rep, const Matrix* B,
                                          std::optional<double> cutoff,
                                          const HautusOptions& opt) {
    ClusterScan scan;
    bool saw_indeterminate = false;
    for (const EigenmatrixCluster& cl : real_eigenclusters(rep)) {
        if (cutoff && cl.lambda > *cutoff) continue;
        scan.checked.push_back(cl.lambda);
        if (!cl.clean) saw_indeterminate = true;

        std::vector<SymMatrix> subspace =
            B ? constrain_b_orthogonal(cl.basis, *B) : cl.basis;
        const PsdSearchResult psd = psd_in_subspace(subspace, opt.tol_feas, opt.max_iter);
        if (psd.status == Feasibility::indeterminate) {
            saw_indeterminate = true;
            continue;
        }
        if (psd.status != Feasibility::feasible) continue;

        // Validate the candidate at unit Frobenius norm; the eigenvalue is
        // re-estimated by a Rayleigh quotient, which removes most of the
        // cluster-mean error.
        SymMatrix H = (1.0 / psd.witness->norm()) * (*psd.witness);
        const SymMatrix LH = apply_op(rep, H);
        double lambda = inner(H, LH);
        if (std::abs(lambda - cl.lambda) > 1e-3 * (1.0 + std::abs(cl.lambda))) {
            lambda = cl.lambda;  // Rayleigh drifted, keep the cluster value
        }
        HautusWitness w;
        w.lambda = lambda;
        w.H = H;
        w.eig_residual = (LH.mat() - lambda * H.mat()).norm();
        w.b_residual = B ? (B->transpose() * H.mat()).norm() : 0.0;
        w.min_eig = H.min_eigenvalue();
        const bool valid = w.min_eig >= -kWitnessPsdTol &&
                           w.eig_residual <= kWitnessEigResidualTol &&
                           w.b_residual <= kWitnessBResidualTol && (!cutoff || w.lambda <= *cutoff);
        if (valid) {
            scan.obstructed = Tristate::yes;
            scan.witness = std::move(w);
            return scan;
        }
        saw_indeterminate = true;  // feasible point that fails the certificate
    }
    if (saw_indeterminate) scan.obstructed = Tristate::indeterminate;
    return scan;
}

}  // namespace detail

/// Eigenmatrix test for exact controllability: obstructed exactly when some
/// real eigenspace of L_(-A,C) meets the PSD cone inside ker(H -> B^T H).
[[nodiscard]] inline HautusVerdict hautus_controllability(const BackwardSystem& sys,
                                                          const HautusOptions& opt = {}) {
    sys.validate();
    const LyapunovOperatorRep rep = build_lyap_op(sys.A, sys.C, DriftSign::minus);
    detail::ClusterScan scan = detail::scan_psd_eigenmatrices(rep, &sys.B, std::nullopt, opt);
    HautusVerdict v;
    v.mode = HautusMode::controllability;
    v.obstructed = scan.obstructed;
    v.witness = std::move(scan.witness);
    v.clusters_checked = std::move(scan.checked);
    return v;
}

/// Same test restricted to the nonstable spectral part (lambda <= tol_eig).
[[nodiscard]] inline HautusVerdict hautus_stabilizability(const BackwardSystem& sys,
                                                          const HautusOptions& opt = {}) {
    sys.validate();
    const LyapunovOperatorRep rep = build_lyap_op(sys.A, sys.C, DriftSign::minus);
    detail::ClusterScan scan =
        detail::scan_psd_eigenmatrices(rep, &sys.B, opt.tol_eig, opt);
    HautusVerdict v;
    v.mode = HautusMode::stabilizability;
    v.obstructed = scan.obstructed;
    v.witness = std::move(scan.witness);
    v.clusters_checked = std::move(scan.checked);
    return v;
}

/// Every operator L_(A,C) carries a nonzero PSD eigenmatrix; find one.
/// Returns (lambda, H) with tr H = 1. Failure to find one indicates a
/// tolerance breakdown, not a property of the input.
[[nodiscard]] inline std::pair<double, SymMatrix> exists_psd_eigenmatrix(
    const Matrix& A, const Matrix& C, const HautusOptions& opt = {}) {
    const LyapunovOperatorRep rep = build_lyap_op(A, C, DriftSign::plus);
    for (const EigenmatrixCluster& cl : real_eigenclusters(rep)) {
        const PsdSearchResult psd = psd_in_subspace(cl.basis, opt.tol_feas, opt.max_iter);
        if (psd.status == Feasibility::feasible) {
            const SymMatrix& H = *psd.witness;
            const double lambda = inner(H, apply_op(rep, H)) / inner(H, H);
            if ((apply_op(rep, H).mat() - lambda * H.mat()).norm() <=
                kWitnessEigResidualTol * (1.0 + std::abs(lambda))) {
                return {lambda, H};
            }
        }
    }
    throw InternalConsistencyError(
        "exists_psd_eigenmatrix: no PSD eigenmatrix found; this contradicts the "
        "cone fixed-point guarantee and indicates a tolerance failure");
}

}  // namespace bsctrl
