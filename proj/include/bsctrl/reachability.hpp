#pragma once

// Word-generated reachable subspaces V_k = span{ im(MB) : M a word of length
// <= k over {A, C} }, the associated rank test for exact controllability, and
// the orthogonal decomposition into controllable / uncontrollable blocks.

#include "bsctrl/types.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <string>
#include <vector>

namespace bsctrl {

inline constexpr double kDefaultRankTol = 1e-9;

/// The controlled system dX = [AX + Bu + Cz]dt + z dW.
struct BackwardSystem {
    Matrix A;  // n x n
    Matrix B;  // n x m
    Matrix C;  // n x n

    [[nodiscard]] int n() const noexcept { return static_cast<int>(A.rows()); }
    [[nodiscard]] int m() const noexcept { return static_cast<int>(B.cols()); }

    void validate() const {
        check_square(A, "A");
        check_square(C, "C");
        if (C.rows() != A.rows()) throw DimensionError("system: A and C sizes differ");
        if (B.rows() != A.rows()) throw DimensionError("system: B row count differs from A");
        if (B.cols() < 1) throw DimensionError("system: control dimension must be positive");
        check_finite(A, "A");
        check_finite(B, "B");
        check_finite(C, "C");
    }
};

/// (A + B F1, B, C + B F2); preserves the controllability verdict.
[[nodiscard]] inline BackwardSystem feedback_transform(const BackwardSystem& sys, const Matrix& F1,
                                                       const Matrix& F2) {
    sys.validate();
    if (F1.rows() != sys.m() || F1.cols() != sys.n() || F2.rows() != sys.m() ||
        F2.cols() != sys.n()) {
        throw DimensionError("feedback_transform: gains must be m x n");
    }
    return BackwardSystem{sys.A + sys.B * F1, sys.B, sys.C + sys.B * F2};
}

/// Nested reachable subspaces V_0 <= V_1 <= ... together with the step at
/// which the chain stops growing (at most n-1).
struct SubspaceChain {
    std::vector<int> dims;  // dim V_k for each computed k
    Matrix basis;           // n x final_dim, orthonormal columns spanning the final subspace
    int stabilized_at = 0;  // smallest k with V_k == V_{k+1}

    [[nodiscard]] int final_dim() const noexcept { return static_cast<int>(basis.cols()); }
};

namespace detail {

// Orthonormal basis of the column space, rank by relative pivot threshold.
inline Matrix colspace_qr(const Matrix& M, double tol_rank) {
    Eigen::ColPivHouseholderQR<Matrix> qr(M);
    qr.setThreshold(tol_rank);
    const int r = static_cast<int>(qr.rank());
    Matrix Q = qr.householderQ() * Matrix::Identity(M.rows(), r);
    return Q;
}

}  // namespace detail

/// Grow an orthonormal basis of im B by repeatedly appending A- and C-images
/// and re-orthonormalizing. Equivalent to enumerating all words by induction.
[[nodiscard]] inline SubspaceChain word_subspaces(const BackwardSystem& sys,
                                                  double tol_rank = kDefaultRankTol) {
    sys.validate();
    const int n = sys.n();

    // dim V_0 via singular values of B
    Eigen::JacobiSVD<Matrix> svd(sys.B, Eigen::ComputeThinU);
    int r0 = 0;
    if (svd.singularValues().size() > 0) {
        const double smax = svd.singularValues()(0);
        for (int i = 0; i < svd.singularValues().size(); ++i) {
            if (svd.singularValues()(i) > tol_rank * smax) ++r0;
        }
    }

    SubspaceChain chain;
    chain.dims.push_back(r0);
    if (r0 == 0) {
        chain.basis = Matrix::Zero(n, 0);
        chain.stabilized_at = 0;
        return chain;
    }

    Matrix basis = svd.matrixU().leftCols(r0);
    while (true) {
        if (chain.dims.back() == n) {
            chain.stabilized_at = static_cast<int>(chain.dims.size()) - 1;
            break;
        }
        Matrix candidates(n, 3 * basis.cols());
        candidates << basis, sys.A * basis, sys.C * basis;
        Matrix next = detail::colspace_qr(candidates, tol_rank);
        chain.dims.push_back(static_cast<int>(next.cols()));
        basis = next;
        const std::size_t s = chain.dims.size();
        if (chain.dims[s - 1] == chain.dims[s - 2]) {
            chain.stabilized_at = static_cast<int>(s) - 2;
            break;
        }
    }
    chain.basis = basis;
    return chain;
}

[[nodiscard]] inline bool is_exactly_controllable(const BackwardSystem& sys,
                                                  double tol_rank = kDefaultRankTol) {
    return word_subspaces(sys, tol_rank).final_dim() == sys.n();
}

enum class DecompositionKind { fully_controllable, fully_uncontrollable, split };

[[nodiscard]] constexpr const char* to_string(DecompositionKind k) noexcept {
    switch (k) {
        case DecompositionKind::fully_controllable: return "fully_controllable";
        case DecompositionKind::fully_uncontrollable: return "fully_uncontrollable";
        case DecompositionKind::split: return "split";
    }
    return "split";
}

/// Orthogonal change of coordinates P with
///   P^T A P = [A11 A12; 0 A22],  P^T C P = [C11 C12; 0 C22],  P^T B = [B1; 0]
/// where the leading k x k blocks carry an exactly controllable subsystem.
/// Degenerate chains (k = 0 or k = n) are tagged, not errors.
struct Decomposition {
    DecompositionKind kind = DecompositionKind::split;
    int k = 0;
    Matrix P;
    Matrix A11, A12, A22;
    Matrix C11, C12, C22;
    Matrix B1;
};

[[nodiscard]] inline Decomposition controllability_decomposition(
    const BackwardSystem& sys, double tol_rank = kDefaultRankTol) {
    sys.validate();
    const int n = sys.n();
    const SubspaceChain chain = word_subspaces(sys, tol_rank);
    const int k = chain.final_dim();

    Decomposition dec;
    dec.k = k;
    if (k == n) {
        dec.kind = DecompositionKind::fully_controllable;
        dec.P = Matrix::Identity(n, n);
        dec.A11 = sys.A;
        dec.C11 = sys.C;
        dec.B1 = sys.B;
        dec.A12 = dec.A22 = dec.C12 = dec.C22 = Matrix::Zero(0, 0);
        return dec;
    }
    if (k == 0) {
        dec.kind = DecompositionKind::fully_uncontrollable;
        dec.P = Matrix::Identity(n, n);
        dec.A22 = sys.A;
        dec.C22 = sys.C;
        dec.A11 = dec.A12 = dec.C11 = dec.C12 = Matrix::Zero(0, 0);
        dec.B1 = Matrix::Zero(0, sys.m());
        return dec;
    }

    // Extend the orthonormal basis of V_{n-1} to an orthonormal basis of R^n.
    Eigen::HouseholderQR<Matrix> qr(chain.basis);
    Matrix P = qr.householderQ() * Matrix::Identity(n, n);
    dec.kind = DecompositionKind::split;
    dec.P = P;

    const Matrix At = P.transpose() * sys.A * P;
    const Matrix Ct = P.transpose() * sys.C * P;
    const Matrix Bt = P.transpose() * sys.B;
    dec.A11 = At.topLeftCorner(k, k);
    dec.A12 = At.topRightCorner(k, n - k);
    dec.A22 = At.bottomRightCorner(n - k, n - k);
    dec.C11 = Ct.topLeftCorner(k, k);
    dec.C12 = Ct.topRightCorner(k, n - k);
    dec.C22 = Ct.bottomRightCorner(n - k, n - k);
    dec.B1 = Bt.topRows(k);
    return dec;
}

}  // namespace bsctrl
