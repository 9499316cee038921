#pragma once

// Coordinates on the space of real symmetric matrices and matrix
// representations of the Lyapunov-type operators
//
//   L_(A,C)(M)  = MA + A^T M + C^T M C        (and the -A variant)
//   L*_(A,C)(M) = AM + MA^T + C M C^T
//
// acting on S^n. Coordinates are isometric: off-diagonal entries carry a
// factor sqrt(2), so Frobenius inner products become Euclidean ones and the
// representation of the adjoint is exactly the matrix transpose.

#include "bsctrl/types.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <string>

namespace bsctrl {

/// Dimension of S^n as a vector space.
[[nodiscard]] constexpr int sym_dim(int n) noexcept { return n * (n + 1) / 2; }

/// Real symmetric matrix. Symmetrized on construction so that
/// entries(i,j) == entries(j,i) holds exactly afterwards.
class SymMatrix {
public:
    SymMatrix() = default;

    explicit SymMatrix(const Matrix& m) {
        check_square(m, "SymMatrix");
        m_ = 0.5 * (m + m.transpose());
    }

    [[nodiscard]] static SymMatrix identity(int n) { return SymMatrix(Matrix::Identity(n, n)); }
    [[nodiscard]] static SymMatrix zero(int n) { return SymMatrix(Matrix::Zero(n, n)); }

    [[nodiscard]] int dim() const noexcept { return static_cast<int>(m_.rows()); }
    [[nodiscard]] const Matrix& mat() const noexcept { return m_; }
    [[nodiscard]] double operator()(int i, int j) const { return m_(i, j); }

    [[nodiscard]] double norm() const { return m_.norm(); }
    [[nodiscard]] double trace() const { return m_.trace(); }

    /// Eigenvalues in ascending order (self-adjoint solver).
    [[nodiscard]] Vector eigenvalues() const {
        Eigen::SelfAdjointEigenSolver<Matrix> es(m_, Eigen::EigenvaluesOnly);
        if (es.info() != Eigen::Success) {
            throw EigensolverError("self-adjoint eigensolver failed");
        }
        return es.eigenvalues();
    }

    [[nodiscard]] double min_eigenvalue() const {
        if (dim() == 0) return 0.0;
        return eigenvalues()(0);
    }

    friend SymMatrix operator+(const SymMatrix& a, const SymMatrix& b) {
        return SymMatrix(a.m_ + b.m_);
    }
    friend SymMatrix operator-(const SymMatrix& a, const SymMatrix& b) {
        return SymMatrix(a.m_ - b.m_);
    }
    friend SymMatrix operator*(double s, const SymMatrix& a) { return SymMatrix(s * a.m_); }

private:
    Matrix m_;
};

/// Frobenius inner product tr(A^T B).
[[nodiscard]] inline double inner(const SymMatrix& a, const SymMatrix& b) {
    if (a.dim() != b.dim()) throw DimensionError("inner: dimension mismatch");
    return (a.mat().transpose() * b.mat()).trace();
}

/// Isometric coordinates of a symmetric matrix, length n(n+1)/2.
struct SymVec {
    int n = 0;
    Vector coords;
};

namespace detail {

// Column-major lower triangle; off-diagonal scaled by sqrt(2).
inline Vector svec_raw(const Matrix& m) {
    const int n = static_cast<int>(m.rows());
    Vector v(sym_dim(n));
    int k = 0;
    for (int j = 0; j < n; ++j) {
        v(k++) = m(j, j);
        for (int i = j + 1; i < n; ++i) v(k++) = M_SQRT2 * m(i, j);
    }
    return v;
}

inline Matrix smat_raw(int n, const Vector& v) {
    Matrix m(n, n);
    int k = 0;
    for (int j = 0; j < n; ++j) {
        m(j, j) = v(k++);
        for (int i = j + 1; i < n; ++i) {
            const double x = v(k++) / M_SQRT2;
            m(i, j) = x;
            m(j, i) = x;
        }
    }
    return m;
}

inline int dim_from_coords(int len) {
    // invert N = n(n+1)/2
    const int n = static_cast<int>(std::lround((std::sqrt(8.0 * len + 1.0) - 1.0) / 2.0));
    if (sym_dim(n) != len) throw DimensionError("SymVec length is not a triangular number");
    return n;
}

}  // namespace detail

[[nodiscard]] inline SymVec svec(const SymMatrix& m) {
    return SymVec{m.dim(), detail::svec_raw(m.mat())};
}

[[nodiscard]] inline SymMatrix smat(const SymVec& v) {
    if (v.coords.size() != sym_dim(v.n)) {
        throw DimensionError("smat: coords length does not match declared dimension");
    }
    return SymMatrix(detail::smat_raw(v.n, v.coords));
}

/// Drift orientation of a Lyapunov-type operator.
enum class DriftSign { plus, minus };

[[nodiscard]] constexpr const char* to_string(DriftSign s) noexcept {
    return s == DriftSign::plus ? "+A" : "-A";
}

/// N x N matrix representation of L_(+-A,C) or its adjoint in svec
/// coordinates. In these coordinates rep(L*) == rep(L)^T.
struct LyapunovOperatorRep {
    int n = 0;
    DriftSign sign = DriftSign::plus;
    bool adjoint = false;
    Matrix mat;
};

/// The defining formula, evaluated directly on a symmetric matrix.
[[nodiscard]] inline SymMatrix lyap_apply_direct(const Matrix& A, const Matrix& C, DriftSign sign,
                                                 bool adjoint, const SymMatrix& M) {
    check_square(A, "A");
    check_square(C, "C");
    if (A.rows() != C.rows() || A.rows() != M.dim()) {
        throw DimensionError("lyap_apply_direct: dimension mismatch");
    }
    const Matrix Ad = (sign == DriftSign::plus) ? A : Matrix(-A);
    const Matrix& S = M.mat();
    if (adjoint) {
        return SymMatrix(Ad * S + S * Ad.transpose() + C * S * C.transpose());
    }
    return SymMatrix(S * Ad + Ad.transpose() * S + C.transpose() * S * C);
}

/// Build the svec-coordinate representation column by column.
[[nodiscard]] inline LyapunovOperatorRep build_lyap_op(const Matrix& A, const Matrix& C,
                                                       DriftSign sign, bool adjoint = false) {
    check_square(A, "A");
    check_square(C, "C");
    if (A.rows() != C.rows()) throw DimensionError("build_lyap_op: A and C sizes differ");
    const int n = static_cast<int>(A.rows());
    const int N = sym_dim(n);
    LyapunovOperatorRep rep{n, sign, adjoint, Matrix(N, N)};
    Vector e = Vector::Zero(N);
    for (int k = 0; k < N; ++k) {
        e(k) = 1.0;
        const SymMatrix basis(detail::smat_raw(n, e));
        rep.mat.col(k) = detail::svec_raw(lyap_apply_direct(A, C, sign, adjoint, basis).mat());
        e(k) = 0.0;
    }
    return rep;
}

/// Apply the operator through its coordinate representation.
[[nodiscard]] inline SymMatrix apply_op(const LyapunovOperatorRep& rep, const SymMatrix& M) {
    if (M.dim() != rep.n) throw DimensionError("apply_op: dimension mismatch");
    return SymMatrix(detail::smat_raw(rep.n, rep.mat * detail::svec_raw(M.mat())));
}

/// e^{t L}(S) through the coordinate matrix exponential. For the adjoint
/// representation this is the semigroup T_t, which maps the positive
/// semidefinite cone into itself.
[[nodiscard]] inline SymMatrix semigroup_apply(const LyapunovOperatorRep& rep, double t,
                                               const SymMatrix& S) {
    if (S.dim() != rep.n) throw DimensionError("semigroup_apply: dimension mismatch");
    if (!(t >= 0.0)) throw DimensionError("semigroup_apply: t must be nonnegative");
    const Matrix expm = (t * rep.mat).exp();
    return SymMatrix(detail::smat_raw(rep.n, expm * detail::svec_raw(S.mat())));
}

/// Largest real part over the eigenvalues of the representation. Negative
/// exactly when the associated uncontrolled system is mean-square stable.
[[nodiscard]] inline double spectral_abscissa(const LyapunovOperatorRep& rep) {
    if (rep.mat.rows() == 0) throw DimensionError("spectral_abscissa: empty representation");
    Eigen::EigenSolver<Matrix> es(rep.mat, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success) {
        throw EigensolverError("spectral_abscissa: eigensolver did not converge");
    }
    return es.eigenvalues().real().maxCoeff();
}

}  // namespace bsctrl
