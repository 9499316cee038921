#include <catch2/catch_amalgamated.hpp>

#include "bsctrl/gramian.hpp"
#include "bsctrl/hautus.hpp"
#include "support/oracles.hpp"

#include <cmath>
#include <random>

using namespace bsctrl;
using Catch::Matchers::WithinAbs;

namespace {

BackwardSystem example3() {
    Matrix A(3, 3), C(3, 3), B(3, 1);
    A << 0, -1, 0, 0, 0, 0, 1, 0, 0;
    C << 0, 0, 0, 1, 0, 1, 0, 1, 0;
    B << 1, 0, 0;
    return BackwardSystem{A, B, C};
}

SymMatrix example3_H() {
    Matrix H(3, 3);
    H << 0, 0, 0, 0, 0, 1, 0, 1, 0;
    return SymMatrix(H);
}

BackwardSystem chain2_uncontrollable() {
    Matrix A(2, 2), C(2, 2), B(2, 1);
    A << 0, 1, 0, 0;
    C.setZero();
    B << 1, 0;
    return BackwardSystem{A, B, C};
}

BackwardSystem scalar_b0(double a, double c) {
    return BackwardSystem{Matrix::Constant(1, 1, a), Matrix::Zero(1, 1),
                          Matrix::Constant(1, 1, c)};
}

// projection of M onto the span of an orthonormal cluster basis
double span_residual(const std::vector<SymMatrix>& basis, const SymMatrix& M) {
    Matrix proj = Matrix::Zero(M.dim(), M.dim());
    for (const SymMatrix& E : basis) proj += inner(E, M) * E.mat();
    return (M.mat() - proj).norm();
}

}  // namespace

TEST_CASE("zero operator has one cluster spanning all of S^n", "[hautus]") {
    const auto rep = build_lyap_op(Matrix::Zero(2, 2), Matrix::Zero(2, 2), DriftSign::minus);
    const auto clusters = real_eigenclusters(rep);
    REQUIRE(clusters.size() == 1);
    CHECK(clusters[0].lambda == 0.0);
    CHECK(clusters[0].multiplicity == 3);
    CHECK(clusters[0].basis.size() == 3);
    CHECK(clusters[0].clean);
}

TEST_CASE("scalar cluster carries c^2 - 2a", "[hautus]") {
    const auto rep = build_lyap_op(Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 2.0),
                                   DriftSign::minus);
    const auto clusters = real_eigenclusters(rep);
    REQUIRE(clusters.size() == 1);
    CHECK_THAT(clusters[0].lambda, WithinAbs(2.0, 1e-12));
    REQUIRE(clusters[0].basis.size() == 1);
}

TEST_CASE("benchmark cluster at 1 contains the reference eigenmatrix", "[hautus]") {
    const auto rep = build_lyap_op(example3().A, example3().C, DriftSign::minus);
    const auto clusters = real_eigenclusters(rep);
    bool found = false;
    for (const auto& cl : clusters) {
        if (std::abs(cl.lambda - 1.0) < 1e-6) {
            found = true;
            const SymMatrix H = (1.0 / example3_H().norm()) * example3_H();
            CHECK(span_residual(cl.basis, H) <= 1e-8);
        }
    }
    CHECK(found);
}

TEST_CASE("cluster bases satisfy the eigenmatrix residual bound", "[hautus][property]") {
    std::mt19937_64 rng(307);
    for (int trial = 0; trial < 25; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 3);
        const auto rep = build_lyap_op(oracles::random_matrix(rng, n, n),
                                       oracles::random_matrix(rng, n, n), DriftSign::minus);
        for (const auto& cl : real_eigenclusters(rep)) {
            for (std::size_t i = 0; i < cl.basis.size(); ++i) {
                const SymMatrix& E = cl.basis[i];
                CHECK((apply_op(rep, E).mat() - cl.lambda * E.mat()).norm() <=
                      1e-8 * (1.0 + std::abs(cl.lambda)));
                for (std::size_t j = 0; j < i; ++j) {
                    CHECK(std::abs(inner(E, cl.basis[j])) <= 1e-9);
                }
                CHECK_THAT(E.norm(), WithinAbs(1.0, 1e-9));
            }
        }
    }
}

TEST_CASE("identity direction is feasible", "[hautus][psd]") {
    const int n = 3;
    const std::vector<SymMatrix> basis{(1.0 / std::sqrt(double(n))) * SymMatrix::identity(n)};
    const PsdSearchResult res = psd_in_subspace(basis);
    REQUIRE(res.status == Feasibility::feasible);
    REQUIRE(res.witness);
    CHECK((res.witness->mat() - Matrix::Identity(n, n) / n).norm() <= 1e-12);
}

TEST_CASE("a line through an indefinite matrix is infeasible", "[hautus][psd]") {
    const SymMatrix H = (1.0 / example3_H().norm()) * example3_H();
    const PsdSearchResult res = psd_in_subspace({H});
    CHECK(res.status == Feasibility::infeasible);
}

TEST_CASE("diagonal two-parameter family meets the cone", "[hautus][psd]") {
    Matrix d1(2, 2), d2(2, 2);
    d1 << 1, 0, 0, -1;
    d2 << 0, 0, 0, 1;
    // orthonormalize the span of d1, d2
    const SymMatrix E1((1.0 / std::sqrt(2.0)) * d1);
    Matrix g = d2 - 0.5 * (d1.cwiseProduct(d2)).sum() * d1;
    const SymMatrix E2((1.0 / g.norm()) * g);
    const PsdSearchResult res = psd_in_subspace({E1, E2});
    REQUIRE(res.status == Feasibility::feasible);
    REQUIRE(res.witness);
    CHECK(res.witness->min_eigenvalue() >= -1e-9);
    CHECK_THAT(res.witness->trace(), WithinAbs(1.0, 1e-9));
    // witness stays inside the diagonal span
    CHECK(std::abs((*res.witness)(0, 1)) <= 1e-8);
}

TEST_CASE("empty and traceless subspaces are infeasible", "[hautus][psd]") {
    CHECK(psd_in_subspace({}).status == Feasibility::infeasible);
    Matrix off(2, 2);
    off << 0, 1, 1, 0;
    const PsdSearchResult res = psd_in_subspace({SymMatrix((1.0 / off.norm()) * off)});
    CHECK(res.status == Feasibility::infeasible);
}

TEST_CASE("benchmark passes the controllability test despite the indefinite eigenmatrix",
          "[hautus][regression]") {
    const HautusVerdict v = hautus_controllability(example3());
    CHECK(v.obstructed == Tristate::no);
    CHECK(v.verdict() == Tristate::yes);
    CHECK_FALSE(v.witness);

    // the cone restriction is what saves it: an indefinite eigenmatrix with
    // B^T H = 0 exists at lambda = 1
    const SymMatrix H = example3_H();
    CHECK((example3().B.transpose() * H.mat()).norm() == 0.0);
    CHECK(H.min_eigenvalue() < -0.5);
    CHECK(H.eigenvalues().maxCoeff() > 0.5);
}

TEST_CASE("input-free systems are always obstructed", "[hautus][property]") {
    std::mt19937_64 rng(311);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 3);
        BackwardSystem sys = oracles::random_system(rng, n, 1);
        sys.B.setZero();
        const HautusVerdict v = hautus_controllability(sys);
        CHECK(v.obstructed == Tristate::yes);
        REQUIRE(v.witness);
        CHECK(v.witness->min_eig >= -kWitnessPsdTol);
        CHECK(v.witness->eig_residual <= kWitnessEigResidualTol);
        CHECK(v.witness->b_residual <= kWitnessBResidualTol);
        CHECK_THAT(v.witness->H.norm(), WithinAbs(1.0, 1e-9));
    }
}

TEST_CASE("drift-only chain is obstructed at lambda 0 by e2 e2^T", "[hautus]") {
    const HautusVerdict v = hautus_controllability(chain2_uncontrollable());
    REQUIRE(v.obstructed == Tristate::yes);
    REQUIRE(v.witness);
    CHECK(std::abs(v.witness->lambda) <= 1e-9);
    Matrix expected = Matrix::Zero(2, 2);
    expected(1, 1) = 1.0;
    CHECK((v.witness->H.mat() - expected).norm() <= 1e-6);
}

TEST_CASE("scalar stabilizability via the spectral cut", "[hautus]") {
    // c^2 <= 2a leaves a nonpositive eigenvalue with a PSD eigenmatrix
    const HautusVerdict bad = hautus_stabilizability(scalar_b0(1.0, 1.0));
    CHECK(bad.obstructed == Tristate::yes);
    REQUIRE(bad.witness);
    CHECK(bad.witness->lambda <= kDefaultEigCutoffTol);

    const HautusVerdict good = hautus_stabilizability(scalar_b0(1.0, 2.0));
    CHECK(good.obstructed == Tristate::no);
    CHECK(good.clusters_checked.empty());  // only lambda = 2 > 0 exists
}

TEST_CASE("exactly controllable systems are stabilizable", "[hautus]") {
    const HautusVerdict v = hautus_stabilizability(example3());
    CHECK(v.verdict() == Tristate::yes);
}

TEST_CASE("guaranteed PSD eigenmatrix on degenerate and scalar operators", "[hautus]") {
    const auto [l0, H0] = exists_psd_eigenmatrix(Matrix::Zero(2, 2), Matrix::Zero(2, 2));
    CHECK(l0 == 0.0);
    CHECK(H0.min_eigenvalue() >= -1e-12);
    CHECK_THAT(H0.trace(), WithinAbs(1.0, 1e-12));

    const double a = -0.4, c = 1.1;
    const auto [l1, H1] =
        exists_psd_eigenmatrix(Matrix::Constant(1, 1, a), Matrix::Constant(1, 1, c));
    CHECK_THAT(l1, WithinAbs(2.0 * a + c * c, 1e-12));
    CHECK_THAT(H1(0, 0), WithinAbs(1.0, 1e-12));
}

TEST_CASE("PSD eigenmatrix exists on random pairs", "[hautus][property]") {
    std::mt19937_64 rng(313);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 2);
        const Matrix A = oracles::random_matrix(rng, n, n);
        const Matrix C = oracles::random_matrix(rng, n, n);
        const auto [lambda, H] = exists_psd_eigenmatrix(A, C);
        const auto rep = build_lyap_op(A, C, DriftSign::plus);
        CHECK((apply_op(rep, H).mat() - lambda * H.mat()).norm() <=
              1e-6 * (1.0 + std::abs(lambda)) * H.norm());
        CHECK(H.min_eigenvalue() >= -1e-8 * H.norm());
        CHECK(H.trace() > 0.0);
    }
}

TEST_CASE("eigenmatrix test agrees with the rank test", "[hautus][property]") {
    const auto suite = oracles::seeded_suite(20250809ULL, 200);
    int indeterminate = 0;
    int disagreements = 0;
    for (const BackwardSystem& sys : suite) {
        const Tristate h = hautus_controllability(sys).verdict();
        if (!is_determinate(h)) {
            ++indeterminate;
            continue;
        }
        if ((h == Tristate::yes) != is_exactly_controllable(sys)) ++disagreements;
    }
    CHECK(disagreements == 0);
    CHECK(indeterminate < 10);  // < 5% of 200
}
