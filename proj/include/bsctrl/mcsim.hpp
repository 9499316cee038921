#pragma once

// Seeded Euler-Maruyama simulation of the matrix flows
//
//   dPi  =  A Pi dt + C Pi dW,   Pi(0)  = I,
//   dPhi = -Phi A dt - Phi C dW, Phi(0) = I,
//
// and of closed-loop state trajectories, used to validate the deterministic
// solvers statistically. Every path draws from its own generator seeded by
// (seed, path index) through a splitmix64 mix, so partitioning paths across
// workers cannot change the sampled trajectories; estimates for a fixed seed
// and config are bit-identical across runs.

#include "bsctrl/reachability.hpp"
#include "bsctrl/symspace.hpp"
#include "bsctrl/types.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace bsctrl {

struct SimConfig {
    double dt = 1e-3;
    double t_final = 1.0;
    int paths = 10000;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(dt > 0.0)) throw DimensionError("sim config: dt must be positive");
        if (!(t_final >= dt)) throw DimensionError("sim config: t_final must be at least dt");
        if (paths < 1) throw DimensionError("sim config: paths must be at least 1");
    }
};

/// Sample mean with entrywise standard errors. `saturated` flags paths that
/// overflowed and were frozen at a cap.
struct MomentEstimate {
    double t = 0.0;
    Matrix value;
    Matrix std_error;
    bool saturated = false;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::mt19937_64 path_rng(std::uint64_t seed, std::uint64_t path) {
    return std::mt19937_64(splitmix64(seed ^ splitmix64(path + 1)));
}

inline constexpr double kSaturationCap = 1e150;

struct MomentAccumulator {
    Matrix sum, sumsq;
    long count = 0;

    explicit MomentAccumulator(int rows, int cols)
        : sum(Matrix::Zero(rows, cols)), sumsq(Matrix::Zero(rows, cols)) {}

    void add(const Matrix& x) {
        sum += x;
        sumsq += x.cwiseProduct(x);
        ++count;
    }

    [[nodiscard]] MomentEstimate finish(double t) const {
        MomentEstimate est;
        est.t = t;
        est.value = sum / static_cast<double>(count);
        if (count > 1) {
            const Matrix var =
                (sumsq - static_cast<double>(count) * est.value.cwiseProduct(est.value)) /
                static_cast<double>(count - 1);
            est.std_error = (var.cwiseMax(0.0) / static_cast<double>(count)).cwiseSqrt();
        } else {
            est.std_error = Matrix::Zero(est.value.rows(), est.value.cols());
        }
        return est;
    }
};

}  // namespace detail

/// Estimate E[Pi(t_final) S Pi(t_final)^T], the semigroup of the adjoint
/// operator applied to S.
[[nodiscard]] inline MomentEstimate simulate_pi_moments(const Matrix& A, const Matrix& C,
                                                        const SymMatrix& S, const SimConfig& cfg) {
    check_square(A, "A");
    if (A.rows() != C.rows() || A.rows() != S.dim()) {
        throw DimensionError("simulate_pi_moments: dimension mismatch");
    }
    cfg.validate();
    const int n = static_cast<int>(A.rows());
    const long steps = std::max<long>(1, std::lround(cfg.t_final / cfg.dt));
    const double dt = cfg.t_final / static_cast<double>(steps);
    const double sqdt = std::sqrt(dt);

    detail::MomentAccumulator acc(n, n);
    bool saturated = false;
    for (int p = 0; p < cfg.paths; ++p) {
        auto rng = detail::path_rng(cfg.seed, static_cast<std::uint64_t>(p));
        std::normal_distribution<double> gauss(0.0, 1.0);
        Matrix Pi = Matrix::Identity(n, n);
        for (long k = 0; k < steps; ++k) {
            const double dW = sqdt * gauss(rng);
            Pi += A * Pi * dt + C * Pi * dW;
            if (!Pi.allFinite() || Pi.norm() > detail::kSaturationCap) {
                Pi = Pi.cwiseMax(-detail::kSaturationCap).cwiseMin(detail::kSaturationCap);
                saturated = true;
                break;
            }
        }
        Matrix v = Pi * S.mat() * Pi.transpose();
        acc.add(0.5 * (v + v.transpose()));
    }
    MomentEstimate est = acc.finish(cfg.t_final);
    est.saturated = saturated;
    return est;
}

/// Estimate the Gramian E[int_0^T Phi B B^T Phi^T dt] by pathwise trapezoidal
/// quadrature.
[[nodiscard]] inline MomentEstimate simulate_phi_gramian(const BackwardSystem& sys, double T,
                                                         const SimConfig& cfg) {
    sys.validate();
    if (!(T > 0.0)) throw DimensionError("simulate_phi_gramian: horizon must be positive");
    if (!(cfg.dt > 0.0) || cfg.paths < 1) {
        throw DimensionError("simulate_phi_gramian: invalid simulation config");
    }
    const int n = sys.n();
    const long steps = std::max<long>(1, std::lround(T / cfg.dt));
    const double dt = T / static_cast<double>(steps);
    const double sqdt = std::sqrt(dt);
    const Matrix BBt = sys.B * sys.B.transpose();

    detail::MomentAccumulator acc(n, n);
    bool saturated = false;
    for (int p = 0; p < cfg.paths; ++p) {
        auto rng = detail::path_rng(cfg.seed, static_cast<std::uint64_t>(p));
        std::normal_distribution<double> gauss(0.0, 1.0);
        Matrix Phi = Matrix::Identity(n, n);
        Matrix integrand = BBt;  // Phi(0) B B^T Phi(0)^T
        Matrix integral = Matrix::Zero(n, n);
        for (long k = 0; k < steps; ++k) {
            const double dW = sqdt * gauss(rng);
            Phi += -Phi * sys.A * dt - Phi * sys.C * dW;
            if (!Phi.allFinite() || Phi.norm() > detail::kSaturationCap) {
                saturated = true;
                break;
            }
            const Matrix next = Phi * BBt * Phi.transpose();
            integral += 0.5 * dt * (integrand + next);
            integrand = next;
        }
        acc.add(0.5 * (integral + integral.transpose()));
    }
    MomentEstimate est = acc.finish(T);
    est.saturated = saturated;
    return est;
}

/// Second-moment curve t -> E|X(t)|^2 of the closed loop
/// dX = (A + BF + CK) X dt + K X dW, reported on the full step grid.
[[nodiscard]] inline std::vector<MomentEstimate> simulate_closed_loop(const BackwardSystem& sys,
                                                                      const Matrix& F,
                                                                      const Matrix& K,
                                                                      const Vector& x0,
                                                                      const SimConfig& cfg) {
    sys.validate();
    cfg.validate();
    if (F.rows() != sys.m() || F.cols() != sys.n() || K.rows() != sys.n() ||
        K.cols() != sys.n() || x0.size() != sys.n()) {
        throw DimensionError("simulate_closed_loop: gain or state dimensions");
    }
    const long steps = std::max<long>(1, std::lround(cfg.t_final / cfg.dt));
    const double dt = cfg.t_final / static_cast<double>(steps);
    const double sqdt = std::sqrt(dt);
    const Matrix Acl = sys.A + sys.B * F + sys.C * K;

    std::vector<detail::MomentAccumulator> acc(static_cast<std::size_t>(steps) + 1,
                                               detail::MomentAccumulator(1, 1));
    bool saturated = false;
    for (int p = 0; p < cfg.paths; ++p) {
        auto rng = detail::path_rng(cfg.seed, static_cast<std::uint64_t>(p));
        std::normal_distribution<double> gauss(0.0, 1.0);
        Vector X = x0;
        Matrix sq(1, 1);
        sq(0, 0) = X.squaredNorm();
        acc[0].add(sq);
        for (long k = 0; k < steps; ++k) {
            const double dW = sqdt * gauss(rng);
            X += Acl * X * dt + (K * X) * dW;
            if (!X.allFinite() || X.norm() > detail::kSaturationCap) {
                X = X.cwiseMax(-detail::kSaturationCap).cwiseMin(detail::kSaturationCap);
                saturated = true;
            }
            sq(0, 0) = X.squaredNorm();
            acc[static_cast<std::size_t>(k) + 1].add(sq);
        }
    }
    std::vector<MomentEstimate> curve;
    curve.reserve(acc.size());
    for (std::size_t k = 0; k < acc.size(); ++k) {
        MomentEstimate est = acc[k].finish(static_cast<double>(k) * dt);
        est.saturated = saturated;
        curve.push_back(std::move(est));
    }
    return curve;
}

}  // namespace bsctrl
