#pragma once

// Full analysis of one system: run the rank, Gramian, eigenmatrix and Riccati
// routes, collect witnesses and timings, and cross-check the verdicts against
// each other. Routes that must agree in exact arithmetic are compared, and a
// determinate mismatch is flagged rather than silently resolved.

#include "bsctrl/gramian.hpp"
#include "bsctrl/hautus.hpp"
#include "bsctrl/reachability.hpp"
#include "bsctrl/stabilize.hpp"

#include <chrono>
#include <limits>
#include <optional>
#include <string>

namespace bsctrl {

struct AnalyzeOptions {
    double horizon = 1.0;      // Gramian horizon T
    int steps = -1;            // Gramian substeps, default when negative
    double tol_rank = kDefaultRankTol;
    double tol_eig = kDefaultEigCutoffTol;
    double tol_feas = 1e-9;
    double gramian_pd_tol = 1e-9;
};

enum class CrossCheck { consistent, inconsistent, indeterminate };

[[nodiscard]] constexpr const char* to_string(CrossCheck c) noexcept {
    switch (c) {
        case CrossCheck::consistent: return "consistent";
        case CrossCheck::inconsistent: return "inconsistent";
        case CrossCheck::indeterminate: return "indeterminate";
    }
    return "indeterminate";
}

struct StageTimings {
    double reachability_ms = 0.0;
    double gramian_ms = 0.0;
    double hautus_controllability_ms = 0.0;
    double hautus_stabilizability_ms = 0.0;
    double riccati_ms = 0.0;
    double total_ms = 0.0;
};

struct AnalysisReport {
    std::string label;
    int n = 0;
    int m = 0;
    AnalyzeOptions options;

    // verdicts
    bool kalman = false;
    bool gramian_pd = false;
    bool gramian_route_ok = true;  // false when the Gramian saturated or the routes split
    Tristate hautus_controllable = Tristate::indeterminate;
    Tristate hautus_stabilizable = Tristate::indeterminate;
    Tristate riccati_stabilizable = Tristate::indeterminate;
    int decomposition_k = 0;

    // supporting detail
    SubspaceChain chain;
    GramianResult gram;
    HautusVerdict hautus_ctrl;
    HautusVerdict hautus_stab;
    StabilizerResult stabilizer;

    CrossCheck cross_check = CrossCheck::indeterminate;
    StageTimings timings;
};

namespace detail {

class StageClock {
public:
    StageClock() : start_(std::chrono::steady_clock::now()) {}

    double lap_ms() {
        const auto now = std::chrono::steady_clock::now();
        const double ms = std::chrono::duration<double, std::milli>(now - start_).count();
        start_ = now;
        return ms;
    }

private:
    std::chrono::steady_clock::time_point start_;
};

}  // namespace detail

/// Conflicts between routes that both produced an answer are inconsistent;
/// routes that could not answer (indeterminate, saturated Gramian) make the
/// whole check indeterminate instead.
[[nodiscard]] inline CrossCheck cross_check_verdicts(const AnalysisReport& r) {
    bool conflict = false;
    if (r.gramian_route_ok && r.kalman != r.gramian_pd) conflict = true;
    if (is_determinate(r.hautus_controllable) &&
        r.hautus_controllable != to_tristate(r.kalman)) {
        conflict = true;
    }
    if (is_determinate(r.hautus_stabilizable) && is_determinate(r.riccati_stabilizable) &&
        r.hautus_stabilizable != r.riccati_stabilizable) {
        conflict = true;
    }
    if (conflict) return CrossCheck::inconsistent;
    if (!r.gramian_route_ok || !is_determinate(r.hautus_controllable) ||
        !is_determinate(r.hautus_stabilizable) || !is_determinate(r.riccati_stabilizable)) {
        return CrossCheck::indeterminate;
    }
    return CrossCheck::consistent;
}

[[nodiscard]] inline AnalysisReport run_analysis(const BackwardSystem& sys,
                                                 const AnalyzeOptions& opt = {},
                                                 const std::string& label = "") {
    sys.validate();
    AnalysisReport r;
    r.label = label;
    r.n = sys.n();
    r.m = sys.m();
    r.options = opt;

    HautusOptions hopt;
    hopt.tol_eig = opt.tol_eig;
    hopt.tol_feas = opt.tol_feas;

    detail::StageClock total;
    detail::StageClock clock;

    r.chain = word_subspaces(sys, opt.tol_rank);
    r.kalman = r.chain.final_dim() == sys.n();
    r.decomposition_k = r.chain.final_dim();
    r.timings.reachability_ms = clock.lap_ms();

    try {
        r.gram = gramian(sys, opt.horizon, opt.steps);
        r.gramian_pd = is_gramian_pd(r.gram, opt.gramian_pd_tol);
        r.gramian_route_ok = gramian_routes_agree(r.gram);
    } catch (const NumericalError&) {
        // explosive coefficients can overflow the horizon integral; the other
        // routes still run and this one is reported unavailable
        r.gram.T = opt.horizon;
        r.gram.steps = opt.steps < 1 ? default_gramian_steps(opt.horizon) : opt.steps;
        r.gram.G = SymMatrix::zero(sys.n());
        r.gram.G_expm = SymMatrix::zero(sys.n());
        r.gram.min_eig = 0.0;
        r.gram.cross_rel_diff = std::numeric_limits<double>::quiet_NaN();
        r.gramian_pd = false;
        r.gramian_route_ok = false;
    }
    r.timings.gramian_ms = clock.lap_ms();

    r.hautus_ctrl = hautus_controllability(sys, hopt);
    r.hautus_controllable = r.hautus_ctrl.verdict();
    r.timings.hautus_controllability_ms = clock.lap_ms();

    r.hautus_stab = hautus_stabilizability(sys, hopt);
    r.hautus_stabilizable = r.hautus_stab.verdict();
    r.timings.hautus_stabilizability_ms = clock.lap_ms();

    r.stabilizer = stabilize_backward(sys, {}, hopt);
    switch (r.stabilizer.status) {
        case StabilizerStatus::stabilizable: r.riccati_stabilizable = Tristate::yes; break;
        case StabilizerStatus::not_stabilizable: r.riccati_stabilizable = Tristate::no; break;
        case StabilizerStatus::indeterminate:
            r.riccati_stabilizable = Tristate::indeterminate;
            break;
    }
    r.timings.riccati_ms = clock.lap_ms();

    r.cross_check = cross_check_verdicts(r);
    r.timings.total_ms = total.lap_ms();
    return r;
}

}  // namespace bsctrl
