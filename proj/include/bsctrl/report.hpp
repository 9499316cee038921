#pragma once

// Report construction for the command-line front end. Every command has a
// json form (schema in docs/report_schema.json) and a text form. Witness
// matrices are emitted in full so reports can be checked independently.

#include "bsctrl/analyze.hpp"
#include "bsctrl/json_out.hpp"
#include "bsctrl/mcsim.hpp"

#include <sstream>
#include <string>

namespace bsctrl {

namespace detail {

inline JsonValue hautus_witness_json(const std::optional<HautusWitness>& w) {
    if (!w) return JsonValue(nullptr);
    JsonValue j = JsonValue::object();
    j.set("lambda", w->lambda);
    j.set("H", JsonValue::from_matrix(w->H.mat()));
    j.set("eig_residual", w->eig_residual);
    j.set("b_residual", w->b_residual);
    j.set("min_eig", w->min_eig);
    return j;
}

inline JsonValue hautus_body_json(const HautusVerdict& v) {
    JsonValue j = JsonValue::object();
    j.set("mode", to_string(v.mode));
    j.set("obstructed", to_string(v.obstructed));
    j.set("verdict", to_string(v.verdict()));
    JsonValue checked = JsonValue::array();
    for (double l : v.clusters_checked) checked.push(l);
    j.set("clusters_checked", std::move(checked));
    j.set("witness", hautus_witness_json(v.witness));
    return j;
}

inline JsonValue stabilizer_body_json(const StabilizerResult& s) {
    JsonValue j = JsonValue::object();
    j.set("status", to_string(s.status));
    j.set("F", JsonValue::from_matrix(s.F));
    j.set("K", JsonValue::from_matrix(s.K));
    j.set("P", s.P ? JsonValue::from_matrix(s.P->mat()) : JsonValue(nullptr));
    j.set("closed_loop_abscissa", s.closed_loop_abscissa);
    j.set("riccati_residual", s.residual);
    j.set("closed_loop_stable", to_string(s.closed_loop_stable));
    j.set("hautus_agrees", to_string(s.hautus_agrees));
    return j;
}

inline JsonValue gramian_body_json(const GramianResult& g, bool pd, bool routes_agree) {
    JsonValue j = JsonValue::object();
    j.set("T", g.T);
    j.set("steps", g.steps);
    j.set("method", to_string(g.method));
    j.set("G", JsonValue::from_matrix(g.G.mat()));
    j.set("min_eig", g.min_eig);
    j.set("cross_rel_diff", g.cross_rel_diff);
    j.set("routes_agree", routes_agree);
    j.set("positive_definite", pd);
    return j;
}

inline JsonValue report_head(const char* command, const std::string& label, int n, int m) {
    JsonValue j = JsonValue::object();
    j.set("command", command);
    j.set("label", label);
    j.set("n", n);
    j.set("m", m);
    return j;
}

}  // namespace detail

[[nodiscard]] inline JsonValue report_analysis(const AnalysisReport& r) {
    JsonValue j = detail::report_head("analyze", r.label, r.n, r.m);

    JsonValue tol = JsonValue::object();
    tol.set("horizon", r.options.horizon);
    tol.set("tol_rank", r.options.tol_rank);
    tol.set("tol_eig", r.options.tol_eig);
    tol.set("tol_feas", r.options.tol_feas);
    tol.set("gramian_pd_tol", r.options.gramian_pd_tol);
    j.set("tolerances", std::move(tol));

    JsonValue v = JsonValue::object();
    v.set("kalman", r.kalman);
    v.set("gramian_pd", r.gramian_pd);
    v.set("hautus_controllable", to_string(r.hautus_controllable));
    v.set("hautus_stabilizable", to_string(r.hautus_stabilizable));
    v.set("riccati_stabilizable", to_string(r.riccati_stabilizable));
    v.set("decomposition_k", r.decomposition_k);
    j.set("verdicts", std::move(v));

    JsonValue dims = JsonValue::array();
    for (int d : r.chain.dims) dims.push(d);
    JsonValue chain = JsonValue::object();
    chain.set("dims", std::move(dims));
    chain.set("stabilized_at", r.chain.stabilized_at);
    j.set("subspace_chain", std::move(chain));

    JsonValue w = JsonValue::object();
    w.set("hautus_controllability", detail::hautus_witness_json(r.hautus_ctrl.witness));
    w.set("hautus_stabilizability", detail::hautus_witness_json(r.hautus_stab.witness));
    w.set("stabilizer", detail::stabilizer_body_json(r.stabilizer));
    j.set("witnesses", std::move(w));

    j.set("gramian", detail::gramian_body_json(r.gram, r.gramian_pd, r.gramian_route_ok));
    j.set("cross_check", to_string(r.cross_check));

    JsonValue t = JsonValue::object();
    t.set("reachability_ms", r.timings.reachability_ms);
    t.set("gramian_ms", r.timings.gramian_ms);
    t.set("hautus_controllability_ms", r.timings.hautus_controllability_ms);
    t.set("hautus_stabilizability_ms", r.timings.hautus_stabilizability_ms);
    t.set("riccati_ms", r.timings.riccati_ms);
    t.set("total_ms", r.timings.total_ms);
    j.set("timings", std::move(t));
    return j;
}

[[nodiscard]] inline JsonValue report_gramian(const std::string& label, int n, int m,
                                              const GramianResult& g, bool pd) {
    JsonValue j = detail::report_head("gramian", label, n, m);
    j.set("gramian", detail::gramian_body_json(g, pd, gramian_routes_agree(g)));
    return j;
}

[[nodiscard]] inline JsonValue report_decompose(const std::string& label, int n, int m,
                                                const Decomposition& d) {
    JsonValue j = detail::report_head("decompose", label, n, m);
    j.set("kind", to_string(d.kind));
    j.set("k", d.k);
    j.set("P", JsonValue::from_matrix(d.P));
    JsonValue blocks = JsonValue::object();
    blocks.set("A11", JsonValue::from_matrix(d.A11));
    blocks.set("A12", JsonValue::from_matrix(d.A12));
    blocks.set("A22", JsonValue::from_matrix(d.A22));
    blocks.set("C11", JsonValue::from_matrix(d.C11));
    blocks.set("C12", JsonValue::from_matrix(d.C12));
    blocks.set("C22", JsonValue::from_matrix(d.C22));
    blocks.set("B1", JsonValue::from_matrix(d.B1));
    j.set("blocks", std::move(blocks));
    return j;
}

[[nodiscard]] inline JsonValue report_hautus(const std::string& label, int n, int m,
                                             const HautusVerdict& v) {
    JsonValue j = detail::report_head("hautus", label, n, m);
    j.set("hautus", detail::hautus_body_json(v));
    return j;
}

[[nodiscard]] inline JsonValue report_stabilize(const std::string& label, int n, int m,
                                                const StabilizerResult& s) {
    JsonValue j = detail::report_head("stabilize", label, n, m);
    j.set("stabilizer", detail::stabilizer_body_json(s));
    return j;
}

/// Monte Carlo Gramian validation: estimate vs deterministic value with the
/// largest entrywise z-score.
[[nodiscard]] inline JsonValue report_simulate(const std::string& label, int n, int m,
                                               const SimConfig& cfg, double T,
                                               const MomentEstimate& mc, const GramianResult& det,
                                               double max_z) {
    JsonValue j = detail::report_head("simulate", label, n, m);
    JsonValue c = JsonValue::object();
    c.set("dt", cfg.dt);
    c.set("t_final", T);
    c.set("paths", cfg.paths);
    c.set("seed", static_cast<long long>(cfg.seed));
    j.set("config", std::move(c));
    JsonValue e = JsonValue::object();
    e.set("value", JsonValue::from_matrix(mc.value));
    e.set("std_error", JsonValue::from_matrix(mc.std_error));
    e.set("saturated", mc.saturated);
    j.set("gramian_estimate", std::move(e));
    j.set("gramian_deterministic", JsonValue::from_matrix(det.G.mat()));
    j.set("max_z_score", max_z);
    return j;
}

// ---------------------------------------------------------------------------
// text rendering

namespace detail {

inline void matrix_text(std::ostringstream& os, const std::string& name, const Matrix& m,
                        const std::string& pad = "  ") {
    os << pad << name << " =";
    if (m.size() == 0) {
        os << " (empty)\n";
        return;
    }
    os << "\n";
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        os << pad << "  [";
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            os << (j ? ", " : " ") << m(i, j);
        }
        os << " ]\n";
    }
}

}  // namespace detail

[[nodiscard]] inline std::string text_analysis(const AnalysisReport& r) {
    std::ostringstream os;
    os << "analysis of '" << (r.label.empty() ? "<unlabeled>" : r.label) << "' (n=" << r.n
       << ", m=" << r.m << ")\n";
    os << "  kalman rank test:        " << (r.kalman ? "controllable" : "not controllable")
       << "  (dims";
    for (int d : r.chain.dims) os << " " << d;
    os << ", stabilized at k=" << r.chain.stabilized_at << ")\n";
    os << "  gramian (T=" << r.options.horizon << "):        ";
    if (r.gramian_route_ok) {
        os << (r.gramian_pd ? "positive definite" : "singular") << "  (min eig "
           << r.gram.min_eig << ", method agreement " << r.gram.cross_rel_diff << ")\n";
    } else {
        os << "unavailable (saturated or the two routes disagree)\n";
    }
    os << "  eigenmatrix test:        " << to_string(r.hautus_controllable)
       << " (controllable)\n";
    os << "  eigenmatrix test:        " << to_string(r.hautus_stabilizable)
       << " (stabilizable)\n";
    os << "  riccati synthesis:       " << to_string(r.stabilizer.status) << "\n";
    if (r.stabilizer.status == StabilizerStatus::stabilizable) {
        detail::matrix_text(os, "F", r.stabilizer.F, "    ");
        detail::matrix_text(os, "K", r.stabilizer.K, "    ");
        os << "    closed-loop abscissa " << r.stabilizer.closed_loop_abscissa << "\n";
    }
    os << "  controllable block size: " << r.decomposition_k << "\n";
    os << "  cross-check:             " << to_string(r.cross_check) << "\n";
    return os.str();
}

[[nodiscard]] inline std::string text_gramian(const GramianResult& g, bool pd) {
    std::ostringstream os;
    os << "gramian over [0, " << g.T << "] (" << g.steps << " rk4 steps)\n";
    detail::matrix_text(os, "G", g.G.mat());
    os << "  min eigenvalue " << g.min_eig << "\n";
    os << "  method agreement (relative) " << g.cross_rel_diff << "\n";
    os << "  positive definite: " << (pd ? "yes" : "no") << "\n";
    return os.str();
}

[[nodiscard]] inline std::string text_decompose(const Decomposition& d) {
    std::ostringstream os;
    os << "controllability decomposition: " << to_string(d.kind) << ", k=" << d.k << "\n";
    if (d.kind == DecompositionKind::split) {
        detail::matrix_text(os, "P", d.P);
        detail::matrix_text(os, "A11", d.A11);
        detail::matrix_text(os, "A12", d.A12);
        detail::matrix_text(os, "A22", d.A22);
        detail::matrix_text(os, "C11", d.C11);
        detail::matrix_text(os, "C12", d.C12);
        detail::matrix_text(os, "C22", d.C22);
        detail::matrix_text(os, "B1", d.B1);
    }
    return os.str();
}

[[nodiscard]] inline std::string text_hautus(const HautusVerdict& v) {
    std::ostringstream os;
    os << "eigenmatrix test, mode " << to_string(v.mode) << "\n";
    os << "  clusters checked:";
    for (double l : v.clusters_checked) os << " " << l;
    os << "\n  obstructed: " << to_string(v.obstructed) << "\n";
    os << "  " << to_string(v.mode) << " verdict: " << to_string(v.verdict()) << "\n";
    if (v.witness) {
        os << "  witness eigenvalue " << v.witness->lambda << " (|L(H)-lH| = "
           << v.witness->eig_residual << ", |B^T H| = " << v.witness->b_residual << ")\n";
        detail::matrix_text(os, "H", v.witness->H.mat());
    }
    return os.str();
}

[[nodiscard]] inline std::string text_stabilize(const StabilizerResult& s) {
    std::ostringstream os;
    os << "riccati stabilizer synthesis: " << to_string(s.status) << "\n";
    if (s.status == StabilizerStatus::stabilizable) {
        detail::matrix_text(os, "F", s.F);
        detail::matrix_text(os, "K", s.K);
        if (s.P) detail::matrix_text(os, "P", s.P->mat());
        os << "  closed-loop abscissa " << s.closed_loop_abscissa << "\n";
        os << "  closed-loop stable: " << to_string(s.closed_loop_stable) << "\n";
    }
    os << "  eigenmatrix test agrees: " << to_string(s.hautus_agrees) << "\n";
    return os.str();
}

[[nodiscard]] inline std::string text_simulate(const SimConfig& cfg, double T,
                                               const MomentEstimate& mc, const GramianResult& det,
                                               double max_z) {
    std::ostringstream os;
    os << "monte carlo gramian over [0, " << T << "]: " << cfg.paths << " paths, dt=" << cfg.dt
       << ", seed=" << cfg.seed << "\n";
    detail::matrix_text(os, "estimate", mc.value);
    detail::matrix_text(os, "std_error", mc.std_error);
    detail::matrix_text(os, "deterministic", det.G.mat());
    os << "  max |z| " << max_z << (mc.saturated ? "  (saturated paths present)" : "") << "\n";
    return os.str();
}

}  // namespace bsctrl
