// Command-line front end: load a system file, run one of the analyses, and
// print a text or json report.
//
// Exit codes: 0 success / consistent verdicts, 1 input error,
//             2 cross-check detected inconsistent verdicts, 3 indeterminate.

#include "bsctrl/analyze.hpp"
#include "bsctrl/io.hpp"
#include "bsctrl/mcsim.hpp"
#include "bsctrl/report.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitInconsistent = 2;
constexpr int kExitIndeterminate = 3;

struct CommonArgs {
    std::string path;
    std::string format = "text";
    double tol_rank = bsctrl::kDefaultRankTol;
    double tol_eig = bsctrl::kDefaultEigCutoffTol;
    double tol_feas = 1e-9;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("path", args.path, "system json file")->required();
    cmd->add_option("--format", args.format, "output format")
        ->check(CLI::IsMember({"text", "json"}))
        ->capture_default_str();
    cmd->add_option("--tol-rank", args.tol_rank, "relative rank tolerance")
        ->capture_default_str();
    cmd->add_option("--tol-eig", args.tol_eig, "spectral cutoff tolerance")
        ->capture_default_str();
    cmd->add_option("--tol-feas", args.tol_feas, "cone feasibility tolerance")
        ->capture_default_str();
}

bsctrl::HautusOptions hautus_options(const CommonArgs& args) {
    bsctrl::HautusOptions opt;
    opt.tol_eig = args.tol_eig;
    opt.tol_feas = args.tol_feas;
    return opt;
}

int exit_code_for(bsctrl::Tristate t) {
    return bsctrl::is_determinate(t) ? kExitOk : kExitIndeterminate;
}

void emit(const std::string& format, const bsctrl::JsonValue& json, const std::string& text) {
    std::cout << (format == "json" ? json.dump() : text);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"controllability and stabilizability analysis of backward-structured "
                 "stochastic linear systems dX = [AX + Bu + Cz]dt + z dW"};
    app.require_subcommand(1);

    CommonArgs analyze_args, gramian_args, decompose_args, hautus_args, stabilize_args,
        simulate_args;
    double horizon = 1.0;
    int steps = -1;
    std::string mode = "controllability";
    double sim_dt = 1e-3;
    double sim_t_final = 1.0;
    int sim_paths = 10000;
    std::uint64_t sim_seed = 0;

    CLI::App* c_analyze = app.add_subcommand("analyze", "run all tests and cross-check them");
    add_common(c_analyze, analyze_args);
    c_analyze->add_option("--horizon", horizon, "gramian horizon")->capture_default_str();
    c_analyze->add_option("--steps", steps, "gramian rk4 substeps (default scale with T)");

    CLI::App* c_gramian = app.add_subcommand("gramian", "controllability gramian over [0, T]");
    add_common(c_gramian, gramian_args);
    c_gramian->add_option("--horizon", horizon, "gramian horizon")->capture_default_str();
    c_gramian->add_option("--steps", steps, "gramian rk4 substeps (default scale with T)");

    CLI::App* c_decompose = app.add_subcommand("decompose", "controllability decomposition");
    add_common(c_decompose, decompose_args);

    CLI::App* c_hautus = app.add_subcommand("hautus", "eigenmatrix obstruction test");
    add_common(c_hautus, hautus_args);
    c_hautus->add_option("--mode", mode, "which test to run")
        ->check(CLI::IsMember({"controllability", "stabilizability"}))
        ->capture_default_str();

    CLI::App* c_stabilize = app.add_subcommand("stabilize", "riccati stabilizer synthesis");
    add_common(c_stabilize, stabilize_args);

    CLI::App* c_simulate =
        app.add_subcommand("simulate", "monte carlo validation of the gramian");
    add_common(c_simulate, simulate_args);
    c_simulate->add_option("--dt", sim_dt, "euler-maruyama step")->capture_default_str();
    c_simulate->add_option("--t-final", sim_t_final, "horizon")->capture_default_str();
    c_simulate->add_option("--paths", sim_paths, "number of paths")->capture_default_str();
    c_simulate->add_option("--seed", sim_seed, "rng seed")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        // usage problems count as input errors; --help and --version exit 0
        return code == 0 ? kExitOk : kExitInput;
    }

    try {
        if (c_analyze->parsed()) {
            const bsctrl::SystemFile file = bsctrl::load_system_file(analyze_args.path);
            bsctrl::AnalyzeOptions opt;
            opt.horizon = horizon;
            opt.steps = steps;
            opt.tol_rank = analyze_args.tol_rank;
            opt.tol_eig = analyze_args.tol_eig;
            opt.tol_feas = analyze_args.tol_feas;
            const bsctrl::AnalysisReport report =
                bsctrl::run_analysis(file.system, opt, file.label);
            emit(analyze_args.format, bsctrl::report_analysis(report),
                 bsctrl::text_analysis(report));
            switch (report.cross_check) {
                case bsctrl::CrossCheck::consistent: return kExitOk;
                case bsctrl::CrossCheck::inconsistent: return kExitInconsistent;
                case bsctrl::CrossCheck::indeterminate: return kExitIndeterminate;
            }
            return kExitOk;
        }
        if (c_gramian->parsed()) {
            const bsctrl::SystemFile file = bsctrl::load_system_file(gramian_args.path);
            const bsctrl::GramianResult g = bsctrl::gramian(file.system, horizon, steps);
            const bool pd = bsctrl::is_gramian_pd(g);
            emit(gramian_args.format,
                 bsctrl::report_gramian(file.label, file.system.n(), file.system.m(), g, pd),
                 bsctrl::text_gramian(g, pd));
            return kExitOk;
        }
        if (c_decompose->parsed()) {
            const bsctrl::SystemFile file = bsctrl::load_system_file(decompose_args.path);
            const bsctrl::Decomposition d =
                bsctrl::controllability_decomposition(file.system, decompose_args.tol_rank);
            emit(decompose_args.format,
                 bsctrl::report_decompose(file.label, file.system.n(), file.system.m(), d),
                 bsctrl::text_decompose(d));
            return kExitOk;
        }
        if (c_hautus->parsed()) {
            const bsctrl::SystemFile file = bsctrl::load_system_file(hautus_args.path);
            const bsctrl::HautusVerdict v =
                mode == "stabilizability"
                    ? bsctrl::hautus_stabilizability(file.system, hautus_options(hautus_args))
                    : bsctrl::hautus_controllability(file.system, hautus_options(hautus_args));
            emit(hautus_args.format,
                 bsctrl::report_hautus(file.label, file.system.n(), file.system.m(), v),
                 bsctrl::text_hautus(v));
            return exit_code_for(v.verdict());
        }
        if (c_stabilize->parsed()) {
            const bsctrl::SystemFile file = bsctrl::load_system_file(stabilize_args.path);
            const bsctrl::StabilizerResult s =
                bsctrl::stabilize_backward(file.system, {}, hautus_options(stabilize_args));
            emit(stabilize_args.format,
                 bsctrl::report_stabilize(file.label, file.system.n(), file.system.m(), s),
                 bsctrl::text_stabilize(s));
            if (s.hautus_agrees == bsctrl::Tristate::no) return kExitInconsistent;
            if (s.status == bsctrl::StabilizerStatus::indeterminate) return kExitIndeterminate;
            return kExitOk;
        }
        if (c_simulate->parsed()) {
            const bsctrl::SystemFile file = bsctrl::load_system_file(simulate_args.path);
            bsctrl::SimConfig cfg;
            cfg.dt = sim_dt;
            cfg.t_final = sim_t_final;
            cfg.paths = sim_paths;
            cfg.seed = sim_seed;
            const bsctrl::MomentEstimate mc =
                bsctrl::simulate_phi_gramian(file.system, sim_t_final, cfg);
            const bsctrl::GramianResult det = bsctrl::gramian(file.system, sim_t_final);
            double max_z = 0.0;
            for (Eigen::Index i = 0; i < mc.value.rows(); ++i) {
                for (Eigen::Index j = 0; j < mc.value.cols(); ++j) {
                    const double se = mc.std_error(i, j);
                    const double dev = std::abs(mc.value(i, j) - det.G(static_cast<int>(i),
                                                                       static_cast<int>(j)));
                    if (se > 0.0) {
                        max_z = std::max(max_z, dev / se);
                    } else if (dev > 0.0) {
                        max_z = std::max(max_z, std::numeric_limits<double>::infinity());
                    }
                }
            }
            emit(simulate_args.format,
                 bsctrl::report_simulate(file.label, file.system.n(), file.system.m(), cfg,
                                         sim_t_final, mc, det, max_z),
                 bsctrl::text_simulate(cfg, sim_t_final, mc, det, max_z));
            return kExitOk;
        }
    } catch (const bsctrl::InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const bsctrl::DimensionError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitOk;
}
