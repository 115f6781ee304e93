// Command-line front end: run / validate / list-presets.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "hsc/errors.hpp"
#include "hsc/export.hpp"
#include "hsc/log.hpp"
#include "hsc/scenario.hpp"
#include "hsc/simulator.hpp"

namespace fs = std::filesystem;
using namespace hsc;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitBreach = 2;

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

void print_report(const ValidationReport& rep, std::ostream& out) {
    for (const auto& c : rep.checks) {
        out << (c.passed ? "  ok    " : "  FAIL  ") << c.name << ": " << c.message << '\n';
    }
}

std::string summary_text(const ScenarioFile& sc, const ControllerConfig& cfg, const SimResult& res) {
    const SimSummary& s = res.summary;
    std::ostringstream os;
    os << "scenario=" << sc.name << '\n'
       << "mode=" << to_string(cfg.mode) << '\n'
       << "status=" << to_string(res.status) << '\n'
       << "status_time=" << fmt(res.status_time) << '\n';
    if (!res.breach_kind.empty()) os << "breach_kind=" << res.breach_kind << '\n';
    if (res.status == SimStatus::funnel_breach) os << "breach_layer=" << res.breach_layer << '\n';
    if (!res.message.empty()) os << "message=" << res.message << '\n';
    os << "dt=" << fmt(sc.sim.dt) << '\n'
       << "t_final=" << fmt(sc.sim.t_final) << '\n'
       << "steps=" << s.steps << '\n'
       << "rho0=" << fmt(cfg.nominal.rho0) << '\n'
       << "min_alpha_h=" << fmt(s.min_alpha_h) << '\n'
       << "t_min_alpha_h=" << fmt(s.t_min_alpha_h) << '\n'
       << "max_rho_r=" << fmt(s.max_rho_r) << '\n'
       << "first_soft_entry=" << fmt(s.first_soft_entry) << '\n'
       << "soft_satisfied_from=" << fmt(s.soft_satisfied_from) << '\n'
       << "soft_violation_intervals=" << s.soft_violations.size() << '\n';
    for (const auto& iv : s.soft_violations) os << "soft_violation=" << fmt(iv.start) << ".." << fmt(iv.end) << '\n';
    os << "deadlock_suspected=" << (s.deadlock_suspected ? "true" : "false") << '\n';
    if (s.deadlock_suspected) os << "deadlock_since=" << fmt(s.deadlock_since) << '\n';
    os << "monitor_failures=" << s.monitor_failures << '\n';
    return os.str();
}

int cmd_run(const std::string& scenario, std::optional<double> dt, std::optional<double> t_final,
            const std::string& mode, const std::string& out_dir, bool no_plots) {
    ScenarioFile sc = load_scenario(scenario);
    if (dt) {
        sc.sim.dt = *dt;
        sc.sim.validate();
    }
    if (t_final) {
        sc.sim.t_final = *t_final;
        sc.sim.validate();
    }
    if (!mode.empty()) apply_mode(sc, mode == "global" ? ControlMode::global : ControlMode::semiglobal);

    ValidationReport rep;
    try {
        rep = prepare_controller(sc);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what()
                  << "\n  requirement: the hard constraints must hold at t = 0 (alpha_h(0, x1(0)) > 0)\n";
        return kExitConfig;
    }
    if (!rep.ok) {
        std::cerr << "error: initial-condition check '" << rep.first_failure() << "' failed\n";
        print_report(rep, std::cerr);
        return kExitConfig;
    }
    const ControllerConfig& cfg = *rep.tuned;
    const Controller ctrl(cfg);

    log_message(LogLevel::info, "running " + sc.name + " (" + to_string(cfg.mode) + ")");
    const SimResult res = simulate(sc.plant, ctrl, sc.sim, sc.state0);

    fs::create_directories(out_dir);
    export_csv(res, sc.plant.n, sc.plant.r, (fs::path(out_dir) / "trajectory.csv").string());
    {
        std::ofstream out(fs::path(out_dir) / "summary.txt", std::ios::binary);
        if (!out) throw Error("cannot write summary.txt in " + out_dir);
        out << summary_text(sc, cfg, res);
    }
    if (!no_plots) export_svg(res, cfg, sc.view, out_dir);

    std::cout << sc.name << ": " << to_string(res.status) << " at t = " << fmt(res.status_time)
              << ", min alpha_h = " << fmt(res.summary.min_alpha_h)
              << ", deadlock_suspected=" << (res.summary.deadlock_suspected ? "true" : "false") << '\n';
    if (res.status != SimStatus::completed) {
        std::cerr << "halted: " << res.message << '\n';
        return kExitBreach;
    }
    return kExitOk;
}

int cmd_validate(const std::string& scenario) {
    const ScenarioFile sc = load_scenario(scenario);
    const ControllerConfig& cfg0 = sc.config();
    std::cout << "scenario " << sc.name << " (" << sc.path << ")\n";

    ValidationReport rep;
    try {
        rep = prepare_controller(sc);
    } catch (const ConfigError& e) {
        std::cout << "  FAIL  initial_hard_safety: " << e.what()
                  << "\n        requirement: the hard constraints must hold at t = 0\n";
        return kExitConfig;
    }
    print_report(rep, std::cout);
    if (rep.tuned) {
        std::cout << "  tuned rho0 = " << fmt(rep.tuned->nominal.rho0);
        if (!rep.tuned->funnels.empty()) {
            std::cout << ", first-layer theta0 =";
            for (const auto& f : rep.tuned->funnels.front()) std::cout << ' ' << fmt(f.theta0);
        }
        std::cout << '\n';
    }

    std::cout << "diagnostics at t = 0 (sampling only, not proofs):\n";
    const int grid = sc.plant.n <= 2 ? 81 : 9;
    const AlphaStar hs = estimate_alpha_star(cfg0.hard, 0.0, sc.view, grid);
    std::cout << "  hard set nonempty: alpha_h* >= " << fmt(hs.value) << (hs.value > 0 ? "  ok" : "  FAIL") << '\n';
    const AlphaStar ss = estimate_alpha_star(cfg0.soft, 0.0, sc.view, grid);
    std::cout << "  soft set nonempty: alpha_s* >= " << fmt(ss.value) << (ss.value > 0 ? "  ok" : "  FAIL") << '\n';
    const bool coercive = coercivity_spot_check(cfg0.hard, 0.0, hs.argmax);
    std::cout << "  hard coercivity spot check (16 rays at |x| = 1e3): " << (coercive ? "ok" : "FAIL") << '\n';
    const auto crit = find_negative_critical_points(cfg0.soft, 0.0, sc.view, grid);
    std::cout << "  soft critical points with alpha_s < 0 found: " << crit.size()
              << (crit.empty() ? "  (none on the grid)" : "  (invexity doubtful)") << '\n';
    for (const auto& p : crit) std::cout << "    at " << p.transpose() << '\n';
    return rep.ok ? kExitOk : kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hard/soft constrained closed-form control simulator"};
    app.require_subcommand(1);

    std::string scenario;
    std::optional<double> dt;
    std::optional<double> t_final;
    std::string mode;
    std::string out_dir = "out";
    bool no_plots = false;

    CLI::App* run = app.add_subcommand("run", "simulate a scenario and write CSV, summary and plots");
    run->add_option("--scenario", scenario, "scenario file or preset name")->required();
    run->add_option("--dt", dt, "integration step [s]");
    run->add_option("--t-final", t_final, "horizon [s]");
    run->add_option("--mode", mode, "controller mode")->check(CLI::IsMember({"semiglobal", "global"}));
    run->add_option("--out", out_dir, "output directory");
    run->add_flag("--no-plots", no_plots, "skip SVG output");

    CLI::App* val = app.add_subcommand("validate", "check initial conditions and constraint diagnostics");
    val->add_option("--scenario", scenario, "scenario file or preset name")->required();

    app.add_subcommand("list-presets", "list shipped scenarios");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (app.got_subcommand("run")) return cmd_run(scenario, dt, t_final, mode, out_dir, no_plots);
        if (app.got_subcommand("validate")) return cmd_validate(scenario);
        for (const auto& name : list_presets()) std::cout << name << '\n';
        return kExitOk;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }
}
