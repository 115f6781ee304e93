#include "hsc/simulator.hpp"

#include <cmath>
#include <limits>

#include "hsc/errors.hpp"
#include "hsc/log.hpp"

namespace hsc {

void SimConfig::validate() const {
    if (!(dt > 0.0 && dt <= 0.01)) throw ConfigError("dt must lie in (0, 0.01]");
    if (!(t_final >= 0.0) || !std::isfinite(t_final)) throw ConfigError("t_final must be finite and >= 0");
    if (log_stride < 1) throw ConfigError("log_stride must be >= 1");
}

const char* to_string(SimStatus s) {
    switch (s) {
        case SimStatus::completed:
            return "completed";
        case SimStatus::barrier_breach:
            return "barrier_breach";
        case SimStatus::funnel_breach:
            return "funnel_breach";
        case SimStatus::numerical_error:
            return "numerical_error";
    }
    return "unknown";
}

MonitorFlags run_monitors(const SimRecord& rec, const ControllerConfig& cfg) {
    const ControlDiagnostics& d = rec.diag;
    MonitorFlags f;
    f.finite = rec.x.allFinite() && rec.u.allFinite() && std::isfinite(d.alpha_h) && std::isfinite(d.alpha_s) &&
               std::isfinite(d.e_s) && std::isfinite(d.rho_r);
    f.hard_invariance = d.alpha_h > 0.0;
    if (cfg.mode == ControlMode::global && rec.t >= cfg.shifting.Ts) {
        f.soft_invariance = d.alpha_s - d.rho_s > 0.0;
    } else {
        f.soft_invariance = d.e_s > 0.0;
    }
    for (const auto& layer : d.layers) {
        if ((layer.ehat.array().abs() >= 1.0).any()) f.funnels = false;
    }
    f.relaxation_sign = d.rho_r >= -1e-9;
    return f;
}

namespace {

struct Derivative {
    Eigen::VectorXd state;
    double rho_r = 0.0;
};

class SummaryTracker {
public:
    void observe(double t, const ControlDiagnostics& d) {
        if (s_.steps == 0 || d.alpha_h < s_.min_alpha_h) {
            s_.min_alpha_h = d.alpha_h;
            s_.t_min_alpha_h = t;
        }
        s_.max_rho_r = std::max(s_.max_rho_r, d.rho_r);
        const bool satisfied = d.alpha_s >= 0.0;
        if (satisfied) {
            if (std::isnan(first_entry_)) first_entry_ = t;
            if (!in_run_) run_start_ = t;
            in_run_ = true;
            if (in_violation_) s_.soft_violations.back().end = t;
            in_violation_ = false;
        } else {
            in_run_ = false;
            if (!in_violation_) s_.soft_violations.push_back({t, t});
            in_violation_ = true;
        }
        if (in_violation_) s_.soft_violations.back().end = t;

        const bool stalled = !satisfied && d.s1.norm() < 1e-6;
        if (stalled) {
            if (!stalled_before_) stall_start_ = t;
            if (t - stall_start_ > 1.0 && !s_.deadlock_suspected) {
                s_.deadlock_suspected = true;
                s_.deadlock_since = stall_start_;
            }
        }
        stalled_before_ = stalled;
        ++s_.steps;
    }

    SimSummary finish(int monitor_failures) {
        s_.first_soft_entry = first_entry_;
        s_.soft_satisfied_from = in_run_ ? run_start_ : std::numeric_limits<double>::quiet_NaN();
        s_.monitor_failures = monitor_failures;
        return s_;
    }

private:
    SimSummary s_;
    double first_entry_ = std::numeric_limits<double>::quiet_NaN();
    bool in_run_ = false;
    double run_start_ = 0.0;
    bool in_violation_ = false;
    bool stalled_before_ = false;
    double stall_start_ = 0.0;
};

}  // namespace

SimResult simulate(const PlantSpec& plant, const Controller& ctrl, const SimConfig& sim,
                   const Eigen::VectorXd& plant_state0) {
    sim.validate();
    const ControllerConfig& cfg = ctrl.config();
    if (plant.n != cfg.n() || plant.r != cfg.r()) {
        throw ConfigError("plant (n=" + std::to_string(plant.n) + ", r=" + std::to_string(plant.r) +
                          ") does not match controller (n=" + std::to_string(cfg.n()) + ", r=" +
                          std::to_string(cfg.r()) + ")");
    }
    if (plant_state0.size() != plant.state_dim) throw ConfigError("initial plant state has the wrong dimension");

    const long steps = std::lround(sim.t_final / sim.dt);
    SimResult result;
    SummaryTracker tracker;
    int monitor_failures = 0;

    auto eval = [&](double t, const Eigen::VectorXd& state, double rho_r, ControlDiagnostics* diag) {
        const Eigen::VectorXd x = plant.measure(state);
        ControlDiagnostics local;
        ControlDiagnostics& d = diag != nullptr ? *diag : local;
        const Eigen::VectorXd u = ctrl.full_control(t, x, rho_r, &d);
        Derivative k{plant.rhs(t, state, u), d.rho_r_dot};
        if (!k.state.allFinite() || !std::isfinite(k.rho_r)) throw NumericalError("non-finite closed-loop derivative");
        return k;
    };

    auto make_record = [&](double t, const Eigen::VectorXd& state, const ControlDiagnostics& d) {
        SimRecord rec;
        rec.t = t;
        rec.plant_state = state;
        rec.x = plant.measure(state);
        rec.u = d.u;
        rec.diag = d;
        if (sim.monitors_enabled) {
            rec.flags = run_monitors(rec, cfg);
            if (!rec.flags.all_ok()) ++monitor_failures;
        }
        return rec;
    };

    Eigen::VectorXd state = plant_state0;
    double rho_r = 0.0;
    long last_logged = -1;
    ControlDiagnostics diag;
    // Last step whose stage-1 evaluation succeeded.
    long valid_k = -1;
    Eigen::VectorXd valid_state;
    ControlDiagnostics valid_diag;
    long k = 0;
    double t_fail = 0.0;

    try {
        for (k = 0; k <= steps; ++k) {
            const double t = static_cast<double>(k) * sim.dt;
            t_fail = t;
            const Derivative k1 = eval(t, state, rho_r, &diag);
            valid_k = k;
            valid_state = state;
            valid_diag = diag;
            tracker.observe(t, diag);
            if (k % sim.log_stride == 0 || k == steps) {
                result.records.push_back(make_record(t, state, diag));
                last_logged = k;
            }
            if (k == steps) break;

            const double h = sim.dt;
            t_fail = t + 0.5 * h;
            const Derivative k2 = eval(t + 0.5 * h, state + 0.5 * h * k1.state, rho_r + 0.5 * h * k1.rho_r, nullptr);
            const Derivative k3 = eval(t + 0.5 * h, state + 0.5 * h * k2.state, rho_r + 0.5 * h * k2.rho_r, nullptr);
            t_fail = t + h;
            const Derivative k4 = eval(t + h, state + h * k3.state, rho_r + h * k3.rho_r, nullptr);
            state += h / 6.0 * (k1.state + 2.0 * k2.state + 2.0 * k3.state + k4.state);
            rho_r += h / 6.0 * (k1.rho_r + 2.0 * k2.rho_r + 2.0 * k3.rho_r + k4.rho_r);
        }
        result.status = SimStatus::completed;
        result.status_time = static_cast<double>(steps) * sim.dt;
    } catch (const BarrierBreach& e) {
        result.status = SimStatus::barrier_breach;
        result.breach_kind = "hard";
        result.message = e.what();
    } catch (const SoftBarrierBreach& e) {
        result.status = SimStatus::barrier_breach;
        result.breach_kind = "soft";
        result.message = e.what();
    } catch (const FunnelBreach& e) {
        result.status = SimStatus::funnel_breach;
        result.breach_kind = "funnel";
        result.breach_layer = e.layer();
        result.message = e.what();
    } catch (const NumericalError& e) {
        result.status = SimStatus::numerical_error;
        result.message = e.what();
    }

    if (result.status != SimStatus::completed) {
        result.status_time = t_fail;
        // Keep the last state whose diagnostics were valid.
        if (valid_k >= 0 && last_logged != valid_k) {
            result.records.push_back(make_record(static_cast<double>(valid_k) * sim.dt, valid_state, valid_diag));
        }
        log_message(LogLevel::info, std::string("simulation halted: ") + result.message);
    }
    result.summary = tracker.finish(monitor_failures);
    return result;
}

}  // namespace hsc
