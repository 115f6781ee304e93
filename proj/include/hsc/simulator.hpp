#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "hsc/controller.hpp"
#include "hsc/plant.hpp"

namespace hsc {

struct SimConfig {
    double dt = 1e-3;      // s
    double t_final = 20.0; // s
    int log_stride = 1;
    bool monitors_enabled = true;

    void validate() const;
};

struct MonitorFlags {
    bool hard_invariance = true;   // alpha_h > 0
    bool soft_invariance = true;   // e_s > 0 (alpha_s - rho_s > 0 once t >= Ts in global mode)
    bool funnels = true;           // every |ehat| < 1
    bool relaxation_sign = true;   // rho_r >= -1e-9
    bool finite = true;

    bool all_ok() const { return hard_invariance && soft_invariance && funnels && relaxation_sign && finite; }
};

struct SimRecord {
    double t = 0.0;
    Eigen::VectorXd plant_state;
    Eigen::VectorXd x;  // measured (x1, ..., xr)
    Eigen::VectorXd u;
    ControlDiagnostics diag;
    MonitorFlags flags;
};

MonitorFlags run_monitors(const SimRecord& record, const ControllerConfig& cfg);

enum class SimStatus { completed, barrier_breach, funnel_breach, numerical_error };

const char* to_string(SimStatus s);

struct Interval {
    double start = 0.0;
    double end = 0.0;
};

/// Metrics tracked at every integration step, independent of log_stride.
struct SimSummary {
    double min_alpha_h = 0.0;
    double t_min_alpha_h = 0.0;
    double max_rho_r = 0.0;
    /// First t with alpha_s >= 0 (NaN if never).
    double first_soft_entry = 0.0;
    /// Start of the final run with alpha_s >= 0 up to the end (NaN if the run ends violated).
    double soft_satisfied_from = 0.0;
    std::vector<Interval> soft_violations;
    /// |s1| < 1e-6 while alpha_s < 0 held for more than 1 s.
    bool deadlock_suspected = false;
    double deadlock_since = 0.0;
    int monitor_failures = 0;
    long steps = 0;
};

struct SimResult {
    std::vector<SimRecord> records;
    SimStatus status = SimStatus::completed;
    double status_time = 0.0;
    /// "hard" or "soft" for barrier breaches, "funnel" for funnel breaches.
    std::string breach_kind;
    int breach_layer = 0;
    std::string message;
    SimSummary summary;
};

/// Fixed-step RK4 on the augmented state (plant state, rho_r). Control and
/// relaxation are evaluated at every stage. Halts on the first breach.
SimResult simulate(const PlantSpec& plant, const Controller& ctrl, const SimConfig& sim,
                   const Eigen::VectorXd& plant_state0);

}  // namespace hsc
