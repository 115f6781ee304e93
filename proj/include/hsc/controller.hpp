#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hsc/constraint.hpp"
#include "hsc/smooth_switch.hpp"

namespace hsc {

/// Nominal lower bound on the soft constraint:
///   rho_n(t) = ((T - t) / T)^(1 / (1 - beta)) * rho0 on [0, T], 0 afterwards.
struct NominalBound {
    double T = 4.0;
    double beta = 0.3;
    double rho0 = 0.0;
};

double rho_nominal(const NominalBound& nb, double t);
double rho_nominal_dot(const NominalBound& nb, double t);

/// Exponentially narrowing envelope (theta0 - theta_inf) e^{-decay t} + theta_inf.
struct Funnel {
    double theta0 = 1.0;
    double theta_inf = 0.1;
    double decay = 1.0;
};

double funnel_value(const Funnel& f, double t);
double funnel_dot(const Funnel& f, double t);

/// eta(t) = sin(pi t / (2 Ts)) up to Ts, then 1.
struct ShiftingFunction {
    double Ts = 4.0;

    double value(double t) const;
    double derivative(double t) const;
};

/// Odd log-ratio map ln((1 + e) / (1 - e)) from (-1, 1) onto R.
double transform_T(double ehat);

enum class ControlMode { semiglobal, global };

// Alternatives to the reciprocal barrier / log-ratio transform are named so
// configurations can spell them, but ControllerConfig::validate rejects them.
enum class BarrierForm { reciprocal, logarithmic };
enum class LayerTransform { log_ratio, tangent };

const char* to_string(ControlMode m);

using InputMap = std::function<Eigen::MatrixXd(double, const Eigen::VectorXd&)>;

InputMap identity_input_map(int n);

struct ControllerConfig {
    ControllerConfig(ConsolidatedConstraint hard_set, ConsolidatedConstraint soft_set);

    ConsolidatedConstraint hard;
    ConsolidatedConstraint soft;

    double k_h = 1.0;
    double k_s = 1.0;
    double k_r = 1.5;
    /// k_2 ... k_r; its size fixes the relative degree r = size + 1.
    std::vector<double> k_layers;
    double delta_h = 0.5;
    double delta_gamma = 10.0;
    NominalBound nominal;
    /// funnels[i - 2][j] bounds component j of layer i.
    std::vector<std::vector<Funnel>> funnels;
    ControlMode mode = ControlMode::semiglobal;
    ShiftingFunction shifting;
    /// The known G1(t, x1); identity unless set.
    InputMap g1;
    BarrierForm barrier = BarrierForm::reciprocal;
    LayerTransform transform = LayerTransform::log_ratio;

    int n() const { return hard.dimension() != 0 ? hard.dimension() : soft.dimension(); }
    int r() const { return static_cast<int>(k_layers.size()) + 1; }

    /// Throws ConfigError naming the first invalid field.
    void validate() const;
};

struct LayerDiagnostics {
    Eigen::VectorXd error;   // e_i
    Eigen::VectorXd theta;   // funnel widths at t
    Eigen::VectorXd ehat;    // normalized error
    Eigen::VectorXd eps;     // transformed error
    Eigen::VectorXd xi;
    Eigen::VectorXd s;       // s_i
};

struct ControlDiagnostics {
    double t = 0.0;
    double alpha_h = 0.0;
    double alpha_s = 0.0;
    double e_s = 0.0;
    double rho_n = 0.0;
    double rho_r = 0.0;
    double rho_s = 0.0;
    double eps_h = 0.0;
    double eps_s = 0.0;
    double gamma = 0.0;
    double phi_h = 0.0;
    double phi_gamma = 0.0;
    double eta = 1.0;
    double rho_r_dot = 0.0;
    Eigen::VectorXd grad_alpha_h;
    Eigen::VectorXd grad_alpha_s;
    Eigen::VectorXd u_h;
    Eigen::VectorXd u_s;
    Eigen::VectorXd s1;
    std::vector<LayerDiagnostics> layers;  // layers[0] is layer 2
    Eigen::VectorXd u;
};

struct LayerOutput {
    Eigen::VectorXd s;
    Eigen::VectorXd ehat;
    Eigen::VectorXd eps;
    LayerDiagnostics diag;
};

struct InitialCheck {
    std::string name;
    bool passed = false;
    std::string message;
};

struct ValidationReport {
    bool ok = true;
    std::vector<InitialCheck> checks;
    /// Config after any requested auto-tuning.
    std::optional<ControllerConfig> tuned;
    double alpha_h0 = 0.0;
    double alpha_s0 = 0.0;

    /// Name of the first failed check, empty when ok.
    std::string first_failure() const;
};

struct AutoTune {
    bool rho0 = false;
    bool funnels = false;
};

/// The closed-form control law. Built from a validated config; every method is
/// a pure function of its arguments.
class Controller {
public:
    explicit Controller(ControllerConfig cfg);

    const ControllerConfig& config() const { return cfg_; }
    const SwitchFunction& hard_switch() const { return phi_h_; }
    const SwitchFunction& conflict_switch() const { return phi_gamma_; }

    /// Right-hand side of the relaxation ODE at (t, x1, rho_r).
    double relaxation_rhs(double t, const Eigen::VectorXd& x1, double rho_r) const;

    /// First virtual control s1 = u_s + phi_h u_h with its diagnostics.
    Eigen::VectorXd step1_control(double t, const Eigen::VectorXd& x1, double rho_r,
                                  ControlDiagnostics* diag = nullptr) const;

    /// Intermediate control s_i for layer i in 2..r given e_i.
    LayerOutput layer_control(int layer, double t, const Eigen::VectorXd& e) const;

    /// u(t, x) for the stacked state x = (x1, ..., xr).
    Eigen::VectorXd full_control(double t, const Eigen::VectorXd& x, double rho_r,
                                 ControlDiagnostics* diag = nullptr) const;

    double rho_soft(double t, double rho_r) const { return rho_nominal(cfg_.nominal, t) - rho_r; }
    double eta(double t) const;

private:
    ControllerConfig cfg_;
    SwitchFunction phi_h_;
    SwitchFunction phi_gamma_;
};

/// Relaxation rate used by Controller::relaxation_rhs.
double relaxation_rate(double phi_gamma, double phi_h, double grad_s_g1_uh, double k_r, double rho_r);

/// Checks the initial state against the controller's admissibility
/// conditions, optionally tuning rho0 and the first funnel widths.
/// Throws ConfigError when alpha_h(0, x1(0)) <= 0.
ValidationReport validate_initial(const ControllerConfig& cfg, const Eigen::VectorXd& x0, AutoTune tune = {});

}  // namespace hsc
