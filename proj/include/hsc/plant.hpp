#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>

#include "hsc/controller.hpp"

namespace hsc {

/// Simulated ground truth. The internal state is whatever the model integrates;
/// controllers only ever see `measure(state)` = (x1, ..., xr) and `g1_known`.
struct PlantSpec {
    std::string name;
    int n = 0;
    int r = 0;
    int state_dim = 0;
    std::function<Eigen::VectorXd(double, const Eigen::VectorXd&, const Eigen::VectorXd&)> rhs;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> measure;
    InputMap g1_known;
};

/// x_i' = x_{i+1}, x_r' = u, G1 = I.
PlantSpec chained_integrator_plant(int n, int r);

using Disturbance = std::function<Eigen::Vector2d(double)>;

/// Disturbance used in the unicycle examples.
Eigen::Vector2d nominal_disturbance(double t);

Disturbance zero_disturbance();

struct UnicycleParams {
    double mass = 3.6;        // m_R, kg
    double inertia = 0.0405;  // I_R, kg m^2
    double damping_v = 0.3;   // D1
    double damping_w = 0.04;  // D2
    double vcp_offset = 0.2;  // L, m
    Disturbance disturbance = nominal_disturbance;
};

/// Unicycle with force/torque inputs, measured at a virtual control point L
/// ahead of the centre. Internal state (x_c, y_c, theta, v, theta_dot);
/// measured (x1, x2) = (VCP position, VCP velocity). The applied wrench is
/// T(theta)^T u so that x2' carries G2 = T M^-1 T^T, symmetric positive definite.
PlantSpec unicycle_vcp_plant(const UnicycleParams& p);

/// T(theta) = [[cos, -L sin], [sin, L cos]] mapping (v, theta_dot) to VCP velocity.
Eigen::Matrix2d vcp_transform(double theta, double L);

/// Effective input matrix T M^-1 T^T of the VCP velocity dynamics.
Eigen::Matrix2d vcp_input_matrix(const UnicycleParams& p, double theta);

/// Internal state whose VCP sits at `vcp` with heading `theta` and body rates `zeta` = (v, theta_dot).
Eigen::VectorXd unicycle_state_from_vcp(const UnicycleParams& p, const Eigen::Vector2d& vcp, double theta,
                                        const Eigen::Vector2d& zeta);

}  // namespace hsc
