#include "hsc/plant.hpp"

#include <cmath>

#include "hsc/errors.hpp"

namespace hsc {

PlantSpec chained_integrator_plant(int n, int r) {
    if (n < 1 || r < 1) throw ConfigError("chained integrator needs n >= 1 and r >= 1");
    PlantSpec p;
    p.name = "chained_integrator";
    p.n = n;
    p.r = r;
    p.state_dim = n * r;
    p.rhs = [n, r](double, const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
        Eigen::VectorXd dx(n * r);
        if (r > 1) dx.head(n * (r - 1)) = x.tail(n * (r - 1));
        dx.tail(n) = u;
        return dx;
    };
    p.measure = [](const Eigen::VectorXd& x) { return x; };
    p.g1_known = identity_input_map(n);
    return p;
}

Eigen::Vector2d nominal_disturbance(double t) {
    return {0.75 * std::sin(3.0 * t + M_PI / 3.0) + 1.5 * std::cos(t + 3.0 * M_PI / 7.0),
            -0.8 * std::exp(std::cos(t + M_PI / 3.0) + 1.0) * std::sin(t)};
}

Disturbance zero_disturbance() {
    return [](double) { return Eigen::Vector2d::Zero(); };
}

Eigen::Matrix2d vcp_transform(double theta, double L) {
    Eigen::Matrix2d m;
    m << std::cos(theta), -L * std::sin(theta), std::sin(theta), L * std::cos(theta);
    return m;
}

Eigen::Matrix2d vcp_input_matrix(const UnicycleParams& p, double theta) {
    const Eigen::Matrix2d tr = vcp_transform(theta, p.vcp_offset);
    const Eigen::Matrix2d m_inv = Eigen::Vector2d(1.0 / p.mass, 1.0 / p.inertia).asDiagonal();
    return tr * m_inv * tr.transpose();
}

namespace {

void validate(const UnicycleParams& p) {
    if (!(p.mass > 0.0) || !(p.inertia > 0.0)) throw ConfigError("unicycle mass and inertia must be positive");
    if (!(p.vcp_offset > 0.0)) throw ConfigError("VCP offset L must be positive (T(theta) is singular at L = 0)");
    if (!(p.damping_v >= 0.0) || !(p.damping_w >= 0.0)) throw ConfigError("unicycle damping must be non-negative");
    if (!p.disturbance) throw ConfigError("unicycle disturbance is not set");
}

}  // namespace

PlantSpec unicycle_vcp_plant(const UnicycleParams& params) {
    validate(params);
    PlantSpec p;
    p.name = "unicycle_vcp";
    p.n = 2;
    p.r = 2;
    p.state_dim = 5;
    p.rhs = [params](double t, const Eigen::VectorXd& s, const Eigen::VectorXd& u) {
        const double theta = s[2];
        const Eigen::Vector2d zeta = s.tail<2>();
        const Eigen::Vector2d wrench = vcp_transform(theta, params.vcp_offset).transpose() * u;
        const Eigen::Vector2d d = params.disturbance(t);
        Eigen::VectorXd ds(5);
        ds[0] = zeta[0] * std::cos(theta);
        ds[1] = zeta[0] * std::sin(theta);
        ds[2] = zeta[1];
        ds[3] = (wrench[0] + d[0] - params.damping_v * zeta[0]) / params.mass;
        ds[4] = (wrench[1] + d[1] - params.damping_w * zeta[1]) / params.inertia;
        return ds;
    };
    const double L = params.vcp_offset;
    p.measure = [L](const Eigen::VectorXd& s) {
        const double theta = s[2];
        Eigen::VectorXd x(4);
        x[0] = s[0] + L * std::cos(theta);
        x[1] = s[1] + L * std::sin(theta);
        x.tail<2>() = vcp_transform(theta, L) * s.tail<2>();
        return x;
    };
    p.g1_known = identity_input_map(2);
    return p;
}

Eigen::VectorXd unicycle_state_from_vcp(const UnicycleParams& p, const Eigen::Vector2d& vcp, double theta,
                                        const Eigen::Vector2d& zeta) {
    Eigen::VectorXd s(5);
    s[0] = vcp[0] - p.vcp_offset * std::cos(theta);
    s[1] = vcp[1] - p.vcp_offset * std::sin(theta);
    s[2] = theta;
    s.tail<2>() = zeta;
    return s;
}

}  // namespace hsc
