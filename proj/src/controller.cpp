#include "hsc/controller.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hsc/errors.hpp"

namespace hsc {

double rho_nominal(const NominalBound& nb, double t) {
    if (t >= nb.T) return 0.0;
    const double frac = (nb.T - t) / nb.T;
    return std::pow(frac, 1.0 / (1.0 - nb.beta)) * nb.rho0;
}

double rho_nominal_dot(const NominalBound& nb, double t) {
    if (t >= nb.T) return 0.0;
    const double p = 1.0 / (1.0 - nb.beta);
    const double frac = (nb.T - t) / nb.T;
    return -p / nb.T * std::pow(frac, p - 1.0) * nb.rho0;
}

double funnel_value(const Funnel& f, double t) {
    return (f.theta0 - f.theta_inf) * std::exp(-f.decay * t) + f.theta_inf;
}

double funnel_dot(const Funnel& f, double t) { return -f.decay * (f.theta0 - f.theta_inf) * std::exp(-f.decay * t); }

double ShiftingFunction::value(double t) const {
    if (t >= Ts) return 1.0;
    return std::sin(0.5 * M_PI * t / Ts);
}

double ShiftingFunction::derivative(double t) const {
    if (t >= Ts) return 0.0;
    return 0.5 * M_PI / Ts * std::cos(0.5 * M_PI * t / Ts);
}

double transform_T(double ehat) {
    if (!(std::abs(ehat) < 1.0)) {
        throw FunnelBreach("normalized error outside (-1, 1)", 0, 0);
    }
    return 2.0 * std::atanh(ehat);
}

const char* to_string(ControlMode m) { return m == ControlMode::semiglobal ? "semiglobal" : "global"; }

InputMap identity_input_map(int n) {
    return [n](double, const Eigen::VectorXd&) -> Eigen::MatrixXd { return Eigen::MatrixXd::Identity(n, n); };
}

// ---------------------------------------------------------------------------

ControllerConfig::ControllerConfig(ConsolidatedConstraint hard_set, ConsolidatedConstraint soft_set)
    : hard(std::move(hard_set)), soft(std::move(soft_set)) {
    g1 = identity_input_map(std::max(1, n()));
}

namespace {

void require_positive(double v, const char* field) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(field) + " must be positive and finite");
}

}  // namespace

void ControllerConfig::validate() const {
    if (hard.constraint_class() != ConstraintClass::hard) throw ConfigError("hard set holds soft primitives");
    if (soft.constraint_class() != ConstraintClass::soft) throw ConfigError("soft set holds hard primitives");
    if (hard.dimension() != 0 && soft.dimension() != 0 && hard.dimension() != soft.dimension()) {
        throw ConfigError("hard and soft constraints disagree on the x1 dimension");
    }
    if (n() < 1) throw ConfigError("cannot infer the x1 dimension from the constraints");
    require_positive(k_h, "k_h");
    require_positive(k_s, "k_s");
    require_positive(k_r, "k_r");
    for (double k : k_layers) require_positive(k, "k_i");
    require_positive(delta_h, "delta_h");
    require_positive(delta_gamma, "delta_gamma");
    require_positive(nominal.T, "T");
    if (!(nominal.beta > 0.0 && nominal.beta < 1.0)) throw ConfigError("beta must lie in (0,1)");
    if (!(nominal.rho0 <= 0.0) || !std::isfinite(nominal.rho0)) throw ConfigError("rho0 must be finite and <= 0");
    if (funnels.size() != k_layers.size()) throw ConfigError("funnels must have one row per layer 2..r");
    for (const auto& row : funnels) {
        if (static_cast<int>(row.size()) != n()) throw ConfigError("each funnel row needs n entries");
        for (const auto& f : row) {
            require_positive(f.theta0, "theta0");
            require_positive(f.theta_inf, "theta_inf");
            require_positive(f.decay, "decay");
            if (f.theta0 < f.theta_inf) throw ConfigError("theta0 must be >= theta_inf");
        }
    }
    if (mode == ControlMode::global) {
        require_positive(shifting.Ts, "Ts");
        if (shifting.Ts > nominal.T) throw ConfigError("Ts must satisfy Ts <= T");
        if (!(nominal.rho0 < 0.0)) throw ConfigError("global mode requires rho0 < 0");
    }
    if (!g1) throw ConfigError("G1 input map is not set");
    if (barrier != BarrierForm::reciprocal) throw ConfigError("only the reciprocal barrier is implemented");
    if (transform != LayerTransform::log_ratio) throw ConfigError("only the log-ratio layer transform is implemented");
}

// ---------------------------------------------------------------------------

double relaxation_rate(double phi_gamma, double phi_h, double grad_s_g1_uh, double k_r, double rho_r) {
    const double drive = (phi_gamma == 0.0 || phi_h == 0.0) ? 0.0 : -phi_gamma * phi_h * grad_s_g1_uh;
    return drive - k_r * rho_r;
}

namespace {

ControllerConfig validated(ControllerConfig cfg) {
    cfg.validate();
    return cfg;
}

void require_state(const Eigen::VectorXd& v, Eigen::Index size, const char* what) {
    if (v.size() != size) {
        throw ConfigError(std::string(what) + " has dimension " + std::to_string(v.size()) + ", expected " +
                          std::to_string(size));
    }
    if (!v.allFinite()) throw NumericalError(std::string("non-finite ") + what);
}

}  // namespace

Controller::Controller(ControllerConfig cfg)
    : cfg_(validated(std::move(cfg))),
      phi_h_(cfg_.delta_h, 0.0),
      phi_gamma_(0.0, -cfg_.delta_gamma) {}

double Controller::eta(double t) const {
    return cfg_.mode == ControlMode::global ? cfg_.shifting.value(t) : 1.0;
}

namespace {

// Quantities of the hard-barrier layer shared by step1_control and relaxation_rhs.
struct HardTerms {
    AlphaEval hard;
    AlphaEval soft;
    double eps_h = 0.0;
    double gamma = 0.0;
    double phi_h = 0.0;
    double phi_gamma = 0.0;
    Eigen::VectorXd u_h;
    double grad_s_g1_uh = 0.0;
};

HardTerms hard_terms(const ControllerConfig& cfg, const SwitchFunction& phi_h, const SwitchFunction& phi_gamma,
                     double t, const Eigen::VectorXd& x1) {
    HardTerms h;
    h.hard = cfg.hard.evaluate(t, x1);
    if (!(h.hard.value > 0.0)) {
        std::ostringstream os;
        os << "hard barrier breached: alpha_h = " << h.hard.value << " at t = " << t;
        throw BarrierBreach(os.str(), h.hard.value);
    }
    h.soft = cfg.soft.evaluate(t, x1);
    h.eps_h = 1.0 / h.hard.value;
    const Eigen::MatrixXd g1 = cfg.g1(t, x1);
    const Eigen::VectorXd g1_grad_h = g1 * h.hard.gradient;
    h.gamma = h.eps_h * h.soft.gradient.dot(g1_grad_h);
    h.phi_h = phi_h(h.hard.value);
    h.phi_gamma = phi_gamma(h.gamma);
    h.u_h = cfg.k_h * h.eps_h * h.eps_h * h.hard.gradient;
    h.grad_s_g1_uh = h.soft.gradient.dot(g1 * h.u_h);
    return h;
}

}  // namespace

double Controller::relaxation_rhs(double t, const Eigen::VectorXd& x1, double rho_r) const {
    require_state(x1, cfg_.n(), "x1");
    const HardTerms h = hard_terms(cfg_, phi_h_, phi_gamma_, t, x1);
    return relaxation_rate(h.phi_gamma, h.phi_h, h.grad_s_g1_uh, cfg_.k_r, rho_r);
}

Eigen::VectorXd Controller::step1_control(double t, const Eigen::VectorXd& x1, double rho_r,
                                          ControlDiagnostics* diag) const {
    require_state(x1, cfg_.n(), "x1");
    if (!std::isfinite(rho_r) || !std::isfinite(t)) throw NumericalError("non-finite time or relaxation state");
    const HardTerms h = hard_terms(cfg_, phi_h_, phi_gamma_, t, x1);

    const double rho_n = rho_nominal(cfg_.nominal, t);
    const double rho_s = rho_n - rho_r;
    const double eta_t = eta(t);
    const double e_s = eta_t * h.soft.value - rho_s;
    if (!(e_s > 0.0)) {
        std::ostringstream os;
        os << "soft barrier breached: e_s = " << e_s << " at t = " << t;
        throw SoftBarrierBreach(os.str(), e_s);
    }
    const double eps_s = 1.0 / e_s;
    const Eigen::VectorXd u_s = cfg_.k_s * eps_s * eps_s * h.soft.gradient;
    Eigen::VectorXd s1 = u_s;
    if (h.phi_h != 0.0) s1 += h.phi_h * h.u_h;
    if (!s1.allFinite()) throw NumericalError("non-finite first virtual control");

    if (diag != nullptr) {
        diag->t = t;
        diag->alpha_h = h.hard.value;
        diag->alpha_s = h.soft.value;
        diag->e_s = e_s;
        diag->rho_n = rho_n;
        diag->rho_r = rho_r;
        diag->rho_s = rho_s;
        diag->eps_h = h.eps_h;
        diag->eps_s = eps_s;
        diag->gamma = h.gamma;
        diag->phi_h = h.phi_h;
        diag->phi_gamma = h.phi_gamma;
        diag->eta = eta_t;
        diag->rho_r_dot = relaxation_rate(h.phi_gamma, h.phi_h, h.grad_s_g1_uh, cfg_.k_r, rho_r);
        diag->grad_alpha_h = h.hard.gradient;
        diag->grad_alpha_s = h.soft.gradient;
        diag->u_h = h.u_h;
        diag->u_s = u_s;
        diag->s1 = s1;
        diag->layers.clear();
        diag->u = s1;
    }
    return s1;
}

LayerOutput Controller::layer_control(int layer, double t, const Eigen::VectorXd& e) const {
    if (layer < 2 || layer > cfg_.r()) {
        throw ConfigError("layer index " + std::to_string(layer) + " outside 2.." + std::to_string(cfg_.r()));
    }
    const int n = cfg_.n();
    require_state(e, n, "layer error");
    const auto& row = cfg_.funnels[static_cast<std::size_t>(layer - 2)];
    const double k = cfg_.k_layers[static_cast<std::size_t>(layer - 2)];
    const double eta_t = eta(t);

    LayerOutput out;
    LayerDiagnostics& d = out.diag;
    d.error = e;
    d.theta.resize(n);
    d.ehat.resize(n);
    d.eps.resize(n);
    d.xi.resize(n);
    for (int j = 0; j < n; ++j) {
        const double theta = funnel_value(row[static_cast<std::size_t>(j)], t);
        const double ehat = eta_t * e[j] / theta;
        if (!(std::abs(ehat) < 1.0)) {
            std::ostringstream os;
            os << "funnel breached in layer " << layer << ", component " << j + 1 << ": |ehat| = " << std::abs(ehat)
               << " at t = " << t;
            throw FunnelBreach(os.str(), layer, j + 1);
        }
        d.theta[j] = theta;
        d.ehat[j] = ehat;
        d.eps[j] = transform_T(ehat);
        d.xi[j] = 2.0 * eta_t / (theta * (1.0 - ehat * ehat));
    }
    d.s = -k * (d.xi.array() * d.eps.array()).matrix();
    out.s = d.s;
    out.ehat = d.ehat;
    out.eps = d.eps;
    return out;
}

Eigen::VectorXd Controller::full_control(double t, const Eigen::VectorXd& x, double rho_r,
                                         ControlDiagnostics* diag) const {
    const int n = cfg_.n();
    const int r = cfg_.r();
    require_state(x, static_cast<Eigen::Index>(n) * r, "state");
    ControlDiagnostics local;
    ControlDiagnostics& d = diag != nullptr ? *diag : local;
    Eigen::VectorXd s = step1_control(t, x.head(n), rho_r, &d);
    for (int i = 2; i <= r; ++i) {
        const Eigen::VectorXd e = x.segment(static_cast<Eigen::Index>(i - 1) * n, n) - s;
        LayerOutput lo = layer_control(i, t, e);
        s = lo.s;
        d.layers.push_back(std::move(lo.diag));
    }
    d.u = s;
    return s;
}

// ---------------------------------------------------------------------------

std::string ValidationReport::first_failure() const {
    for (const auto& c : checks) {
        if (!c.passed) return c.name;
    }
    return {};
}

ValidationReport validate_initial(const ControllerConfig& cfg_in, const Eigen::VectorXd& x0, AutoTune tune) {
    ControllerConfig cfg = cfg_in;
    const int n = cfg.n();
    const int r = cfg.r();
    if (x0.size() != static_cast<Eigen::Index>(n) * r) {
        throw ConfigError("initial state has dimension " + std::to_string(x0.size()) + ", expected " +
                          std::to_string(n * r));
    }
    ValidationReport rep;
    const Eigen::VectorXd x1 = x0.head(n);
    rep.alpha_h0 = cfg.hard.alpha(0.0, x1);
    rep.alpha_s0 = cfg.soft.alpha(0.0, x1);
    {
        std::ostringstream os;
        os << "alpha_h(0, x1(0)) = " << rep.alpha_h0;
        rep.checks.push_back({"initial_hard_safety", rep.alpha_h0 > 0.0, os.str()});
    }
    if (!(rep.alpha_h0 > 0.0)) {
        throw ConfigError("initial state violates the hard constraints (" + rep.checks.back().message +
                          " <= 0); no admissible controller exists from this start");
    }

    if (cfg.mode == ControlMode::semiglobal) {
        if (tune.rho0) cfg.nominal.rho0 = std::min(cfg.nominal.rho0, rep.alpha_s0 - 1.0);
        std::ostringstream os;
        os << "rho0 = " << cfg.nominal.rho0 << " must be < alpha_s(0, x1(0)) = " << rep.alpha_s0;
        rep.checks.push_back({"rho0_below_initial_soft", cfg.nominal.rho0 < rep.alpha_s0, os.str()});
    } else {
        if (tune.rho0) cfg.nominal.rho0 = std::min(cfg.nominal.rho0, -1.0);
        if (tune.funnels) {
            for (auto& row : cfg.funnels) {
                for (auto& f : row) f.theta0 = std::max(1.0, f.theta_inf);
            }
        }
    }

    bool chain_ok = rep.checks.back().passed;
    if (cfg.mode == ControlMode::semiglobal && chain_ok && r > 1) {
        // Forward-chain e_i(0) so each funnel can be checked (or sized) in turn.
        auto probe = [&cfg]() {
            ControllerConfig p = cfg;
            for (auto& row : p.funnels) {
                for (auto& f : row) f.theta0 = std::max(f.theta0, f.theta_inf);
            }
            return Controller(std::move(p));
        };
        Eigen::VectorXd s = probe().step1_control(0.0, x1, 0.0);
        for (int i = 2; i <= r && chain_ok; ++i) {
            const Eigen::VectorXd e = x0.segment(static_cast<Eigen::Index>(i - 1) * n, n) - s;
            auto& row = cfg.funnels[static_cast<std::size_t>(i - 2)];
            for (int j = 0; j < n; ++j) {
                auto& f = row[static_cast<std::size_t>(j)];
                if (tune.funnels) f.theta0 = std::max(1.1 * std::abs(e[j]) + 0.1, f.theta_inf);
                std::ostringstream os;
                os << "layer " << i << " component " << j + 1 << ": theta0 = " << f.theta0 << " must exceed |e(0)| = "
                   << std::abs(e[j]);
                const bool ok = f.theta0 > std::abs(e[j]);
                rep.checks.push_back({"funnel_margin_layer" + std::to_string(i), ok, os.str()});
                chain_ok = chain_ok && ok;
            }
            if (chain_ok) s = probe().layer_control(i, 0.0, e).s;
        }
    }
    rep.ok = true;
    for (const auto& c : rep.checks) rep.ok = rep.ok && c.passed;
    if (rep.ok) {
        cfg.validate();
        rep.tuned = cfg;
    }
    return rep;
}

}  // namespace hsc
