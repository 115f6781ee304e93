#include "hsc/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "hsc/errors.hpp"

#ifndef HSC_PRESET_DIR
#define HSC_PRESET_DIR "presets"
#endif

namespace hsc {

namespace fs = std::filesystem;

namespace {

std::string join(const std::string& parent, const std::string& key) {
    return parent.empty() ? key : parent + "." + key;
}

std::string index_path(const std::string& parent, std::size_t i) { return parent + "[" + std::to_string(i) + "]"; }

void require_map(const YAML::Node& n, const std::string& field) {
    if (!n.IsMap()) throw SchemaError(field, "expected a mapping");
}

void require_keys(const YAML::Node& n, const std::string& field, const std::set<std::string>& allowed) {
    require_map(n, field);
    for (const auto& kv : n) {
        const std::string key = kv.first.as<std::string>();
        if (allowed.count(key) == 0) throw SchemaError(join(field, key), "unknown key");
    }
}

double as_number(const YAML::Node& n, const std::string& field) {
    if (!n.IsScalar()) throw SchemaError(field, "expected a number");
    double v = 0.0;
    try {
        v = n.as<double>();
    } catch (const YAML::Exception&) {
        throw SchemaError(field, "expected a number, got '" + n.Scalar() + "'");
    }
    if (!std::isfinite(v)) throw SchemaError(field, "must be finite");
    return v;
}

double number_or(const YAML::Node& parent, const std::string& key, const std::string& field, double fallback) {
    const YAML::Node n = parent[key];
    if (!n) return fallback;
    return as_number(n, join(field, key));
}

double required_number(const YAML::Node& parent, const std::string& key, const std::string& field) {
    const YAML::Node n = parent[key];
    if (!n) throw SchemaError(join(field, key), "missing");
    return as_number(n, join(field, key));
}

double positive(double v, const std::string& field) {
    if (!(v > 0.0)) throw SchemaError(field, "must be positive");
    return v;
}

std::string as_string(const YAML::Node& n, const std::string& field) {
    if (!n.IsScalar()) throw SchemaError(field, "expected a string");
    return n.Scalar();
}

Eigen::VectorXd as_vector(const YAML::Node& n, const std::string& field) {
    if (!n.IsSequence()) throw SchemaError(field, "expected a list of numbers");
    Eigen::VectorXd v(static_cast<Eigen::Index>(n.size()));
    for (std::size_t i = 0; i < n.size(); ++i) v[static_cast<Eigen::Index>(i)] = as_number(n[i], index_path(field, i));
    return v;
}

bool is_auto(const YAML::Node& n) { return n && n.IsScalar() && n.Scalar() == "auto"; }

// ---------------------------------------------------------------------------
// Time signals: a number, or a single-key mapping.

TimeSignal parse_signal(const YAML::Node& n, const std::string& field);

std::vector<TimeSignal> parse_signal_list(const YAML::Node& n, const std::string& field) {
    if (!n.IsSequence() || n.size() == 0) throw SchemaError(field, "expected a non-empty list of signals");
    std::vector<TimeSignal> out;
    for (std::size_t i = 0; i < n.size(); ++i) out.push_back(parse_signal(n[i], index_path(field, i)));
    return out;
}

TimeSignal parse_signal(const YAML::Node& n, const std::string& field) {
    if (n.IsScalar()) return TimeSignal::constant(as_number(n, field));
    if (!n.IsMap() || n.size() != 1) {
        throw SchemaError(field, "expected a number or a one-key mapping (constant, linear, sine, cosine, sum, "
                                 "product, scaled)");
    }
    const auto kv = *n.begin();
    const std::string kind = kv.first.as<std::string>();
    const YAML::Node body = kv.second;
    const std::string sub = join(field, kind);
    if (kind == "constant") return TimeSignal::constant(as_number(body, sub));
    if (kind == "linear") {
        require_keys(body, sub, {"slope", "offset"});
        return TimeSignal::linear(number_or(body, "slope", sub, 0.0), number_or(body, "offset", sub, 0.0));
    }
    if (kind == "sine" || kind == "cosine") {
        require_keys(body, sub, {"amplitude", "frequency", "phase", "offset"});
        const double a = number_or(body, "amplitude", sub, 1.0);
        const double w = number_or(body, "frequency", sub, 1.0);
        const double ph = number_or(body, "phase", sub, 0.0);
        const double off = number_or(body, "offset", sub, 0.0);
        return kind == "sine" ? TimeSignal::sine(a, w, ph, off) : TimeSignal::cosine(a, w, ph, off);
    }
    if (kind == "sum") return TimeSignal::sum(parse_signal_list(body, sub));
    if (kind == "product") return TimeSignal::product(parse_signal_list(body, sub));
    if (kind == "scaled") {
        require_keys(body, sub, {"factor", "signal"});
        if (!body["signal"]) throw SchemaError(join(sub, "signal"), "missing");
        return TimeSignal::scaled(required_number(body, "factor", sub), parse_signal(body["signal"], join(sub, "signal")));
    }
    throw SchemaError(field, "unknown signal kind '" + kind + "'");
}

MovingPoint parse_point(const YAML::Node& n, const std::string& field) {
    if (!n) throw SchemaError(field, "missing");
    return parse_signal_list(n, field);
}

TimeSignal signal_field(const YAML::Node& parent, const std::string& key, const std::string& field) {
    const YAML::Node n = parent[key];
    if (!n) throw SchemaError(join(field, key), "missing");
    return parse_signal(n, join(field, key));
}

// Radii are checked at t = 0 only; a signal may still cross zero later.
TimeSignal radius_field(const YAML::Node& parent, const std::string& field) {
    TimeSignal r = signal_field(parent, "radius", field);
    if (!(r.value(0.0) > 0.0)) throw SchemaError(join(field, "radius"), "must be positive at t = 0");
    return r;
}

// ---------------------------------------------------------------------------
// Constraint primitives.

QuadraticForm parse_quadratic(const YAML::Node& n, const std::string& field);

Shape parse_shape(const YAML::Node& n, const std::string& field) {
    require_map(n, field);
    if (!n["kind"]) throw SchemaError(join(field, "kind"), "missing");
    const std::string kind = as_string(n["kind"], join(field, "kind"));
    if (kind == "halfspace") {
        require_keys(n, field, {"kind", "normal", "offset"});
        if (!n["normal"]) throw SchemaError(join(field, "normal"), "missing");
        return Halfspace{as_vector(n["normal"], join(field, "normal")), signal_field(n, "offset", field)};
    }
    if (kind == "disk_interior" || kind == "disk_exterior" || kind == "ellipse_exterior") {
        return std::visit([](const auto& q) -> Shape { return q; }, parse_quadratic(n, field));
    }
    if (kind == "tanh") {
        require_keys(n, field, {"kind", "gain", "of"});
        if (!n["of"]) throw SchemaError(join(field, "of"), "missing");
        return TanhWrapped{positive(required_number(n, "gain", field), join(field, "gain")),
                           parse_quadratic(n["of"], join(field, "of"))};
    }
    if (kind == "radial_power") {
        require_keys(n, field, {"kind", "center", "radius", "exponent"});
        const double p = required_number(n, "exponent", field);
        if (p != std::floor(p) || p < 1 || static_cast<long>(p) % 2 == 0) {
            throw SchemaError(join(field, "exponent"), "must be an odd positive integer");
        }
        return RadialPower{parse_point(n["center"], join(field, "center")), radius_field(n, field),
                           static_cast<int>(p)};
    }
    if (kind == "auxiliary") {
        require_keys(n, field, {"kind", "c_aux"});
        return AuxiliaryCoercive{required_number(n, "c_aux", field)};
    }
    throw SchemaError(join(field, "kind"), "unknown primitive kind '" + kind + "'");
}

QuadraticForm parse_quadratic(const YAML::Node& n, const std::string& field) {
    require_map(n, field);
    if (!n["kind"]) throw SchemaError(join(field, "kind"), "missing");
    const std::string kind = as_string(n["kind"], join(field, "kind"));
    if (kind == "disk_interior" || kind == "disk_exterior") {
        require_keys(n, field, {"kind", "center", "radius"});
        MovingPoint c = parse_point(n["center"], join(field, "center"));
        TimeSignal r = radius_field(n, field);
        if (kind == "disk_interior") return DiskInterior{std::move(c), std::move(r)};
        return DiskExterior{std::move(c), std::move(r)};
    }
    if (kind == "ellipse_exterior") {
        require_keys(n, field, {"kind", "center", "a", "b", "angle"});
        EllipseExterior e;
        e.center = parse_point(n["center"], join(field, "center"));
        e.a = positive(required_number(n, "a", field), join(field, "a"));
        e.b = positive(required_number(n, "b", field), join(field, "b"));
        e.angle = n["angle"] ? parse_signal(n["angle"], join(field, "angle")) : TimeSignal::constant(0.0);
        return e;
    }
    throw SchemaError(join(field, "kind"), "expected disk_interior, disk_exterior or ellipse_exterior, got '" +
                                               kind + "'");
}

ConsolidatedConstraint parse_family(const YAML::Node& n, const std::string& field, ConstraintClass cls) {
    if (!n) throw SchemaError(field, "missing");
    require_keys(n, field, {"nu", "primitives"});
    const double nu = positive(number_or(n, "nu", field, 10.0), join(field, "nu"));
    const YAML::Node list = n["primitives"];
    const std::string lf = join(field, "primitives");
    if (!list || (list.IsSequence() && list.size() == 0) || list.IsNull()) {
        throw SchemaError(lf, "at least one primitive is required");
    }
    if (!list.IsSequence()) throw SchemaError(lf, "expected a list");
    std::vector<ConstraintPrimitive> prims;
    for (std::size_t i = 0; i < list.size(); ++i) {
        const std::string pf = index_path(lf, i);
        try {
            prims.emplace_back(parse_shape(list[i], pf), cls);
        } catch (const ConfigError& e) {
            throw SchemaError(pf, e.what());
        }
    }
    try {
        return ConsolidatedConstraint(std::move(prims), nu);
    } catch (const ConfigError& e) {
        throw SchemaError(field, e.what());
    }
}

// ---------------------------------------------------------------------------

void parse_plant(const YAML::Node& n, const YAML::Node& init, ScenarioFile& s) {
    if (!n) throw SchemaError("plant", "missing");
    require_map(n, "plant");
    if (!n["kind"]) throw SchemaError("plant.kind", "missing");
    s.plant_kind = as_string(n["kind"], "plant.kind");
    if (!init) throw SchemaError("initial", "missing");

    if (s.plant_kind == "unicycle") {
        require_keys(n, "plant", {"kind", "mass", "inertia", "damping", "vcp_offset", "disturbance"});
        UnicycleParams p;
        p.mass = positive(number_or(n, "mass", "plant", p.mass), "plant.mass");
        p.inertia = positive(number_or(n, "inertia", "plant", p.inertia), "plant.inertia");
        if (n["damping"]) {
            const Eigen::VectorXd d = as_vector(n["damping"], "plant.damping");
            if (d.size() != 2 || (d.array() < 0.0).any()) {
                throw SchemaError("plant.damping", "expected two non-negative numbers [D1, D2]");
            }
            p.damping_v = d[0];
            p.damping_w = d[1];
        }
        p.vcp_offset = positive(number_or(n, "vcp_offset", "plant", p.vcp_offset), "plant.vcp_offset");
        const std::string dist = n["disturbance"] ? as_string(n["disturbance"], "plant.disturbance") : "nominal";
        if (dist == "nominal")
            p.disturbance = nominal_disturbance;
        else if (dist == "none")
            p.disturbance = zero_disturbance();
        else
            throw SchemaError("plant.disturbance", "expected 'nominal' or 'none', got '" + dist + "'");
        s.unicycle = p;
        s.plant = unicycle_vcp_plant(p);

        require_keys(init, "initial", {"position", "heading", "body_rates"});
        if (!init["position"]) throw SchemaError("initial.position", "missing");
        const Eigen::VectorXd pos = as_vector(init["position"], "initial.position");
        if (pos.size() != 2) throw SchemaError("initial.position", "expected [x, y] of the VCP");
        const double heading = number_or(init, "heading", "initial", 0.0);
        Eigen::Vector2d zeta = Eigen::Vector2d::Zero();
        if (init["body_rates"]) {
            const Eigen::VectorXd z = as_vector(init["body_rates"], "initial.body_rates");
            if (z.size() != 2) throw SchemaError("initial.body_rates", "expected [v, theta_dot]");
            zeta = z;
        }
        s.state0 = unicycle_state_from_vcp(p, pos, heading, zeta);
    } else if (s.plant_kind == "chained_integrator") {
        require_keys(n, "plant", {"kind", "n", "r"});
        const double nd = required_number(n, "n", "plant");
        const double rd = required_number(n, "r", "plant");
        if (nd < 1 || nd != std::floor(nd)) throw SchemaError("plant.n", "must be a positive integer");
        if (rd < 1 || rd != std::floor(rd)) throw SchemaError("plant.r", "must be a positive integer");
        s.plant = chained_integrator_plant(static_cast<int>(nd), static_cast<int>(rd));
        require_keys(init, "initial", {"state"});
        if (!init["state"]) throw SchemaError("initial.state", "missing");
        s.state0 = as_vector(init["state"], "initial.state");
        if (s.state0.size() != s.plant.state_dim) {
            throw SchemaError("initial.state", "expected " + std::to_string(s.plant.state_dim) + " numbers (n*r)");
        }
    } else {
        throw SchemaError("plant.kind", "expected 'unicycle' or 'chained_integrator', got '" + s.plant_kind + "'");
    }
}

void parse_controller(const YAML::Node& n, ScenarioFile& s, ConsolidatedConstraint hard,
                      ConsolidatedConstraint soft) {
    const std::string f = "controller";
    ControllerConfig cfg(std::move(hard), std::move(soft));
    if (n) {
        require_keys(n, f,
                     {"mode", "k_h", "k_s", "k_r", "k_layers", "delta_h", "delta_gamma", "T", "beta", "rho0", "Ts",
                      "funnel"});
    }
    const YAML::Node c = n ? n : YAML::Node(YAML::NodeType::Map);
    const std::string mode = c["mode"] ? as_string(c["mode"], "controller.mode") : "semiglobal";
    if (mode == "semiglobal")
        cfg.mode = ControlMode::semiglobal;
    else if (mode == "global")
        cfg.mode = ControlMode::global;
    else
        throw SchemaError("controller.mode", "expected 'semiglobal' or 'global', got '" + mode + "'");

    cfg.k_h = positive(number_or(c, "k_h", f, 1.0), "controller.k_h");
    cfg.k_s = positive(number_or(c, "k_s", f, 1.0), "controller.k_s");
    cfg.k_r = positive(number_or(c, "k_r", f, 1.5), "controller.k_r");
    cfg.delta_h = positive(number_or(c, "delta_h", f, 0.5), "controller.delta_h");
    cfg.delta_gamma = positive(number_or(c, "delta_gamma", f, 10.0), "controller.delta_gamma");
    cfg.nominal.T = positive(number_or(c, "T", f, 4.0), "controller.T");
    cfg.nominal.beta = number_or(c, "beta", f, 0.3);
    if (!(cfg.nominal.beta > 0.0 && cfg.nominal.beta < 1.0)) throw SchemaError("controller.beta", "beta must lie in (0,1)");

    const int r = s.plant.r;
    const int dim = s.plant.n;
    if (cfg.n() != dim) {
        throw SchemaError("hard", "constraints act on x1 of dimension " + std::to_string(cfg.n()) +
                                      " but the plant output has dimension " + std::to_string(dim));
    }
    if (c["k_layers"]) {
        const Eigen::VectorXd k = as_vector(c["k_layers"], "controller.k_layers");
        if (k.size() != r - 1) {
            throw SchemaError("controller.k_layers", "expected " + std::to_string(r - 1) + " gains (one per layer 2..r)");
        }
        for (Eigen::Index i = 0; i < k.size(); ++i) {
            cfg.k_layers.push_back(positive(k[i], index_path("controller.k_layers", static_cast<std::size_t>(i))));
        }
    } else {
        cfg.k_layers.assign(static_cast<std::size_t>(r - 1), 1.0);
    }

    s.rho0_auto = !c["rho0"] || is_auto(c["rho0"]);
    cfg.nominal.rho0 = s.rho0_auto ? 0.0 : number_or(c, "rho0", f, 0.0);
    if (cfg.nominal.rho0 > 0.0) throw SchemaError("controller.rho0", "must be <= 0 or 'auto'");

    cfg.shifting.Ts = positive(number_or(c, "Ts", f, cfg.nominal.T), "controller.Ts");
    if (cfg.mode == ControlMode::global && cfg.shifting.Ts > cfg.nominal.T) {
        throw SchemaError("controller.Ts", "must not exceed T in global mode");
    }

    Funnel fun;
    s.theta0_auto = true;
    if (const YAML::Node fn = c["funnel"]) {
        const std::string ff = "controller.funnel";
        require_keys(fn, ff, {"theta0", "theta_inf", "decay"});
        fun.theta_inf = positive(number_or(fn, "theta_inf", ff, 0.1), "controller.funnel.theta_inf");
        fun.decay = positive(number_or(fn, "decay", ff, 1.0), "controller.funnel.decay");
        s.theta0_auto = !fn["theta0"] || is_auto(fn["theta0"]);
        if (!s.theta0_auto) {
            fun.theta0 = positive(number_or(fn, "theta0", ff, 1.0), "controller.funnel.theta0");
            if (fun.theta0 < fun.theta_inf) throw SchemaError("controller.funnel.theta0", "must be >= theta_inf");
        }
    }
    if (s.theta0_auto) fun.theta0 = std::max(1.0, fun.theta_inf);
    cfg.funnels.assign(static_cast<std::size_t>(r - 1), std::vector<Funnel>(static_cast<std::size_t>(dim), fun));

    if (cfg.mode == ControlMode::global && !s.rho0_auto && !(cfg.nominal.rho0 < 0.0)) {
        throw SchemaError("controller.rho0", "global mode needs rho0 < 0");
    }
    try {
        ControllerConfig probe = cfg;
        if (probe.mode == ControlMode::global && s.rho0_auto) probe.nominal.rho0 = -1.0;
        probe.validate();
    } catch (const ConfigError& e) {
        throw SchemaError("controller", e.what());
    }
    s.controller = std::move(cfg);
}

void parse_sim(const YAML::Node& n, ScenarioFile& s) {
    if (!n) return;
    require_keys(n, "sim", {"dt", "t_final", "log_stride"});
    s.sim.dt = number_or(n, "dt", "sim", s.sim.dt);
    if (!(s.sim.dt > 0.0 && s.sim.dt <= 0.01)) throw SchemaError("sim.dt", "must lie in (0, 0.01]");
    s.sim.t_final = positive(number_or(n, "t_final", "sim", s.sim.t_final), "sim.t_final");
    const double stride = number_or(n, "log_stride", "sim", 1.0);
    if (stride < 1 || stride != std::floor(stride)) throw SchemaError("sim.log_stride", "must be a positive integer");
    s.sim.log_stride = static_cast<int>(stride);
}

void parse_view(const YAML::Node& n, ScenarioFile& s) {
    const int dim = s.plant.n;
    s.view.lower = Eigen::VectorXd::Constant(dim, -7.0);
    s.view.upper = Eigen::VectorXd::Constant(dim, 7.0);
    if (!n) return;
    require_keys(n, "view", {"lower", "upper"});
    if (n["lower"]) s.view.lower = as_vector(n["lower"], "view.lower");
    if (n["upper"]) s.view.upper = as_vector(n["upper"], "view.upper");
    if (s.view.lower.size() != dim || s.view.upper.size() != dim) {
        throw SchemaError("view", "bounds must have the x1 dimension");
    }
    if ((s.view.upper.array() <= s.view.lower.array()).any()) throw SchemaError("view", "upper must exceed lower");
}

ScenarioFile build(const YAML::Node& root, const std::string& origin) {
    if (!root || root.IsNull()) throw SchemaError("<root>", "empty scenario");
    require_keys(root, "", {"name", "description", "plant", "initial", "hard", "soft", "controller", "sim", "view"});
    ScenarioFile s;
    s.path = origin;
    s.name = root["name"] ? as_string(root["name"], "name") : fs::path(origin).stem().string();
    s.description = root["description"] ? as_string(root["description"], "description") : "";
    parse_plant(root["plant"], root["initial"], s);
    ConsolidatedConstraint hard = parse_family(root["hard"], "hard", ConstraintClass::hard);
    ConsolidatedConstraint soft = parse_family(root["soft"], "soft", ConstraintClass::soft);
    parse_controller(root["controller"], s, std::move(hard), std::move(soft));
    parse_sim(root["sim"], s);
    parse_view(root["view"], s);
    return s;
}

YAML::Node load_yaml(const std::string& text) {
    try {
        return YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ParseError(e.msg, e.mark.line + 1, e.mark.column + 1);
    }
}

}  // namespace

ScenarioFile parse_scenario(const std::string& text, const std::string& origin) {
    const YAML::Node root = load_yaml(text);
    try {
        return build(root, origin);
    } catch (const YAML::Exception& e) {
        throw ParseError(e.msg, e.mark.line + 1, e.mark.column + 1);
    }
}

ScenarioFile load_scenario(const std::string& path) {
    const std::string resolved = resolve_scenario_path(path);
    std::ifstream in(resolved, std::ios::binary);
    if (!in) throw ConfigError("cannot read scenario file '" + resolved + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return parse_scenario(os.str(), resolved);
}

std::string preset_directory() {
    if (const char* env = std::getenv("HS_CTRL_PRESETS")) return env;
    return HSC_PRESET_DIR;
}

std::string resolve_scenario_path(const std::string& arg) {
    const fs::path p(arg);
    const fs::path dir(preset_directory());
    const std::vector<fs::path> candidates = {p, fs::path(arg + ".yaml"), dir / p.filename(),
                                              dir / (p.filename().string() + ".yaml")};
    for (const auto& c : candidates) {
        std::error_code ec;
        if (fs::is_regular_file(c, ec)) return c.string();
    }
    throw ConfigError("scenario '" + arg + "' not found (tried the path, '" + arg + ".yaml' and the preset directory " +
                      dir.string() + ")");
}

std::vector<std::string> list_presets() {
    std::vector<std::string> names;
    std::error_code ec;
    for (const auto& e : fs::directory_iterator(preset_directory(), ec)) {
        if (e.is_regular_file() && e.path().extension() == ".yaml") names.push_back(e.path().stem().string());
    }
    std::sort(names.begin(), names.end());
    return names;
}

void apply_mode(ScenarioFile& s, ControlMode mode) {
    ControllerConfig& cfg = *s.controller;
    if (cfg.mode == mode) return;
    cfg.mode = mode;
    if (mode == ControlMode::global) {
        cfg.shifting.Ts = std::min(cfg.shifting.Ts, cfg.nominal.T);
        // Global mode does not depend on the start; non-negative rho0 falls back to auto.
        if (!(cfg.nominal.rho0 < 0.0)) {
            s.rho0_auto = true;
            cfg.nominal.rho0 = 0.0;
        }
    }
}

ValidationReport prepare_controller(const ScenarioFile& s) {
    AutoTune tune;
    tune.rho0 = s.rho0_auto;
    tune.funnels = s.theta0_auto;
    return validate_initial(s.config(), s.measured0(), tune);
}

}  // namespace hsc
