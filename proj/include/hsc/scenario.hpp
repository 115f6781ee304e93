#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "hsc/constraint.hpp"
#include "hsc/controller.hpp"
#include "hsc/plant.hpp"
#include "hsc/simulator.hpp"

namespace hsc {

/// A fully validated scenario file.
///
/// The text format is YAML; see presets/ for annotated examples and README.md
/// for the field reference. Units: seconds, metres, radians.
struct ScenarioFile {
    std::string name;
    std::string description;
    std::string path;

    std::string plant_kind;  // "unicycle" or "chained_integrator"
    UnicycleParams unicycle;
    PlantSpec plant;
    /// Internal plant state at t = 0.
    Eigen::VectorXd state0;

    std::optional<ControllerConfig> controller;
    bool rho0_auto = false;
    bool theta0_auto = false;

    SimConfig sim;
    /// Plotting / diagnostic window in the x1 plane.
    Box view;

    /// Measured stacked state (x1, ..., xr) at t = 0.
    Eigen::VectorXd measured0() const { return plant.measure(state0); }
    const ControllerConfig& config() const { return *controller; }
};

/// Parses and validates a scenario. Throws ParseError for malformed text and
/// SchemaError (naming the field) for anything structurally or numerically
/// invalid, including unknown keys.
ScenarioFile load_scenario(const std::string& path);
ScenarioFile parse_scenario(const std::string& text, const std::string& origin = "<string>");

/// Accepts a path, a path without the ".yaml" suffix, or a bare preset name.
std::string resolve_scenario_path(const std::string& arg);

/// Directory holding the shipped presets (HS_CTRL_PRESETS overrides the build-time default).
std::string preset_directory();

/// Preset names (file stems) in preset_directory(), sorted.
std::vector<std::string> list_presets();

/// Switches the scenario's controller to the given mode. Entering global mode
/// without an explicit shifting time uses Ts = T.
void apply_mode(ScenarioFile& s, ControlMode mode);

/// Runs validate_initial with the scenario's "auto" requests.
ValidationReport prepare_controller(const ScenarioFile& s);

}  // namespace hsc
