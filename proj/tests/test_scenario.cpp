#include <gtest/gtest.h>

#include <cstdlib>
#include <string>

#include "hsc/errors.hpp"
#include "hsc/scenario.hpp"
#include "test_util.hpp"

using namespace hsc;

namespace {

const std::string kMinimal = R"(name: tiny
plant: {kind: chained_integrator, n: 2, r: 1}
initial: {state: [0.5, 0.0]}
hard:
  nu: 10
  primitives:
    - {kind: disk_interior, center: [0, 0], radius: 2}
soft:
  nu: 10
  primitives:
    - {kind: disk_interior, center: [1, 0], radius: 0.5}
controller:
  rho0: auto
sim: {dt: 0.001, t_final: 1}
)";

std::string replace(std::string s, const std::string& from, const std::string& to) {
    const auto pos = s.find(from);
    if (pos == std::string::npos) throw std::logic_error("fixture text not found: " + from);
    return s.replace(pos, from.size(), to);
}

}  // namespace

TEST(Scenario, Example1LoadsWithTableValues) {
    const ScenarioFile s = load_scenario(hsc::test::preset("ex1"));
    const ControllerConfig& c = s.config();
    EXPECT_EQ(s.name, "ex1");
    EXPECT_EQ(c.hard.nu(), 10.0);
    EXPECT_EQ(c.soft.nu(), 10.0);
    EXPECT_EQ(c.hard.size(), 3u);
    EXPECT_EQ(c.k_h, 1.0);
    EXPECT_EQ(c.k_s, 1.0);
    EXPECT_EQ(c.k_r, 1.5);
    EXPECT_EQ(c.delta_h, 0.5);
    EXPECT_EQ(c.delta_gamma, 10.0);
    EXPECT_EQ(c.nominal.T, 4.0);
    EXPECT_EQ(c.nominal.beta, 0.3);
    ASSERT_EQ(c.k_layers.size(), 1u);
    EXPECT_EQ(c.k_layers[0], 1.0);
    EXPECT_EQ(c.funnels[0][0].theta_inf, 0.1);
    EXPECT_EQ(c.funnels[0][0].decay, 1.0);
    EXPECT_TRUE(s.rho0_auto);
    EXPECT_TRUE(s.theta0_auto);
    EXPECT_EQ(s.plant_kind, "unicycle");
    EXPECT_EQ(s.unicycle.mass, 3.6);
    EXPECT_EQ(s.unicycle.inertia, 0.0405);
}

TEST(Scenario, Example4OverridesOnlyBoundaryWidth) {
    const ScenarioFile a = load_scenario(hsc::test::preset("ex1"));
    const ScenarioFile b = load_scenario(hsc::test::preset("ex4"));
    EXPECT_EQ(b.config().delta_h, 0.1);
    EXPECT_EQ(b.config().k_r, a.config().k_r);
    EXPECT_EQ(b.config().delta_gamma, a.config().delta_gamma);
}

TEST(Scenario, AllPresetsLoadAndValidate) {
    const auto names = list_presets();
    EXPECT_EQ(names.size(), std::size(hsc::test::kPresets));
    for (const char* p : hsc::test::kPresets) {
        const ScenarioFile s = load_scenario(p);
        const ValidationReport rep = prepare_controller(s);
        EXPECT_TRUE(rep.ok) << p << ": " << rep.first_failure();
    }
}

TEST(Scenario, PathResolution) {
    const std::string full = hsc::test::preset("ex2");
    EXPECT_EQ(resolve_scenario_path("ex2"), full);
    EXPECT_EQ(resolve_scenario_path(full.substr(0, full.size() - 5)), full);
    EXPECT_THROW(resolve_scenario_path("no_such_preset"), Error);
}

TEST(Scenario, MinimalTextParses) {
    const ScenarioFile s = parse_scenario(kMinimal);
    EXPECT_EQ(s.plant.n, 2);
    EXPECT_EQ(s.plant.r, 1);
    EXPECT_EQ(s.config().k_r, 1.5);
    const ValidationReport rep = prepare_controller(s);
    ASSERT_TRUE(rep.ok);
    EXPECT_LT(rep.tuned->nominal.rho0, rep.alpha_s0);
}

TEST(Scenario, BetaOutOfRange) {
    try {
        parse_scenario(replace(kMinimal, "  rho0: auto\n", "  rho0: auto\n  beta: 1.5\n"));
        FAIL() << "expected SchemaError";
    } catch (const SchemaError& e) {
        EXPECT_EQ(e.field(), "controller.beta");
        EXPECT_NE(std::string(e.what()).find("beta must lie in (0,1)"), std::string::npos);
    }
}

TEST(Scenario, EmptyHardList) {
    const std::string text = replace(kMinimal, "    - {kind: disk_interior, center: [0, 0], radius: 2}\n", "");
    try {
        parse_scenario(replace(text, "  primitives:\nsoft", "  primitives: []\nsoft"));
        FAIL() << "expected SchemaError";
    } catch (const SchemaError& e) {
        EXPECT_EQ(e.field(), "hard.primitives");
    }
}

TEST(Scenario, UnknownKeyRejected) {
    try {
        parse_scenario(replace(kMinimal, "  rho0: auto\n", "  rho0: auto\n  k_q: 3\n"));
        FAIL() << "expected SchemaError";
    } catch (const SchemaError& e) {
        EXPECT_EQ(e.field(), "controller.k_q");
    }
    EXPECT_THROW(parse_scenario(replace(kMinimal, "name: tiny", "name: tiny\nextra: 1")), SchemaError);
}

TEST(Scenario, BadPrimitiveParameters) {
    EXPECT_THROW(parse_scenario(replace(kMinimal, "center: [1, 0], radius: 0.5", "center: [1, 0], radius: -1")),
                 SchemaError);
    EXPECT_THROW(parse_scenario(replace(kMinimal, "{kind: disk_interior, center: [0, 0], radius: 2}",
                                        "{kind: radial_power, center: [0, 0], radius: 2, exponent: 2}")),
                 SchemaError);
    EXPECT_THROW(parse_scenario(replace(kMinimal, "{kind: disk_interior, center: [0, 0], radius: 2}",
                                        "{kind: blob, center: [0, 0], radius: 2}")),
                 SchemaError);
    EXPECT_THROW(parse_scenario(replace(kMinimal, "dt: 0.001", "dt: 0.5")), SchemaError);
}

TEST(Scenario, SignalsParse) {
    const std::string text = replace(
        kMinimal, "{kind: disk_interior, center: [1, 0], radius: 0.5}",
        "{kind: disk_interior, center: [{sum: [{linear: {slope: 0.1, offset: 1}}, {sine: {amplitude: 0.2, "
        "frequency: 2}}]}, {scaled: {factor: 2, signal: {product: [0.5, {cosine: {amplitude: 1, frequency: 1}}]}}}], "
        "radius: 0.5}");
    const ScenarioFile s = parse_scenario(text);
    const auto& c = std::get<DiskInterior>(s.config().soft.primitives()[0].shape()).center;
    const double t = 0.7;
    EXPECT_NEAR(c[0].value(t), 1 + 0.1 * t + 0.2 * std::sin(2 * t), 1e-15);
    EXPECT_NEAR(c[1].value(t), std::cos(t), 1e-15);
}

TEST(Scenario, ParseErrorCarriesPosition) {
    try {
        parse_scenario("name: x\nplant: {kind: unicycle\n");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_GE(e.line(), 2);
        EXPECT_GE(e.column(), 1);
    }
}

TEST(Scenario, GlobalModeSwitch) {
    ScenarioFile s = load_scenario(hsc::test::preset("ex1"));
    apply_mode(s, ControlMode::global);
    EXPECT_EQ(s.config().mode, ControlMode::global);
    EXPECT_LE(s.config().shifting.Ts, s.config().nominal.T);
    const ValidationReport rep = prepare_controller(s);
    ASSERT_TRUE(rep.ok);
    EXPECT_LT(rep.tuned->nominal.rho0, 0.0);
}

TEST(Scenario, PresetDirectoryOverride) {
    ::setenv("HS_CTRL_PRESETS", "/nonexistent/presets", 1);
    EXPECT_EQ(preset_directory(), "/nonexistent/presets");
    ::unsetenv("HS_CTRL_PRESETS");
    EXPECT_NE(preset_directory(), "/nonexistent/presets");
}
