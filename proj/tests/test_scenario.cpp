#include <cmath>
#include <numbers>
#include <string>

#include <gtest/gtest.h>

#include "gfm/scenario.hpp"
#include "support.hpp"

using namespace gfm;

namespace {

Scenario with_events(std::vector<DisturbanceEvent> events, double t_end = 5.0) {
    Scenario sc;
    sc.plant = PlantParams::from_scr(10.0);
    sc.events = std::move(events);
    sc.t_end = t_end;
    return sc;
}

ScenarioError parse_error(const std::string& text) {
    try {
        parse_scenario(text);
    } catch (const ScenarioError& e) {
        return e;
    }
    ADD_FAILURE() << "expected a ScenarioError for:\n" << text;
    return ScenarioError("", "");
}

}  // namespace

TEST(GridStateAt, NominalBeforeEvents) {
    const auto sc = with_events({{1.0, PhaseJump{-60.0}}});
    const auto g = grid_state_at(sc, 0.5);
    EXPECT_EQ(g.v_g, 1.0);
    EXPECT_EQ(g.omega_g, 1.0);
    EXPECT_NEAR(g.theta_g, kOmegaBase * 0.5, 1e-12);
}

TEST(GridStateAt, PhaseJumpIsAStep) {
    const auto sc = with_events({{1.0, PhaseJump{-60.0}}});
    const double h = 1e-9;
    const double before = grid_state_at(sc, 1.0 - h).theta_g;
    const double after = grid_state_at(sc, 1.0).theta_g;
    EXPECT_NEAR(rad2deg(after - before - kOmegaBase * h), -60.0, 1e-9);
    EXPECT_NEAR(grid_state_at(sc, 3.0).theta_g, kOmegaBase * 3.0 - std::numbers::pi / 3, 1e-12);
}

TEST(GridStateAt, RocofRampsThenHolds) {
    const auto sc = with_events({{1.0, Rocof{-5.0, 0.2}}});
    EXPECT_EQ(grid_state_at(sc, 1.0).omega_g, 1.0);
    EXPECT_NEAR(grid_state_at(sc, 1.1).omega_g, 1.0 - 0.5 / 50.0, 1e-12);
    for (double t : {1.2, 1.5, 4.9}) EXPECT_NEAR(grid_state_at(sc, t).omega_g, 0.98, 1e-12) << t;
}

TEST(GridStateAt, DipRestoresExactly) {
    auto sc = with_events({{1.0, VoltageDip{0.2, 0.2}}});
    sc.v_g0 = 1.03;
    EXPECT_EQ(grid_state_at(sc, 0.99).v_g, 1.03);
    EXPECT_EQ(grid_state_at(sc, 1.0).v_g, 0.2);
    EXPECT_EQ(grid_state_at(sc, 1.1999).v_g, 0.2);
    EXPECT_EQ(grid_state_at(sc, 1.2).v_g, 1.03);
    EXPECT_EQ(grid_state_at(sc, 4.0).v_g, 1.03);
}

TEST(GridStateAt, SimultaneousJumpAndRampAreIndependent) {
    const auto both = with_events({{1.0, PhaseJump{-60.0}}, {1.0, Rocof{-5.0, 0.2}}});
    const auto jump = with_events({{1.0, PhaseJump{-60.0}}});
    const auto ramp = with_events({{1.0, Rocof{-5.0, 0.2}}});
    for (double t : {0.5, 1.0, 1.05, 1.3, 3.0}) {
        const double expect = grid_state_at(jump, t).theta_g + grid_state_at(ramp, t).theta_g - kOmegaBase * t;
        EXPECT_NEAR(grid_state_at(both, t).theta_g, expect, 1e-9) << t;
        EXPECT_EQ(grid_state_at(both, t).omega_g, grid_state_at(ramp, t).omega_g);
    }
}

TEST(GridStateProperty, AngleIsFrequencyIntegralPlusJumps) {
    const auto sc = with_events({{0.3, Rocof{2.0, 0.4}},
                                 {1.0, PhaseJump{25.0}},
                                 {1.5, Rocof{-5.0, 0.2}},
                                 {1.6, PhaseJump{-60.0}},
                                 {2.0, VoltageDip{0.3, 0.1}}});
    const double dt = 1e-5;
    double theta = grid_state_at(sc, 0.0).theta_g;
    double worst = 0.0;
    double prev_w = grid_state_at(sc, 0.0).omega_g;
    for (long k = 1; k <= 300000; ++k) {
        const double t0 = static_cast<double>(k - 1) * dt, t1 = static_cast<double>(k) * dt;
        const double w = grid_state_at(sc, t1).omega_g;
        theta += 0.5 * (prev_w + w) * kOmegaBase * dt;
        for (const auto& ev : sc.events) {
            if (const auto* j = std::get_if<PhaseJump>(&ev.kind); j && ev.at > t0 && ev.at <= t1) {
                theta += deg2rad(j->delta_theta_deg);
            }
        }
        prev_w = w;
        worst = std::max(worst, std::abs(theta - grid_state_at(sc, t1).theta_g));
    }
    EXPECT_LT(worst, 1e-6);
}

TEST(GridStateProperty, ContinuousAwayFromJumps) {
    const auto sc = with_events({{1.0, Rocof{-5.0, 0.2}}, {2.0, PhaseJump{30.0}}});
    const double h = 1e-7;
    for (double t = 0.01; t < 4.0; t += 0.01) {
        if (std::abs(t - 2.0) < 2e-7) continue;
        const double jump = std::abs(grid_state_at(sc, t + h).theta_g - grid_state_at(sc, t).theta_g);
        EXPECT_LT(jump, 2 * kOmegaBase * h) << t;
    }
}

TEST(ScenarioValidation, OverlappingDipsRejected) {
    const auto sc = with_events({{1.0, VoltageDip{0.2, 0.5}}, {1.2, VoltageDip{0.5, 0.1}}});
    EXPECT_THROW(validate(sc), ScenarioError);
    const auto ok = with_events({{1.0, VoltageDip{0.2, 0.2}}, {1.2, VoltageDip{0.5, 0.1}}});
    EXPECT_NO_THROW(validate(ok));
}

TEST(ScenarioValidation, UnsortedEventsRejected) {
    EXPECT_THROW(validate(with_events({{2.0, PhaseJump{1}}, {1.0, PhaseJump{1}}})), ScenarioError);
}

TEST(ParseScenario, GoldenPhaseJumpAndRamp) {
    const auto sc = gfm::test::golden("fig16");
    ASSERT_TRUE(sc.scr);
    EXPECT_EQ(*sc.scr, 10.0);
    EXPECT_DOUBLE_EQ(sc.plant.x_g, 0.1);
    EXPECT_EQ(sc.p_m, 0.4);
    EXPECT_EQ(sc.t_end, 5.0);
    ASSERT_EQ(sc.events.size(), 2u);
    EXPECT_EQ(sc.events[0].at, 1.0);
    EXPECT_EQ(std::get<PhaseJump>(sc.events[0].kind).delta_theta_deg, -60.0);
    EXPECT_EQ(sc.events[1].at, 1.0);
    EXPECT_EQ(std::get<Rocof>(sc.events[1].kind).rate_hz_per_s, -5.0);
    EXPECT_EQ(std::get<Rocof>(sc.events[1].kind).duration, 0.2);
}

TEST(ParseScenario, AllGoldenFilesLoad) {
    for (const char* n : {"fig14", "fig15", "fig16", "fig17", "fig18", "fig19", "empty"}) {
        EXPECT_NO_THROW(gfm::test::golden(n)) << n;
    }
    EXPECT_TRUE(gfm::test::golden("empty").events.empty());
}

TEST(ParseScenario, MinimalFileUsesDefaults) {
    const auto sc = parse_scenario("[plant]\nx_g = 0.5\n");
    EXPECT_EQ(sc.plant.x_g, 0.5);
    EXPECT_EQ(sc.plant.x_f, 0.1);
    EXPECT_EQ(sc.p_m, 0.0);
    EXPECT_EQ(sc.t_end, 5.0);
    EXPECT_FALSE(sc.dt);
    EXPECT_TRUE(sc.events.empty());
}

TEST(ParseScenario, NegativeDipLevelNamesField) {
    const auto e = parse_error(
        "[plant]\nscr = 10\n\n[[events]]\nat = 1.0\nkind = \"voltage_dip\"\nlevel = -0.1\nduration = 0.2\n");
    EXPECT_EQ(e.field(), "events[0].level");
    EXPECT_NE(std::string(e.what()).find("level"), std::string::npos);
}

TEST(ParseScenario, UnknownKeyReportsLine) {
    const auto e = parse_error("[plant]\nscr = 10\nxg = 0.1\n");
    EXPECT_EQ(e.field(), "plant.xg");
    EXPECT_EQ(e.line(), 3u);
}

TEST(ParseScenario, UnknownTopLevelTable) {
    EXPECT_EQ(parse_error("[plant]\nscr = 10\n[solver]\norder = 2\n").field(), "solver");
}

TEST(ParseScenario, SyntaxErrorReportsLine) {
    const auto e = parse_error("[plant]\nscr = 10\n[sim\nt_end = 1\n");
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
}

TEST(ParseScenario, FieldLevelErrors) {
    EXPECT_EQ(parse_error("[operating_point]\np_m = 0.1\n").field(), "plant");
    EXPECT_EQ(parse_error("[plant]\nscr = 10\nx_g = 0.1\n").field(), "plant.scr");
    EXPECT_EQ(parse_error("[plant]\nscr = -1\n").field(), "plant.scr");
    EXPECT_EQ(parse_error("[plant]\nscr = 10\n[operating_point]\np_m = 1.5\n").field(), "operating_point.p_m");
    EXPECT_EQ(parse_error("[plant]\nscr = 10\n[sim]\nvariant = \"turbo\"\n").field(), "sim.variant");
    EXPECT_EQ(parse_error("[plant]\nscr = \"ten\"\n").field(), "plant.scr");
    EXPECT_EQ(parse_error("[plant]\nscr = 10\n[[events]]\nat = 1\nkind = \"blackout\"\n").field(), "events[0].kind");
    EXPECT_EQ(parse_error("[plant]\nscr = 10\n[[events]]\nat = 1\nkind = \"rocof\"\nrate = -5\n").field(),
              "events[0].duration");
    EXPECT_EQ(parse_error("[plant]\nscr = 10\n[[events]]\nkind = \"phase_jump\"\ndelta_theta = 5\n").field(),
              "events[0].at");
    EXPECT_EQ(parse_error("[plant]\nscr = 10\n[[events]]\nat = 1\nkind = \"phase_jump\"\ndelta_theta = 5\nrate = 1\n")
                  .field(),
              "events[0].rate");
}

TEST(ParseScenario, IntegersAreAcceptedAsNumbers) {
    const auto sc = parse_scenario("[plant]\nscr = 1\n[sim]\nt_end = 2\ndt = 0.0001\nvariant = \"slow\"\n");
    EXPECT_EQ(sc.plant.x_g, 1.0);
    EXPECT_EQ(sc.t_end, 2.0);
    EXPECT_EQ(sc.dt, 1e-4);
    EXPECT_EQ(sc.variant, ControlVariant::SlowIVS);
}

TEST(ParseScenario, EventsAreSortedByTime) {
    const auto sc = parse_scenario(
        "[plant]\nscr = 10\n[[events]]\nat = 2\nkind = \"phase_jump\"\ndelta_theta = 1\n"
        "[[events]]\nat = 1\nkind = \"phase_jump\"\ndelta_theta = 2\n");
    EXPECT_EQ(sc.events[0].at, 1.0);
    EXPECT_EQ(sc.events[1].at, 2.0);
}

TEST(LoadScenario, MissingFile) {
    EXPECT_THROW(load_scenario("/nonexistent/scenario.toml"), ScenarioError);
}
