#include <cmath>

#include <gtest/gtest.h>

#include "crossplan/simulation.hpp"

using namespace crossplan;

TEST(Agent, ScriptedWithoutTimeNeverCrosses)
{
  AgentConfig cfg;
  auto a = make_agent(cfg);
  for (int k = 0; k < 50; ++k) {
    a = pedestrian_agent_step(a, cfg, k, 1.0);
  }
  EXPECT_EQ(a.phase, AgentPhase::kWaiting);
  EXPECT_EQ(a.decisions, 50);
}

TEST(Agent, ScriptedCrossesAtFirstDecisionAfterTime)
{
  AgentConfig cfg;
  cfg.cross_time = 2.5;
  auto a = make_agent(cfg);
  a = pedestrian_agent_step(a, cfg, 2.0, 0.0);
  EXPECT_EQ(a.phase, AgentPhase::kWaiting);
  a = pedestrian_agent_step(a, cfg, 3.0, 0.0);
  EXPECT_EQ(a.phase, AgentPhase::kCrossing);
  EXPECT_EQ(a.commit_time, 3.0);
  EXPECT_NEAR(a.clear_time, 3.0 + 4.0 / 1.5, 1e-12);
}

TEST(Agent, ThresholdMode)
{
  AgentConfig cfg;
  cfg.mode = AgentMode::kThreshold;
  cfg.threshold = 0.6;
  auto a = make_agent(cfg);
  a = pedestrian_agent_step(a, cfg, 0.0, 0.59);
  EXPECT_EQ(a.phase, AgentPhase::kWaiting);
  a = pedestrian_agent_step(a, cfg, 1.0, 0.6);
  EXPECT_EQ(a.phase, AgentPhase::kCrossing);
}

TEST(Agent, StochasticCertainAndImpossible)
{
  AgentConfig cfg;
  cfg.mode = AgentMode::kStochastic;
  auto a = make_agent(cfg);
  for (int k = 0; k < 100; ++k) {
    a = pedestrian_agent_step(a, cfg, k, 0.0);
  }
  EXPECT_EQ(a.phase, AgentPhase::kWaiting);
  a = pedestrian_agent_step(a, cfg, 100.0, 1.0);
  EXPECT_EQ(a.phase, AgentPhase::kCrossing);
}

TEST(Agent, StochasticGeometricMean)
{
  // with a constant alpha the number of decisions until crossing is geometric
  AgentConfig cfg;
  cfg.mode = AgentMode::kStochastic;
  const int runs = 10000;
  double total = 0.0;
  for (int r = 0; r < runs; ++r) {
    cfg.seed = static_cast<std::uint64_t>(r) + 1;
    auto a = make_agent(cfg);
    while (a.phase == AgentPhase::kWaiting) {
      a = pedestrian_agent_step(a, cfg, a.decisions, 0.5);
    }
    total += a.decisions;
  }
  EXPECT_NEAR(total / runs, 2.0, 0.04);
}

TEST(Agent, ModeNames)
{
  EXPECT_EQ(parse_agent_mode("stochastic"), AgentMode::kStochastic);
  EXPECT_STREQ(to_string(parse_agent_mode("threshold")), "threshold");
  EXPECT_THROW(parse_agent_mode("maybe"), std::invalid_argument);
}

TEST(OpenLoop, ThirtyMetresNoYieldingCue)
{
  Scenario sc;
  const auto r = run_open_loop(sc);
  EXPECT_TRUE(r.no_yielding_communication);
  EXPECT_LE(r.best_candidate().max_taudot, kNoYieldTaudot);
  EXPECT_NE(r.selection.best, r.selection.worst);
  EXPECT_NEAR(r.cv.max_taudot, -1.0, 1e-9);
  EXPECT_NEAR(r.ca.max_taudot, -0.5, 1e-9);
}

TEST(OpenLoop, FortyMetresOpensGap)
{
  Scenario sc;
  sc.s_ped = 40.0;
  const auto r = run_open_loop(sc);
  EXPECT_FALSE(r.no_yielding_communication);
  EXPECT_GT(r.best_candidate().max_taudot, 0.0);
  const auto & c = *r.best_candidate().costs;
  EXPECT_EQ(c.c_joint, c.c_comf_v + c.c_util_v + c.c_util_p);
}

TEST(OpenLoop, InvalidScenario)
{
  Scenario sc;
  sc.s_ped = -1.0;
  EXPECT_THROW(sc.validate(), std::invalid_argument);
  sc = {};
  sc.params.beta = 2.0;
  EXPECT_THROW(sc.validate(), std::invalid_argument);
}

namespace
{
SimConfig crossing_at(double t)
{
  SimConfig cfg;
  cfg.agent.cross_time = t;
  return cfg;
}
}  // namespace

TEST(ClosedLoop, ExecutedTrajectoryIsContinuous)
{
  Scenario sc;
  sc.s_ped = 40.0;
  SimConfig cfg;
  cfg.max_time = 6.0;
  const auto tr = run_closed_loop(sc, cfg);
  ASSERT_GT(tr.executed.states.size(), 2u);
  const auto & xs = tr.executed.states;
  for (std::size_t i = 1; i < xs.size(); ++i) {
    const double dt = xs[i].t - xs[i - 1].t;
    ASSERT_GT(dt, 0.0);
    // no jumps in position, speed or acceleration across replans
    EXPECT_NEAR(xs[i].s, xs[i - 1].s + dt * xs[i - 1].v, 0.05);
    EXPECT_NEAR(xs[i].v, xs[i - 1].v, 0.1);
    EXPECT_NEAR(xs[i].a, xs[i - 1].a, 0.2);
  }
}

TEST(ClosedLoop, ForecastResetsToCurrentState)
{
  Scenario sc;
  sc.s_ped = 40.0;
  SimConfig cfg;
  cfg.max_time = 4.0;
  const auto tr = run_closed_loop(sc, cfg);
  for (const auto & st : tr.steps) {
    if (st.best_id >= 0 && !st.continued) {
      EXPECT_NEAR(st.p_cross0, st.alpha, 1e-12);
    }
  }
}

TEST(ClosedLoop, SameSeedSameTrace)
{
  Scenario sc;
  sc.s_ped = 40.0;
  SimConfig cfg;
  cfg.max_time = 8.0;
  cfg.agent.mode = AgentMode::kStochastic;
  cfg.agent.seed = 7;
  const auto a = run_closed_loop(sc, cfg);
  const auto b = run_closed_loop(sc, cfg);
  EXPECT_TRUE(a.same_as(b));
}

TEST(ClosedLoop, ImmediateCrossingStopsBeforePedestrian)
{
  Scenario sc;
  sc.s_ped = 40.0;
  const auto tr = run_closed_loop(sc, crossing_at(0.0));
  EXPECT_FALSE(tr.passed_while_crossing);
  EXPECT_EQ(tr.outcome, SimOutcome::kPedestrianCrossed);
  ASSERT_FALSE(tr.steps.empty());
  EXPECT_TRUE(tr.steps.front().fallback);
  for (const auto & x : tr.executed.states) {
    EXPECT_LE(x.s, sc.s_ped + 1e-9);
    EXPECT_GE(x.v, -1e-9);
    EXPECT_GE(x.a, sc.limits.a_min - 1e-9);
  }
}

TEST(ClosedLoop, UnhinderedVehiclePasses)
{
  Scenario sc;
  sc.s_ped = 30.0;
  const auto tr = run_closed_loop(sc, SimConfig{});
  EXPECT_EQ(tr.outcome, SimOutcome::kVehiclePassed);
  EXPECT_FALSE(tr.passed_while_crossing);
  EXPECT_GE(tr.executed.states.back().s, sc.s_ped - 1e-9);
}

TEST(ClosedLoop, RejectsBadConfig)
{
  SimConfig cfg;
  cfg.replan_period = 0.0;
  EXPECT_THROW(run_closed_loop(Scenario{}, cfg), std::invalid_argument);
}

TEST(Sweep, RangeValues)
{
  EXPECT_EQ((Range{20, 100, 10}.values().size()), 9u);
  EXPECT_EQ((Range{8, 12, 2}.values()), (std::vector<double>{8, 10, 12}));
  EXPECT_EQ((Range{5, 5, 1}.values()), (std::vector<double>{5}));
  EXPECT_THROW(Range({1, 2, 0}).values(), std::invalid_argument);
}

TEST(Sweep, SmallMap)
{
  const auto r = decision_map_sweep({30, 40, 10}, {10, 10, 1}, Scenario{});
  ASSERT_EQ(r.cells.size(), 2u);
  EXPECT_EQ(r.cells[0].d0, 30.0);
  EXPECT_EQ(r.cells[0].tau_init, 3.0);
  ASSERT_TRUE(r.cells[0].max_taudot);
  EXPECT_NEAR(*r.cells[0].max_taudot, -1.0, 1e-9);
  ASSERT_TRUE(r.cells[1].max_taudot);
  EXPECT_GT(*r.cells[1].max_taudot, 0.0);
  EXPECT_FALSE(r.isoline_taus.empty());
}
