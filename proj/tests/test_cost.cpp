#include <cmath>

#include <gtest/gtest.h>

#include "crossplan/cost.hpp"
#include "crossplan/simulation.hpp"

using namespace crossplan;

namespace
{
SampledTrajectory constant_jerk(double j, double duration)
{
  SampledTrajectory t;
  for (double time : sample_times(0.0, duration, kSampleDt)) {
    t.states.push_back({time, 0.0, 10.0, 0.0, j});
    t.controls.push_back(0.0);
  }
  return t;
}

CrossingForecast constant_forecast(double a, double te)
{
  const auto n = static_cast<std::size_t>(std::floor(te)) + 1;
  return accumulate_evidence(std::vector<double>(n, a), 1.0, 0.0, te);
}
}  // namespace

TEST(Comfort, Values)
{
  const double w_j = 2.25e-4;
  EXPECT_EQ(comfort_cost(cv_reference({0, 0, 10, 0, 0}, 30.0), w_j), 0.0);
  EXPECT_NEAR(comfort_cost(constant_jerk(1.0, 1.0), w_j), 1.125e-4, 1e-15);
  EXPECT_GE(comfort_cost(constant_jerk(-3.0, 2.0), w_j), 0.0);
}

TEST(VehicleUtility, ConstantVelocity)
{
  const auto cv = cv_reference({0, 0, 10, 0, 0}, 30.0);
  EXPECT_NEAR(vehicle_utility(cv, -3e-4, 30.0, 10.0, 3.0), -9e-3, 1e-15);
  for (double d0 : {20.0, 47.0, 90.0}) {
    for (double v0 : {4.0, 10.0, 13.5}) {
      const auto t = cv_reference({0, 0, v0, 0, 0}, d0);
      EXPECT_NEAR(vehicle_utility(t, -3e-4, d0, v0, t.duration()), -3e-4 * d0, 1e-9);
    }
  }
}

TEST(VehicleUtility, DegenerateAndInvalid)
{
  SampledTrajectory single;
  single.states = {{0, 30, 0, 0, 0}};
  EXPECT_EQ(vehicle_utility(single, -3e-4, 30.0, 10.0, 0.0), 0.0);
  EXPECT_THROW(vehicle_utility(single, -3e-4, 30.0, 0.0, 1.0), std::invalid_argument);
}

TEST(PedestrianUtility, Bounds)
{
  const CostWeights w;
  const double te = 4.0;
  const auto never = pedestrian_utility(constant_forecast(0.0, te), w, 30.0, 10.0, te);
  EXPECT_DOUBLE_EQ(never.t_wait, te);
  EXPECT_DOUBLE_EQ(never.c_util_p, w.w_wt * te);
  const auto now = pedestrian_utility(constant_forecast(1.0, te), w, 30.0, 10.0, te);
  EXPECT_EQ(now.t_wait, 0.0);
  EXPECT_DOUBLE_EQ(now.c_util_p, 30.0 / (te * 10.0) * w.w_tb_p * w.v_ped * te);
}

TEST(CostWeights, Validation)
{
  CostWeights w;
  w.w_tb_v = 1e-3;
  EXPECT_THROW(w.validate(), std::invalid_argument);
  w = {};
  w.w_wt = -1.0;
  EXPECT_THROW(w.validate(), std::invalid_argument);
}

TEST(JointCost, Additivity)
{
  const auto traj = ca_reference({0, 0, 10, 0, 0}, 30.0);
  const auto fc = forecast(traj, 30.0, AcceptanceParams{}, 1.0);
  const auto c = evaluate_costs(traj, fc, CostWeights{}, 30.0, 10.0);
  EXPECT_EQ(c.c_joint, c.c_comf_v + c.c_util_v + c.c_util_p);
  EXPECT_EQ(c.d0, 30.0);
  EXPECT_GE(c.t_wait, 0.0);
  EXPECT_LE(c.t_wait, traj.duration());
}

namespace
{
CandidatePlan scored(double joint, double te1, double se1)
{
  CandidatePlan c;
  c.feasible = true;
  c.te1 = te1;
  c.se1 = se1;
  c.costs = CostBreakdown{};
  c.costs->c_joint = joint;
  return c;
}
}  // namespace

TEST(Selection, ArgminArgmaxAndTieBreak)
{
  std::vector<CandidatePlan> v{scored(1.0, 2.0, 10), scored(-1.0, 3.0, 12), scored(-1.0, 2.0, 14),
                               scored(-1.0, 2.0, 13), scored(5.0, 1.0, 1)};
  const auto sel = select_best(v);
  EXPECT_EQ(sel.best, 3u);
  EXPECT_EQ(sel.worst, 4u);
  EXPECT_EQ(sel.table.size(), 5u);
}

TEST(Selection, SkipsUnscoredAndThrowsWhenEmpty)
{
  std::vector<CandidatePlan> v{CandidatePlan{}};
  EXPECT_THROW(select_best(v), NoFeasibleCandidate);
  EXPECT_THROW(select_best({}), NoFeasibleCandidate);
  v.push_back(scored(0.3, 1.0, 1.0));
  EXPECT_EQ(select_best(v).best, 1u);
}

TEST(Selection, ThirtyMetreScenarioShowsNoYieldingCue)
{
  Scenario sc;
  sc.s_ped = 30.0;
  const auto ps = plan_and_select(sc);
  const auto & best = ps.plan.candidates[ps.selection.best];
  EXPECT_NEAR(best.max_taudot, -1.0, 0.05);
  for (const auto & c : ps.plan.candidates) {
    EXPECT_GE(c.costs->t_wait, 0.0);
    EXPECT_LE(c.costs->t_wait, c.plan.duration() + 1e-12);
  }
}

TEST(Selection, FortyMetreScenarioOpensTheGap)
{
  Scenario sc;
  sc.s_ped = 40.0;
  const auto ps = plan_and_select(sc);
  EXPECT_GT(ps.plan.candidates[ps.selection.best].max_taudot, 0.0);
}

// Raising the weight of one cost term can never raise that term at the argmin.
// The crossing probability at te is not monotone in w_wt: the waiting integral
// stops at te, so a larger w_wt also rewards plans that pass sooner.
TEST(Selection, WaitingWeightNeverRaisesWaitingTime)
{
  for (double s_ped : {30.0, 40.0}) {
    double prev = 1e9;
    for (double w_wt : {0.0, 0.05, 0.2}) {
      Scenario sc;
      sc.s_ped = s_ped;
      sc.cost.w_wt = w_wt;
      const auto ps = plan_and_select(sc);
      const double wait = ps.plan.candidates[ps.selection.best].costs->t_wait;
      EXPECT_LE(wait, prev + 1e-12) << "s_ped=" << s_ped << " w_wt=" << w_wt;
      prev = wait;
    }
  }
}
