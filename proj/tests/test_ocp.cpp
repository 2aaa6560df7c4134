#include <cmath>
#include <random>

#include <boost/numeric/odeint.hpp>
#include <gtest/gtest.h>

#include "crossplan/ocp.hpp"
#include "random_cases.hpp"
#include "transcription_oracle.hpp"

using namespace crossplan;

namespace
{
const OcpWeights kWeights{};

oracle::Problem stage1_problem(const VehicleState & x0, double se1)
{
  oracle::Problem p;
  p.x0 = {x0.s, x0.v, x0.a, x0.j};
  p.target = {se1, std::nullopt, 0.0, 0.0};
  p.w_j = kWeights.w_j;
  p.w_u = kWeights.w_u;
  return p;
}

oracle::Problem stage2_problem(const VehicleState & x1, double s_ped)
{
  oracle::Problem p;
  p.x0 = {x1.s, x1.v, x1.a, x1.j};
  p.target = {s_ped, std::nullopt, std::nullopt, std::nullopt};
  p.w_j = kWeights.w_j;
  p.w_u = kWeights.w_u;
  p.w_te = kWeights.w_te;
  return p;
}

JerkClosedForm random_form(std::mt19937_64 & rng)
{
  std::uniform_real_distribution<double> c(-1.0, 1.0);
  JerkClosedForm cf;
  cf.w_j = kWeights.w_j;
  cf.w_u = kWeights.w_u;
  cf.lambda = kWeights.lambda();
  cf.k1 = 0.05 * c(rng);
  cf.k2 = c(rng);
  cf.c1 = 1e-4 * c(rng);
  cf.c2 = 1e-4 * c(rng);
  cf.c3 = 1e-4 * c(rng);
  cf.t_start = 0.5;
  cf.t_end = 4.5;
  cf.x_start = {0.5, 3.0, 8.0, 0.0, 0.0};
  cf.x_start.j = cf.jerk(cf.t_start);
  return cf;
}

void expect_stationary(const JerkClosedForm & cf)
{
  for (double t : sample_times(cf.t_start, cf.t_end, cf.duration() / 50.0)) {
    const double rhs = cf.euler_lagrange_rhs(t);
    EXPECT_NEAR(cf.jerk_second_derivative(t), rhs, 1e-6 * std::max(1.0, std::abs(rhs))) << "t=" << t;
  }
}
}  // namespace

TEST(ClosedForm, ZeroCoefficientsGiveConstantVelocity)
{
  JerkClosedForm cf;
  cf.w_j = kWeights.w_j;
  cf.w_u = kWeights.w_u;
  cf.lambda = kWeights.lambda();
  cf.t_end = 2.0;
  cf.x_start = {0, 0, 10, 0, 0};
  const auto x = eval_closed_form(cf, 2.0);
  EXPECT_NEAR(x.s, 20.0, 1e-12);
  EXPECT_NEAR(x.v, 10.0, 1e-12);
  EXPECT_NEAR(x.a, 0.0, 1e-12);
  EXPECT_NEAR(x.j, 0.0, 1e-12);
  for (double t : {0.0, 0.7, 1.9}) {
    EXPECT_EQ(cf.jerk(t), 0.0);
  }
}

TEST(ClosedForm, RejectsTimesOutsideTheSegment)
{
  JerkClosedForm cf;
  cf.lambda = 1.0;
  cf.t_end = 1.0;
  EXPECT_THROW(eval_closed_form(cf, 1.5), KinematicsError);
  EXPECT_THROW(eval_closed_form(cf, -0.1), KinematicsError);
  EXPECT_NO_THROW(eval_closed_form(cf, 1.0));
}

TEST(ClosedForm, StatesMatchNumericIntegrationOfJerk)
{
  namespace ode = boost::numeric::odeint;
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    const auto cf = random_form(rng);
    std::array<double, 3> y{cf.x_start.s, cf.x_start.v, cf.x_start.a};
    auto rhs = [&cf](const std::array<double, 3> & x, std::array<double, 3> & dx, double t) {
      dx = {x[1], x[2], cf.jerk(t)};
    };
    ode::integrate_adaptive(
      ode::make_controlled<ode::runge_kutta_dopri5<std::array<double, 3>>>(1e-13, 1e-13), rhs, y, cf.t_start,
      cf.t_end, 1e-3);
    const auto x = eval_closed_form(cf, cf.t_end);
    EXPECT_NEAR(x.s, y[0], 1e-6);
    EXPECT_NEAR(x.v, y[1], 1e-6);
    EXPECT_NEAR(x.a, y[2], 1e-6);
  }
}

TEST(ClosedForm, DerivativesAreConsistent)
{
  std::mt19937_64 rng(11);
  const auto cf = random_form(rng);
  const double h = 1e-5;
  for (double t : {1.0, 2.5, 4.0}) {
    const auto lo = cf.state(t - h);
    const auto hi = cf.state(t + h);
    const auto x = cf.state(t);
    EXPECT_NEAR((hi.s - lo.s) / (2 * h), x.v, 1e-6);
    EXPECT_NEAR((hi.v - lo.v) / (2 * h), x.a, 1e-6);
    EXPECT_NEAR((hi.a - lo.a) / (2 * h), x.j, 1e-6);
    EXPECT_NEAR((hi.j - lo.j) / (2 * h), cf.control(t), 1e-6);
    EXPECT_NEAR((cf.control(t + h) - cf.control(t - h)) / (2 * h), cf.jerk_second_derivative(t), 1e-5);
  }
  expect_stationary(cf);
}

TEST(ClosedForm, RunningCostMatchesQuadrature)
{
  std::mt19937_64 rng(3);
  const auto cf = random_form(rng);
  // composite Simpson on a fine grid
  const int n = 20000;
  const double h = cf.duration() / n;
  double sum = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double t = cf.t_start + i * h;
    const double j = cf.jerk(t);
    const double u = cf.control(t);
    const double f = 0.5 * cf.w_j * j * j + 0.5 * cf.w_u * u * u;
    sum += f * (i == 0 || i == n ? 1.0 : (i % 2 ? 4.0 : 2.0));
  }
  EXPECT_NEAR(cf.running_cost(cf.t_end), sum * h / 3.0, 1e-9 * std::max(1.0, sum * h / 3.0));
}

TEST(BoundaryResiduals, ConstantVelocityIsStationary)
{
  JerkClosedForm cf;
  cf.w_j = kWeights.w_j;
  cf.w_u = kWeights.w_u;
  cf.lambda = kWeights.lambda();
  cf.t_end = 3.0;
  cf.x_start = {0, 0, 10, 0, 0};
  BoundarySpec spec;
  spec.s = 30.0;
  spec.a = 0.0;
  spec.j = 0.0;
  spec.te = 3.0;
  for (double r : boundary_residuals(cf, 3.0, spec, kWeights)) {
    EXPECT_EQ(r, 0.0);
  }
}

TEST(BoundaryResiduals, SensitiveToCoefficientPerturbation)
{
  const auto res = solve_stage1({0, 0, 10, 0, 0}, 10.0, 2.0, kWeights);
  ASSERT_TRUE(res.ok());
  auto cf = res.segment->closed_form;
  BoundarySpec spec;
  spec.s = 10.0;
  spec.a = 0.0;
  spec.j = 0.0;
  spec.te = 2.0;
  OcpWeights w = kWeights;
  w.w_te = 0.0;
  double before = 0.0;
  for (double r : boundary_residuals(cf, 2.0, spec, w)) {
    before = std::max(before, std::abs(r));
  }
  EXPECT_LT(before, 1e-8);
  cf.k1 += 1e-3;
  double after = 0.0;
  for (double r : boundary_residuals(cf, 2.0, spec, w)) {
    after = std::max(after, std::abs(r));
  }
  EXPECT_GT(after, 1e-6);
}

TEST(BoundarySpec, Validation)
{
  BoundarySpec none;
  EXPECT_THROW(none.validate(kWeights), std::invalid_argument);
  OcpWeights bad = kWeights;
  bad.w_u = 0.0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = kWeights;
  bad.w_te = -1.0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(Stage1, TargetOnConstantSpeedManifold)
{
  const auto res = solve_stage1({0, 0, 10, 0, 0}, 20.0, 2.0, kWeights);
  ASSERT_TRUE(res.ok()) << res.message;
  EXPECT_NEAR(res.segment->terminal_state.v, 10.0, 1e-9);
  EXPECT_NEAR(res.segment->cost, 0.0, 1e-12);
}

TEST(Stage1, ShortTargetSlowsDownAndMatchesOracle)
{
  const VehicleState x0{0, 0, 10, 0, 0};
  const auto res = solve_stage1(x0, 10.0, 2.0, kWeights);
  ASSERT_TRUE(res.ok()) << res.message;
  const auto & seg = *res.segment;
  EXPECT_LT(seg.terminal_state.v, 10.0);
  EXPECT_NEAR(seg.terminal_state.s, 10.0, 1e-6);
  EXPECT_NEAR(seg.terminal_state.a, 0.0, 1e-6);
  EXPECT_NEAR(seg.terminal_state.j, 0.0, 1e-6);
  EXPECT_GT(seg.cost, 0.0);
  const auto ref = oracle::solve(stage1_problem(x0, 10.0), 2.0, 2000);
  EXPECT_NEAR(seg.cost, ref.cost, 1e-3 * ref.cost);
  EXPECT_LE(seg.cost, ref.cost * (1 + 1e-3));
}

TEST(Stage1, ExtremeTargetIsSolvedButExceedsLimits)
{
  const auto res = solve_stage1({0, 0, 10, 0, 0}, 30.0, 0.5, kWeights);
  ASSERT_TRUE(res.ok());
  double max_a = 0.0;
  for (const auto & x : sample_segment(*res.segment).states) {
    max_a = std::max(max_a, x.a);
  }
  EXPECT_GT(max_a, 3.0);
}

TEST(Stage1, RandomTargetsMatchOracle)
{
  for (const auto & c : cases::stage1_cases(10, 42)) {
    const auto res = solve_stage1(c.x0, c.se1, c.te1, kWeights);
    ASSERT_TRUE(res.ok()) << res.message;
    const auto & seg = *res.segment;
    EXPECT_NEAR(seg.terminal_state.s, c.se1, 1e-6);
    EXPECT_NEAR(seg.terminal_state.a, 0.0, 1e-6);
    EXPECT_NEAR(seg.terminal_state.j, 0.0, 1e-6);
    EXPECT_NEAR(seg.closed_form.jerk(seg.closed_form.t_start), c.x0.j, 1e-8);
    const auto ref = oracle::solve(stage1_problem(c.x0, c.se1), c.te1, 2000);
    EXPECT_NEAR(seg.cost, ref.cost, 1e-3 * std::max(ref.cost, 1e-9));
    expect_stationary(seg.closed_form);
  }
}

TEST(Stage2, ZeroTimeWeightContinuesAtConstantSpeed)
{
  OcpWeights w = kWeights;
  w.w_te = 0.0;
  const auto res = solve_stage2({0, 20, 10, 0, 0}, 30.0, w);
  ASSERT_TRUE(res.ok()) << res.message;
  EXPECT_NEAR(res.segment->duration(), 1.0, 1e-9);
  EXPECT_NEAR(res.segment->cost, 0.0, 1e-12);
}

TEST(Stage2, TimePenaltyInducesAcceleration)
{
  const VehicleState x1{0, 20, 8, 0, 0};
  const auto res = solve_stage2(x1, 30.0, kWeights);
  ASSERT_TRUE(res.ok()) << res.message;
  const auto & seg = *res.segment;
  EXPECT_LT(seg.duration(), 1.25);
  EXPECT_NEAR(seg.terminal_state.s, 30.0, 1e-6);
  const auto ref = oracle::solve_free_time(stage2_problem(x1, 30.0), 0.05, 20.0, 2000);
  EXPECT_NEAR(seg.duration(), ref.duration, 1e-3);
  // initial state carried over exactly
  EXPECT_EQ(seg.closed_form.x_start.v, x1.v);
  const auto lam = seg.closed_form.costates(seg.closed_form.t_end);
  EXPECT_LT(std::abs(lam.v / kWeights.w_j), 1e-8);
  EXPECT_LT(std::abs(lam.a / kWeights.w_j), 1e-8);
  EXPECT_LT(std::abs(lam.j / kWeights.w_j), 1e-8);
  EXPECT_NEAR(seg.closed_form.hamiltonian(seg.closed_form.t_end) + kWeights.w_te, 0.0, 1e-10);
  EXPECT_NEAR(seg.end_time_cost, kWeights.w_te * seg.duration(), 1e-15);
}

TEST(Stage2, RandomStartsMatchOracle)
{
  for (const auto & c : cases::stage2_cases(4, 5)) {
    const auto res = solve_stage2(c.x1, c.s_ped, kWeights);
    ASSERT_TRUE(res.ok()) << res.message;
    const auto & seg = *res.segment;
    const auto ref = oracle::solve_free_time(stage2_problem(c.x1, c.s_ped), 0.05, 40.0, 1500);
    const double total = seg.cost + seg.end_time_cost;
    const double ref_total = ref.cost + kWeights.w_te * ref.duration;
    EXPECT_NEAR(total, ref_total, 1e-3 * ref_total);
    EXPECT_NEAR(seg.duration(), ref.duration, 1e-2);
    expect_stationary(seg.closed_form);
  }
}

TEST(Stage2, DegenerateStartGivesZeroLengthSegment)
{
  const auto res = solve_stage2({3.0, 30, 0, 0, 0}, 30.0, kWeights);
  EXPECT_EQ(res.status, SolveStatus::kDegenerateStart);
  ASSERT_TRUE(res.ok());
  EXPECT_TRUE(res.segment->zero_length());
  EXPECT_EQ(res.segment->terminal_state.s, 30.0);
  EXPECT_EQ(sample_segment(*res.segment).states.size(), 1u);
}

TEST(Solver, LargeLambdaUsesBoundedBasis)
{
  OcpWeights stiff{1.0, 1e-4, 0.0};
  const auto res = solve_stage1({0, 0, 10, 0, 0}, 15.0, 2.0, stiff);
  ASSERT_TRUE(res.ok()) << res.message;
  EXPECT_GT(stiff.lambda() * 2.0, kShiftThreshold);
  EXPECT_NE(res.segment->closed_form.k1_anchor, 0.0);
  for (const auto & x : sample_segment(*res.segment).states) {
    EXPECT_TRUE(x.finite());
  }
  EXPECT_NEAR(res.segment->terminal_state.s, 15.0, 1e-6);
}

TEST(Solver, SegmentTerminalStateMatchesClosedForm)
{
  const auto res = solve_stage1({1.0, 5, 7, 0.3, -0.2}, 25.0, 4.0, kWeights);
  ASSERT_TRUE(res.ok());
  const auto end = res.segment->closed_form.state(4.0);
  EXPECT_NEAR(res.segment->terminal_state.s, end.s, 1e-6);
  EXPECT_NEAR(res.segment->terminal_state.v, end.v, 1e-6);
  EXPECT_EQ(res.segment->closed_form.x_start.t, 1.0);
}

TEST(Solver, FixedEndTimeMustFollowStart)
{
  EXPECT_THROW(solve_stage1({2.0, 0, 10, 0, 0}, 10.0, 1.0, kWeights), std::invalid_argument);
}
