// Space-time grid over the stage-1 end point, two-stage solve per grid point
// and a post-hoc feasibility filter.
#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "crossplan/candidate.hpp"
#include "crossplan/kinematics.hpp"
#include "crossplan/ocp.hpp"

namespace crossplan
{

struct GridSpec
{
  double ds{1.0};       // [m]
  double dt_e{0.2};     // [s]
  double s_low{0.0};    // exclusive lower bound, usually the current position [m]
  double s_high{30.0};  // the pedestrian position [m]
  double te_max{10.0};  // [s]
  bool edge_thinning{false};
  double edge_fraction{0.2};

  void validate() const;
};

struct GridPoint
{
  double se1{0.0};
  double te1{0.0};  // duration from the plan start [s]
  std::size_t s_index{0};
  std::size_t t_index{0};
};

/// Positions s_high, s_high - ds, ... above s_low (at least s_high itself)
/// crossed with end times dt_e, 2 dt_e, ..., te_max. Position-major order.
std::vector<GridPoint> enumerate_grid(const GridSpec & spec);

struct FeasibilityLimits
{
  double v_min{0.0};
  double v_max{15.0};
  double a_min{-6.0};
  double a_max{3.0};
  double j_abs_max{10.0};
  double u_abs_max{50.0};

  void validate() const;
};

struct LimitViolation
{
  double time{0.0};
  std::string quantity;
  double value{0.0};
  double limit{0.0};
};

struct FilterResult
{
  bool passed{true};
  std::optional<LimitViolation> first_violation;
};

FilterResult feasibility_filter(const SampledTrajectory & traj, const FeasibilityLimits & limits);

enum class GridPointOutcome
{
  kFeasible,
  kStage1Failed,
  kStage1Infeasible,
  kStage2Failed,
  kInfeasible,
  kThinned,
};

const char * to_string(GridPointOutcome outcome);

struct GridPointDiagnostic
{
  GridPoint point;
  GridPointOutcome outcome{GridPointOutcome::kFeasible};
  std::optional<LimitViolation> violation;
};

/// Called once per feasible candidate while its samples are still alive.
using CandidateVisitor = std::function<void(CandidatePlan &, const SampledTrajectory &)>;

struct PlannerOptions
{
  double sample_dt{kSampleDt};
  SolverOptions solver{};
  CandidateVisitor visitor;
};

struct PlanResult
{
  std::vector<CandidatePlan> candidates;
  std::vector<GridPointDiagnostic> diagnostics;  // one per grid point, grid order
  std::size_t grid_size{0};
};

/// Solves both stages for every grid point and keeps the feasible ones.
/// grid.s_low and grid.s_high are overridden by x0.s and s_ped.
PlanResult plan_candidates(
  const VehicleState & x0, double s_ped, const OcpWeights & weights, const GridSpec & grid,
  const FeasibilityLimits & limits, const PlannerOptions & options = {});

}  // namespace crossplan
