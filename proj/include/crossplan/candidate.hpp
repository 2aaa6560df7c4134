// Two-stage candidate plans as produced by the grid planner and scored by the
// cost evaluation.
#pragma once

#include <optional>

#include "crossplan/kinematics.hpp"
#include "crossplan/ocp.hpp"
#include "crossplan/pedestrian_model.hpp"

namespace crossplan
{

struct CostBreakdown
{
  double c_comf_v{0.0};
  double c_util_v{0.0};
  double c_util_p{0.0};
  double c_joint{0.0};
  double t_wait{0.0};  // [s]
  double d0{0.0};      // initial distance to the pedestrian [m]
};

/// Stage 1 followed by stage 2; stage 2 starts from the stage-1 terminal state.
struct TwoStagePlan
{
  TrajectorySegment stage1;
  TrajectorySegment stage2;

  double start_time() const { return stage1.closed_form.t_start; }
  double junction_time() const { return stage1.closed_form.t_end; }
  double end_time() const { return stage2.zero_length() ? junction_time() : stage2.closed_form.t_end; }
  double duration() const { return end_time() - start_time(); }

  VehicleState state(double t) const;
  double control(double t) const;
  SampledTrajectory sample(double dt = kSampleDt) const;
};

struct CandidatePlan
{
  double se1{0.0};
  double te1{0.0};  // stage-1 duration measured from the plan start [s]
  std::size_t grid_index{0};
  TwoStagePlan plan;
  bool feasible{false};
  double max_taudot{-1.0};
  double max_speed{0.0};
  std::optional<CrossingForecast> forecast;
  std::optional<CostBreakdown> costs;

  /// Samples the concatenated trajectory on demand.
  SampledTrajectory concatenated(double dt = kSampleDt) const { return plan.sample(dt); }
};

}  // namespace crossplan
