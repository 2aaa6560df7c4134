// Joint vehicle/pedestrian cost of a candidate and selection of the best one.
#pragma once

#include <stdexcept>
#include <vector>

#include "crossplan/candidate.hpp"
#include "crossplan/kinematics.hpp"
#include "crossplan/pedestrian_model.hpp"

namespace crossplan
{

struct CostWeights
{
  double w_j{2.25e-4};
  double w_tb_v{-3e-4};  // vehicle travel benefit (negative = benefit)
  double w_tb_p{-1.4e-2};  // pedestrian travel benefit
  double w_wt{5e-2};     // pedestrian waiting time
  double v_ped{1.5};     // assumed walking speed [m/s]

  void validate() const;
};

class NoFeasibleCandidate : public std::runtime_error
{
public:
  NoFeasibleCandidate() : std::runtime_error("no feasible candidate") {}
};

/// (w_j / 2) * integral of j^2, trapezoidal at the sample spacing.
double comfort_cost(const SampledTrajectory & traj, double w_j);

/// Travel benefit normalized by the constant-velocity passing time:
/// d0 / (te v0) * w_tb_v * integral of v.
double vehicle_utility(const SampledTrajectory & traj, double w_tb_v, double d0, double v0, double te);

struct PedestrianUtility
{
  double c_util_p{0.0};
  double t_wait{0.0};
};

/// d0 / (te v0) * w_tb_p * integral of v_ped P(cross) + w_wt * integral of P(stand).
PedestrianUtility pedestrian_utility(
  const CrossingForecast & forecast, const CostWeights & weights, double d0, double v0, double te);

/// Full breakdown for one trajectory; d0 and v0 describe the interaction start.
CostBreakdown evaluate_costs(
  const SampledTrajectory & traj, const CrossingForecast & forecast, const CostWeights & weights,
  double d0, double v0);

struct Selection
{
  std::size_t best{0};
  std::size_t worst{0};
  std::vector<CostBreakdown> table;
};

/// Lowest and highest joint cost among scored feasible candidates.
/// Ties break on the smaller te1, then the smaller se1.
Selection select_best(const std::vector<CandidatePlan> & candidates);

}  // namespace crossplan
