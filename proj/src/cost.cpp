#include "crossplan/cost.hpp"

#include <cmath>
#include <tuple>

namespace crossplan
{

namespace
{
template <typename F>
double trapezoid(const SampledTrajectory & traj, F && integrand)
{
  double total = 0.0;
  for (std::size_t i = 1; i < traj.states.size(); ++i) {
    const double h = traj.states[i].t - traj.states[i - 1].t;
    total += 0.5 * h * (integrand(traj.states[i - 1]) + integrand(traj.states[i]));
  }
  return total;
}

void require_normalization(double v0, double te)
{
  if (!(v0 > 0.0) || !(te >= 0.0)) {
    throw std::invalid_argument("utility normalization needs v0 > 0 and te >= 0");
  }
}
}  // namespace

void CostWeights::validate() const
{
  if (!(w_j > 0.0) || !(w_tb_v <= 0.0) || !(w_tb_p <= 0.0) || !(w_wt >= 0.0) || !(v_ped > 0.0)) {
    throw std::invalid_argument(
      "cost weights need w_j > 0, w_tb_v <= 0, w_tb_p <= 0, w_wt >= 0, v_ped > 0");
  }
}

double comfort_cost(const SampledTrajectory & traj, double w_j)
{
  return 0.5 * w_j * trapezoid(traj, [](const VehicleState & x) { return x.j * x.j; });
}

double vehicle_utility(const SampledTrajectory & traj, double w_tb_v, double d0, double v0, double te)
{
  require_normalization(v0, te);
  if (te <= 0.0 || traj.states.size() < 2) {
    return 0.0;
  }
  const double travelled = trapezoid(traj, [](const VehicleState & x) { return x.v; });
  return d0 / (te * v0) * w_tb_v * travelled;
}

PedestrianUtility pedestrian_utility(
  const CrossingForecast & forecast, const CostWeights & weights, double d0, double v0, double te)
{
  require_normalization(v0, te);
  PedestrianUtility out;
  out.t_wait = forecast.t_wait;
  if (te <= 0.0) {
    return out;
  }
  const double walking = weights.v_ped * forecast.integrated_p_cross();
  out.c_util_p = d0 / (te * v0) * weights.w_tb_p * walking + weights.w_wt * forecast.t_wait;
  return out;
}

CostBreakdown evaluate_costs(
  const SampledTrajectory & traj, const CrossingForecast & forecast, const CostWeights & weights,
  double d0, double v0)
{
  const double te = traj.duration();
  CostBreakdown c;
  c.d0 = d0;
  c.c_comf_v = comfort_cost(traj, weights.w_j);
  c.c_util_v = vehicle_utility(traj, weights.w_tb_v, d0, v0, te);
  const auto ped = pedestrian_utility(forecast, weights, d0, v0, te);
  c.c_util_p = ped.c_util_p;
  c.t_wait = ped.t_wait;
  c.c_joint = c.c_comf_v + c.c_util_v + c.c_util_p;
  return c;
}

Selection select_best(const std::vector<CandidatePlan> & candidates)
{
  Selection sel;
  bool any = false;
  auto key = [&](std::size_t i) {
    return std::make_tuple(candidates[i].costs->c_joint, candidates[i].te1, candidates[i].se1);
  };
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto & c = candidates[i];
    if (!c.feasible || !c.costs) {
      continue;
    }
    sel.table.push_back(*c.costs);
    if (!any) {
      sel.best = sel.worst = i;
      any = true;
      continue;
    }
    if (key(i) < key(sel.best)) {
      sel.best = i;
    }
    if (c.costs->c_joint > candidates[sel.worst].costs->c_joint) {
      sel.worst = i;
    }
  }
  if (!any) {
    throw NoFeasibleCandidate();
  }
  return sel;
}

}  // namespace crossplan
