#include "crossplan/grid_planner.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace crossplan
{

namespace
{
// Absolute slack on every limit so round-off at a bound does not reject a plan.
constexpr double kLimitSlack = 1e-9;

bool on_edge(std::size_t index, std::size_t count, double fraction)
{
  const auto band = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(count)));
  return index < band || index + band >= count;
}
}  // namespace

void GridSpec::validate() const
{
  if (!(ds > 0.0) || !(dt_e > 0.0) || !(te_max > 0.0)) {
    throw std::invalid_argument("grid steps and te_max must be positive");
  }
  if (!(s_high > s_low)) {
    throw std::invalid_argument("grid position range is empty");
  }
  if (!(edge_fraction >= 0.0 && edge_fraction < 0.5)) {
    throw std::invalid_argument("edge fraction must lie in [0, 0.5)");
  }
}

void FeasibilityLimits::validate() const
{
  if (!(v_min >= 0.0) || !(v_max > v_min) || !(a_min < 0.0) || !(a_max > 0.0) ||
      !(j_abs_max > 0.0) || !(u_abs_max > 0.0)) {
    throw std::invalid_argument("feasibility limits are inconsistent");
  }
}

std::vector<GridPoint> enumerate_grid(const GridSpec & spec)
{
  std::vector<GridPoint> grid;
  if (!(spec.ds > 0.0) || !(spec.dt_e > 0.0) || !(spec.s_high > spec.s_low) || !(spec.te_max > 0.0)) {
    return grid;
  }
  const auto n_s = std::max<std::size_t>(
    1, static_cast<std::size_t>(std::floor((spec.s_high - spec.s_low) / spec.ds + 1e-9)));
  const auto n_t = static_cast<std::size_t>(std::floor(spec.te_max / spec.dt_e + 1e-9));
  grid.reserve(n_s * n_t);
  for (std::size_t i = 0; i < n_s; ++i) {
    // ascending positions ending exactly at s_high
    const double se1 = spec.s_high - static_cast<double>(n_s - 1 - i) * spec.ds;
    for (std::size_t k = 0; k < n_t; ++k) {
      if (spec.edge_thinning && (on_edge(i, n_s, spec.edge_fraction) || on_edge(k, n_t, spec.edge_fraction)) &&
          (i + k) % 2 == 1) {
        continue;
      }
      grid.push_back({se1, static_cast<double>(k + 1) * spec.dt_e, i, k});
    }
  }
  return grid;
}

namespace
{
std::optional<LimitViolation> check_sample(const VehicleState & x, double u, const FeasibilityLimits & limits)
{
  auto violation = [&](const char * what, double value, double limit) {
    return std::optional<LimitViolation>{LimitViolation{x.t, what, value, limit}};
  };
  if (!x.finite() || !std::isfinite(u)) {
    return violation("finite", 0.0, 0.0);
  }
  if (x.v < limits.v_min - kLimitSlack) {
    return violation("v_min", x.v, limits.v_min);
  }
  if (x.v > limits.v_max + kLimitSlack) {
    return violation("v_max", x.v, limits.v_max);
  }
  if (x.a < limits.a_min - kLimitSlack) {
    return violation("a_min", x.a, limits.a_min);
  }
  if (x.a > limits.a_max + kLimitSlack) {
    return violation("a_max", x.a, limits.a_max);
  }
  if (std::abs(x.j) > limits.j_abs_max + kLimitSlack) {
    return violation("j_abs_max", x.j, limits.j_abs_max);
  }
  if (std::abs(u) > limits.u_abs_max + kLimitSlack) {
    return violation("u_abs_max", u, limits.u_abs_max);
  }
  return std::nullopt;
}

// Filter straight from the closed form, stopping at the first violation.
FilterResult filter_segment(const TrajectorySegment & seg, const FeasibilityLimits & limits, double dt)
{
  FilterResult result;
  if (seg.zero_length()) {
    return result;
  }
  const auto & cf = seg.closed_form;
  for (double t : sample_times(cf.t_start, cf.t_end, dt)) {
    double u = 0.0;
    const auto x = cf.state_and_control(std::clamp(t, cf.t_start, cf.t_end), &u);
    if (auto v = check_sample(x, u, limits)) {
      result.passed = false;
      result.first_violation = v;
      break;
    }
  }
  return result;
}
}  // namespace

FilterResult feasibility_filter(const SampledTrajectory & traj, const FeasibilityLimits & limits)
{
  FilterResult result;
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    const double u = i < traj.controls.size() ? traj.controls[i] : 0.0;
    if (auto v = check_sample(traj.states[i], u, limits)) {
      result.passed = false;
      result.first_violation = v;
      break;
    }
  }
  return result;
}

const char * to_string(GridPointOutcome outcome)
{
  switch (outcome) {
    case GridPointOutcome::kFeasible:
      return "feasible";
    case GridPointOutcome::kStage1Failed:
      return "stage1_failed";
    case GridPointOutcome::kStage1Infeasible:
      return "stage1_infeasible";
    case GridPointOutcome::kStage2Failed:
      return "stage2_failed";
    case GridPointOutcome::kInfeasible:
      return "infeasible";
    case GridPointOutcome::kThinned:
      return "thinned";
  }
  return "unknown";
}

VehicleState TwoStagePlan::state(double t) const
{
  if (t <= junction_time() || stage2.zero_length()) {
    return stage1.state(std::min(t, junction_time()));
  }
  return stage2.state(std::min(t, end_time()));
}

double TwoStagePlan::control(double t) const
{
  if (t <= junction_time() || stage2.zero_length()) {
    return stage1.closed_form.control(std::min(t, junction_time()));
  }
  return stage2.closed_form.control(std::min(t, end_time()));
}

SampledTrajectory TwoStagePlan::sample(double dt) const
{
  SampledTrajectory traj = sample_segment(stage1, dt);
  if (!stage2.zero_length()) {
    const auto second = sample_segment(stage2, dt);
    // first stage-2 sample duplicates the junction
    traj.states.insert(traj.states.end(), second.states.begin() + 1, second.states.end());
    traj.controls.insert(traj.controls.end(), second.controls.begin() + 1, second.controls.end());
  }
  return traj;
}

PlanResult plan_candidates(
  const VehicleState & x0, double s_ped, const OcpWeights & weights, const GridSpec & grid_spec,
  const FeasibilityLimits & limits, const PlannerOptions & options)
{
  weights.validate();
  limits.validate();
  if (!x0.finite() || x0.v < 0.0) {
    throw KinematicsError("planner start state must be finite with v >= 0");
  }
  if (!(x0.s < s_ped)) {
    throw KinematicsError("planner start state must lie before the pedestrian");
  }
  GridSpec spec = grid_spec;
  spec.s_low = x0.s;
  spec.s_high = s_ped;
  spec.validate();

  GridSpec full = spec;
  full.edge_thinning = false;
  const auto all_points = enumerate_grid(full);
  const auto kept_points = enumerate_grid(spec);

  PlanResult result;
  result.grid_size = all_points.size();
  result.diagnostics.reserve(all_points.size());

  std::size_t kept = 0;
  for (std::size_t index = 0; index < all_points.size(); ++index) {
    const GridPoint & gp = all_points[index];
    GridPointDiagnostic diag{gp, GridPointOutcome::kFeasible, std::nullopt};
    if (kept >= kept_points.size() || kept_points[kept].s_index != gp.s_index ||
        kept_points[kept].t_index != gp.t_index) {
      diag.outcome = GridPointOutcome::kThinned;
      result.diagnostics.push_back(diag);
      continue;
    }
    ++kept;

    const auto stage1 = solve_stage1(x0, gp.se1, x0.t + gp.te1, weights, options.solver);
    if (!stage1.ok()) {
      diag.outcome = GridPointOutcome::kStage1Failed;
      result.diagnostics.push_back(diag);
      continue;
    }
    if (auto f = filter_segment(*stage1.segment, limits, options.sample_dt); !f.passed) {
      diag.outcome = GridPointOutcome::kStage1Infeasible;
      diag.violation = f.first_violation;
      result.diagnostics.push_back(diag);
      continue;
    }
    const auto stage2 = solve_stage2(stage1.segment->terminal_state, s_ped, weights, options.solver);
    if (!stage2.ok()) {
      diag.outcome = GridPointOutcome::kStage2Failed;
      result.diagnostics.push_back(diag);
      continue;
    }
    if (auto f = filter_segment(*stage2.segment, limits, options.sample_dt); !f.passed) {
      diag.outcome = GridPointOutcome::kInfeasible;
      diag.violation = f.first_violation;
      result.diagnostics.push_back(diag);
      continue;
    }

    CandidatePlan cand;
    cand.plan = TwoStagePlan{*stage1.segment, *stage2.segment};
    const auto samples = cand.plan.sample(options.sample_dt);
    cand.se1 = gp.se1;
    cand.te1 = gp.te1;
    cand.grid_index = index;
    cand.feasible = true;
    cand.max_taudot = max_time_gap_rate(samples, s_ped);
    cand.max_speed = 0.0;
    for (const auto & x : samples.states) {
      cand.max_speed = std::max(cand.max_speed, x.v);
    }
    if (options.visitor) {
      options.visitor(cand, samples);
    }
    result.candidates.push_back(std::move(cand));
    result.diagnostics.push_back(diag);
  }
  return result;
}

}  // namespace crossplan
