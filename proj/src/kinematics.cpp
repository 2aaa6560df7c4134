#include "crossplan/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace crossplan
{

namespace
{
// Positions within this distance beyond s_ped count as "at the pedestrian".
constexpr double kPassTolerance = 1e-6;

double remaining_distance(const VehicleState & state, double s_ped)
{
  if (!state.finite()) {
    throw KinematicsError("vehicle state is not finite");
  }
  const double d = s_ped - state.s;
  if (d < -kPassTolerance) {
    throw KinematicsError(
      "vehicle already past pedestrian (s=" + std::to_string(state.s) +
      ", s_ped=" + std::to_string(s_ped) + ")");
  }
  return std::max(d, 0.0);
}
}  // namespace

bool VehicleState::finite() const
{
  return std::isfinite(t) && std::isfinite(s) && std::isfinite(v) && std::isfinite(a) &&
         std::isfinite(j);
}

VehicleState SampledTrajectory::interpolate(double t) const
{
  if (states.empty()) {
    throw KinematicsError("cannot interpolate an empty trajectory");
  }
  if (t <= states.front().t) {
    return states.front();
  }
  if (t >= states.back().t) {
    return states.back();
  }
  auto idx = static_cast<std::size_t>((t - states.front().t) / dt);
  idx = std::min(idx, states.size() - 2);
  // the final interval may be short; step back/forward until bracketed
  while (idx > 0 && states[idx].t > t) {
    --idx;
  }
  while (idx + 2 < states.size() && states[idx + 1].t < t) {
    ++idx;
  }
  const auto & lo = states[idx];
  const auto & hi = states[idx + 1];
  const double span = hi.t - lo.t;
  const double w = span > 0.0 ? (t - lo.t) / span : 0.0;
  auto lerp = [w](double x, double y) { return x + w * (y - x); };
  return {t, lerp(lo.s, hi.s), lerp(lo.v, hi.v), lerp(lo.a, hi.a), lerp(lo.j, hi.j)};
}

double time_gap(const VehicleState & state, double s_ped)
{
  const double d = remaining_distance(state, s_ped);
  if (state.v < kSpeedEps) {
    return kTauMax;
  }
  return std::min(d / state.v, kTauMax);
}

double time_gap_rate(const VehicleState & state, double s_ped)
{
  const double d = remaining_distance(state, s_ped);
  if (state.v < kSpeedEps) {
    // standing or stopping: the gap opens without bound; restarting closes it
    return state.a > 0.0 ? -kTauRateClamp : kTauRateClamp;
  }
  if (state.a == 0.0) {
    return -1.0;
  }
  const double rate = -state.a * d / (state.v * state.v) - 1.0;
  return std::clamp(rate, -kTauRateClamp, kTauRateClamp);
}

double max_time_gap_rate(const SampledTrajectory & traj, double s_ped)
{
  // at the crossing point itself the gap is undefined (0/0 when stopping there)
  double best = -kTauRateClamp;
  for (const auto & x : traj.states) {
    if (x.s < s_ped - 1e-9) {
      best = std::max(best, time_gap_rate(x, s_ped));
    }
  }
  return best;
}

std::vector<double> sample_times(double t0, double t1, double dt)
{
  std::vector<double> times;
  if (!(dt > 0.0) || t1 < t0) {
    return times;
  }
  const auto n = static_cast<std::size_t>(std::floor((t1 - t0) / dt + 1e-9));
  times.reserve(n + 2);
  for (std::size_t i = 0; i <= n; ++i) {
    times.push_back(t0 + static_cast<double>(i) * dt);
  }
  if (t1 - times.back() > 1e-9 * std::max(1.0, std::abs(t1))) {
    times.push_back(t1);
  } else {
    times.back() = t1;
  }
  return times;
}

SampledTrajectory cv_reference(const VehicleState & x0, double s_ped, double dt)
{
  if (!(x0.v > 0.0)) {
    throw KinematicsError("constant-velocity reference needs v0 > 0");
  }
  if (x0.a != 0.0 || x0.j != 0.0) {
    throw KinematicsError("constant-velocity reference needs a0 = j0 = 0");
  }
  const double duration = remaining_distance(x0, s_ped) / x0.v;
  SampledTrajectory traj;
  traj.dt = dt;
  for (double t : sample_times(x0.t, x0.t + duration, dt)) {
    traj.states.push_back({t, x0.s + x0.v * (t - x0.t), x0.v, 0.0, 0.0});
    traj.controls.push_back(0.0);
  }
  return traj;
}

SampledTrajectory ca_reference(const VehicleState & x0, double s_ped, double dt)
{
  if (!(x0.v > 0.0)) {
    throw KinematicsError("target braking reference needs v0 > 0");
  }
  const double d = s_ped - x0.s;
  if (!(d > 0.0)) {
    throw KinematicsError("target braking reference needs s0 < s_ped");
  }
  const double decel = -x0.v * x0.v / (2.0 * d);
  const double stop_time = -x0.v / decel;
  SampledTrajectory traj;
  traj.dt = dt;
  for (double t : sample_times(x0.t, x0.t + stop_time, dt)) {
    const double tau = t - x0.t;
    const double v = std::max(x0.v + decel * tau, 0.0);
    const double s = std::min(x0.s + x0.v * tau + 0.5 * decel * tau * tau, s_ped);
    traj.states.push_back({t, s, v, decel, 0.0});
    traj.controls.push_back(0.0);
  }
  // exact terminal state
  traj.states.back().s = s_ped;
  traj.states.back().v = 0.0;
  return traj;
}

}  // namespace crossplan
