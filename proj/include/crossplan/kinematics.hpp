// Longitudinal vehicle state, time-gap quantities and reference trajectories.
#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace crossplan
{

/// Default trajectory sample spacing [s].
inline constexpr double kSampleDt = 0.01;
/// Below this speed [m/s] the time gap is treated as unbounded.
inline constexpr double kSpeedEps = 1e-6;
/// Clamp value for the time gap [s].
inline constexpr double kTauMax = 1e4;
/// Symmetric clamp for the time-gap rate.
inline constexpr double kTauRateClamp = 50.0;

class KinematicsError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

/// Time-stamped state of the chain-of-integrators model (s, v, a, j).
struct VehicleState
{
  double t{0.0};  // [s]
  double s{0.0};  // [m]
  double v{0.0};  // [m/s]
  double a{0.0};  // [m/s^2]
  double j{0.0};  // [m/s^3]

  bool finite() const;
};

/// Uniformly sampled trajectory. The final interval may be shorter than dt.
struct SampledTrajectory
{
  double dt{kSampleDt};
  std::vector<VehicleState> states;
  std::vector<double> controls;  // u = dj/dt at each state [m/s^4]

  bool empty() const { return states.empty(); }
  double start_time() const { return states.front().t; }
  double end_time() const { return states.back().t; }
  double duration() const { return states.empty() ? 0.0 : end_time() - start_time(); }

  /// Linear interpolation of the state at time t (clamped to the covered interval).
  VehicleState interpolate(double t) const;
};

/// Remaining time until the vehicle reaches s_ped at its current speed.
double time_gap(const VehicleState & state, double s_ped);

/// Time derivative of the time gap: -a (s_ped - s) / v^2 - 1.
double time_gap_rate(const VehicleState & state, double s_ped);

/// Largest time-gap rate over the samples still short of s_ped; -kTauRateClamp if none.
double max_time_gap_rate(const SampledTrajectory & traj, double s_ped);

/// Constant-velocity drive until the vehicle passes s_ped.
SampledTrajectory cv_reference(const VehicleState & x0, double s_ped, double dt = kSampleDt);

/// Constant deceleration that stops the vehicle exactly at s_ped (target braking).
/// Only a comparison reference: it ignores the initial acceleration of x0.
SampledTrajectory ca_reference(const VehicleState & x0, double s_ped, double dt = kSampleDt);

/// Sample times t0, t0+dt, ..., t1 where the last interval may be shorter.
std::vector<double> sample_times(double t0, double t1, double dt);

}  // namespace crossplan
