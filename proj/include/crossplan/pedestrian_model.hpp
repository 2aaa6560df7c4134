// Behavior-acceptance crossing model with evidence accumulation over
// discrete pedestrian decision instants.
#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "crossplan/kinematics.hpp"

namespace crossplan
{

struct AcceptanceParams
{
  double phi_slope{1.2};  // [1/s]
  double phi_mid{5.0};    // [s]
  double psi_slope{1.7};
  double psi_mid{0.5};
  double beta{0.3711};

  void validate() const;
};

/// Optional replacement for the constant beta: maps (time, time gap) to a modulation factor.
using BetaSchedule = std::function<double(double t, double tau)>;

/// Gap acceptance: probability of accepting time gap tau.
double phi(double tau, const AcceptanceParams & params = {});
/// Behavior acceptance: probability of accepting time-gap rate taudot.
double psi(double taudot, const AcceptanceParams & params = {});
/// Instantaneous crossing likelihood beta * psi + (1 - beta) * phi.
double alpha(double tau, double taudot, const AcceptanceParams & params = {});
double alpha_complement(double tau, double taudot, const AcceptanceParams & params = {});
/// Crossing likelihood evaluated from a vehicle state.
double alpha_at(const VehicleState & state, double s_ped, const AcceptanceParams & params);

struct CrossingForecast
{
  double dt_dm{1.0};
  double t_start{0.0};
  double t_end{0.0};  // end of the vehicle plan; cost integrals stop here
  std::vector<double> decision_times;
  std::vector<double> alpha_series;
  std::vector<double> p_cross;
  std::vector<double> p_stand;
  double t_wait{0.0};

  /// Cumulative crossing probability at time t (zero-order hold between instants).
  double p_cross_at(double t) const;
  double p_stand_at(double t) const { return 1.0 - p_cross_at(t); }
  /// Integral of p_cross over [t_start, t_end].
  double integrated_p_cross() const;
};

/// Accumulates evidence over a given alpha series. Decision instant k sits at
/// t_start + k * dt_dm; the series may extend past t_end.
CrossingForecast accumulate_evidence(
  std::vector<double> alpha_series, double dt_dm, double t_start, double t_end);

using StateFunction = std::function<VehicleState(double)>;

struct ForecastOptions
{
  /// Prediction horizon measured from the plan start; defaults to the plan length.
  std::optional<double> horizon;
  BetaSchedule beta_schedule;
};

/// Forecast using exact states from an analytic plan on [t_start, t_end].
CrossingForecast forecast(
  const StateFunction & state_at, double t_start, double t_end, double s_ped,
  const AcceptanceParams & params, double dt_dm, const ForecastOptions & options = {});

/// Forecast from a sampled trajectory (states linearly interpolated at decision instants).
CrossingForecast forecast(
  const SampledTrajectory & traj, double s_ped, const AcceptanceParams & params, double dt_dm,
  const ForecastOptions & options = {});

}  // namespace crossplan
