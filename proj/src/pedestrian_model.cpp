#include "crossplan/pedestrian_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace crossplan
{

namespace
{
double sigmoid(double slope, double mid, double x) { return 1.0 / (1.0 + std::exp(-slope * (x - mid))); }
}  // namespace

void AcceptanceParams::validate() const
{
  if (!(phi_slope > 0.0) || !(psi_slope > 0.0)) {
    throw std::invalid_argument("acceptance sigmoid slopes must be positive");
  }
  if (!(beta >= 0.0 && beta <= 1.0)) {
    throw std::invalid_argument("beta must lie in [0, 1]");
  }
  if (!std::isfinite(phi_mid) || !std::isfinite(psi_mid)) {
    throw std::invalid_argument("acceptance sigmoid midpoints must be finite");
  }
}

double phi(double tau, const AcceptanceParams & params)
{
  return sigmoid(params.phi_slope, params.phi_mid, tau);
}

double psi(double taudot, const AcceptanceParams & params)
{
  return sigmoid(params.psi_slope, params.psi_mid, taudot);
}

double alpha(double tau, double taudot, const AcceptanceParams & params)
{
  return params.beta * psi(taudot, params) + (1.0 - params.beta) * phi(tau, params);
}

double alpha_complement(double tau, double taudot, const AcceptanceParams & params)
{
  return 1.0 - alpha(tau, taudot, params);
}

double alpha_at(const VehicleState & state, double s_ped, const AcceptanceParams & params)
{
  return alpha(time_gap(state, s_ped), time_gap_rate(state, s_ped), params);
}

double CrossingForecast::p_cross_at(double t) const
{
  if (p_cross.empty() || t < t_start) {
    return 0.0;
  }
  auto k = static_cast<std::size_t>(std::floor((t - t_start) / dt_dm + 1e-12));
  k = std::min(k, p_cross.size() - 1);
  return p_cross[k];
}

double CrossingForecast::integrated_p_cross() const
{
  return std::max(0.0, (t_end - t_start) - t_wait);
}

CrossingForecast accumulate_evidence(
  std::vector<double> alpha_series, double dt_dm, double t_start, double t_end)
{
  if (!(dt_dm > 0.0)) {
    throw std::invalid_argument("decision interval must be positive");
  }
  if (alpha_series.empty()) {
    throw std::invalid_argument("evidence accumulation needs at least one decision instant");
  }
  CrossingForecast fc;
  fc.dt_dm = dt_dm;
  fc.t_start = t_start;
  fc.t_end = std::max(t_end, t_start);
  fc.alpha_series = std::move(alpha_series);
  const std::size_t n = fc.alpha_series.size();
  fc.decision_times.reserve(n);
  fc.p_cross.reserve(n);
  fc.p_stand.reserve(n);

  double log_stand = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double a = std::clamp(fc.alpha_series[k], 0.0, 1.0);
    log_stand += std::log1p(-a);
    const double stand = std::exp(log_stand);
    fc.decision_times.push_back(t_start + static_cast<double>(k) * dt_dm);
    fc.p_stand.push_back(stand);
    fc.p_cross.push_back(1.0 - stand);
  }

  // zero-order hold of the standing probability, cut off at the plan end
  double wait = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double lo = fc.decision_times[k];
    const double hi = std::min(lo + dt_dm, fc.t_end);
    if (hi > lo) {
      wait += fc.p_stand[k] * (hi - lo);
    }
  }
  fc.t_wait = std::clamp(wait, 0.0, fc.t_end - fc.t_start);
  return fc;
}

CrossingForecast forecast(
  const StateFunction & state_at, double t_start, double t_end, double s_ped,
  const AcceptanceParams & params, double dt_dm, const ForecastOptions & options)
{
  if (!(dt_dm > 0.0)) {
    throw std::invalid_argument("decision interval must be positive");
  }
  const double plan_length = std::max(t_end - t_start, 0.0);
  const double horizon = std::max(options.horizon.value_or(plan_length), plan_length);
  const auto steps = static_cast<std::size_t>(std::floor(horizon / dt_dm + 1e-9));

  std::vector<double> series;
  series.reserve(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = t_start + static_cast<double>(k) * dt_dm;
    if (t > t_end + 1e-9) {
      // the vehicle has passed; nothing holds the pedestrian back
      series.push_back(1.0);
      continue;
    }
    const VehicleState x = state_at(std::min(t, t_end));
    AcceptanceParams p = params;
    const double tau = time_gap(x, s_ped);
    if (options.beta_schedule) {
      p.beta = std::clamp(options.beta_schedule(t, tau), 0.0, 1.0);
    }
    series.push_back(alpha(tau, time_gap_rate(x, s_ped), p));
  }
  return accumulate_evidence(std::move(series), dt_dm, t_start, t_end);
}

CrossingForecast forecast(
  const SampledTrajectory & traj, double s_ped, const AcceptanceParams & params, double dt_dm,
  const ForecastOptions & options)
{
  if (traj.empty()) {
    throw std::invalid_argument("cannot forecast over an empty trajectory");
  }
  return forecast(
    [&traj](double t) { return traj.interpolate(t); }, traj.start_time(), traj.end_time(), s_ped,
    params, dt_dm, options);
}

}  // namespace crossplan
