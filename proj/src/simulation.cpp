#include "crossplan/simulation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace crossplan
{

void Scenario::validate() const
{
  if (!x0.finite() || x0.v < 0.0) {
    throw std::invalid_argument("x0 must be finite with v0 >= 0");
  }
  if (!(s_ped > x0.s)) {
    throw std::invalid_argument("s_ped must lie ahead of s0");
  }
  ocp.validate();
  cost.validate();
  params.validate();
  limits.validate();
  GridSpec g = grid;
  g.s_low = x0.s;
  g.s_high = s_ped;
  g.validate();
  if (!(dt_dm > 0.0)) {
    throw std::invalid_argument("dt_dm must be positive");
  }
  if (!(sample_dt > 0.0)) {
    throw std::invalid_argument("sample_dt must be positive");
  }
}

void score_candidate(CandidatePlan & cand, const SampledTrajectory & samples, const Scenario & sc)
{
  const double d0 = sc.s_ped - sc.x0.s;
  const double v0 = std::max(sc.x0.v, kMinNormalizationSpeed);
  const auto & plan = cand.plan;
  cand.forecast = forecast(
    [&plan](double t) { return plan.state(t); }, plan.start_time(), plan.end_time(), sc.s_ped,
    sc.params, sc.dt_dm);
  cand.costs = evaluate_costs(samples, *cand.forecast, sc.cost, d0, v0);
}

PlanSelection plan_and_select(const Scenario & sc)
{
  PlannerOptions options;
  options.sample_dt = sc.sample_dt;
  options.visitor = [&sc](CandidatePlan & cand, const SampledTrajectory & samples) {
    score_candidate(cand, samples, sc);
  };
  PlanSelection out;
  out.plan = plan_candidates(sc.x0, sc.s_ped, sc.ocp, sc.grid, sc.limits, options);
  out.selection = select_best(out.plan.candidates);
  return out;
}

namespace
{
ReferenceSeries candidate_series(const std::string & name, const CandidatePlan & cand, double dt)
{
  return {name, cand.concatenated(dt), *cand.forecast, cand.max_taudot};
}

ReferenceSeries reference_series(
  const std::string & name, const std::function<SampledTrajectory()> & make, const Scenario & sc)
{
  ReferenceSeries out;
  out.name = name;
  try {
    out.traj = make();
  } catch (const KinematicsError &) {
    // reference not defined for this start state
    return out;
  }
  out.forecast = forecast(out.traj, sc.s_ped, sc.params, sc.dt_dm);
  out.max_taudot = max_time_gap_rate(out.traj, sc.s_ped);
  return out;
}
}  // namespace

ScenarioReport run_open_loop(const Scenario & sc)
{
  sc.validate();
  ScenarioReport report;
  report.scenario = sc;
  const auto t0 = std::chrono::steady_clock::now();
  auto ps = plan_and_select(sc);
  report.planning_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report.plan = std::move(ps.plan);
  report.selection = std::move(ps.selection);

  const auto & cands = report.plan.candidates;
  report.best = candidate_series("best", cands[report.selection.best], sc.sample_dt);
  report.worst = candidate_series("worst", cands[report.selection.worst], sc.sample_dt);
  report.cv = reference_series("cv", [&] { return cv_reference(sc.x0, sc.s_ped, sc.sample_dt); }, sc);
  report.ca = reference_series("ca", [&] { return ca_reference(sc.x0, sc.s_ped, sc.sample_dt); }, sc);
  report.no_yielding_communication = report.best.max_taudot <= kNoYieldTaudot;
  return report;
}

// --- pedestrian agent -------------------------------------------------------

const char * to_string(AgentMode mode)
{
  switch (mode) {
    case AgentMode::kScripted:
      return "scripted";
    case AgentMode::kThreshold:
      return "threshold";
    case AgentMode::kStochastic:
      return "stochastic";
  }
  return "unknown";
}

const char * to_string(AgentPhase phase)
{
  switch (phase) {
    case AgentPhase::kWaiting:
      return "waiting";
    case AgentPhase::kCrossing:
      return "crossing";
    case AgentPhase::kCrossed:
      return "crossed";
  }
  return "unknown";
}

AgentMode parse_agent_mode(const std::string & text)
{
  for (auto m : {AgentMode::kScripted, AgentMode::kThreshold, AgentMode::kStochastic}) {
    if (text == to_string(m)) {
      return m;
    }
  }
  throw std::invalid_argument("unknown agent mode '" + text + "'");
}

AgentState make_agent(const AgentConfig & config)
{
  if (!(config.road_width > 0.0) || !(config.v_ped > 0.0)) {
    throw std::invalid_argument("agent needs a positive road width and walking speed");
  }
  AgentState a;
  a.rng.seed(config.seed);
  return a;
}

AgentState pedestrian_agent_step(AgentState agent, const AgentConfig & config, double t, double alpha)
{
  if (agent.phase == AgentPhase::kCrossing && t >= agent.clear_time) {
    agent.phase = AgentPhase::kCrossed;
  }
  if (agent.phase != AgentPhase::kWaiting) {
    return agent;
  }
  ++agent.decisions;
  bool cross = false;
  switch (config.mode) {
    case AgentMode::kScripted:
      cross = config.cross_time && t >= *config.cross_time;
      break;
    case AgentMode::kThreshold:
      cross = alpha >= config.threshold;
      break;
    case AgentMode::kStochastic:
      cross = std::uniform_real_distribution<double>(0.0, 1.0)(agent.rng) < alpha;
      break;
  }
  if (cross) {
    agent.phase = AgentPhase::kCrossing;
    agent.commit_time = t;
    agent.clear_time = t + config.road_width / config.v_ped;
  }
  return agent;
}

// --- closed loop ------------------------------------------------------------

const char * to_string(SimOutcome outcome)
{
  switch (outcome) {
    case SimOutcome::kVehiclePassed:
      return "vehicle_passed";
    case SimOutcome::kPedestrianCrossed:
      return "pedestrian_crossed";
    case SimOutcome::kTimeout:
      return "timeout";
  }
  return "unknown";
}

namespace
{
bool same_state(const VehicleState & a, const VehicleState & b)
{
  return a.t == b.t && a.s == b.s && a.v == b.v && a.a == b.a && a.j == b.j;
}

// Constant deceleration to a stop at s_ped, then standstill.
struct Braking
{
  VehicleState x0;
  double decel{0.0};
  double stop_time{0.0};

  Braking(const VehicleState & x, double s_ped) : x0(x)
  {
    const double d = std::max(s_ped - x.s, 0.0);
    if (x.v > kSpeedEps && d > 0.0) {
      decel = x.v * x.v / (2.0 * d);
      stop_time = x.t + x.v / decel;
    } else {
      stop_time = x.t;
    }
  }

  VehicleState at(double t) const
  {
    const double tau = std::clamp(t, x0.t, stop_time) - x0.t;
    VehicleState x{t, x0.s + x0.v * tau - 0.5 * decel * tau * tau, std::max(x0.v - decel * tau, 0.0), 0.0, 0.0};
    if (t < stop_time) {
      x.a = -decel;
    }
    return x;
  }
};

bool reaches(const VehicleState & x, double s_ped) { return x.s >= s_ped - 1e-9; }
}  // namespace

bool SimTrace::same_as(const SimTrace & other) const
{
  if (steps.size() != other.steps.size() || executed.states.size() != other.executed.states.size() ||
      agent_events != other.agent_events || outcome != other.outcome ||
      passed_while_crossing != other.passed_while_crossing || executed.controls != other.executed.controls) {
    return false;
  }
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const auto & a = steps[i];
    const auto & b = other.steps[i];
    if (a.t != b.t || !same_state(a.state, b.state) || a.best_id != b.best_id || a.se1 != b.se1 ||
        a.te1 != b.te1 || a.plan_max_taudot != b.plan_max_taudot || a.alpha != b.alpha ||
        a.p_cross0 != b.p_cross0 || a.agent != b.agent || a.fallback != b.fallback || a.continued != b.continued ||
        a.candidates != b.candidates) {
      return false;
    }
  }
  for (std::size_t i = 0; i < executed.states.size(); ++i) {
    if (!same_state(executed.states[i], other.executed.states[i])) {
      return false;
    }
  }
  return true;
}

SimTrace run_closed_loop(const Scenario & sc, const SimConfig & config)
{
  sc.validate();
  if (!(config.replan_period > 0.0) || !(config.max_time > 0.0)) {
    throw std::invalid_argument("replan period and max time must be positive");
  }
  AgentState agent = make_agent(config.agent);
  SimTrace trace;
  trace.executed.dt = sc.sample_dt;

  VehicleState x = sc.x0;
  const double t_begin = x.t;
  const double t_stop = t_begin + config.max_time;
  trace.executed.states.push_back(x);
  trace.executed.controls.push_back(0.0);
  std::size_t next_decision = 0;
  auto decision_time = [&](std::size_t k) { return t_begin + static_cast<double>(k) * sc.dt_dm; };

  auto decide = [&](double t, const VehicleState & state) {
    const AgentPhase before = agent.phase;
    agent = pedestrian_agent_step(agent, config.agent, t, alpha_at(state, sc.s_ped, sc.params));
    if (agent.phase != before) {
      trace.agent_events.emplace_back(t, agent.phase);
    }
  };
  auto clear_crossing = [&](double t) {
    if (agent.phase == AgentPhase::kCrossing && t >= agent.clear_time) {
      agent.phase = AgentPhase::kCrossed;
      trace.agent_events.emplace_back(agent.clear_time, agent.phase);
    }
  };

  // Last selected plan; it stays feasible and is continued if replanning fails.
  std::optional<CandidatePlan> current;

  while (true) {
    clear_crossing(x.t);
    if (reaches(x, sc.s_ped) && x.v > kSpeedEps) {
      trace.outcome = SimOutcome::kVehiclePassed;
      break;
    }
    if (agent.phase == AgentPhase::kCrossed) {
      trace.outcome = SimOutcome::kPedestrianCrossed;
      break;
    }
    if (x.t >= t_stop - 1e-9) {
      trace.outcome = SimOutcome::kTimeout;
      break;
    }
    while (decision_time(next_decision) <= x.t + 1e-9) {
      decide(decision_time(next_decision), x);
      ++next_decision;
    }

    SimStep step;
    step.t = x.t;
    step.state = x;
    step.alpha = alpha_at(x, sc.s_ped, sc.params);
    step.agent = agent.phase;

    const double d = sc.s_ped - x.s;
    const bool stop_reachable = d > 0.0 && x.v * x.v / (2.0 * d) <= -sc.limits.a_min + 1e-9;
    const bool yield_now = agent.phase == AgentPhase::kCrossing && stop_reachable;

    std::function<VehicleState(double)> exec_state;
    std::function<double(double)> exec_control;
    double t_next = std::min(x.t + config.replan_period, t_stop);
    std::optional<PlanSelection> ps;
    if (!yield_now && d > 1e-9) {
      Scenario local = sc;
      local.x0 = x;
      const auto w0 = std::chrono::steady_clock::now();
      try {
        ps = plan_and_select(local);
      } catch (const NoFeasibleCandidate &) {
      }
      step.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - w0).count();
    }
    const CandidatePlan * chosen = nullptr;
    if (ps) {
      current = ps->plan.candidates[ps->selection.best];
      chosen = &*current;
    } else if (!yield_now && current && current->plan.end_time() > x.t + 1e-9) {
      chosen = &*current;
      step.continued = true;
    }
    const bool brake = chosen == nullptr;
    if (brake) {
      current.reset();
      const Braking braking(x, sc.s_ped);
      exec_state = [braking](double t) { return braking.at(t); };
      exec_control = [](double) { return 0.0; };
      step.fallback = true;
      step.p_cross0 = step.alpha;
    } else {
      const auto & best = *chosen;
      step.candidates = ps ? ps->plan.candidates.size() : 0;
      step.best_id = static_cast<long>(best.grid_index);
      step.se1 = best.se1;
      step.te1 = best.te1;
      step.plan_max_taudot = best.max_taudot;
      step.p_cross0 = ps ? best.forecast->p_cross.front() : step.alpha;
      const TwoStagePlan plan = best.plan;
      t_next = std::min(t_next, plan.end_time());
      exec_state = [plan](double t) { return plan.state(t); };
      exec_control = [plan](double t) { return plan.control(t); };
    }
    trace.steps.push_back(step);

    const auto times = sample_times(x.t, t_next, sc.sample_dt);
    for (std::size_t i = 1; i < times.size(); ++i) {
      const double t = times[i];
      while (decision_time(next_decision) < t - 1e-9) {
        const double td = decision_time(next_decision);
        decide(td, exec_state(td));
        ++next_decision;
      }
      clear_crossing(t);
      VehicleState xi = exec_state(t);
      if (reaches(xi, sc.s_ped) && xi.v > kSpeedEps && agent.phase == AgentPhase::kCrossing) {
        trace.passed_while_crossing = true;
      }
      trace.executed.states.push_back(xi);
      trace.executed.controls.push_back(exec_control(t));
    }
    x = trace.executed.states.back();
  }
  return trace;
}

// --- decision map -----------------------------------------------------------

std::vector<double> Range::values() const
{
  if (!(step > 0.0) || stop < start) {
    throw std::invalid_argument("range needs step > 0 and stop >= start");
  }
  std::vector<double> out;
  const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9));
  for (std::size_t i = 0; i <= n; ++i) {
    out.push_back(start + static_cast<double>(i) * step);
  }
  return out;
}

SweepResult decision_map_sweep(const Range & d_range, const Range & v_range, const Scenario & base)
{
  SweepResult result;
  const auto ds = d_range.values();
  const auto vs = v_range.values();
  if (ds.empty() || vs.empty()) {
    throw std::invalid_argument("sweep ranges must be non-empty");
  }
  for (double v0 : vs) {
    for (double d0 : ds) {
      SweepCell cell;
      cell.d0 = d0;
      cell.v0 = v0;
      Scenario sc = base;
      sc.x0 = VehicleState{base.x0.t, base.x0.s, v0, 0.0, 0.0};
      sc.s_ped = base.x0.s + d0;
      try {
        sc.validate();
        cell.tau_init = sc.tau_init();
        const auto ps = plan_and_select(sc);
        cell.max_taudot = ps.plan.candidates[ps.selection.best].max_taudot;
      } catch (const std::exception & e) {
        cell.error = e.what();
      }
      result.cells.push_back(cell);
    }
  }
  for (int tau = 2; tau <= 12; ++tau) {
    result.isoline_taus.push_back(tau);
  }
  return result;
}

}  // namespace crossplan
