// Scenario runs: single-shot planning, closed-loop replanning against a
// pedestrian agent, and the (d0, v0) decision-map sweep.
#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "crossplan/cost.hpp"
#include "crossplan/grid_planner.hpp"
#include "crossplan/pedestrian_model.hpp"

namespace crossplan
{

/// Floor on v0 in the utility normalization d0 / (te v0) [m/s].
inline constexpr double kMinNormalizationSpeed = 1.0;
/// A plan whose max time-gap rate stays at or below this shows no yielding cue.
inline constexpr double kNoYieldTaudot = -0.9;

struct Scenario
{
  VehicleState x0{0.0, 0.0, 10.0, 0.0, 0.0};
  double s_ped{30.0};
  OcpWeights ocp{};
  CostWeights cost{};  // cost.v_ped is the pedestrian walking speed
  AcceptanceParams params{};
  GridSpec grid{};
  FeasibilityLimits limits{};
  double dt_dm{1.0};  // pedestrian decision period [s]
  double sample_dt{kSampleDt};

  double tau_init() const { return time_gap(x0, s_ped); }
  /// Throws std::invalid_argument naming the violated invariant.
  void validate() const;
};

/// Forecast and costs of one candidate, measured from the plan start.
void score_candidate(CandidatePlan & cand, const SampledTrajectory & samples, const Scenario & sc);

struct ReferenceSeries
{
  std::string name;
  SampledTrajectory traj;
  CrossingForecast forecast;
  double max_taudot{-1.0};
};

struct ScenarioReport
{
  Scenario scenario;
  PlanResult plan;
  Selection selection;
  ReferenceSeries best;
  ReferenceSeries worst;
  ReferenceSeries cv;
  ReferenceSeries ca;
  bool no_yielding_communication{false};
  double planning_seconds{0.0};

  const CandidatePlan & best_candidate() const { return plan.candidates[selection.best]; }
};

/// Plans once from scenario.x0. Throws NoFeasibleCandidate.
ScenarioReport run_open_loop(const Scenario & sc);

/// Plans and selects from an arbitrary start state; used by the closed loop.
struct PlanSelection
{
  PlanResult plan;
  Selection selection;
};
PlanSelection plan_and_select(const Scenario & sc);

// --- pedestrian agent -------------------------------------------------------

enum class AgentMode
{
  kScripted,
  kThreshold,
  kStochastic,
};

enum class AgentPhase
{
  kWaiting,
  kCrossing,
  kCrossed,
};

const char * to_string(AgentMode mode);
const char * to_string(AgentPhase phase);
AgentMode parse_agent_mode(const std::string & text);

struct AgentConfig
{
  AgentMode mode{AgentMode::kScripted};
  std::optional<double> cross_time;  // scripted: first decision at or after this time; empty = never
  double threshold{0.5};             // threshold mode: cross once alpha >= threshold
  std::uint64_t seed{0};
  double road_width{4.0};  // [m]
  double v_ped{1.5};       // [m/s]
};

struct AgentState
{
  AgentPhase phase{AgentPhase::kWaiting};
  double commit_time{0.0};
  double clear_time{0.0};
  int decisions{0};
  std::mt19937_64 rng{};
};

AgentState make_agent(const AgentConfig & config);

/// One decision instant at time t with instantaneous crossing likelihood alpha.
AgentState pedestrian_agent_step(AgentState agent, const AgentConfig & config, double t, double alpha);

// --- closed loop ------------------------------------------------------------

struct SimConfig
{
  double replan_period{0.2};
  double max_time{30.0};
  AgentConfig agent{};
};

struct SimStep
{
  double t{0.0};
  VehicleState state{};
  long best_id{-1};  // grid index of the executed candidate, -1 when braking
  double se1{0.0};
  double te1{0.0};
  double plan_max_taudot{0.0};
  double alpha{0.0};
  double p_cross0{0.0};
  AgentPhase agent{AgentPhase::kWaiting};
  bool fallback{false};   // constant-deceleration braking
  bool continued{false};  // replanning failed, previous plan kept
  std::size_t candidates{0};
  double wall_seconds{0.0};
};

enum class SimOutcome
{
  kVehiclePassed,
  kPedestrianCrossed,
  kTimeout,
};

const char * to_string(SimOutcome outcome);

struct SimTrace
{
  std::vector<SimStep> steps;
  SampledTrajectory executed;
  std::vector<std::pair<double, AgentPhase>> agent_events;
  SimOutcome outcome{SimOutcome::kTimeout};
  bool passed_while_crossing{false};

  /// Equality ignoring the wall-time of planning.
  bool same_as(const SimTrace & other) const;
};

SimTrace run_closed_loop(const Scenario & sc, const SimConfig & config);

// --- decision map -----------------------------------------------------------

struct Range
{
  double start{0.0};
  double stop{0.0};
  double step{1.0};

  /// start, start + step, ..., up to stop inclusive.
  std::vector<double> values() const;
};

struct SweepCell
{
  double d0{0.0};
  double v0{0.0};
  double tau_init{0.0};
  std::optional<double> max_taudot;
  std::string error;
};

struct SweepResult
{
  std::vector<SweepCell> cells;
  std::vector<double> isoline_taus;  // constant tau_init lines d0 = tau * v0
};

SweepResult decision_map_sweep(const Range & d_range, const Range & v_range, const Scenario & base);

}  // namespace crossplan
