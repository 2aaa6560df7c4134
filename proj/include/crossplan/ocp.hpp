// Closed-form jerk-optimal longitudinal segments.
//
// Each segment minimizes
//
//   w_te * te + integral_{t0}^{te} ( w_j/2 j^2 + w_u/2 u^2 ) dt,   u = dj/dt,
//
// subject to the chain of integrators s' = v, v' = a, a' = j, j' = u, a fixed
// initial state, and terminal equalities on any subset of (s, v, a, j, te).
// The optimal jerk is
//
//   j(tau) = k1 e^{lambda (tau - A)} + k2 e^{-lambda tau} + p2 tau^2 + p1 tau + p0
//
// with local time tau = t - t_start, lambda = sqrt(w_j / w_u) and
//
//   p2 = -c1 / (2 w_j),  p1 = c2 / w_j,  p0 = -c3 / w_j - c1 w_u / w_j^2.
//
// A is the anchor of the growing exponential; it is zero unless lambda times
// the segment length exceeds kShiftThreshold, in which case A is the segment
// length so the basis stays bounded.
//
// The costates are lambda_s = c1, lambda_v = -c1 tau + c2,
// lambda_a = c1 tau^2 / 2 - c2 tau + c3 and lambda_j = -w_u u. A free terminal
// state requires its costate to vanish at te; a free end time requires
// H(te) + w_te = 0 where H = w_j/2 j^2 + w_u/2 u^2 + sum(lambda_x * x').
// Background and the derivation are in docs/ocp_derivation.md.
#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "crossplan/kinematics.hpp"

namespace crossplan
{

inline constexpr double kShiftThreshold = 30.0;

struct OcpWeights
{
  double w_j{2.25e-4};  // jerk
  double w_u{1.8e-4};   // control (jerk rate)
  double w_te{3e-3};    // end time

  double lambda() const;
  /// Throws std::invalid_argument when a weight is out of range.
  void validate() const;
};

struct Costates
{
  double s{0.0};
  double v{0.0};
  double a{0.0};
  double j{0.0};
};

struct JerkClosedForm
{
  double k1{0.0};
  double k2{0.0};
  double c1{0.0};
  double c2{0.0};
  double c3{0.0};
  double lambda{0.0};
  double t_start{0.0};
  double t_end{0.0};
  VehicleState x_start{};
  double w_j{1.0};
  double w_u{1.0};
  double k1_anchor{0.0};  // local time A of the growing exponential

  double duration() const { return t_end - t_start; }

  double jerk(double t) const;
  /// u = dj/dt
  double control(double t) const;
  /// d^2 j / dt^2
  double jerk_second_derivative(double t) const;
  /// Right-hand side of the Euler-Lagrange equation for j''.
  double euler_lagrange_rhs(double t) const;
  Costates costates(double t) const;
  double hamiltonian(double t) const;
  /// Analytic (s, v, a, j) at absolute time t. Throws KinematicsError outside the segment.
  VehicleState state(double t) const;
  /// Same as state() without the interval check.
  VehicleState state_unchecked(double t) const;
  /// State plus the control u, from a single basis evaluation.
  VehicleState state_and_control(double t, double * u) const;
  /// Running cost integral of w_j/2 j^2 + w_u/2 u^2 over [t_start, t].
  double running_cost(double t) const;
};

/// Evaluates the analytic state of a closed-form segment.
VehicleState eval_closed_form(const JerkClosedForm & cf, double t);

/// Terminal conditions; an empty optional leaves the quantity free.
/// te is an absolute time.
struct BoundarySpec
{
  std::optional<double> s;
  std::optional<double> v;
  std::optional<double> a;
  std::optional<double> j;
  std::optional<double> te;

  /// Throws std::invalid_argument when no terminal quantity is fixed.
  void validate(const OcpWeights & weights) const;
};

/// Residuals: initial jerk, then for s, v, a, j the terminal equality or
/// costate condition, then the end-time condition when te is free. Costate
/// and Hamiltonian rows are divided by w_j so every row is in state units.
std::vector<double> boundary_residuals(
  const JerkClosedForm & cf, double te, const BoundarySpec & spec, const OcpWeights & weights);

struct TrajectorySegment
{
  JerkClosedForm closed_form;
  VehicleState terminal_state;
  double cost{0.0};           // running cost integral
  double end_time_cost{0.0};  // w_te * duration

  double duration() const { return closed_form.duration(); }
  bool zero_length() const { return closed_form.duration() <= 0.0; }
  VehicleState state(double t) const;
};

enum class SolveStatus
{
  kOk,
  kRootSolveFailed,
  kNumericOverflow,
  kDegenerateStart,  // zero-length segment, still usable
};

const char * to_string(SolveStatus status);

struct SolveResult
{
  SolveStatus status{SolveStatus::kRootSolveFailed};
  std::optional<TrajectorySegment> segment;
  int iterations{0};
  double residual_norm{0.0};
  std::string message;

  bool ok() const { return segment.has_value(); }
};

struct SolverOptions
{
  int max_iterations{100};
  double residual_tolerance{1e-10};
  /// Free end-time search interval for the segment duration [s].
  double min_duration{1e-2};
  double max_duration{100.0};
  int duration_scan_points{48};
};

/// General two-point boundary value solve for one segment.
SolveResult solve_segment(
  const VehicleState & x0, const BoundarySpec & spec, const OcpWeights & weights,
  const SolverOptions & options = {});

/// Stage 1: reach s = se1 at time te1 with a = j = 0, free velocity, no end-time weight.
SolveResult solve_stage1(
  const VehicleState & x0, double se1, double te1, const OcpWeights & weights,
  const SolverOptions & options = {});

/// Stage 2: reach s = s_ped with every other terminal state and the end time free.
SolveResult solve_stage2(
  const VehicleState & x1, double s_ped, const OcpWeights & weights,
  const SolverOptions & options = {});

/// Samples a segment on [t_start, t_end] with spacing dt.
SampledTrajectory sample_segment(const TrajectorySegment & segment, double dt = kSampleDt);

}  // namespace crossplan
