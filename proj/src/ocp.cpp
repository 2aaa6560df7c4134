#include "crossplan/ocp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>

namespace crossplan
{

namespace
{

constexpr int kUnknowns = 5;
using Vec5 = Eigen::Matrix<double, kUnknowns, 1>;
using Mat5 = Eigen::Matrix<double, kUnknowns, kUnknowns>;

// Iterated integrals of an exponential. For x = lambda * tau:
//   phi_m(x) = sum_{n>=0} x^n / (n+m)!
// is the m-fold integral of e^{x} from 0, divided by x^m.
struct PhiValues
{
  std::array<double, 4> v;
};

PhiValues phi_all(double x)
{
  PhiValues out{};
  if (std::abs(x) < 0.5) {
    // series for phi_3, then phi_m = 1/m! + x phi_{m+1}
    double term = 1.0 / 6.0;
    double sum = term;
    for (int n = 1; n < 30; ++n) {
      term *= x / (n + 3);
      sum += term;
      if (std::abs(term) < 1e-17 * std::abs(sum)) {
        break;
      }
    }
    out.v[3] = sum;
    out.v[2] = 0.5 + x * out.v[3];
    out.v[1] = 1.0 + x * out.v[2];
    out.v[0] = 1.0 + x * out.v[1];
    return out;
  }
  const double em1 = std::expm1(x);
  out.v[0] = em1 + 1.0;
  out.v[1] = em1 / x;
  out.v[2] = (em1 - x) / (x * x);
  out.v[3] = (em1 - x - 0.5 * x * x) / (x * x * x);
  return out;
}

// m-fold integrals over [0, tau] (m = 0..3) of e^{lambda (sigma - anchor)}
// and of e^{-lambda sigma}.
struct Basis
{
  std::array<double, 4> grow;
  std::array<double, 4> decay;
};

Basis basis(double lambda, double tau, double anchor)
{
  Basis b{};
  const double x = lambda * tau;
  const std::array<double, 4> powers{1.0, tau, tau * tau, tau * tau * tau};
  if (anchor == 0.0) {
    const auto g = phi_all(x);
    for (std::size_t m = 0; m < 4; ++m) {
      b.grow[m] = powers[m] * g.v[m];
    }
  } else {
    const double head = std::exp(lambda * (tau - anchor));
    const double tail = std::exp(-lambda * anchor);
    b.grow[0] = head;
    b.grow[1] = (head - tail) / lambda;
    b.grow[2] = (head - tail * (1.0 + x)) / (lambda * lambda);
    b.grow[3] = (head - tail * (1.0 + x + 0.5 * x * x)) / (lambda * lambda * lambda);
  }
  const auto d = phi_all(-x);
  for (std::size_t m = 0; m < 4; ++m) {
    b.decay[m] = powers[m] * d.v[m];
  }
  return b;
}

double growing_exp(double lambda, double tau, double anchor)
{
  return std::exp(lambda * (tau - anchor));
}

struct Polynomial
{
  double p0, p1, p2;
};

Polynomial particular(const JerkClosedForm & cf)
{
  return {
    -cf.c3 / cf.w_j - cf.c1 * cf.w_u / (cf.w_j * cf.w_j), cf.c2 / cf.w_j,
    -cf.c1 / (2.0 * cf.w_j)};
}

double local_time(const JerkClosedForm & cf, double t) { return t - cf.t_start; }

JerkClosedForm make_form(
  const VehicleState & x0, double duration, const OcpWeights & w, const Vec5 & z)
{
  JerkClosedForm cf;
  cf.lambda = w.lambda();
  cf.w_j = w.w_j;
  cf.w_u = w.w_u;
  cf.x_start = x0;
  cf.t_start = x0.t;
  cf.t_end = x0.t + duration;
  cf.k1_anchor = cf.lambda * duration > kShiftThreshold ? duration : 0.0;
  cf.k1 = z(0);
  cf.k2 = z(1);
  // internal unknowns are c / w_j to keep the linear system balanced
  cf.c1 = z(2) * w.w_j;
  cf.c2 = z(3) * w.w_j;
  cf.c3 = z(4) * w.w_j;
  return cf;
}

std::vector<double> residuals_at(
  const JerkClosedForm & cf, double te, const BoundarySpec & spec, const OcpWeights & weights)
{
  std::vector<double> r;
  r.reserve(6);
  r.push_back(cf.jerk(cf.t_start) - cf.x_start.j);
  const VehicleState xe = cf.state_unchecked(te);
  const Costates lam = cf.costates(te);
  const double scale = 1.0 / weights.w_j;
  r.push_back(spec.s ? xe.s - *spec.s : lam.s * scale);
  r.push_back(spec.v ? xe.v - *spec.v : lam.v * scale);
  r.push_back(spec.a ? xe.a - *spec.a : lam.a * scale);
  r.push_back(spec.j ? xe.j - *spec.j : lam.j * scale);
  if (!spec.te) {
    r.push_back((cf.hamiltonian(te) + weights.w_te) * scale);
  }
  return r;
}

Vec5 first_five(const std::vector<double> & r)
{
  Vec5 v;
  for (int i = 0; i < kUnknowns; ++i) {
    v(i) = r[static_cast<std::size_t>(i)];
  }
  return v;
}

bool all_finite(const Vec5 & v) { return v.allFinite(); }

// Residuals cancel terms as large as the jerk coefficients, so the
// convergence tolerance scales with them (never below the absolute value).
double coefficient_scale(const JerkClosedForm & cf)
{
  const auto p = particular(cf);
  return std::max(
    {1.0, std::abs(cf.k1), std::abs(cf.k2), std::abs(p.p0), std::abs(p.p1), std::abs(p.p2)});
}

struct FixedDurationSolution
{
  bool converged{false};
  bool overflow{false};
  JerkClosedForm form;
  double residual{std::numeric_limits<double>::infinity()};
  int iterations{0};
};

// Damped Newton on the integration constants for a fixed segment length.
// The residual is affine in the constants, so the Jacobian obtained from
// unit differences is exact and the iteration converges in one or two steps.
FixedDurationSolution solve_fixed_duration(
  const VehicleState & x0, double duration, const BoundarySpec & spec,
  const OcpWeights & weights, const SolverOptions & options)
{
  FixedDurationSolution out;
  const double te = x0.t + duration;
  auto eval = [&](const Vec5 & z) {
    return first_five(residuals_at(make_form(x0, duration, weights, z), te, spec, weights));
  };

  Vec5 z = Vec5::Zero();  // constant-velocity start
  Vec5 r = eval(z);
  if (!all_finite(r)) {
    out.overflow = true;
    return out;
  }
  double norm = r.cwiseAbs().maxCoeff();
  const auto tolerance = [&](const Vec5 & zz) {
    return options.residual_tolerance * coefficient_scale(make_form(x0, duration, weights, zz));
  };
  Vec5 best_z = z;
  double best_norm = norm;

  for (int it = 0; it < options.max_iterations && norm >= tolerance(z); ++it) {
    out.iterations = it + 1;
    Mat5 jac;
    for (int i = 0; i < kUnknowns; ++i) {
      Vec5 zi = z;
      zi(i) += 1.0;
      jac.col(i) = eval(zi) - r;
    }
    if (!jac.allFinite()) {
      out.overflow = true;
      break;
    }
    const Eigen::ColPivHouseholderQR<Mat5> qr(jac);
    if (qr.rank() < kUnknowns) {
      break;
    }
    const Vec5 step = qr.solve(r);
    double damping = 1.0;
    bool improved = false;
    for (int k = 0; k < 20; ++k) {
      const Vec5 trial = z - damping * step;
      const Vec5 rt = eval(trial);
      const double nt = all_finite(rt) ? rt.cwiseAbs().maxCoeff() : std::numeric_limits<double>::infinity();
      if (nt < norm) {
        z = trial;
        r = rt;
        norm = nt;
        improved = true;
        break;
      }
      damping *= 0.5;
    }
    if (norm < best_norm) {
      best_norm = norm;
      best_z = z;
    }
    if (!improved) {
      break;
    }
  }
  out.form = make_form(x0, duration, weights, best_z);
  out.residual = best_norm;
  out.converged = best_norm < options.residual_tolerance * coefficient_scale(out.form);
  return out;
}

TrajectorySegment finish_segment(const JerkClosedForm & cf, const OcpWeights & weights)
{
  TrajectorySegment seg;
  seg.closed_form = cf;
  seg.terminal_state = cf.state_unchecked(cf.t_end);
  seg.cost = cf.running_cost(cf.t_end);
  seg.end_time_cost = weights.w_te * cf.duration();
  return seg;
}

TrajectorySegment zero_length_segment(const VehicleState & x0, const OcpWeights & weights)
{
  JerkClosedForm cf;
  cf.lambda = weights.lambda();
  cf.w_j = weights.w_j;
  cf.w_u = weights.w_u;
  cf.x_start = x0;
  cf.t_start = x0.t;
  cf.t_end = x0.t;
  TrajectorySegment seg;
  seg.closed_form = cf;
  seg.terminal_state = x0;
  return seg;
}

double max_abs(const std::vector<double> & r)
{
  double m = 0.0;
  for (double x : r) {
    m = std::max(m, std::abs(x));
  }
  return m;
}

}  // namespace

double OcpWeights::lambda() const { return std::sqrt(w_j / w_u); }

void OcpWeights::validate() const
{
  if (!(w_j > 0.0) || !(w_u > 0.0) || !(w_te >= 0.0) || !std::isfinite(w_j) ||
      !std::isfinite(w_u) || !std::isfinite(w_te)) {
    throw std::invalid_argument("OCP weights need w_j > 0, w_u > 0, w_te >= 0");
  }
}

void BoundarySpec::validate(const OcpWeights & weights) const
{
  weights.validate();
  if (!s && !v && !a && !j) {
    throw std::invalid_argument("boundary spec fixes no terminal state");
  }
}

double JerkClosedForm::jerk(double t) const
{
  const double tau = local_time(*this, t);
  const auto p = particular(*this);
  return k1 * growing_exp(lambda, tau, k1_anchor) + k2 * std::exp(-lambda * tau) +
         (p.p2 * tau + p.p1) * tau + p.p0;
}

double JerkClosedForm::control(double t) const
{
  const double tau = local_time(*this, t);
  const auto p = particular(*this);
  return lambda * (k1 * growing_exp(lambda, tau, k1_anchor) - k2 * std::exp(-lambda * tau)) +
         2.0 * p.p2 * tau + p.p1;
}

double JerkClosedForm::jerk_second_derivative(double t) const
{
  const double tau = local_time(*this, t);
  const auto p = particular(*this);
  return lambda * lambda *
           (k1 * growing_exp(lambda, tau, k1_anchor) + k2 * std::exp(-lambda * tau)) +
         2.0 * p.p2;
}

double JerkClosedForm::euler_lagrange_rhs(double t) const
{
  const double tau = local_time(*this, t);
  return (w_j / w_u) * jerk(t) + c1 * tau * tau / (2.0 * w_u) - c2 * tau / w_u + c3 / w_u;
}

Costates JerkClosedForm::costates(double t) const
{
  const double tau = local_time(*this, t);
  return {c1, -c1 * tau + c2, 0.5 * c1 * tau * tau - c2 * tau + c3, -w_u * control(t)};
}

double JerkClosedForm::hamiltonian(double t) const
{
  const VehicleState x = state_unchecked(t);
  const double u = control(t);
  const Costates lam = costates(t);
  return 0.5 * w_j * x.j * x.j + 0.5 * w_u * u * u + lam.s * x.v + lam.v * x.a + lam.a * x.j +
         lam.j * u;
}

VehicleState JerkClosedForm::state_unchecked(double t) const
{
  return state_and_control(t, nullptr);
}

VehicleState JerkClosedForm::state_and_control(double t, double * u) const
{
  const double tau = local_time(*this, t);
  const auto p = particular(*this);
  const double tau2 = tau * tau;
  const double tau3 = tau2 * tau;
  const double tau4 = tau3 * tau;
  const double tau5 = tau4 * tau;
  const Basis b = basis(lambda, tau, k1_anchor);
  const auto & g = b.grow;
  const auto & h = b.decay;
  const auto & x0 = x_start;

  VehicleState x;
  x.t = t;
  x.j = k1 * g[0] + k2 * h[0] + p.p2 * tau2 + p.p1 * tau + p.p0;
  x.a = x0.a + k1 * g[1] + k2 * h[1] + p.p2 * tau3 / 3.0 + p.p1 * tau2 / 2.0 + p.p0 * tau;
  x.v = x0.v + x0.a * tau + k1 * g[2] + k2 * h[2] + p.p2 * tau4 / 12.0 + p.p1 * tau3 / 6.0 +
        p.p0 * tau2 / 2.0;
  x.s = x0.s + x0.v * tau + x0.a * tau2 / 2.0 + k1 * g[3] + k2 * h[3] + p.p2 * tau5 / 60.0 +
        p.p1 * tau4 / 24.0 + p.p0 * tau3 / 6.0;
  if (u != nullptr) {
    *u = lambda * (k1 * g[0] - k2 * h[0]) + 2.0 * p.p2 * tau + p.p1;
  }
  return x;
}

VehicleState JerkClosedForm::state(double t) const
{
  const double slack = 1e-9 * std::max(1.0, std::abs(t_end));
  if (t < t_start - slack || t > t_end + slack) {
    throw KinematicsError("time outside closed-form segment interval");
  }
  return state_unchecked(std::clamp(t, t_start, t_end));
}

double JerkClosedForm::running_cost(double t) const
{
  const double length = t - t_start;
  if (length <= 0.0) {
    return 0.0;
  }
  using Rule = boost::math::quadrature::gauss<double, 20>;
  const auto panels = static_cast<int>(std::ceil(length / 1.0));
  const double width = length / panels;
  double total = 0.0;
  for (int k = 0; k < panels; ++k) {
    const double lo = t_start + k * width;
    total += Rule::integrate(
      [&](double s) {
        const double jj = jerk(s);
        const double uu = control(s);
        return 0.5 * w_j * jj * jj + 0.5 * w_u * uu * uu;
      },
      lo, lo + width);
  }
  return total;
}

VehicleState eval_closed_form(const JerkClosedForm & cf, double t) { return cf.state(t); }

std::vector<double> boundary_residuals(
  const JerkClosedForm & cf, double te, const BoundarySpec & spec, const OcpWeights & weights)
{
  return residuals_at(cf, te, spec, weights);
}

VehicleState TrajectorySegment::state(double t) const
{
  if (zero_length()) {
    VehicleState x = closed_form.x_start;
    x.t = t;
    return x;
  }
  return closed_form.state(t);
}

const char * to_string(SolveStatus status)
{
  switch (status) {
    case SolveStatus::kOk:
      return "ok";
    case SolveStatus::kRootSolveFailed:
      return "root_solve_failed";
    case SolveStatus::kNumericOverflow:
      return "numeric_overflow";
    case SolveStatus::kDegenerateStart:
      return "degenerate_start";
  }
  return "unknown";
}

SolveResult solve_segment(
  const VehicleState & x0, const BoundarySpec & spec, const OcpWeights & weights,
  const SolverOptions & options)
{
  spec.validate(weights);
  if (!x0.finite()) {
    throw KinematicsError("initial state is not finite");
  }
  SolveResult result;

  if (spec.te) {
    const double duration = *spec.te - x0.t;
    if (!(duration > 0.0)) {
      throw std::invalid_argument("fixed end time must lie after the initial time");
    }
    const auto sol = solve_fixed_duration(x0, duration, spec, weights, options);
    result.iterations = sol.iterations;
    result.residual_norm = sol.residual;
    if (sol.overflow) {
      result.status = SolveStatus::kNumericOverflow;
      result.message = "non-finite residual";
      return result;
    }
    if (!sol.converged) {
      result.status = SolveStatus::kRootSolveFailed;
      result.message = "constants did not converge";
      return result;
    }
    result.status = SolveStatus::kOk;
    result.segment = finish_segment(sol.form, weights);
    return result;
  }

  // Free end time: the constants are eliminated exactly for each trial
  // duration and the remaining scalar end-time condition is bracketed and
  // refined with a safeguarded secant iteration.
  const auto end_condition = [&](double duration, FixedDurationSolution * keep) {
    auto sol = solve_fixed_duration(x0, duration, spec, weights, options);
    double f = std::numeric_limits<double>::quiet_NaN();
    if (sol.converged) {
      f = residuals_at(sol.form, x0.t + duration, spec, weights).back();
    }
    if (keep != nullptr) {
      *keep = std::move(sol);
    }
    return f;
  };

  std::vector<double> grid;
  const int n = std::max(options.duration_scan_points, 4);
  const double ratio = std::log(options.max_duration / options.min_duration);
  for (int i = 0; i < n; ++i) {
    grid.push_back(options.min_duration * std::exp(ratio * i / (n - 1)));
  }
  if (spec.s && x0.v > kSpeedEps) {
    const double cv = (*spec.s - x0.s) / x0.v;
    if (cv > options.min_duration && cv < options.max_duration) {
      grid.push_back(cv);
    }
  }
  std::sort(grid.begin(), grid.end());

  std::vector<double> values;
  values.reserve(grid.size());
  for (double d : grid) {
    values.push_back(end_condition(d, nullptr));
  }

  std::vector<double> roots;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (std::isfinite(values[i]) && std::abs(values[i]) < options.residual_tolerance) {
      roots.push_back(grid[i]);
      continue;
    }
    if (i + 1 >= grid.size() || !std::isfinite(values[i]) || !std::isfinite(values[i + 1])) {
      continue;
    }
    if ((values[i] < 0.0) == (values[i + 1] < 0.0)) {
      continue;
    }
    // Illinois variant of regula falsi
    double lo = grid[i];
    double hi = grid[i + 1];
    double flo = values[i];
    double fhi = values[i + 1];
    int side = 0;
    double root = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
      root = (lo * fhi - hi * flo) / (fhi - flo);
      if (!(root > lo && root < hi)) {
        root = 0.5 * (lo + hi);
      }
      const double f = end_condition(root, nullptr);
      if (!std::isfinite(f)) {
        break;
      }
      if (std::abs(f) < options.residual_tolerance || hi - lo < 1e-14 * hi) {
        break;
      }
      if ((f < 0.0) == (flo < 0.0)) {
        lo = root;
        flo = f;
        if (side == -1) {
          fhi *= 0.5;
        }
        side = -1;
      } else {
        hi = root;
        fhi = f;
        if (side == 1) {
          flo *= 0.5;
        }
        side = 1;
      }
    }
    roots.push_back(root);
  }

  double best_total = std::numeric_limits<double>::infinity();
  for (double d : roots) {
    FixedDurationSolution sol;
    end_condition(d, &sol);
    if (!sol.converged) {
      continue;
    }
    const auto full = residuals_at(sol.form, x0.t + d, spec, weights);
    const double norm = max_abs(full);
    if (!(norm < 100.0 * options.residual_tolerance * coefficient_scale(sol.form))) {
      continue;
    }
    auto seg = finish_segment(sol.form, weights);
    const double total = seg.cost + seg.end_time_cost;
    if (total < best_total) {
      best_total = total;
      result.segment = std::move(seg);
      result.residual_norm = norm;
      result.iterations = sol.iterations;
    }
  }
  if (!result.segment) {
    result.status = SolveStatus::kRootSolveFailed;
    result.message = "no end time satisfies the transversality condition";
    return result;
  }
  result.status = SolveStatus::kOk;
  return result;
}

SolveResult solve_stage1(
  const VehicleState & x0, double se1, double te1, const OcpWeights & weights,
  const SolverOptions & options)
{
  OcpWeights w = weights;
  w.w_te = 0.0;
  BoundarySpec spec;
  spec.s = se1;
  spec.a = 0.0;
  spec.j = 0.0;
  spec.te = te1;
  return solve_segment(x0, spec, w, options);
}

SolveResult solve_stage2(
  const VehicleState & x1, double s_ped, const OcpWeights & weights,
  const SolverOptions & options)
{
  if (s_ped - x1.s <= 1e-9) {
    SolveResult result;
    result.status = SolveStatus::kDegenerateStart;
    result.segment = zero_length_segment(x1, weights);
    result.message = "stage-2 start already at the pedestrian";
    return result;
  }
  BoundarySpec spec;
  spec.s = s_ped;
  return solve_segment(x1, spec, weights, options);
}

SampledTrajectory sample_segment(const TrajectorySegment & segment, double dt)
{
  SampledTrajectory traj;
  traj.dt = dt;
  const auto & cf = segment.closed_form;
  for (double t : sample_times(cf.t_start, cf.t_end, dt)) {
    if (segment.zero_length()) {
      traj.states.push_back(segment.state(t));
      traj.controls.push_back(0.0);
      continue;
    }
    double u = 0.0;
    traj.states.push_back(cf.state_and_control(std::clamp(t, cf.t_start, cf.t_end), &u));
    traj.controls.push_back(u);
  }
  return traj;
}

}  // namespace crossplan
