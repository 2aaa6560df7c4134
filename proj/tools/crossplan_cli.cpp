// crossplan: plan, simulate, sweep and inspect the crossing model.
#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "crossplan/scenario_io.hpp"

using namespace crossplan;

namespace
{
constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitNoCandidate = 2;

Range parse_range(const std::string & text)
{
  std::istringstream in(text);
  std::string a, b, c;
  if (!std::getline(in, a, ':') || !std::getline(in, b, ':') || !std::getline(in, c)) {
    throw CLI::ValidationError("range", "expected a:b:step, got '" + text + "'");
  }
  try {
    return Range{std::stod(a), std::stod(b), std::stod(c)};
  } catch (const std::exception &) {
    throw CLI::ValidationError("range", "non-numeric range '" + text + "'");
  }
}

Scenario load(const std::string & path, std::optional<double> s_ped_default)
{
  if (!path.empty()) {
    return parse_scenario(path);
  }
  Scenario sc;
  if (s_ped_default) {
    sc.s_ped = *s_ped_default;
    return sc;
  }
  throw ValidationError("--scenario is required");
}

void print_header(const Scenario & sc)
{
  std::cout << "# effective configuration\n";
  std::istringstream lines(echo_scenario(sc));
  for (std::string line; std::getline(lines, line);) {
    std::cout << "#   " << line << '\n';
  }
}
}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"Jerk-optimal approach planning with a pedestrian crossing model"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir = "out";

  auto * plan = app.add_subcommand("plan", "single-shot planning for one scenario");
  plan->add_option("--scenario", scenario_path, "scenario file")->required()->check(CLI::ExistingFile);
  plan->add_option("--out", out_dir, "output directory");

  std::uint64_t seed = 0;
  double replan_period = 0.2;
  double max_time = 30.0;
  std::string agent_mode = "scripted";
  std::optional<double> cross_time;
  double threshold = 0.5;
  auto * sim = app.add_subcommand("simulate", "closed-loop replanning against a pedestrian agent");
  sim->add_option("--scenario", scenario_path, "scenario file")->required()->check(CLI::ExistingFile);
  sim->add_option("--out", out_dir, "output directory");
  sim->add_option("--seed", seed, "random seed of the stochastic agent");
  sim->add_option("--replan-period", replan_period, "replanning period [s]")->check(CLI::PositiveNumber);
  sim->add_option("--max-time", max_time, "simulation limit [s]")->check(CLI::PositiveNumber);
  sim->add_option("--agent", agent_mode, "pedestrian agent")
    ->check(CLI::IsMember({"scripted", "threshold", "stochastic"}));
  sim->add_option("--cross-time", cross_time, "scripted agent crossing time [s]; never when omitted");
  sim->add_option("--threshold", threshold, "threshold agent crossing level")->check(CLI::Range(0.0, 1.0));

  std::string d_range = "20:100:10";
  std::string v_range = "8:12:2";
  auto * sweep = app.add_subcommand("sweep", "decision map over initial distance and speed");
  sweep->add_option("--scenario", scenario_path, "template scenario (s_ped is overridden)");
  sweep->add_option("--out", out_dir, "output directory");
  sweep->add_option("--d-range", d_range, "distances a:b:step [m]");
  sweep->add_option("--v-range", v_range, "speeds a:b:step [m/s]");

  std::vector<double> taus;
  std::vector<double> taudots;
  auto * model = app.add_subcommand("model", "evaluate the crossing model at given points");
  model->add_option("--scenario", scenario_path, "scenario file for the model parameters");
  model->add_option("--tau", taus, "time gaps [s]")->required();
  model->add_option("--taudot", taudots, "time-gap rates (one per tau, or a single value)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError & e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (*plan) {
      const Scenario sc = load(scenario_path, std::nullopt);
      print_header(sc);
      const auto report = run_open_loop(sc);
      emit_report(report, out_dir);
      const auto & best = report.best_candidate();
      std::printf(
        "best se1=%s te1=%s te=%s max_taudot=%s c_joint=%s t_wait=%s candidates=%zu/%zu time=%.2fs\n",
        format_number(best.se1).c_str(), format_number(best.te1).c_str(),
        format_number(best.plan.duration()).c_str(), format_number(best.max_taudot).c_str(),
        format_number(best.costs->c_joint).c_str(), format_number(best.costs->t_wait).c_str(),
        report.plan.candidates.size(), report.plan.grid_size, report.planning_seconds);
      if (report.no_yielding_communication) {
        std::printf("no yielding communication\n");
      }
    } else if (*sim) {
      const Scenario sc = load(scenario_path, std::nullopt);
      print_header(sc);
      SimConfig config;
      config.replan_period = replan_period;
      config.max_time = max_time;
      config.agent.mode = parse_agent_mode(agent_mode);
      config.agent.seed = seed;
      config.agent.cross_time = cross_time;
      config.agent.threshold = threshold;
      config.agent.v_ped = sc.cost.v_ped;
      const auto trace = run_closed_loop(sc, config);
      emit_trace(trace, sc, out_dir);
      std::printf(
        "outcome=%s steps=%zu end_t=%s\n", to_string(trace.outcome), trace.steps.size(),
        format_number(trace.executed.end_time()).c_str());
    } else if (*sweep) {
      Scenario sc = load(scenario_path, 30.0);
      print_header(sc);
      const auto result = decision_map_sweep(parse_range(d_range), parse_range(v_range), sc);
      emit_sweep(result, sc, out_dir);
      std::size_t missing = 0;
      for (const auto & c : result.cells) {
        missing += c.max_taudot ? 0 : 1;
      }
      std::printf("cells=%zu missing=%zu\n", result.cells.size(), missing);
    } else if (*model) {
      const Scenario sc = load(scenario_path, 30.0);
      if (taudots.size() != 1 && taudots.size() != taus.size()) {
        throw ValidationError("--taudot needs one value or one per --tau");
      }
      std::printf("tau,taudot,phi,psi,alpha\n");
      for (std::size_t i = 0; i < taus.size(); ++i) {
        const double td = taudots.size() == 1 ? taudots[0] : taudots[i];
        std::printf(
          "%s,%s,%s,%s,%s\n", format_number(taus[i]).c_str(), format_number(td).c_str(),
          format_number(phi(taus[i], sc.params)).c_str(), format_number(psi(td, sc.params)).c_str(),
          format_number(alpha(taus[i], td, sc.params)).c_str());
      }
    }
  } catch (const NoFeasibleCandidate & e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNoCandidate;
  } catch (const std::exception & e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitOk;
}
