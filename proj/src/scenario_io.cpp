#include "crossplan/scenario_io.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <system_error>
#include <vector>

#include <json.hpp>

namespace crossplan
{

ParseError::ParseError(int line, const std::string & key, const std::string & what)
: std::runtime_error("line " + std::to_string(line) + (key.empty() ? "" : ", key '" + key + "'") + ": " + what),
  line_(line),
  key_(key)
{
}

namespace
{
struct Key
{
  const char * name;
  const char * unit;  // "-" for dimensionless
  std::function<double &(Scenario &)> ref;
};

// Keys in echo order.
const std::vector<Key> & keys()
{
  static const std::vector<Key> table = {
    {"s0", "m", [](Scenario & s) -> double & { return s.x0.s; }},
    {"v0", "m/s", [](Scenario & s) -> double & { return s.x0.v; }},
    {"a0", "m/s^2", [](Scenario & s) -> double & { return s.x0.a; }},
    {"j0", "m/s^3", [](Scenario & s) -> double & { return s.x0.j; }},
    {"s_ped", "m", [](Scenario & s) -> double & { return s.s_ped; }},
    {"v_ped", "m/s", [](Scenario & s) -> double & { return s.cost.v_ped; }},
    {"te_max", "s", [](Scenario & s) -> double & { return s.grid.te_max; }},
    {"ds", "m", [](Scenario & s) -> double & { return s.grid.ds; }},
    {"dt_e", "s", [](Scenario & s) -> double & { return s.grid.dt_e; }},
    {"edge_fraction", "-", [](Scenario & s) -> double & { return s.grid.edge_fraction; }},
    {"dt_dm", "s", [](Scenario & s) -> double & { return s.dt_dm; }},
    {"sample_dt", "s", [](Scenario & s) -> double & { return s.sample_dt; }},
    {"w_j", "-", [](Scenario & s) -> double & { return s.ocp.w_j; }},
    {"w_u", "-", [](Scenario & s) -> double & { return s.ocp.w_u; }},
    {"w_te", "-", [](Scenario & s) -> double & { return s.ocp.w_te; }},
    {"w_tb_v", "-", [](Scenario & s) -> double & { return s.cost.w_tb_v; }},
    {"w_tb_p", "-", [](Scenario & s) -> double & { return s.cost.w_tb_p; }},
    {"w_wt", "-", [](Scenario & s) -> double & { return s.cost.w_wt; }},
    {"beta", "-", [](Scenario & s) -> double & { return s.params.beta; }},
    {"phi_slope", "1/s", [](Scenario & s) -> double & { return s.params.phi_slope; }},
    {"phi_mid", "s", [](Scenario & s) -> double & { return s.params.phi_mid; }},
    {"psi_slope", "-", [](Scenario & s) -> double & { return s.params.psi_slope; }},
    {"psi_mid", "-", [](Scenario & s) -> double & { return s.params.psi_mid; }},
    {"v_min", "m/s", [](Scenario & s) -> double & { return s.limits.v_min; }},
    {"v_max", "m/s", [](Scenario & s) -> double & { return s.limits.v_max; }},
    {"a_min", "m/s^2", [](Scenario & s) -> double & { return s.limits.a_min; }},
    {"a_max", "m/s^2", [](Scenario & s) -> double & { return s.limits.a_max; }},
    {"j_max", "m/s^3", [](Scenario & s) -> double & { return s.limits.j_abs_max; }},
    {"u_max", "m/s^4", [](Scenario & s) -> double & { return s.limits.u_abs_max; }},
  };
  return table;
}

std::string trim(const std::string & s)
{
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) {
    return {};
  }
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::optional<double> to_double(const std::string & text)
{
  double value = 0.0;
  const char * end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

std::string format_digits(double value, int digits)
{
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, value);
  return buf;
}

[[noreturn]] void io_failure(const std::filesystem::path & path)
{
  throw std::system_error(errno, std::generic_category(), "cannot write " + path.string());
}

class CsvFile
{
public:
  CsvFile(const std::filesystem::path & path, const std::vector<std::string> & header)
  : path_(path), out_(path, std::ios::binary)
  {
    if (!out_) {
      io_failure(path_);
    }
    row(header);
  }

  void row(const std::vector<std::string> & cells)
  {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      out_ << (i ? "," : "") << cells[i];
    }
    out_ << '\n';
    if (!out_) {
      io_failure(path_);
    }
  }

private:
  std::filesystem::path path_;
  std::ofstream out_;
};

void write_text(const std::filesystem::path & path, const std::string & text)
{
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) {
    io_failure(path);
  }
}

void ensure_dir(const std::filesystem::path & dir)
{
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw std::system_error(ec, "cannot create " + dir.string());
  }
}

std::string num(double v) { return format_number(v); }
std::string opt_num(const std::optional<double> & v) { return v ? num(*v) : std::string(); }

const std::vector<std::string> kSeriesColumns = {"t", "s", "v", "a", "j", "tau", "taudot", "alpha", "p_cross", "p_stand"};

std::vector<std::string> series_row(const VehicleState & x, const CrossingForecast & fc, const Scenario & sc)
{
  const double tau = time_gap(x, sc.s_ped);
  const double taudot = time_gap_rate(x, sc.s_ped);
  const double pc = fc.p_cross_at(x.t);
  return {num(x.t), num(x.s), num(x.v), num(x.a), num(x.j), num(tau), num(taudot),
          num(alpha(tau, taudot, sc.params)), num(pc), num(1.0 - pc)};
}

nlohmann::ordered_json costs_json(const CostBreakdown & c)
{
  return {{"c_comf_v", c.c_comf_v}, {"c_util_v", c.c_util_v}, {"c_util_p", c.c_util_p},
          {"c_joint", c.c_joint}, {"t_wait", c.t_wait}, {"d0", c.d0}};
}

nlohmann::ordered_json candidate_json(const CandidatePlan & c)
{
  nlohmann::ordered_json j = {
    {"se1", c.se1}, {"te1", c.te1}, {"te", c.plan.duration()}, {"max_taudot", c.max_taudot},
    {"max_speed", c.max_speed}};
  if (c.costs) {
    j["costs"] = costs_json(*c.costs);
  }
  if (c.forecast) {
    j["p_cross_end"] = c.forecast->p_cross_at(c.plan.end_time());
  }
  return j;
}

nlohmann::ordered_json config_json(const Scenario & sc)
{
  nlohmann::ordered_json j;
  Scenario copy = sc;
  for (const auto & k : keys()) {
    j[k.name] = k.ref(copy);
  }
  j["edge_thinning"] = sc.grid.edge_thinning;
  return j;
}

std::string dump(const nlohmann::ordered_json & j)
{
  return j.dump(2) + "\n";
}
}  // namespace

std::string format_number(double value)
{
  if (value == 0.0) {
    return "0";  // no negative zero
  }
  return format_digits(value, 9);
}

Scenario parse_scenario_text(const std::string & text)
{
  Scenario sc;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string content = trim(raw.substr(0, hash));
    if (content.empty()) {
      continue;
    }
    const auto colon = content.find(':');
    if (colon == std::string::npos) {
      throw ParseError(line, "", "expected 'key: value'");
    }
    const std::string key = trim(content.substr(0, colon));
    std::istringstream fields(trim(content.substr(colon + 1)));
    std::string value_text;
    std::string unit;
    std::string extra;
    fields >> value_text >> unit >> extra;
    if (key.empty()) {
      throw ParseError(line, "", "missing key");
    }
    if (value_text.empty()) {
      throw ParseError(line, key, "missing value");
    }
    if (!extra.empty()) {
      throw ParseError(line, key, "unexpected text '" + extra + "'");
    }
    if (!seen.insert(key).second) {
      throw ParseError(line, key, "duplicate key");
    }
    if (key == "edge_thinning") {
      if (value_text == "true" || value_text == "1") {
        sc.grid.edge_thinning = true;
      } else if (value_text == "false" || value_text == "0") {
        sc.grid.edge_thinning = false;
      } else {
        throw ParseError(line, key, "expected true or false");
      }
      if (!unit.empty() && unit != "-") {
        throw ParseError(line, key, "unit '" + unit + "' does not apply");
      }
      continue;
    }
    const auto it = std::find_if(keys().begin(), keys().end(), [&](const Key & k) { return key == k.name; });
    if (it == keys().end()) {
      throw ParseError(line, key, "unknown key");
    }
    if (!unit.empty() && unit != it->unit) {
      throw ParseError(line, key, "unit '" + unit + "' does not match expected '" + it->unit + "'");
    }
    const auto value = to_double(value_text);
    if (!value) {
      throw ParseError(line, key, "not a number: '" + value_text + "'");
    }
    it->ref(sc) = *value;
  }
  if (!seen.count("s_ped")) {
    throw ValidationError("s_ped is required");
  }
  // one jerk weight serves planning and comfort cost
  sc.cost.w_j = sc.ocp.w_j;
  try {
    sc.validate();
  } catch (const std::invalid_argument & e) {
    throw ValidationError(e.what());
  }
  return sc;
}

Scenario parse_scenario(const std::filesystem::path & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::system_error(errno, std::generic_category(), "cannot read " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario_text(buf.str());
}

std::string echo_scenario(const Scenario & sc)
{
  std::ostringstream out;
  Scenario copy = sc;
  for (const auto & k : keys()) {
    out << k.name << ": " << format_digits(k.ref(copy), 17);
    if (std::string(k.unit) != "-") {
      out << ' ' << k.unit;
    }
    out << '\n';
  }
  out << "edge_thinning: " << (sc.grid.edge_thinning ? "true" : "false") << '\n';
  return out.str();
}

void emit_report(const ScenarioReport & report, const std::filesystem::path & out_dir)
{
  ensure_dir(out_dir);
  const Scenario & sc = report.scenario;
  write_text(out_dir / "config.txt", echo_scenario(sc));

  const auto & cands = report.plan.candidates;
  {
    CsvFile csv(
      out_dir / "candidates.csv",
      {"se1", "te1", "feasible", "c_comf_v", "c_util_v", "c_util_p", "c_joint", "max_taudot", "t_wait", "best",
       "worst", "outcome"});
    std::size_t next = 0;
    for (std::size_t i = 0; i < report.plan.diagnostics.size(); ++i) {
      const auto & diag = report.plan.diagnostics[i];
      if (next < cands.size() && cands[next].grid_index == i) {
        const auto & c = cands[next];
        const auto & k = *c.costs;
        csv.row({num(c.se1), num(c.te1), "true", num(k.c_comf_v), num(k.c_util_v), num(k.c_util_p),
                 num(k.c_joint), num(c.max_taudot), num(k.t_wait), next == report.selection.best ? "true" : "false",
                 next == report.selection.worst ? "true" : "false", to_string(diag.outcome)});
        ++next;
      } else {
        csv.row({num(diag.point.se1), num(diag.point.te1), "false", "", "", "", "", "", "", "false", "false",
                 to_string(diag.outcome)});
      }
    }
  }
  {
    CsvFile csv(out_dir / "best_timeseries.csv", kSeriesColumns);
    for (const auto & x : report.best.traj.states) {
      csv.row(series_row(x, report.best.forecast, sc));
    }
  }
  {
    auto header = kSeriesColumns;
    header.insert(header.begin(), "series");
    CsvFile csv(out_dir / "reference_series.csv", header);
    for (const auto * series : {&report.best, &report.worst, &report.cv, &report.ca}) {
      for (const auto & x : series->traj.states) {
        auto row = series_row(x, series->forecast, sc);
        row.insert(row.begin(), series->name);
        csv.row(row);
      }
    }
  }
  {
    CsvFile csv(out_dir / "forecasts.csv", {"series", "k", "t", "alpha", "p_cross", "p_stand"});
    for (const auto * series : {&report.best, &report.worst, &report.cv, &report.ca}) {
      const auto & fc = series->forecast;
      for (std::size_t k = 0; k < fc.p_cross.size(); ++k) {
        csv.row({series->name, std::to_string(k), num(fc.decision_times[k]), num(fc.alpha_series[k]),
                 num(fc.p_cross[k]), num(fc.p_stand[k])});
      }
    }
  }

  std::map<std::string, int> outcomes;
  for (const auto & d : report.plan.diagnostics) {
    ++outcomes[to_string(d.outcome)];
  }
  nlohmann::ordered_json summary;
  summary["kind"] = "open_loop";
  summary["config"] = config_json(sc);
  summary["tau_init"] = sc.tau_init();
  summary["grid_size"] = report.plan.grid_size;
  summary["feasible_candidates"] = cands.size();
  summary["grid_outcomes"] = outcomes;
  summary["best"] = candidate_json(report.best_candidate());
  summary["worst"] = candidate_json(cands[report.selection.worst]);
  summary["no_yielding_communication"] = report.no_yielding_communication;
  summary["cv_max_taudot"] = report.cv.max_taudot;
  summary["ca_max_taudot"] = report.ca.max_taudot;
  write_text(out_dir / "summary.json", dump(summary));
}

void emit_trace(const SimTrace & trace, const Scenario & sc, const std::filesystem::path & out_dir)
{
  ensure_dir(out_dir);
  write_text(out_dir / "config.txt", echo_scenario(sc));
  {
    CsvFile csv(out_dir / "trace.csv", {"t", "s", "v", "a", "j", "u", "tau", "taudot", "alpha"});
    for (std::size_t i = 0; i < trace.executed.states.size(); ++i) {
      const auto & x = trace.executed.states[i];
      const double tau = time_gap(x, sc.s_ped);
      const double taudot = time_gap_rate(x, sc.s_ped);
      csv.row({num(x.t), num(x.s), num(x.v), num(x.a), num(x.j), num(trace.executed.controls[i]), num(tau),
               num(taudot), num(alpha(tau, taudot, sc.params))});
    }
  }
  {
    CsvFile csv(
      out_dir / "steps.csv",
      {"t", "s", "v", "a", "j", "best_id", "se1", "te1", "plan_max_taudot", "alpha", "p_cross0", "agent",
       "fallback", "continued", "candidates", "wall_seconds"});
    for (const auto & st : trace.steps) {
      const auto & x = st.state;
      csv.row({num(x.t), num(x.s), num(x.v), num(x.a), num(x.j), std::to_string(st.best_id), num(st.se1),
               num(st.te1), num(st.plan_max_taudot), num(st.alpha), num(st.p_cross0), to_string(st.agent),
               st.fallback ? "true" : "false", st.continued ? "true" : "false", std::to_string(st.candidates), num(st.wall_seconds)});
    }
  }
  nlohmann::ordered_json summary;
  summary["kind"] = "closed_loop";
  summary["config"] = config_json(sc);
  summary["outcome"] = to_string(trace.outcome);
  summary["steps"] = trace.steps.size();
  summary["passed_while_crossing"] = trace.passed_while_crossing;
  auto events = nlohmann::ordered_json::array();
  for (const auto & [t, phase] : trace.agent_events) {
    events.push_back({{"t", t}, {"phase", to_string(phase)}});
  }
  summary["agent_events"] = events;
  write_text(out_dir / "summary.json", dump(summary));
}

void emit_sweep(const SweepResult & sweep, const Scenario & base, const std::filesystem::path & out_dir)
{
  ensure_dir(out_dir);
  {
    CsvFile csv(out_dir / "sweep.csv", {"d0", "v0", "max_taudot", "tau_init", "error"});
    for (const auto & c : sweep.cells) {
      std::string err = c.error;
      std::replace(err.begin(), err.end(), ',', ';');
      csv.row({num(c.d0), num(c.v0), opt_num(c.max_taudot), num(c.tau_init), err});
    }
  }
  nlohmann::ordered_json summary;
  summary["kind"] = "sweep";
  summary["config"] = config_json(base);
  summary["cells"] = sweep.cells.size();
  std::size_t missing = 0;
  for (const auto & c : sweep.cells) {
    missing += c.max_taudot ? 0 : 1;
  }
  summary["missing_cells"] = missing;
  summary["isoline_taus"] = sweep.isoline_taus;
  write_text(out_dir / "summary.json", dump(summary));
}

}  // namespace crossplan
