// Scenario files and report emission.
//
// A scenario file holds one `key: value [unit]` pair per line; `#` starts a
// comment. Unknown keys are rejected, a unit token must match the key, and
// every key except s_ped defaults to the standard parameter set.
#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "crossplan/simulation.hpp"

namespace crossplan
{

class ParseError : public std::runtime_error
{
public:
  ParseError(int line, const std::string & key, const std::string & what);
  int line() const { return line_; }
  const std::string & key() const { return key_; }

private:
  int line_;
  std::string key_;
};

class ValidationError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

Scenario parse_scenario_text(const std::string & text);
Scenario parse_scenario(const std::filesystem::path & path);

/// Effective configuration in scenario-file syntax; parses back to the same Scenario.
std::string echo_scenario(const Scenario & sc);

/// Number formatting used by every emitted file (9 significant digits).
std::string format_number(double value);

void emit_report(const ScenarioReport & report, const std::filesystem::path & out_dir);
void emit_trace(const SimTrace & trace, const Scenario & sc, const std::filesystem::path & out_dir);
void emit_sweep(const SweepResult & sweep, const Scenario & base, const std::filesystem::path & out_dir);

}  // namespace crossplan
