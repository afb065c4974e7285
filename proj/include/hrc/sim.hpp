#pragma once

#include <string>
#include <vector>

#include "hrc/assignment.hpp"
#include "hrc/dynamics.hpp"

namespace hrc {

struct SimOptions {
  bool reschedule = true;
  bool comms = true;
  double home_duration = 5.0;
  double progress_period = 1.0;
  StochasticOptions stochastic;
  SolverOptions solver;
  // Overrides the trace seed when set.
  std::optional<std::uint64_t> seed;

  JobOptions job_options() const;
};

struct JobRun {
  SolveReport solve;
  JobReport execution;
};

struct ShiftReport {
  std::vector<JobRun> jobs;
  MetricState final_state;

  double total_cycle_time() const;
  // Deterministic: solver wall time is left out unless asked for.
  Json to_json(bool include_timing = false) const;
};

// Scripted messages of one job; messages without a job belong to the first.
std::vector<ScriptedMessage> messages_for(const ShiftSpec& shift, const Trace& trace, int job_id);

// Throws TraceMismatch when the trace names jobs or tasks the scenario lacks.
void check_trace(const ShiftSpec& shift, const Trace& trace);

// Solve, execute and fold each job into the metric state, in order.
ShiftReport run_shift(const ShiftSpec& shift, const Trace& trace, const SimOptions& options = {},
                      MetricState initial = {});

struct PolicyRow {
  int job_id = 0;
  double c_on = 0.0;
  double c_off = 0.0;
  PerAgent<double> idle_on{};
  PerAgent<double> idle_off{};

  double delta_c() const { return c_on - c_off; }
  double delta_idle(Agent a) const { return idle_on[a] - idle_off[a]; }
};

struct PolicyDiff {
  std::vector<PolicyRow> jobs;
  PolicyRow total;

  Json to_json() const;
  std::string table() const;
};

// Runs the shift with rescheduling on; every job's assignment is then also
// executed with rescheduling off on the same trace, so each row is a paired
// comparison.
PolicyDiff compare_policies(const ShiftSpec& shift, const Trace& trace, const SimOptions& options = {});

}  // namespace hrc
