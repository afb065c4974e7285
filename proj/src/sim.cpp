#include "hrc/sim.hpp"

#include <fmt/format.h>

namespace hrc {

JobOptions SimOptions::job_options() const {
  JobOptions o;
  o.reschedule = reschedule;
  o.comms = comms;
  o.home_duration = home_duration;
  o.progress_period = progress_period;
  return o;
}

double ShiftReport::total_cycle_time() const {
  double c = 0.0;
  for (const auto& j : jobs) c += j.execution.cycle_time;
  return c;
}

Json ShiftReport::to_json(bool include_timing) const {
  Json j{{"jobs", Json::array()}, {"final_state", state_to_json(final_state)}, {"c", total_cycle_time()}};
  for (const auto& run : jobs) {
    Json solve{{"assignment", assignment_to_json(run.solve.assignment)},
               {"objective", run.solve.objective},
               {"nodes", run.solve.nodes_explored},
               {"proven_optimal", run.solve.proven_optimal}};
    if (include_timing) solve["wall_time"] = run.solve.wall_time.count();
    Json job = run.execution.to_json();
    job["solve"] = std::move(solve);
    j["jobs"].push_back(std::move(job));
  }
  return j;
}

std::vector<ScriptedMessage> messages_for(const ShiftSpec& shift, const Trace& trace, int job_id) {
  std::vector<ScriptedMessage> out;
  for (const auto& m : trace.messages) {
    const int target = m.job.value_or(shift.jobs.front().job_id);
    if (target == job_id) out.push_back(m);
  }
  return out;
}

void check_trace(const ShiftSpec& shift, const Trace& trace) {
  auto job_named = [&](std::optional<int> id) -> const JobSpec* {
    if (!id) return nullptr;
    for (const auto& j : shift.jobs) {
      if (j.job_id == *id) return &j;
    }
    throw TraceMismatch("trace references unknown job " + std::to_string(*id));
  };
  auto known = [&](const JobSpec* job, TaskId task) {
    if (job != nullptr) return job->contains(task);
    for (const auto& j : shift.jobs) {
      if (j.contains(task)) return true;
    }
    return false;
  };
  for (const auto& h : trace.human) {
    if (!known(job_named(h.job), h.task)) throw TraceMismatch("human trace names unknown task " + std::to_string(h.task));
  }
  for (const auto& r : trace.robot) {
    if (!known(job_named(r.job), r.task)) throw TraceMismatch("robot trace names unknown task " + std::to_string(r.task));
  }
  for (const auto& m : trace.messages) {
    const JobSpec* job = job_named(m.job.value_or(shift.jobs.front().job_id));
    if (!job->contains(m.task)) throw TraceMismatch("message names unknown task " + std::to_string(m.task));
  }
}

ShiftReport run_shift(const ShiftSpec& shift, const Trace& trace, const SimOptions& options, MetricState initial) {
  check_trace(shift, trace);
  Trace seeded = trace;
  if (options.seed) seeded.seed = *options.seed;
  const TraceResolver resolver(seeded, options.stochastic);

  ShiftReport report;
  MetricState state = std::move(initial);
  for (const auto& def : shift.metrics) {
    if (state.find(def.id) == nullptr) state.metrics.push_back({def.id, 0.0, 0.0});
  }
  for (const auto& job : shift.jobs) {
    JobRun run;
    run.solve = solve(build_milp(job, state, shift.metrics), options.solver);
    run.execution = run_shift_job(job, run.solve.assignment, state, shift.metrics, resolver, options.job_options(),
                                  messages_for(shift, seeded, job.job_id));
    state = run.execution.state_after;
    report.jobs.push_back(std::move(run));
  }
  report.final_state = state;
  return report;
}

namespace {

Json row_json(const PolicyRow& r) {
  return {{"job", r.job_id},
          {"c_on", r.c_on},
          {"c_off", r.c_off},
          {"delta_c", r.delta_c()},
          {"idle_on", {{"human", r.idle_on[Agent::Human]}, {"robot", r.idle_on[Agent::Robot]}}},
          {"idle_off", {{"human", r.idle_off[Agent::Human]}, {"robot", r.idle_off[Agent::Robot]}}},
          {"delta_idle", {{"human", r.delta_idle(Agent::Human)}, {"robot", r.delta_idle(Agent::Robot)}}}};
}

}  // namespace

Json PolicyDiff::to_json() const {
  Json j{{"jobs", Json::array()}, {"total", row_json(total)}};
  for (const auto& r : jobs) j["jobs"].push_back(row_json(r));
  return j;
}

std::string PolicyDiff::table() const {
  std::string out = fmt::format("{:>5} {:>9} {:>9} {:>8} {:>12} {:>12} {:>12} {:>12}\n", "job", "c_on", "c_off",
                                "dc", "R_idle_on", "R_idle_off", "H_idle_on", "H_idle_off");
  auto line = [&](const std::string& name, const PolicyRow& r) {
    out += fmt::format("{:>5} {:>9.3f} {:>9.3f} {:>8.3f} {:>12.3f} {:>12.3f} {:>12.3f} {:>12.3f}\n", name, r.c_on,
                       r.c_off, r.delta_c(), r.idle_on[Agent::Robot], r.idle_off[Agent::Robot],
                       r.idle_on[Agent::Human], r.idle_off[Agent::Human]);
  };
  for (const auto& r : jobs) line(std::to_string(r.job_id), r);
  line("total", total);
  return out;
}

PolicyDiff compare_policies(const ShiftSpec& shift, const Trace& trace, const SimOptions& options) {
  SimOptions on = options;
  on.reschedule = true;
  const ShiftReport with = run_shift(shift, trace, on);

  Trace seeded = trace;
  if (options.seed) seeded.seed = *options.seed;
  const TraceResolver resolver(seeded, options.stochastic);
  SimOptions off = options;
  off.reschedule = false;

  PolicyDiff diff;
  for (std::size_t i = 0; i < shift.jobs.size(); ++i) {
    const JobSpec& job = shift.jobs[i];
    const JobRun& run = with.jobs[i];
    const JobReport without = run_shift_job(job, run.solve.assignment, run.execution.state_before, shift.metrics,
                                            resolver, off.job_options(), messages_for(shift, seeded, job.job_id));
    PolicyRow row;
    row.job_id = job.job_id;
    row.c_on = run.execution.cycle_time;
    row.c_off = without.cycle_time;
    row.idle_on = run.execution.idle;
    row.idle_off = without.idle;
    diff.total.c_on += row.c_on;
    diff.total.c_off += row.c_off;
    for (Agent a : kAgents) {
      diff.total.idle_on[a] += row.idle_on[a];
      diff.total.idle_off[a] += row.idle_off[a];
    }
    diff.jobs.push_back(row);
  }
  return diff;
}

}  // namespace hrc
