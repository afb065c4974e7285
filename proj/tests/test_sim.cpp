#include <gtest/gtest.h>

#include <map>

#include "hrc/sim.hpp"

using namespace hrc;

namespace {

const ShiftSpec& cell() {
  static const ShiftSpec shift = load_scenario(HRC_DATA_DIR "/assembly_shift.json");
  return shift;
}

Trace trace_file(const char* name) { return load_trace(std::string(HRC_DATA_DIR "/") + name); }

std::vector<TaskId> sorted(std::vector<TaskId> v) {
  std::sort(v.begin(), v.end());
  return v;
}

// Realized durations and cycle time rebuilt from start/complete events only.
std::pair<Realization, double> from_events(const JobReport& r) {
  Realization realized;
  std::map<std::string, std::pair<TaskId, Millis>> running;
  double cycle = 0.0;
  for (const auto& e : r.events) {
    if (e.kind == "start") {
      running[e.detail.at("agent").get<std::string>()] = {e.detail.at("task").get<TaskId>(), e.t};
    } else if (e.kind == "complete" && e.detail.at("task").get<TaskId>() != kHomeTask) {
      const auto agent = e.detail.at("agent").get<std::string>();
      const auto [task, start] = running.at(agent);
      EXPECT_EQ(task, e.detail.at("task").get<TaskId>());
      realized[task] = {agent_from_string(agent), to_seconds(e.t - start)};
    } else if (e.kind == "job_end") {
      cycle = e.detail.at("c").get<double>();
    }
  }
  return {realized, cycle};
}

}  // namespace

TEST(RunShift, NominalScenario) {
  const auto report = run_shift(cell(), trace_file("assembly_trace.json"));
  ASSERT_EQ(report.jobs.size(), 2u);
  const auto& j1 = report.jobs[0];
  EXPECT_EQ(sorted(j1.solve.assignment.levels[0].human), (std::vector<TaskId>{5, 7, 8}));
  EXPECT_EQ(sorted(j1.solve.assignment.levels[1].human), (std::vector<TaskId>{9}));
  EXPECT_NEAR(j1.execution.cycle_time, 79.0, 2.0);
  ASSERT_EQ(j1.execution.evaluation.size(), 1u);
  EXPECT_NEAR(j1.execution.evaluation[0].value, 135.0 / j1.execution.cycle_time, 1e-9);
  EXPECT_NEAR(j1.execution.evaluation[0].value, 1.709, 0.01);
  EXPECT_DOUBLE_EQ(j1.execution.state_after.at(1).cumulative_cost, 135.0);

  const auto& j2 = report.jobs[1];
  const JobSpec& job2 = cell().job(2);
  for (const auto& l : j2.solve.assignment.levels) {
    for (TaskId id : l.human) EXPECT_EQ(job2.task(id).quality_load[0], 0.0);
  }
  for (const auto& [id, r] : j2.execution.realized) {
    if (job2.task(id).quality_load[0] != 0.0) EXPECT_EQ(r.agent, Agent::Robot);
  }
  EXPECT_DOUBLE_EQ(report.final_state.at(1).cumulative_cost, 135.0);
  EXPECT_NEAR(report.final_state.at(1).elapsed, report.total_cycle_time(), 1e-9);
}

TEST(RunShift, CommunicationScenarioClearsWeightCost) {
  const auto report = run_shift(cell(), trace_file("assembly_comms_trace.json"));
  const auto& j1 = report.jobs[0].execution;
  EXPECT_EQ(j1.realized.at(5).agent, Agent::Robot);
  EXPECT_EQ(j1.realized.at(2).agent, Agent::Human);
  EXPECT_DOUBLE_EQ(report.jobs[1].execution.state_before.at(1).cumulative_cost, 0.0);
  EXPECT_DOUBLE_EQ(report.jobs[1].execution.state_before.at(1).elapsed, j1.cycle_time);
}

TEST(RunShift, RobotOnlyJob) {
  ShiftSpec shift;
  JobSpec job;
  job.job_id = 1;
  for (TaskId id : {1, 2}) {
    Task t;
    t.id = id;
    t.nominal_time[Agent::Robot] = 4.0;
    t.capability[Agent::Human] = false;
    job.tasks.push_back(t);
  }
  job.precedence = {{1, 2}};
  shift.jobs.push_back(job);
  const auto report = run_shift(shift, Trace{});
  const auto& r = report.jobs[0].execution;
  EXPECT_DOUBLE_EQ(r.busy[Agent::Human], 0.0);
  EXPECT_DOUBLE_EQ(r.cycle_time, 8.0);
  for (const auto& [id, x] : r.realized) EXPECT_EQ(x.agent, Agent::Robot);
}

TEST(RunShift, ReplayIsByteIdentical) {
  SimOptions options;
  options.seed = 1234;
  for (const char* name : {"assembly_trace.json", "assembly_comms_trace.json"}) {
    const Trace trace = trace_file(name);
    const auto a = run_shift(cell(), trace, options).to_json().dump();
    const auto b = run_shift(cell(), trace, options).to_json().dump();
    EXPECT_EQ(a, b) << name;
  }
  const auto stochastic = run_shift(cell(), Trace{}, options).to_json().dump();
  EXPECT_EQ(stochastic, run_shift(cell(), Trace{}, options).to_json().dump());
  SimOptions other = options;
  other.seed = 4321;
  EXPECT_NE(stochastic, run_shift(cell(), Trace{}, other).to_json().dump());
}

TEST(RunShift, MetricsMatchEventLog) {
  for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    SimOptions options;
    options.seed = seed;
    for (const Trace& trace : {trace_file("assembly_trace.json"), trace_file("assembly_comms_trace.json"), Trace{}}) {
      const auto report = run_shift(cell(), trace, options);
      for (const auto& run : report.jobs) {
        const auto& job = cell().job(run.execution.job_id);
        const auto [realized, cycle] = from_events(run.execution);
        EXPECT_NEAR(cycle, run.execution.cycle_time, 1e-9);
        const auto recomputed =
            evaluate_metrics(realized, cycle, job, run.execution.state_before, cell().metrics);
        ASSERT_EQ(recomputed.size(), run.execution.evaluation.size());
        for (std::size_t m = 0; m < recomputed.size(); ++m) {
          EXPECT_NEAR(recomputed[m].value, run.execution.evaluation[m].value, 1e-9);
        }
        const auto next = update_jq(run.execution.state_before, job, cell().metrics, realized, cycle);
        EXPECT_NEAR(next.at(1).cumulative_cost, run.execution.state_after.at(1).cumulative_cost, 1e-9);
      }
    }
  }
}

TEST(RunShift, TraceMismatch) {
  Trace trace;
  trace.human.push_back({42, std::nullopt, 10.0, ProgressProfile::linear()});
  EXPECT_THROW(run_shift(cell(), trace), TraceMismatch);
  Trace wrong_job;
  wrong_job.robot.push_back({1, 9, 10.0, std::nullopt});
  EXPECT_THROW(run_shift(cell(), wrong_job), TraceMismatch);
  Trace bad_message;
  bad_message.messages.push_back({0.0, 2, Agent::Human, MessageKind::Delegate, 8});
  EXPECT_THROW(run_shift(cell(), bad_message), TraceMismatch);
}

TEST(MessagesFor, DefaultsToFirstJob) {
  Trace trace;
  trace.messages.push_back({1.0, std::nullopt, Agent::Human, MessageKind::Delegate, 5});
  trace.messages.push_back({2.0, 2, Agent::Human, MessageKind::Delegate, 6});
  EXPECT_EQ(messages_for(cell(), trace, 1).size(), 1u);
  EXPECT_EQ(messages_for(cell(), trace, 2).front().task, 6);
}

TEST(ComparePolicies, NominalTrace) {
  const auto diff = compare_policies(cell(), trace_file("assembly_trace.json"));
  ASSERT_EQ(diff.jobs.size(), 2u);
  EXPECT_NEAR(diff.jobs[0].c_on, 79.0, 2.0);
  EXPECT_NEAR(diff.jobs[0].c_off, 85.0, 2.0);
  EXPECT_NEAR(diff.jobs[0].idle_on[Agent::Robot], 12.0, 2.0);
  EXPECT_NEAR(diff.jobs[0].idle_off[Agent::Robot], 20.0, 2.0);
  EXPECT_NEAR(diff.total.c_on, diff.jobs[0].c_on + diff.jobs[1].c_on, 1e-9);
  const Json j = diff.to_json();
  EXPECT_NEAR(j["jobs"][0]["delta_c"].get<double>(), diff.jobs[0].c_on - diff.jobs[0].c_off, 1e-12);
  const std::string table = diff.table();
  EXPECT_NE(table.find("total"), std::string::npos);
  EXPECT_NE(table.find("c_on"), std::string::npos);
}

TEST(ComparePolicies, FastHumanMeansNoDifference) {
  Trace trace;
  for (const auto& job : cell().jobs) {
    for (const auto& t : job.tasks) trace.human.push_back({t.id, job.job_id, 1.0, ProgressProfile::linear()});
  }
  const auto diff = compare_policies(cell(), trace);
  for (const auto& row : diff.jobs) {
    EXPECT_DOUBLE_EQ(row.delta_c(), 0.0);
    EXPECT_DOUBLE_EQ(row.delta_idle(Agent::Robot), 0.0);
    EXPECT_DOUBLE_EQ(row.delta_idle(Agent::Human), 0.0);
  }
}
