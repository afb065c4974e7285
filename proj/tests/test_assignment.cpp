#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "hrc/assignment.hpp"
#include "hrc/quality.hpp"
#include "hrc/scenario_io.hpp"
#include "oracles.hpp"

using namespace hrc;

namespace {

const ShiftSpec& cell() {
  static const ShiftSpec shift = load_scenario(HRC_DATA_DIR "/assembly_shift.json");
  return shift;
}

std::vector<TaskId> sorted(std::vector<TaskId> v) {
  std::sort(v.begin(), v.end());
  return v;
}

std::vector<std::pair<std::vector<TaskId>, std::vector<TaskId>>> level_sets(const Assignment& a) {
  std::vector<std::pair<std::vector<TaskId>, std::vector<TaskId>>> out;
  for (const auto& l : a.levels) out.emplace_back(sorted(l.human), sorted(l.robot));
  return out;
}

SolveReport solve_job(const JobSpec& job, const MetricState& state, const std::vector<MetricDef>& metrics,
                      SolverOptions options = {}) {
  return solve(build_milp(job, state, metrics), options);
}

JobSpec unit_job(int n, std::vector<std::pair<int, int>> edges) {
  JobSpec job;
  job.job_id = 1;
  for (int i = 1; i <= n; ++i) {
    Task t;
    t.id = i;
    t.nominal_time[Agent::Robot] = 1.0;
    t.nominal_time[Agent::Human] = 1.0;
    job.tasks.push_back(t);
  }
  job.precedence = std::move(edges);
  return job;
}

bool near(double a, double b) { return std::abs(a - b) <= 1e-7 * std::max(1.0, std::abs(b)); }

}  // namespace

TEST(Solve, FirstJobNominal) {
  const auto report = solve_job(cell().job(1), MetricState::initial(cell().metrics), cell().metrics);
  using Sets = std::vector<std::pair<std::vector<TaskId>, std::vector<TaskId>>>;
  EXPECT_EQ(level_sets(report.assignment), (Sets{{{5, 7, 8}, {3, 4, 6}}, {{9}, {1, 2}}}));
  EXPECT_NEAR(report.objective, 6.3, 1e-9);
  EXPECT_NEAR(report.assignment.total_cycle_time(), 85.0, 1e-9);
  EXPECT_LT(report.nodes_explored, 1'000'000);
  EXPECT_TRUE(report.proven_optimal);
}

TEST(Solve, FirstJobTuplesInIdOrder) {
  const auto report = solve_job(cell().job(1), MetricState::initial(cell().metrics), cell().metrics);
  for (const auto& l : report.assignment.levels) {
    EXPECT_TRUE(std::is_sorted(l.human.begin(), l.human.end()));
    EXPECT_TRUE(std::is_sorted(l.robot.begin(), l.robot.end()));
  }
}

TEST(Solve, SecondJobAfterNominalFirst) {
  MetricState state = MetricState::initial(cell().metrics);
  state.at(1).cumulative_cost = 135.0;
  state.at(1).elapsed = 79.0;
  const JobSpec& job = cell().job(2);
  const auto report = solve_job(job, state, cell().metrics);
  for (const auto& l : report.assignment.levels) {
    for (TaskId id : l.human) EXPECT_EQ(job.task(id).quality_load[0], 0.0) << "task " << id;
  }
  const auto where5 = report.assignment.locate(5);
  const auto where6 = report.assignment.locate(6);
  ASSERT_TRUE(where5 && where6);
  EXPECT_EQ(where5->second, Agent::Robot);
  EXPECT_EQ(where6->second, Agent::Robot);
  using Sets = std::vector<std::pair<std::vector<TaskId>, std::vector<TaskId>>>;
  EXPECT_EQ(level_sets(report.assignment), (Sets{{{3}, {4}}, {{1, 2}, {5, 6}}}));
  EXPECT_NEAR(report.objective, 4.9, 1e-9);
}

TEST(BuildMilp, VariableCounts) {
  const auto inst = build_milp(cell().job(1), MetricState::initial(cell().metrics), cell().metrics);
  EXPECT_EQ(inst.level_count, 9);
  EXPECT_EQ(inst.binary_count(), 2u * 9u * 9u);
  EXPECT_EQ(inst.continuous_count(), 9u);
  EXPECT_EQ(inst.average_rows(), 1u);
  EXPECT_EQ(inst.summed_rows(), 0u);
  EXPECT_DOUBLE_EQ(inst.t_a_max, 25.0);
  EXPECT_EQ(inst.precedence.size(), 4u);
  EXPECT_DOUBLE_EQ(inst.quality[0].coefficient[4], 90.0);
}

TEST(BuildMilp, TaskNoAgentCanExecute) {
  JobSpec job = unit_job(2, {});
  job.tasks[1].capability[Agent::Robot] = false;
  job.tasks[1].nominal_time[Agent::Human].reset();
  EXPECT_THROW(build_milp(job, {}, {}), InfeasibleStructure);
}

TEST(Solve, SingleTaskUsesOneLevel) {
  const auto report = solve_job(unit_job(1, {}), {}, {});
  ASSERT_EQ(report.assignment.levels.size(), 1u);
  EXPECT_EQ(choose_level_count(unit_job(1, {})), 1);
}

TEST(Solve, ChainUsesOneLevelPerTask) {
  const auto report = solve_job(unit_job(3, {{1, 2}, {2, 3}}), {}, {});
  EXPECT_EQ(report.assignment.levels.size(), 3u);
}

TEST(Solve, SevenTaskGraphUsesFourLevels) {
  const auto report = solve_job(unit_job(7, {{1, 2}, {3, 4}, {2, 5}, {4, 5}, {5, 7}, {6, 7}}), {}, {});
  EXPECT_EQ(report.assignment.levels.size(), 4u);
  EXPECT_NEAR(report.assignment.total_cycle_time(), 4.0, 1e-9);
}

TEST(Solve, EmptyJob) {
  JobSpec job;
  job.job_id = 3;
  const auto report = solve_job(job, {}, {});
  EXPECT_TRUE(report.assignment.levels.empty());
  EXPECT_DOUBLE_EQ(report.objective, 0.0);
}

TEST(Solve, SummedBoundUnsatisfiable) {
  JobSpec job = unit_job(1, {});
  job.tasks[0].capability[Agent::Robot] = false;
  job.tasks[0].nominal_time[Agent::Robot].reset();
  job.tasks[0].quality_load = {5.0};
  const std::vector<MetricDef> metrics{{1, MetricKind::Summed, 1.0}};
  EXPECT_THROW(solve_job(job, MetricState::initial(metrics), metrics), Infeasible);
}

TEST(Solve, NodeBudget) {
  EXPECT_THROW(solve_job(cell().job(1), MetricState::initial(cell().metrics), cell().metrics, {10}),
               NodeBudgetExceeded);
}

TEST(Solve, AveragePauseGoesOnLastLevel) {
  JobSpec job = unit_job(2, {});
  job.tasks[0].capability[Agent::Robot] = false;
  job.tasks[0].nominal_time[Agent::Robot].reset();
  job.tasks[0].quality_load = {1.0};
  job.tasks[1].quality_load = {0.0};
  const std::vector<MetricDef> metrics{{1, MetricKind::Average, 0.1}};
  const auto report = solve_job(job, MetricState::initial(metrics), metrics);
  // Human load 1 s, so the horizon must reach 10 s.
  EXPECT_NEAR(report.assignment.total_cycle_time(), 10.0, 1e-9);
  EXPECT_NEAR(report.assignment.levels.back().cycle_time, 10.0, 1e-9);
}

TEST(Solve, MatchesExhaustiveEnumeration) {
  int checked = 0;
  for (std::uint64_t seed = 1; seed <= 220; ++seed) {
    const auto r = oracle::random_instance(seed);
    const auto truth = oracle::enumerate(r.job, r.state, r.metrics);
    if (!truth.feasible) {
      EXPECT_THROW(solve_job(r.job, r.state, r.metrics), Infeasible) << "seed " << seed;
      continue;
    }
    const auto report = solve_job(r.job, r.state, r.metrics);
    EXPECT_TRUE(near(report.objective, truth.objective)) << "seed " << seed << ": " << report.objective << " vs "
                                                         << truth.objective;
    EXPECT_TRUE(near(oracle::objective(r.job, report.assignment), truth.objective)) << "seed " << seed;
    const auto bad = oracle::violations(r.job, r.state, r.metrics, report.assignment);
    EXPECT_TRUE(bad.empty()) << "seed " << seed << ": " << (bad.empty() ? "" : bad.front());
    ++checked;
  }
  EXPECT_GE(checked, 150);
}

TEST(Solve, AddingConstraintNeverLowersObjective) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> k(0, 9);
  for (std::uint64_t seed = 500; seed < 560; ++seed) {
    auto r = oracle::random_instance(seed, {5, 1, 0.3});
    double before = 0.0;
    try {
      before = solve_job(r.job, r.state, r.metrics).objective;
    } catch (const Infeasible&) {
      continue;
    }
    const bool summed = seed % 2 == 0;
    r.metrics.push_back({99, summed ? MetricKind::Summed : MetricKind::Average, summed ? 6.0 : 0.8});
    r.state.metrics.push_back({99, 0.0, 0.0});
    for (auto& t : r.job.tasks) t.quality_load.push_back(k(rng));
    try {
      const double after = solve_job(r.job, r.state, r.metrics).objective;
      EXPECT_GE(after, before - 1e-9) << "seed " << seed;
    } catch (const Infeasible&) {
    }
  }
}

TEST(Solve, ScalingDurationsKeepsArgmin) {
  for (std::uint64_t seed = 700; seed < 760; ++seed) {
    const auto r = oracle::random_instance(seed, {5, 2, 0.3});
    Assignment base;
    try {
      base = solve_job(r.job, r.state, r.metrics).assignment;
    } catch (const Infeasible&) {
      continue;
    }
    for (double factor : {2.0, 0.5}) {
      auto scaled = r;
      for (auto& t : scaled.job.tasks) {
        for (Agent a : kAgents) {
          if (t.nominal_time[a]) *t.nominal_time[a] *= factor;
        }
      }
      for (std::size_t m = 0; m < scaled.metrics.size(); ++m) {
        auto& acc = scaled.state.metrics[m];
        acc.elapsed *= factor;
        if (scaled.metrics[m].kind == MetricKind::Average) acc.cumulative_cost *= factor;
      }
      const auto out = solve_job(scaled.job, scaled.state, scaled.metrics).assignment;
      EXPECT_EQ(level_sets(out), level_sets(base)) << "seed " << seed << " factor " << factor;
      EXPECT_NEAR(out.total_cycle_time(), base.total_cycle_time() * factor, 1e-9 * base.total_cycle_time() + 1e-9);
    }
  }
}

TEST(Solve, LinearizedAverageAgreesWithRatio) {
  for (std::uint64_t seed = 900; seed < 1000; ++seed) {
    const auto r = oracle::random_instance(seed);
    Assignment out;
    try {
      out = solve_job(r.job, r.state, r.metrics).assignment;
    } catch (const Infeasible&) {
      continue;
    }
    const double c = out.total_cycle_time();
    for (std::size_t m = 0; m < r.metrics.size(); ++m) {
      if (r.metrics[m].kind != MetricKind::Average) continue;
      const auto& acc = r.state.metrics[m];
      if (acc.elapsed + c <= 0.0) continue;
      double load = acc.cumulative_cost;
      for (const auto& l : out.levels) {
        for (TaskId id : l.human) load += r.job.task(id).time(Agent::Human) * r.job.task(id).quality_load[m];
      }
      const double bound = r.metrics[m].bound;
      const double slack = 1e-9 * std::max(1.0, load);
      const bool linear = load <= bound * (acc.elapsed + c) + slack;
      const bool ratio = load / (acc.elapsed + c) <= bound + slack / (acc.elapsed + c);
      EXPECT_EQ(linear, ratio) << "seed " << seed;
      EXPECT_TRUE(linear) << "seed " << seed;
      const double k = average_metric(out, r.job, r.state, r.metrics, r.metrics[m].id);
      EXPECT_NEAR(k, load / (acc.elapsed + c), 1e-9);
    }
  }
}

TEST(Solve, Deterministic) {
  for (std::uint64_t seed = 1; seed < 40; ++seed) {
    const auto r = oracle::random_instance(seed);
    try {
      const auto a = solve_job(r.job, r.state, r.metrics);
      const auto b = solve_job(r.job, r.state, r.metrics);
      EXPECT_EQ(assignment_to_json(a.assignment), assignment_to_json(b.assignment));
      EXPECT_EQ(a.nodes_explored, b.nodes_explored);
    } catch (const Infeasible&) {
    }
  }
}

TEST(ObjectiveOf, RejectsBrokenLabelings) {
  const auto inst = build_milp(unit_job(2, {{1, 2}}), {}, {});
  EXPECT_FALSE(objective_of(inst, {{1, 1}, {Agent::Human, Agent::Robot}}));
  EXPECT_FALSE(objective_of(inst, {{1}, {Agent::Human}}));
  EXPECT_TRUE(objective_of(inst, {{1, 2}, {Agent::Human, Agent::Robot}}));
  EXPECT_NEAR(*cycle_time_of(inst, {{1, 2}, {Agent::Human, Agent::Human}}), 2.0, 1e-12);
}
