#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "hrc/model.hpp"

namespace hrc {

// One quality constraint row. `coefficient[i]` is the load task i adds when
// the human executes it: k_im for summed metrics, t_Hi * k_im for average
// metrics (the ratio is multiplied through by its denominator t_m + c).
struct QualityRow {
  int metric_id = 0;
  MetricKind kind = MetricKind::Average;
  double bound = 0.0;
  double cumulative = 0.0;  // C_{m,0}
  double elapsed = 0.0;     // t_m
  std::vector<double> coefficient;
};

// The task assignment problem for one job in index form. Binary x_ail is
// implicit: a labeling gives each task one (level, agent) pair.
struct MilpInstance {
  int job_id = 0;
  std::vector<TaskId> task_ids;  // index -> id, ascending
  int level_count = 0;
  double t_a_max = 1.0;
  PerAgent<std::vector<double>> weight;
  PerAgent<std::vector<double>> duration;  // 0 where the pair is forbidden
  PerAgent<std::vector<char>> allowed;
  std::vector<std::pair<int, int>> precedence;  // index pairs, i before j
  std::vector<QualityRow> quality;

  std::size_t task_count() const { return task_ids.size(); }
  std::size_t binary_count() const { return 2 * task_count() * static_cast<std::size_t>(level_count); }
  std::size_t continuous_count() const { return static_cast<std::size_t>(level_count); }
  std::size_t summed_rows() const;
  std::size_t average_rows() const;
};

// A full assignment in index form; levels are 1-based.
struct Labeling {
  std::vector<int> level;
  std::vector<Agent> agent;
};

struct SolverOptions {
  std::int64_t node_budget = 10'000'000;
};

struct SolveReport {
  Assignment assignment;
  double objective = 0.0;
  std::int64_t nodes_explored = 0;
  std::chrono::duration<double> wall_time{0};
  bool proven_optimal = false;
};

// L = N: always feasible for any DAG.
int choose_level_count(const JobSpec& job);

// Throws InfeasibleStructure when a task is executable by neither agent.
MilpInstance build_milp(const JobSpec& job, const MetricState& state, const std::vector<MetricDef>& metrics);

// Exact depth-first branch and bound. Ties on the objective go to the
// lexicographically smallest vector of (level, agent) over ascending task
// ids, human before robot. Throws Infeasible or NodeBudgetExceeded.
SolveReport solve(const MilpInstance& instance, const SolverOptions& options = {});

// Minimal total cycle time for a fixed labeling: the larger of the summed
// per-level workload maxima and the shortest horizon meeting every average
// bound. Empty when a summed bound or a precedence edge is violated.
std::optional<double> cycle_time_of(const MilpInstance& instance, const Labeling& labeling);
std::optional<double> objective_of(const MilpInstance& instance, const Labeling& labeling);

// Levels compacted to 1..K, tuples in ascending id order, pause on the last level.
Assignment to_assignment(const MilpInstance& instance, const Labeling& labeling);

}  // namespace hrc
