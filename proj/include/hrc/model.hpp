#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hrc/errors.hpp"

namespace hrc {

// The two agents of a collaborative cell.
enum class Agent { Human = 0, Robot = 1 };

inline constexpr std::array<Agent, 2> kAgents{Agent::Human, Agent::Robot};

constexpr std::size_t index(Agent a) { return static_cast<std::size_t>(a); }
constexpr Agent other(Agent a) { return a == Agent::Human ? Agent::Robot : Agent::Human; }
std::string_view to_string(Agent a);
Agent agent_from_string(std::string_view s);

using TaskId = int;

// Synthetic robot homing task, never part of a job.
inline constexpr TaskId kHomeTask = 0;

// Per-agent value table indexed by Agent.
template <typename T>
struct PerAgent {
  std::array<T, 2> values{};

  T& operator[](Agent a) { return values[index(a)]; }
  const T& operator[](Agent a) const { return values[index(a)]; }
};

struct Task {
  TaskId id = 0;
  std::string description;
  // Nominal duration in seconds; empty when the agent cannot execute the task.
  PerAgent<std::optional<double>> nominal_time;
  PerAgent<double> weight;
  PerAgent<bool> capability{{true, true}};
  std::vector<double> quality_load;
  double attractiveness = 0.0;
  double robot_distance = 0.0;

  // Capable and has a nominal time.
  bool executable_by(Agent a) const { return capability[a] && nominal_time[a].has_value(); }
  double time(Agent a) const { return nominal_time[a].value(); }
};

struct JobSpec {
  int job_id = 0;
  std::vector<Task> tasks;  // ascending id
  std::vector<std::pair<TaskId, TaskId>> precedence;

  const Task& task(TaskId id) const;
  const Task* find(TaskId id) const;
  bool contains(TaskId id) const { return find(id) != nullptr; }
  std::size_t index_of(TaskId id) const;
  std::vector<TaskId> predecessors(TaskId id) const;
  std::vector<TaskId> successors(TaskId id) const;
};

enum class MetricKind { Summed, Average };

std::string_view to_string(MetricKind k);

struct MetricDef {
  int id = 0;
  MetricKind kind = MetricKind::Average;
  double bound = 0.0;
};

struct ShiftSpec {
  std::vector<JobSpec> jobs;
  std::vector<MetricDef> metrics;

  const JobSpec& job(int job_id) const;
  // Position of a metric in the quality_load vectors.
  std::size_t metric_slot(int metric_id) const;
};

// Cross-job accumulator for one metric. For average metrics the cost is the
// raw accumulated duration-weighted load (sum of t_Hi * k_im), for summed
// metrics the plain sum of k_im.
struct MetricAccumulator {
  int metric_id = 0;
  double cumulative_cost = 0.0;
  double elapsed = 0.0;  // seconds
};

struct MetricState {
  std::vector<MetricAccumulator> metrics;

  static MetricState initial(const std::vector<MetricDef>& defs);
  const MetricAccumulator& at(int metric_id) const;
  MetricAccumulator& at(int metric_id);
  const MetricAccumulator* find(int metric_id) const;
};

struct Level {
  std::vector<TaskId> human;
  std::vector<TaskId> robot;
  double cycle_time = 0.0;

  const std::vector<TaskId>& tuple(Agent a) const { return a == Agent::Human ? human : robot; }
};

struct Assignment {
  std::vector<Level> levels;
  double objective = 0.0;

  double total_cycle_time() const;
  // (level index, agent) of a task, if placed.
  std::optional<std::pair<std::size_t, Agent>> locate(TaskId id) const;
  std::size_t task_count() const;
};

// Throws CycleError naming one cycle when the precedence relation is cyclic,
// ScenarioError when an edge references an unknown task.
void validate_dag(const JobSpec& job);

// Deterministic topological order (Kahn, smallest id first).
std::vector<TaskId> topological_order(const JobSpec& job);

// 1 for sources, 1 + max over predecessors otherwise.
std::map<TaskId, int> longest_path_levels(const JobSpec& job);

struct DerivedWeights {
  double robot = 0.0;
  double human = 0.0;
};

// w_R = 0.7 D_R + 1000 (1 - capability_R), w_H = u.
DerivedWeights derive_weights(const Task& task);
void apply_derived_weights(Task& task);

}  // namespace hrc
