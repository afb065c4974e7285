#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "hrc/model.hpp"

namespace hrc {

// Monotone map from elapsed seconds to completion fraction. The linear
// profile reaches 1 at the realized duration; a piecewise profile is given
// as (elapsed, fraction) knots and interpolated linearly, with (0, 0)
// implied and 1 reached at the realized duration.
class ProgressProfile {
 public:
  ProgressProfile() = default;
  static ProgressProfile linear() { return {}; }
  static ProgressProfile piecewise(std::vector<std::pair<double, double>> knots);

  bool is_linear() const { return knots_.empty(); }
  const std::vector<std::pair<double, double>>& knots() const { return knots_; }

  double completion(double elapsed, double realized_duration) const;

 private:
  std::vector<std::pair<double, double>> knots_;
};

struct HumanTaskTrace {
  TaskId task = 0;
  std::optional<int> job;  // empty: applies to every job
  double duration = 0.0;
  ProgressProfile profile;
};

struct RobotTaskTrace {
  TaskId task = 0;
  std::optional<int> job;
  std::optional<double> duration;
  std::optional<double> fail_after;
};

enum class MessageKind { Reassign, Delegate };

struct ScriptedMessage {
  double at = 0.0;  // seconds since the start of the job
  std::optional<int> job;  // empty: first job of the shift
  Agent sender = Agent::Human;
  MessageKind kind = MessageKind::Delegate;
  TaskId task = 0;
};

struct Trace {
  std::vector<HumanTaskTrace> human;
  std::vector<RobotTaskTrace> robot;
  std::vector<ScriptedMessage> messages;
  std::uint64_t seed = 0;
};

// Realized behaviour of one robot task occurrence.
struct RobotBehavior {
  double duration = 0.0;
  std::optional<double> fail_after;
};

enum class RobotStatus { Running, Done, Failed };

// Estimated remaining time of the human's current task:
// (1 - %compl(elapsed)) * nominal human time. Throws NotExecuting when
// no task is in progress.
double monitor_h(const std::optional<TaskId>& current, double nominal_human_time,
                 const ProgressProfile& profile, double elapsed, double realized_duration);

RobotStatus monitor_r(const std::optional<TaskId>& current, const RobotBehavior& behavior,
                      double elapsed);

struct StochasticOptions {
  double human_sigma = 0.25;
  double robot_sigma = 0.0;
};

// Resolves realized durations per (job, task, occurrence): scripted trace
// entries first, seeded lognormal perturbation of the nominal time
// otherwise. Pure function of its inputs.
class TraceResolver {
 public:
  TraceResolver(const Trace& trace, StochasticOptions options = {});

  double human_duration(int job_id, const Task& task, int occurrence) const;
  ProgressProfile human_profile(int job_id, TaskId task) const;
  RobotBehavior robot_behavior(int job_id, const Task& task, int occurrence) const;

  const Trace& trace() const { return trace_; }

 private:
  const HumanTaskTrace* find_human(int job_id, TaskId task) const;
  const RobotTaskTrace* find_robot(int job_id, TaskId task) const;
  double draw(int job_id, TaskId task, Agent agent, int occurrence, double sigma) const;

  Trace trace_;
  StochasticOptions options_;
};

// Trace with every human duration drawn as nominal * lognormal(sigma) from
// the given seed; robot tasks at nominal time; no messages.
Trace random_trace(const ShiftSpec& shift, std::uint64_t seed, double sigma = 0.25);

}  // namespace hrc
