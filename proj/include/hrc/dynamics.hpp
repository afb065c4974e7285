#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hrc/model.hpp"
#include "hrc/monitor.hpp"
#include "hrc/quality.hpp"
#include "hrc/scenario_io.hpp"

namespace hrc {

using Millis = std::int64_t;

Millis to_millis(double seconds);
double to_seconds(Millis ms);

struct Message {
  Agent sender = Agent::Human;
  MessageKind kind = MessageKind::Delegate;
  TaskId task = 0;
  std::uint64_t seq = 0;
};

enum class MessageOutcome { Applied, RejectedCapability, RejectedIneligible, UnknownTask };

std::string_view to_string(MessageOutcome o);

struct ScheduleState {
  std::vector<Level> levels;  // live tuples
  std::size_t level = 0;      // 0-based index of the current level
  PerAgent<std::optional<TaskId>> current;
  std::vector<TaskId> completed;  // completion order
  Millis clock = 0;
  bool finished = false;

  bool is_completed(TaskId id) const;
  std::vector<TaskId>& tuple(std::size_t l, Agent a) { return a == Agent::Human ? levels[l].human : levels[l].robot; }
  const std::vector<TaskId>& tuple(std::size_t l, Agent a) const { return levels[l].tuple(a); }
};

// Task ids may appear at most once across tuples, current tasks and the
// completed set; T_home is exempt.
bool disjoint(const ScheduleState& s);

// Pops the front of a tuple; empty when exhausted.
std::optional<TaskId> next(std::vector<TaskId>& tuple);

// Greedy first-fit scan over the robot tuples of levels after `level`, in
// schedule order. A candidate is taken when its predecessors are completed,
// still queued for the robot at `level`, or already taken, and its nominal
// robot time fits what is left of the budget.
std::vector<TaskId> fill(const ScheduleState& s, const JobSpec& job, double budget);

// Moves the fill selection for budget t_res to the end of the robot tuple at
// the current level. Returns the moved tasks.
std::vector<TaskId> reschedule(ScheduleState& s, const JobSpec& job, double t_res);

struct CommunicationResult {
  std::optional<MessageOutcome> human;
  std::optional<MessageOutcome> robot;
  // Set when the robot dropped its current task and must go home.
  bool robot_aborted = false;
  // Set when the human dropped its current task.
  bool human_abandoned = false;
};

// Human message first. Reassign moves a robot task (queued or running) to
// the front of the human tuple at its level, aborting the robot and queueing
// T_home when it was running. Delegate from the human moves a human task
// (queued or running) to the front of the robot tuple at its level. Delegate
// from the robot hands its running task to the human and queues T_home.
CommunicationResult communicate(ScheduleState& s, const JobSpec& job, const std::optional<Message>& from_human,
                                const std::optional<Message>& from_robot);

struct JobOptions {
  bool reschedule = true;
  bool comms = true;
  double home_duration = 5.0;
  double progress_period = 1.0;
  // Live mode: human tasks end only through complete_human().
  bool external_human_completion = false;
};

struct ShiftEvent {
  Millis t = 0;
  std::string kind;
  Json detail = Json::object();

  Json to_json() const;
};

struct TaskExecution {
  TaskId task = 0;
  Agent agent = Agent::Robot;
  std::size_t level = 0;
  double start = 0.0;
  double end = 0.0;
  bool completed = false;  // false: aborted, abandoned or failed
};

struct JobReport {
  int job_id = 0;
  Assignment planned;
  std::vector<TaskExecution> executions;
  std::vector<double> level_cycle_times;
  double cycle_time = 0.0;
  PerAgent<double> busy{};
  PerAgent<double> idle{};
  std::vector<ShiftEvent> events;
  Realization realized;
  MetricState state_before;
  MetricState state_after;
  std::vector<MetricEvaluation> evaluation;

  Json to_json() const;
};

// Discrete-event executor for one job. Drive it with next_event_time() and
// advance_to(); inputs (messages, human completions) are applied at the
// current clock.
class JobExecutor {
 public:
  JobExecutor(const JobSpec& job, const Assignment& assignment, const MetricState& state,
              const std::vector<MetricDef>& metrics, const TraceResolver& resolver, JobOptions options,
              std::vector<ScriptedMessage> script = {});

  // Next time something can happen; empty once finished or when only an
  // external input can make progress.
  std::optional<Millis> next_event_time() const;
  void advance_to(Millis t);
  bool finished() const { return state_.finished; }

  // Queues a message at the current clock and processes it.
  void post(const Message& m);
  // Returns false when the task is not the human's current task.
  bool complete_human(TaskId task);

  const ScheduleState& state() const { return state_; }
  const std::vector<ShiftEvent>& events() const { return events_; }
  // Remaining time estimate of the human task, if any.
  std::optional<double> human_remaining() const;

  // Valid once finished.
  JobReport report() const;

 private:
  struct Running {
    TaskId task = 0;
    Millis start = 0;
    std::optional<Millis> end;  // completion time
    std::optional<Millis> fail_at;
    ProgressProfile profile;
    double nominal = 0.0;
    double realized = 0.0;
  };

  struct Pending {
    Millis at = 0;
    Message message;
  };

  void settle();
  bool step();
  bool robot_check();
  bool human_check();
  bool read_messages();
  bool fetch(Agent a);
  bool maybe_reschedule();
  bool maybe_end_level();
  void start_task(Agent a, TaskId task);
  void stop_task(Agent a, bool completed, const char* kind);
  void log(const char* kind, Json detail = Json::object());
  double nominal_time(TaskId task, Agent a) const;

  const JobSpec& job_;
  Assignment planned_;
  MetricState state_before_;
  std::vector<MetricDef> metrics_;
  const TraceResolver& resolver_;
  JobOptions options_;

  ScheduleState state_;
  PerAgent<std::optional<Running>> running_;
  PerAgent<std::deque<Pending>> inbox_;
  std::vector<Pending> script_;  // sorted by arrival
  std::size_t script_pos_ = 0;
  std::uint64_t next_seq_ = 1;
  std::map<std::pair<TaskId, int>, int> occurrences_;
  std::optional<Millis> last_progress_;
  bool started_ = false;
  Millis finished_at_ = 0;
  Millis level_start_ = 0;
  std::vector<double> level_cycles_;
  std::vector<TaskExecution> executions_;
  std::vector<ShiftEvent> events_;
  Realization realized_;
};

// Runs one job to completion under a scripted trace.
JobReport run_shift_job(const JobSpec& job, const Assignment& assignment, const MetricState& state,
                        const std::vector<MetricDef>& metrics, const TraceResolver& resolver, JobOptions options,
                        std::vector<ScriptedMessage> script = {});

}  // namespace hrc
