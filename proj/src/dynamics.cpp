#include "hrc/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace hrc {

namespace {

constexpr double kFitTol = 1e-9;

std::optional<std::size_t> find_in(const std::vector<TaskId>& tuple, TaskId id) {
  const auto it = std::find(tuple.begin(), tuple.end(), id);
  if (it == tuple.end()) return std::nullopt;
  return static_cast<std::size_t>(it - tuple.begin());
}

// Level index (at or after the current one) whose tuple of agent `a` holds `id`.
std::optional<std::size_t> queued_level(const ScheduleState& s, Agent a, TaskId id) {
  for (std::size_t l = s.level; l < s.levels.size(); ++l) {
    if (find_in(s.tuple(l, a), id)) return l;
  }
  return std::nullopt;
}

void erase_from(std::vector<TaskId>& tuple, TaskId id) {
  tuple.erase(std::find(tuple.begin(), tuple.end(), id));
}

void push_front(std::vector<TaskId>& tuple, TaskId id) { tuple.insert(tuple.begin(), id); }

Json agent_json(const PerAgent<double>& v) {
  return {{"human", v[Agent::Human]}, {"robot", v[Agent::Robot]}};
}

}  // namespace

Millis to_millis(double seconds) { return static_cast<Millis>(std::llround(seconds * 1000.0)); }

double to_seconds(Millis ms) { return static_cast<double>(ms) / 1000.0; }

std::string_view to_string(MessageOutcome o) {
  switch (o) {
    case MessageOutcome::Applied:
      return "applied";
    case MessageOutcome::RejectedCapability:
      return "rejected_capability";
    case MessageOutcome::RejectedIneligible:
      return "rejected_ineligible";
    case MessageOutcome::UnknownTask:
      return "unknown_task";
  }
  return "?";
}

bool ScheduleState::is_completed(TaskId id) const {
  return std::find(completed.begin(), completed.end(), id) != completed.end();
}

bool disjoint(const ScheduleState& s) {
  std::multiset<TaskId> seen;
  auto add = [&](TaskId id) {
    if (id != kHomeTask) seen.insert(id);
  };
  for (const auto& level : s.levels) {
    for (TaskId id : level.human) add(id);
    for (TaskId id : level.robot) add(id);
  }
  for (Agent a : kAgents) {
    if (s.current[a]) add(*s.current[a]);
  }
  for (TaskId id : s.completed) add(id);
  for (auto it = seen.begin(); it != seen.end(); it = seen.upper_bound(*it)) {
    if (seen.count(*it) > 1) return false;
  }
  return true;
}

std::optional<TaskId> next(std::vector<TaskId>& tuple) {
  if (tuple.empty()) return std::nullopt;
  const TaskId id = tuple.front();
  tuple.erase(tuple.begin());
  return id;
}

std::vector<TaskId> fill(const ScheduleState& s, const JobSpec& job, double budget) {
  std::set<TaskId> ready(s.completed.begin(), s.completed.end());
  if (s.level < s.levels.size()) {
    for (TaskId id : s.tuple(s.level, Agent::Robot)) ready.insert(id);
  }
  std::vector<TaskId> selected;
  double used = 0.0;
  for (std::size_t l = s.level + 1; l < s.levels.size(); ++l) {
    for (TaskId id : s.tuple(l, Agent::Robot)) {
      if (id == kHomeTask) continue;
      const double t = job.task(id).time(Agent::Robot);
      if (used + t > budget + kFitTol) continue;
      const auto preds = job.predecessors(id);
      if (!std::all_of(preds.begin(), preds.end(), [&](TaskId p) { return ready.contains(p); })) continue;
      selected.push_back(id);
      ready.insert(id);
      used += t;
    }
  }
  return selected;
}

std::vector<TaskId> reschedule(ScheduleState& s, const JobSpec& job, double t_res) {
  auto moved = fill(s, job, t_res);
  for (TaskId id : moved) {
    const auto l = queued_level(s, Agent::Robot, id);
    erase_from(s.tuple(*l, Agent::Robot), id);
    s.tuple(s.level, Agent::Robot).push_back(id);
  }
  return moved;
}

CommunicationResult communicate(ScheduleState& s, const JobSpec& job, const std::optional<Message>& from_human,
                                const std::optional<Message>& from_robot) {
  CommunicationResult result;
  if (from_human) {
    const TaskId id = from_human->task;
    const Task* task = id == kHomeTask ? nullptr : job.find(id);
    if (task == nullptr) {
      result.human = MessageOutcome::UnknownTask;
    } else if (from_human->kind == MessageKind::Reassign) {
      if (!task->executable_by(Agent::Human)) {
        result.human = MessageOutcome::RejectedCapability;
      } else if (s.current[Agent::Robot] == id) {
        s.current[Agent::Robot].reset();
        push_front(s.tuple(s.level, Agent::Robot), kHomeTask);
        push_front(s.tuple(s.level, Agent::Human), id);
        result.robot_aborted = true;
        result.human = MessageOutcome::Applied;
      } else if (const auto l = queued_level(s, Agent::Robot, id)) {
        erase_from(s.tuple(*l, Agent::Robot), id);
        push_front(s.tuple(*l, Agent::Human), id);
        result.human = MessageOutcome::Applied;
      } else {
        result.human = MessageOutcome::RejectedIneligible;
      }
    } else {
      if (!task->executable_by(Agent::Robot)) {
        result.human = MessageOutcome::RejectedCapability;
      } else if (s.current[Agent::Human] == id) {
        s.current[Agent::Human].reset();
        push_front(s.tuple(s.level, Agent::Robot), id);
        result.human_abandoned = true;
        result.human = MessageOutcome::Applied;
      } else if (const auto l = queued_level(s, Agent::Human, id)) {
        erase_from(s.tuple(*l, Agent::Human), id);
        push_front(s.tuple(*l, Agent::Robot), id);
        result.human = MessageOutcome::Applied;
      } else {
        result.human = MessageOutcome::RejectedIneligible;
      }
    }
  }
  if (from_robot) {
    const TaskId id = from_robot->task;
    const Task* task = id == kHomeTask ? nullptr : job.find(id);
    if (task == nullptr) {
      result.robot = MessageOutcome::UnknownTask;
    } else if (from_robot->kind != MessageKind::Delegate || s.current[Agent::Robot] != id) {
      result.robot = MessageOutcome::RejectedIneligible;
    } else if (!task->executable_by(Agent::Human)) {
      result.robot = MessageOutcome::RejectedCapability;
    } else {
      s.current[Agent::Robot].reset();
      push_front(s.tuple(s.level, Agent::Robot), kHomeTask);
      push_front(s.tuple(s.level, Agent::Human), id);
      result.robot_aborted = true;
      result.robot = MessageOutcome::Applied;
    }
  }
  return result;
}

Json ShiftEvent::to_json() const {
  Json j = detail;
  j["t"] = t;
  j["kind"] = kind;
  return j;
}

Json JobReport::to_json() const {
  Json j;
  j["job"] = job_id;
  j["planned"] = assignment_to_json(planned);
  j["executions"] = Json::array();
  for (const auto& e : executions) {
    j["executions"].push_back({{"task", e.task},
                               {"agent", std::string(to_string(e.agent))},
                               {"level", e.level + 1},
                               {"start", e.start},
                               {"end", e.end},
                               {"completed", e.completed}});
  }
  j["level_cycle_times"] = level_cycle_times;
  j["c"] = cycle_time;
  j["busy"] = agent_json(busy);
  j["idle"] = agent_json(idle);
  j["realized"] = Json::array();
  for (const auto& [id, r] : realized) {
    j["realized"].push_back({{"task", id}, {"agent", std::string(to_string(r.agent))}, {"duration", r.duration}});
  }
  j["state_before"] = state_to_json(state_before);
  j["state_after"] = state_to_json(state_after);
  j["evaluation"] = Json::array();
  for (const auto& e : evaluation) {
    j["evaluation"].push_back({{"id", e.metric_id},
                               {"kind", std::string(to_string(e.kind))},
                               {"value", e.value},
                               {"bound", e.bound},
                               {"satisfied", e.satisfied}});
  }
  j["events"] = Json::array();
  for (const auto& e : events) j["events"].push_back(e.to_json());
  return j;
}

JobExecutor::JobExecutor(const JobSpec& job, const Assignment& assignment, const MetricState& state,
                         const std::vector<MetricDef>& metrics, const TraceResolver& resolver, JobOptions options,
                         std::vector<ScriptedMessage> script)
    : job_(job),
      planned_(assignment),
      state_before_(state),
      metrics_(metrics),
      resolver_(resolver),
      options_(options) {
  state_.levels = assignment.levels;
  std::set<TaskId> placed;
  for (const auto& level : state_.levels) {
    for (Agent a : kAgents) {
      for (TaskId id : level.tuple(a)) {
        if (!job_.contains(id)) throw TraceMismatch("assignment references unknown task " + std::to_string(id));
        if (!placed.insert(id).second) throw TraceMismatch("task " + std::to_string(id) + " placed twice");
      }
    }
  }
  if (placed.size() != job_.tasks.size()) throw TraceMismatch("assignment does not cover the job");
  std::stable_sort(script.begin(), script.end(),
                   [](const ScriptedMessage& a, const ScriptedMessage& b) { return a.at < b.at; });
  for (const auto& m : script) {
    script_.push_back({to_millis(m.at), Message{m.sender, m.kind, m.task, next_seq_++}});
  }
}

void JobExecutor::log(const char* kind, Json detail) { events_.push_back({state_.clock, kind, std::move(detail)}); }

double JobExecutor::nominal_time(TaskId task, Agent a) const {
  if (task == kHomeTask) return options_.home_duration;
  return job_.task(task).time(a);
}

void JobExecutor::start_task(Agent a, TaskId task) {
  Running r;
  r.task = task;
  r.start = state_.clock;
  if (task == kHomeTask) {
    r.nominal = r.realized = options_.home_duration;
    r.end = state_.clock + std::max<Millis>(1, to_millis(options_.home_duration));
  } else {
    const Task& t = job_.task(task);
    const int occurrence = occurrences_[{task, static_cast<int>(index(a))}]++;
    r.nominal = t.time(a);
    if (a == Agent::Human) {
      r.profile = resolver_.human_profile(job_.job_id, task);
      if (options_.external_human_completion) {
        r.realized = r.nominal;
      } else {
        r.realized = resolver_.human_duration(job_.job_id, t, occurrence);
        r.end = state_.clock + std::max<Millis>(1, to_millis(r.realized));
      }
    } else {
      const RobotBehavior b = resolver_.robot_behavior(job_.job_id, t, occurrence);
      r.realized = b.duration;
      r.end = state_.clock + std::max<Millis>(1, to_millis(b.duration));
      if (b.fail_after && *b.fail_after < b.duration) r.fail_at = state_.clock + to_millis(*b.fail_after);
    }
  }
  state_.current[a] = task;
  running_[a] = r;
  log(task == kHomeTask ? "home" : "start",
      {{"task", task}, {"agent", std::string(to_string(a))}, {"level", state_.level + 1}});
}

void JobExecutor::stop_task(Agent a, bool completed, const char* kind) {
  const Running r = *running_[a];
  running_[a].reset();
  executions_.push_back({r.task, a, state_.level, to_seconds(r.start), to_seconds(state_.clock), completed});
  if (completed) {
    state_.current[a].reset();
    if (r.task != kHomeTask) {
      state_.completed.push_back(r.task);
      realized_[r.task] = {a, to_seconds(state_.clock - r.start)};
    }
  }
  log(kind, {{"task", r.task}, {"agent", std::string(to_string(a))}, {"level", state_.level + 1}});
}

bool JobExecutor::robot_check() {
  if (running_[Agent::Robot]) {
    const Running& r = *running_[Agent::Robot];
    if (r.fail_at && state_.clock >= *r.fail_at) {
      const TaskId task = r.task;
      stop_task(Agent::Robot, false, "fail");
      inbox_[Agent::Robot].push_back({state_.clock, Message{Agent::Robot, MessageKind::Delegate, task, 0}});
      return true;
    }
    if (r.end && state_.clock >= *r.end) {
      stop_task(Agent::Robot, true, "complete");
      return true;
    }
    return false;
  }
  return maybe_reschedule();
}

bool JobExecutor::maybe_reschedule() {
  if (!options_.reschedule || state_.current[Agent::Robot] || !running_[Agent::Human]) return false;
  if (state_.level >= state_.levels.size() || !state_.tuple(state_.level, Agent::Robot).empty()) return false;
  const double t_res = *human_remaining();
  if (last_progress_ != state_.clock) {
    last_progress_ = state_.clock;
    log("progress", {{"task", running_[Agent::Human]->task}, {"t_res", t_res}});
  }
  const auto moved = reschedule(state_, job_, t_res);
  if (moved.empty()) return false;
  log("reschedule", {{"tasks", moved}, {"t_res", t_res}, {"level", state_.level + 1}});
  return true;
}

bool JobExecutor::human_check() {
  if (!running_[Agent::Human]) return false;
  const Running& r = *running_[Agent::Human];
  if (r.end && state_.clock >= *r.end) {
    stop_task(Agent::Human, true, "complete");
    return true;
  }
  return false;
}

bool JobExecutor::read_messages() {
  bool changed = false;
  while (script_pos_ < script_.size() && script_[script_pos_].at <= state_.clock) {
    const Pending& p = script_[script_pos_++];
    inbox_[p.message.sender].push_back({state_.clock, p.message});
    changed = true;
  }
  PerAgent<std::optional<Message>> msg;
  for (Agent a : kAgents) {
    if (!inbox_[a].empty()) {
      msg[a] = inbox_[a].front().message;
      inbox_[a].pop_front();
    }
  }
  if (!msg[Agent::Human] && !msg[Agent::Robot]) return changed;
  if (msg[Agent::Human] && !options_.comms) {
    const Message& m = *msg[Agent::Human];
    log("message", {{"sender", "human"},
                    {"kind", std::string(to_string(m.kind))},
                    {"task", m.task},
                    {"seq", m.seq},
                    {"outcome", "ignored"}});
    msg[Agent::Human].reset();
  }
  const auto result = communicate(state_, job_, msg[Agent::Human], msg[Agent::Robot]);
  for (Agent a : kAgents) {
    if (!msg[a]) continue;
    const Message& m = *msg[a];
    const auto outcome = a == Agent::Human ? result.human : result.robot;
    Json detail{{"sender", std::string(to_string(a))},
                {"kind", std::string(to_string(m.kind))},
                {"task", m.task},
                {"outcome", std::string(to_string(*outcome))}};
    if (m.seq != 0) detail["seq"] = m.seq;
    log("message", std::move(detail));
  }
  if (result.human_abandoned && running_[Agent::Human]) stop_task(Agent::Human, false, "abandon");
  if (result.robot_aborted && running_[Agent::Robot]) stop_task(Agent::Robot, false, "abort");
  if (msg[Agent::Robot] && result.robot != MessageOutcome::Applied &&
      state_.current[Agent::Robot] == msg[Agent::Robot]->task && !running_[Agent::Robot]) {
    start_task(Agent::Robot, msg[Agent::Robot]->task);
  }
  return true;
}

bool JobExecutor::fetch(Agent a) {
  if (state_.current[a] || state_.level >= state_.levels.size()) return false;
  auto& tuple = state_.tuple(state_.level, a);
  for (auto it = tuple.begin(); it != tuple.end(); ++it) {
    const TaskId id = *it;
    if (id != kHomeTask) {
      const auto preds = job_.predecessors(id);
      if (!std::all_of(preds.begin(), preds.end(), [&](TaskId p) { return state_.is_completed(p); })) continue;
    }
    tuple.erase(it);
    start_task(a, id);
    return true;
  }
  return false;
}

bool JobExecutor::maybe_end_level() {
  if (state_.finished || state_.level >= state_.levels.size()) return false;
  for (Agent a : kAgents) {
    if (state_.current[a] || !state_.tuple(state_.level, a).empty()) return false;
  }
  if (!inbox_[Agent::Human].empty() || !inbox_[Agent::Robot].empty()) return false;
  const double c = to_seconds(state_.clock - level_start_);
  level_cycles_.push_back(c);
  log("level_end", {{"level", state_.level + 1}, {"c", c}});
  level_start_ = state_.clock;
  ++state_.level;
  if (state_.level == state_.levels.size()) {
    state_.finished = true;
    finished_at_ = state_.clock;
    log("job_end", {{"job", job_.job_id}, {"c", to_seconds(state_.clock)}});
  } else {
    log("level_start", {{"level", state_.level + 1}});
  }
  return true;
}

bool JobExecutor::step() {
  bool changed = robot_check();
  changed |= human_check();
  changed |= read_messages();
  changed |= fetch(Agent::Robot);
  changed |= fetch(Agent::Human);
  changed |= maybe_end_level();
  return changed;
}

void JobExecutor::settle() {
  int guard = 0;
  while (!state_.finished && step()) {
    if (++guard > 1'000'000) throw Error("scheduler failed to settle at t=" + std::to_string(state_.clock) + " ms");
  }
}

std::optional<Millis> JobExecutor::next_event_time() const {
  if (!started_) return Millis{0};
  if (state_.finished) return std::nullopt;
  std::optional<Millis> best;
  auto consider = [&](std::optional<Millis> t) {
    if (t && (!best || *t < *best)) best = std::max(*t, state_.clock);
  };
  if (const auto& r = running_[Agent::Robot]) {
    consider(r->end);
    consider(r->fail_at);
  }
  if (const auto& h = running_[Agent::Human]) consider(h->end);
  if (script_pos_ < script_.size()) consider(script_[script_pos_].at);
  if (options_.reschedule && running_[Agent::Human] && !state_.current[Agent::Robot] &&
      state_.level < state_.levels.size() && state_.tuple(state_.level, Agent::Robot).empty()) {
    const Millis period = std::max<Millis>(1, to_millis(options_.progress_period));
    consider((state_.clock / period + 1) * period);
  }
  return best;
}

void JobExecutor::advance_to(Millis t) {
  if (!started_) {
    started_ = true;
    log("job_start", {{"job", job_.job_id}});
    if (state_.levels.empty()) {
      state_.finished = true;
      log("job_end", {{"job", job_.job_id}, {"c", 0.0}});
      return;
    }
    log("level_start", {{"level", 1}});
    settle();
  }
  while (!state_.finished) {
    const auto n = next_event_time();
    if (!n || *n > t) break;
    state_.clock = *n;
    settle();
  }
  if (!state_.finished) state_.clock = std::max(state_.clock, t);
}

void JobExecutor::post(const Message& m) {
  if (!started_) advance_to(0);
  if (state_.finished) return;
  Message copy = m;
  if (copy.seq == 0) copy.seq = next_seq_++;
  inbox_[copy.sender].push_back({state_.clock, copy});
  settle();
}

bool JobExecutor::complete_human(TaskId task) {
  if (!running_[Agent::Human] || running_[Agent::Human]->task != task) return false;
  stop_task(Agent::Human, true, "complete");
  settle();
  return true;
}

std::optional<double> JobExecutor::human_remaining() const {
  const auto& h = running_[Agent::Human];
  if (!h) return std::nullopt;
  return monitor_h(h->task, h->nominal, h->profile, to_seconds(state_.clock - h->start), h->realized);
}

JobReport JobExecutor::report() const {
  if (!state_.finished) throw Error("job " + std::to_string(job_.job_id) + " has not finished");
  JobReport r;
  r.job_id = job_.job_id;
  r.planned = planned_;
  r.executions = executions_;
  r.level_cycle_times = level_cycles_;
  r.cycle_time = to_seconds(finished_at_);
  for (const auto& e : executions_) r.busy[e.agent] += e.end - e.start;
  for (Agent a : kAgents) r.idle[a] = r.cycle_time - r.busy[a];
  r.events = events_;
  r.realized = realized_;
  r.state_before = state_before_;
  r.state_after = update_jq(state_before_, job_, metrics_, realized_, r.cycle_time);
  bool horizon = true;
  for (const auto& def : metrics_) {
    const auto* acc = state_before_.find(def.id);
    if (def.kind == MetricKind::Average && (acc ? acc->elapsed : 0.0) + r.cycle_time <= 0.0) horizon = false;
  }
  if (horizon) r.evaluation = evaluate_metrics(realized_, r.cycle_time, job_, state_before_, metrics_);
  return r;
}

JobReport run_shift_job(const JobSpec& job, const Assignment& assignment, const MetricState& state,
                        const std::vector<MetricDef>& metrics, const TraceResolver& resolver, JobOptions options,
                        std::vector<ScriptedMessage> script) {
  JobExecutor exec(job, assignment, state, metrics, resolver, options, std::move(script));
  while (!exec.finished()) {
    const auto t = exec.next_event_time();
    if (!t) throw Error("job " + std::to_string(job.job_id) + " stalled at t=" + std::to_string(exec.state().clock));
    exec.advance_to(*t);
  }
  return exec.report();
}

}  // namespace hrc
