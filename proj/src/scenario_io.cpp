#include "hrc/scenario_io.hpp"

#include <algorithm>
#include <fstream>
#include <set>

namespace hrc {

namespace {

template <typename T>
T required(const Json& j, const char* key, const char* where) {
  if (!j.contains(key)) throw ScenarioError(std::string(where) + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ScenarioError(std::string(where) + ": bad field '" + key + "': " + e.what());
  }
}

template <typename T>
T optional_field(const Json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ScenarioError(std::string("bad field '") + key + "': " + e.what());
  }
}

std::optional<double> optional_duration(const Json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  const double v = j.at(key).get<double>();
  if (!(v > 0.0)) throw ScenarioError(std::string("duration '") + key + "' must be positive");
  return v;
}

Task parse_task(const Json& j, std::size_t metric_count) {
  Task t;
  t.id = required<int>(j, "id", "task");
  if (t.id <= 0) throw ScenarioError("task ids must be positive integers");
  t.description = optional_field<std::string>(j, "desc", "");
  t.nominal_time[Agent::Robot] = optional_duration(j, "t_R");
  t.nominal_time[Agent::Human] = optional_duration(j, "t_H");
  if (!t.nominal_time[Agent::Robot] && !t.nominal_time[Agent::Human]) {
    throw ScenarioError("task " + std::to_string(t.id) + " has no nominal time for either agent");
  }
  t.capability[Agent::Robot] = optional_field<bool>(j, "capability_R", true) && t.nominal_time[Agent::Robot];
  t.capability[Agent::Human] = t.nominal_time[Agent::Human].has_value();
  t.robot_distance = optional_field<double>(j, "D_R", 0.0);
  t.attractiveness = optional_field<double>(j, "u", 0.0);
  if (t.robot_distance < 0.0 || t.attractiveness < 0.0) {
    throw ScenarioError("task " + std::to_string(t.id) + ": D_R and u must be nonnegative");
  }
  t.quality_load = optional_field<std::vector<double>>(j, "k", {});
  if (t.quality_load.empty()) t.quality_load.assign(metric_count, 0.0);
  if (t.quality_load.size() != metric_count) {
    throw ScenarioError("task " + std::to_string(t.id) + ": k must have one entry per metric");
  }
  for (double k : t.quality_load) {
    if (k < 0.0) throw ScenarioError("task " + std::to_string(t.id) + ": k must be nonnegative");
  }
  apply_derived_weights(t);
  return t;
}

}  // namespace

ShiftSpec parse_scenario(const Json& j) {
  ShiftSpec shift;
  if (j.contains("metrics")) {
    std::set<int> ids;
    for (const auto& m : j.at("metrics")) {
      MetricDef d;
      d.id = required<int>(m, "id", "metric");
      const auto kind = required<std::string>(m, "kind", "metric");
      if (kind == "summed") {
        d.kind = MetricKind::Summed;
      } else if (kind == "average") {
        d.kind = MetricKind::Average;
      } else {
        throw ScenarioError("metric kind must be 'summed' or 'average'");
      }
      d.bound = required<double>(m, "bound", "metric");
      if (!(d.bound > 0.0)) throw ScenarioError("metric bound must be positive");
      if (!ids.insert(d.id).second) throw ScenarioError("duplicate metric id");
      shift.metrics.push_back(d);
    }
  }

  if (!j.contains("jobs") || j.at("jobs").empty()) throw ScenarioError("scenario needs at least one job");
  std::set<int> job_ids;
  for (const auto& jj : j.at("jobs")) {
    JobSpec job;
    job.job_id = required<int>(jj, "id", "job");
    if (!job_ids.insert(job.job_id).second) throw ScenarioError("duplicate job id");
    for (const auto& tj : required<Json>(jj, "tasks", "job")) {
      job.tasks.push_back(parse_task(tj, shift.metrics.size()));
    }
    std::sort(job.tasks.begin(), job.tasks.end(), [](const Task& a, const Task& b) { return a.id < b.id; });
    for (std::size_t i = 1; i < job.tasks.size(); ++i) {
      if (job.tasks[i].id == job.tasks[i - 1].id) throw ScenarioError("duplicate task id in job");
    }
    for (const auto& e : optional_field<std::vector<std::vector<int>>>(jj, "precedence", {})) {
      if (e.size() != 2) throw ScenarioError("precedence entries are [i, j] pairs");
      job.precedence.emplace_back(e[0], e[1]);
    }
    validate_dag(job);
    shift.jobs.push_back(std::move(job));
  }
  return shift;
}

Json scenario_to_json(const ShiftSpec& shift) {
  Json j;
  j["metrics"] = Json::array();
  for (const auto& m : shift.metrics) {
    j["metrics"].push_back({{"id", m.id}, {"kind", std::string(to_string(m.kind))}, {"bound", m.bound}});
  }
  j["jobs"] = Json::array();
  for (const auto& job : shift.jobs) {
    Json jj{{"id", job.job_id}, {"tasks", Json::array()}, {"precedence", Json::array()}};
    for (const auto& t : job.tasks) {
      Json tj{{"id", t.id},
              {"desc", t.description},
              {"D_R", t.robot_distance},
              {"capability_R", t.capability[Agent::Robot]},
              {"u", t.attractiveness},
              {"k", t.quality_load}};
      tj["t_R"] = t.nominal_time[Agent::Robot] ? Json(*t.nominal_time[Agent::Robot]) : Json(nullptr);
      tj["t_H"] = t.nominal_time[Agent::Human] ? Json(*t.nominal_time[Agent::Human]) : Json(nullptr);
      jj["tasks"].push_back(std::move(tj));
    }
    for (const auto& [a, b] : job.precedence) jj["precedence"].push_back({a, b});
    j["jobs"].push_back(std::move(jj));
  }
  return j;
}

MetricState parse_state(const Json& j) {
  MetricState s;
  for (const auto& m : required<Json>(j, "metrics", "state")) {
    MetricAccumulator acc;
    acc.metric_id = required<int>(m, "id", "state metric");
    acc.cumulative_cost = optional_field<double>(m, "C0", 0.0);
    acc.elapsed = optional_field<double>(m, "t_m", 0.0);
    if (acc.cumulative_cost < 0.0 || acc.elapsed < 0.0) {
      throw ScenarioError("state values must be nonnegative");
    }
    s.metrics.push_back(acc);
  }
  return s;
}

Json state_to_json(const MetricState& state) {
  Json j{{"metrics", Json::array()}};
  for (const auto& m : state.metrics) {
    j["metrics"].push_back({{"id", m.metric_id}, {"C0", m.cumulative_cost}, {"t_m", m.elapsed}});
  }
  return j;
}

Assignment parse_assignment(const Json& j) {
  Assignment a;
  for (const auto& lj : required<Json>(j, "levels", "assignment")) {
    Level l;
    l.human = optional_field<std::vector<TaskId>>(lj, "S_H", {});
    l.robot = optional_field<std::vector<TaskId>>(lj, "S_R", {});
    l.cycle_time = optional_field<double>(lj, "c", 0.0);
    a.levels.push_back(std::move(l));
  }
  a.objective = optional_field<double>(j, "objective", 0.0);
  return a;
}

Json assignment_to_json(const Assignment& a) {
  Json j{{"levels", Json::array()}, {"objective", a.objective}};
  for (const auto& l : a.levels) {
    j["levels"].push_back({{"S_H", l.human}, {"S_R", l.robot}, {"c", l.cycle_time}});
  }
  return j;
}

MessageKind message_kind_from_string(const std::string& s) {
  if (s == "delegate") return MessageKind::Delegate;
  if (s == "reassign") return MessageKind::Reassign;
  throw ScenarioError("message kind must be 'delegate' or 'reassign'");
}

std::string_view to_string(MessageKind k) { return k == MessageKind::Delegate ? "delegate" : "reassign"; }

Trace parse_trace(const Json& j) {
  Trace t;
  t.seed = optional_field<std::uint64_t>(j, "seed", 0);
  if (j.contains("human")) {
    for (const auto& h : j.at("human")) {
      HumanTaskTrace e;
      e.task = required<int>(h, "task", "human trace");
      e.duration = required<double>(h, "duration", "human trace");
      if (!(e.duration > 0.0)) throw ScenarioError("human trace durations must be positive");
      if (h.contains("job")) e.job = h.at("job").get<int>();
      if (h.contains("profile") && h.at("profile").is_array()) {
        e.profile = ProgressProfile::piecewise(h.at("profile").get<std::vector<std::pair<double, double>>>());
      } else if (h.contains("profile") && h.at("profile") != "linear") {
        throw ScenarioError("profile must be \"linear\" or a list of [t, pct] pairs");
      }
      t.human.push_back(std::move(e));
    }
  }
  if (j.contains("robot")) {
    for (const auto& r : j.at("robot")) {
      RobotTaskTrace e;
      e.task = required<int>(r, "task", "robot trace");
      if (r.contains("job")) e.job = r.at("job").get<int>();
      e.duration = optional_duration(r, "duration");
      if (r.contains("fail_after") && !r.at("fail_after").is_null()) {
        e.fail_after = r.at("fail_after").get<double>();
        if (*e.fail_after < 0.0) throw ScenarioError("fail_after must be nonnegative");
      }
      t.robot.push_back(e);
    }
  }
  if (j.contains("messages")) {
    for (const auto& m : j.at("messages")) {
      ScriptedMessage e;
      e.at = required<double>(m, "at", "message");
      if (e.at < 0.0) throw ScenarioError("message times must be nonnegative");
      if (m.contains("job")) e.job = m.at("job").get<int>();
      e.sender = agent_from_string(optional_field<std::string>(m, "sender", "human"));
      e.kind = message_kind_from_string(required<std::string>(m, "kind", "message"));
      e.task = required<int>(m, "task", "message");
      if (e.sender == Agent::Robot && e.kind == MessageKind::Reassign) {
        throw ScenarioError("only the human sends reassign messages");
      }
      t.messages.push_back(e);
    }
  }
  return t;
}

Json trace_to_json(const Trace& trace) {
  Json j{{"seed", trace.seed}, {"human", Json::array()}, {"robot", Json::array()}, {"messages", Json::array()}};
  for (const auto& h : trace.human) {
    Json e{{"task", h.task}, {"duration", h.duration}};
    if (h.job) e["job"] = *h.job;
    if (h.profile.is_linear()) {
      e["profile"] = "linear";
    } else {
      e["profile"] = h.profile.knots();
    }
    j["human"].push_back(std::move(e));
  }
  for (const auto& r : trace.robot) {
    Json e{{"task", r.task}};
    if (r.job) e["job"] = *r.job;
    if (r.duration) e["duration"] = *r.duration;
    if (r.fail_after) e["fail_after"] = *r.fail_after;
    j["robot"].push_back(std::move(e));
  }
  for (const auto& m : trace.messages) {
    Json e{{"at", m.at}, {"sender", std::string(to_string(m.sender))},
           {"kind", std::string(to_string(m.kind))}, {"task", m.task}};
    if (m.job) e["job"] = *m.job;
    j["messages"].push_back(std::move(e));
  }
  return j;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ScenarioError(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw ScenarioError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

ShiftSpec load_scenario(const std::filesystem::path& path) { return parse_scenario(read_json_file(path)); }

Trace load_trace(const std::filesystem::path& path) { return parse_trace(read_json_file(path)); }

}  // namespace hrc
