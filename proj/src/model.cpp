#include "hrc/model.hpp"

#include <algorithm>
#include <queue>
#include <sstream>

namespace hrc {

namespace {

std::string describe_cycle(const std::vector<int>& cycle) {
  std::ostringstream os;
  os << "precedence cycle:";
  for (int id : cycle) os << ' ' << id;
  return os.str();
}

}  // namespace

CycleError::CycleError(std::vector<int> cycle)
    : Error(describe_cycle(cycle)), cycle_(std::move(cycle)) {}

std::string_view to_string(Agent a) { return a == Agent::Human ? "human" : "robot"; }

Agent agent_from_string(std::string_view s) {
  if (s == "human" || s == "H" || s == "Human") return Agent::Human;
  if (s == "robot" || s == "R" || s == "Robot") return Agent::Robot;
  throw ScenarioError("unknown agent '" + std::string(s) + "'");
}

std::string_view to_string(MetricKind k) { return k == MetricKind::Summed ? "summed" : "average"; }

const Task* JobSpec::find(TaskId id) const {
  auto it = std::lower_bound(tasks.begin(), tasks.end(), id,
                             [](const Task& t, TaskId v) { return t.id < v; });
  if (it == tasks.end() || it->id != id) return nullptr;
  return &*it;
}

const Task& JobSpec::task(TaskId id) const {
  const Task* t = find(id);
  if (t == nullptr) {
    throw ScenarioError("job " + std::to_string(job_id) + " has no task " + std::to_string(id));
  }
  return *t;
}

std::size_t JobSpec::index_of(TaskId id) const {
  return static_cast<std::size_t>(&task(id) - tasks.data());
}

std::vector<TaskId> JobSpec::predecessors(TaskId id) const {
  std::vector<TaskId> out;
  for (const auto& [from, to] : precedence) {
    if (to == id) out.push_back(from);
  }
  return out;
}

std::vector<TaskId> JobSpec::successors(TaskId id) const {
  std::vector<TaskId> out;
  for (const auto& [from, to] : precedence) {
    if (from == id) out.push_back(to);
  }
  return out;
}

const JobSpec& ShiftSpec::job(int job_id) const {
  for (const auto& j : jobs) {
    if (j.job_id == job_id) return j;
  }
  throw ScenarioError("unknown job " + std::to_string(job_id));
}

std::size_t ShiftSpec::metric_slot(int metric_id) const {
  for (std::size_t i = 0; i < metrics.size(); ++i) {
    if (metrics[i].id == metric_id) return i;
  }
  throw UnknownMetric("unknown metric " + std::to_string(metric_id));
}

MetricState MetricState::initial(const std::vector<MetricDef>& defs) {
  MetricState s;
  for (const auto& d : defs) s.metrics.push_back({d.id, 0.0, 0.0});
  return s;
}

const MetricAccumulator* MetricState::find(int metric_id) const {
  for (const auto& m : metrics) {
    if (m.metric_id == metric_id) return &m;
  }
  return nullptr;
}

const MetricAccumulator& MetricState::at(int metric_id) const {
  const auto* m = find(metric_id);
  if (m == nullptr) throw UnknownMetric("metric state has no metric " + std::to_string(metric_id));
  return *m;
}

MetricAccumulator& MetricState::at(int metric_id) {
  return const_cast<MetricAccumulator&>(std::as_const(*this).at(metric_id));
}

double Assignment::total_cycle_time() const {
  double c = 0.0;
  for (const auto& l : levels) c += l.cycle_time;
  return c;
}

std::optional<std::pair<std::size_t, Agent>> Assignment::locate(TaskId id) const {
  for (std::size_t l = 0; l < levels.size(); ++l) {
    for (Agent a : kAgents) {
      const auto& tuple = levels[l].tuple(a);
      if (std::find(tuple.begin(), tuple.end(), id) != tuple.end()) return std::pair{l, a};
    }
  }
  return std::nullopt;
}

std::size_t Assignment::task_count() const {
  std::size_t n = 0;
  for (const auto& l : levels) n += l.human.size() + l.robot.size();
  return n;
}

void validate_dag(const JobSpec& job) {
  const std::size_t n = job.tasks.size();
  std::vector<std::vector<std::size_t>> succ(n);
  for (const auto& [from, to] : job.precedence) {
    if (!job.contains(from) || !job.contains(to)) {
      throw ScenarioError("precedence edge " + std::to_string(from) + "->" + std::to_string(to) +
                          " references an unknown task");
    }
    succ[job.index_of(from)].push_back(job.index_of(to));
  }

  // Iterative three-colour DFS; a grey successor closes a cycle.
  enum Colour : char { White, Grey, Black };
  std::vector<Colour> colour(n, White);
  std::vector<std::size_t> parent(n, n);
  for (std::size_t root = 0; root < n; ++root) {
    if (colour[root] != White) continue;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{root, 0}};
    colour[root] = Grey;
    while (!stack.empty()) {
      auto& [v, next] = stack.back();
      if (next == succ[v].size()) {
        colour[v] = Black;
        stack.pop_back();
        continue;
      }
      std::size_t w = succ[v][next++];
      if (colour[w] == Grey) {
        std::vector<int> cycle{job.tasks[w].id};
        for (std::size_t u = v; u != w; u = parent[u]) cycle.push_back(job.tasks[u].id);
        std::reverse(cycle.begin() + 1, cycle.end());
        throw CycleError(std::move(cycle));
      }
      if (colour[w] == White) {
        colour[w] = Grey;
        parent[w] = v;
        stack.emplace_back(w, 0);
      }
    }
  }
}

std::vector<TaskId> topological_order(const JobSpec& job) {
  validate_dag(job);
  const std::size_t n = job.tasks.size();
  std::vector<int> indegree(n, 0);
  std::vector<std::vector<std::size_t>> succ(n);
  for (const auto& [from, to] : job.precedence) {
    succ[job.index_of(from)].push_back(job.index_of(to));
    ++indegree[job.index_of(to)];
  }
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t i = 0; i < n; ++i) {
    if (indegree[i] == 0) ready.push(i);
  }
  std::vector<TaskId> order;
  order.reserve(n);
  while (!ready.empty()) {
    std::size_t v = ready.top();
    ready.pop();
    order.push_back(job.tasks[v].id);
    for (std::size_t w : succ[v]) {
      if (--indegree[w] == 0) ready.push(w);
    }
  }
  return order;
}

std::map<TaskId, int> longest_path_levels(const JobSpec& job) {
  std::map<TaskId, int> level;
  for (TaskId id : topological_order(job)) {
    int l = 1;
    for (TaskId p : job.predecessors(id)) l = std::max(l, level.at(p) + 1);
    level[id] = l;
  }
  return level;
}

DerivedWeights derive_weights(const Task& task) {
  const double capable = task.capability[Agent::Robot] ? 1.0 : 0.0;
  return {0.7 * task.robot_distance + 1000.0 * (1.0 - capable), task.attractiveness};
}

void apply_derived_weights(Task& task) {
  const auto w = derive_weights(task);
  task.weight[Agent::Robot] = w.robot;
  task.weight[Agent::Human] = w.human;
  if (!task.executable_by(Agent::Human)) task.weight[Agent::Human] += 1000.0;
}

}  // namespace hrc
