#include "hrc/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <string>

namespace hrc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRelTol = 1e-9;

double tol(double v) { return kRelTol * std::max(1.0, std::abs(v)); }

// Horizon the average rows need given the human loads: max_m (C + q) / B - t_m.
double pause_need(const std::vector<QualityRow>& rows, const std::vector<double>& load) {
  double need = -kInf;
  for (std::size_t m = 0; m < rows.size(); ++m) {
    if (rows[m].kind != MetricKind::Average) continue;
    need = std::max(need, (rows[m].cumulative + load[m]) / rows[m].bound - rows[m].elapsed);
  }
  return need;
}

bool summed_ok(const std::vector<QualityRow>& rows, const std::vector<double>& load) {
  for (std::size_t m = 0; m < rows.size(); ++m) {
    if (rows[m].kind != MetricKind::Summed) continue;
    const double value = rows[m].cumulative + load[m];
    if (value > rows[m].bound + tol(rows[m].bound)) return false;
  }
  return true;
}

std::vector<int> topological_indices(const MilpInstance& inst) {
  const std::size_t n = inst.task_count();
  std::vector<int> indegree(n, 0);
  std::vector<std::vector<int>> succ(n);
  for (const auto& [i, j] : inst.precedence) {
    succ[i].push_back(j);
    ++indegree[j];
  }
  std::priority_queue<int, std::vector<int>, std::greater<>> ready;
  for (std::size_t i = 0; i < n; ++i) {
    if (indegree[i] == 0) ready.push(static_cast<int>(i));
  }
  std::vector<int> order;
  while (!ready.empty()) {
    int v = ready.top();
    ready.pop();
    order.push_back(v);
    for (int w : succ[v]) {
      if (--indegree[w] == 0) ready.push(w);
    }
  }
  if (order.size() != n) throw CycleError({});
  return order;
}

// Depth-first search over (level, agent) per task. In the optimize phase
// tasks go in topological order and only strict improvements survive; in the
// tie phase tasks go in id order with children in key order, so the first
// leaf within tolerance of the target is the smallest tie-break key.
class BranchAndBound {
 public:
  BranchAndBound(const MilpInstance& inst, const SolverOptions& options, std::vector<int> order,
                 std::optional<double> target, std::int64_t nodes_before)
      : inst_(inst),
        options_(options),
        n_(static_cast<int>(inst.task_count())),
        levels_(inst.level_count),
        inv_t_(1.0 / inst.t_a_max),
        order_(std::move(order)),
        target_(target),
        nodes_(nodes_before) {
    preds_.resize(n_);
    succs_.resize(n_);
    for (const auto& [i, j] : inst_.precedence) {
      preds_[j].push_back(i);
      succs_[i].push_back(j);
    }

    min_weight_.assign(n_ + 1, 0.0);
    forced_[Agent::Human].assign(n_ + 1, 0.0);
    forced_[Agent::Robot].assign(n_ + 1, 0.0);
    lambda_rest_.assign(kLambdaSteps, std::vector<double>(n_ + 1, 0.0));
    for (int k = n_ - 1; k >= 0; --k) {
      const int i = order_[k];
      double best = kInf;
      for (Agent a : kAgents) {
        if (inst_.allowed[a][i]) best = std::min(best, inst_.weight[a][i]);
      }
      min_weight_[k] = min_weight_[k + 1] + best;
      for (Agent a : kAgents) {
        const bool only = inst_.allowed[a][i] && !inst_.allowed[other(a)][i];
        forced_[a][k] = forced_[a][k + 1] + (only ? inst_.duration[a][i] : 0.0);
      }
      for (int g = 0; g < kLambdaSteps; ++g) {
        const double lambda = static_cast<double>(g) / (kLambdaSteps - 1);
        double cheapest = kInf;
        for (Agent a : kAgents) {
          if (!inst_.allowed[a][i]) continue;
          const double share = a == Agent::Human ? lambda : 1.0 - lambda;
          cheapest = std::min(cheapest, inst_.weight[a][i] + share * inst_.duration[a][i] * inv_t_);
        }
        lambda_rest_[g][k] = lambda_rest_[g][k + 1] + cheapest;
      }
    }

    level_.assign(n_, 0);
    agent_.assign(n_, Agent::Robot);
    load_[Agent::Human].assign(levels_ + 1, 0.0);
    load_[Agent::Robot].assign(levels_ + 1, 0.0);
    used_.assign(levels_ + 1, 0);
    quality_load_.assign(inst_.quality.size(), 0.0);
  }

  void run() { descend(0); }

  bool found() const { return found_; }
  const Labeling& best() const { return best_labeling_; }
  double best_objective() const { return best_objective_; }
  std::int64_t nodes() const { return nodes_; }

 private:
  static constexpr int kLambdaSteps = 11;

  double lower_bound(int k) const {
    const double pause = pause_need(inst_.quality, quality_load_);
    const double horizon = std::max({workload_, total_[Agent::Human] + forced_[Agent::Human][k],
                                     total_[Agent::Robot] + forced_[Agent::Robot][k], pause});
    double lb = weight_sum_ + min_weight_[k] + horizon * inv_t_;
    for (int g = 0; g < kLambdaSteps; ++g) {
      const double lambda = static_cast<double>(g) / (kLambdaSteps - 1);
      const double mixed = lambda * total_[Agent::Human] + (1.0 - lambda) * total_[Agent::Robot];
      lb = std::max(lb, weight_sum_ + mixed * inv_t_ + lambda_rest_[g][k]);
    }
    return lb;
  }

  bool prune(int k) const {
    const double lb = lower_bound(k);
    if (target_) return lb > *target_ + tol(*target_);
    return found_ && lb >= best_objective_ - tol(best_objective_);
  }

  void place(int i, int level, Agent a) {
    const double before = std::max(load_[Agent::Human][level], load_[Agent::Robot][level]);
    load_[a][level] += inst_.duration[a][i];
    workload_ += std::max(load_[Agent::Human][level], load_[Agent::Robot][level]) - before;
    total_[a] += inst_.duration[a][i];
    weight_sum_ += inst_.weight[a][i];
    if (used_[level]++ == 0) ++distinct_;
    if (a == Agent::Human) {
      for (std::size_t m = 0; m < inst_.quality.size(); ++m) quality_load_[m] += inst_.quality[m].coefficient[i];
    }
    level_[i] = level;
    agent_[i] = a;
  }

  void unplace(int i, int level, Agent a) {
    const double before = std::max(load_[Agent::Human][level], load_[Agent::Robot][level]);
    load_[a][level] -= inst_.duration[a][i];
    workload_ += std::max(load_[Agent::Human][level], load_[Agent::Robot][level]) - before;
    total_[a] -= inst_.duration[a][i];
    weight_sum_ -= inst_.weight[a][i];
    if (--used_[level] == 0) --distinct_;
    if (a == Agent::Human) {
      for (std::size_t m = 0; m < inst_.quality.size(); ++m) quality_load_[m] -= inst_.quality[m].coefficient[i];
    }
    level_[i] = 0;
  }

  void descend(int k) {
    if (++nodes_ > options_.node_budget) {
      throw NodeBudgetExceeded("node budget of " + std::to_string(options_.node_budget) + " exceeded");
    }
    if (k == n_) {
      leaf();
      return;
    }
    if (prune(k)) return;

    const int i = order_[k];
    int lowest = 1;
    int highest = levels_;
    for (int p : preds_[i]) {
      if (level_[p] > 0) lowest = std::max(lowest, level_[p] + 1);
    }
    for (int s : succs_[i]) {
      if (level_[s] > 0) highest = std::min(highest, level_[s] - 1);
    }
    const int remaining_after = n_ - k - 1;
    for (int level = lowest; level <= highest && !done_; ++level) {
      const int top = std::max(max_used_, level);
      const int distinct = distinct_ + (used_[level] == 0 ? 1 : 0);
      if (top - distinct > remaining_after) {
        // Gaps below the top can no longer be filled; higher levels only add gaps.
        if (level > max_used_) break;
        continue;
      }
      const int saved_top = max_used_;
      max_used_ = top;
      for (Agent a : {Agent::Human, Agent::Robot}) {
        if (!inst_.allowed[a][i] || done_) continue;
        place(i, level, a);
        if (a != Agent::Human || summed_ok(inst_.quality, quality_load_)) descend(k + 1);
        unplace(i, level, a);
      }
      max_used_ = saved_top;
    }
  }

  void leaf() {
    if (distinct_ != max_used_) return;
    Labeling candidate{level_, agent_};
    const auto objective = objective_of(inst_, candidate);
    if (!objective) return;
    const bool accept = target_ ? *objective <= *target_ + tol(*target_)
                                : !found_ || *objective < best_objective_ - tol(best_objective_);
    if (!accept) return;
    found_ = true;
    done_ = target_.has_value();
    best_objective_ = *objective;
    best_labeling_ = std::move(candidate);
  }

  const MilpInstance& inst_;
  const SolverOptions& options_;
  const int n_;
  const int levels_;
  const double inv_t_;
  const std::vector<int> order_;
  const std::optional<double> target_;

  std::vector<std::vector<int>> preds_;
  std::vector<std::vector<int>> succs_;
  std::vector<double> min_weight_;
  PerAgent<std::vector<double>> forced_;
  std::vector<std::vector<double>> lambda_rest_;

  std::vector<int> level_;
  std::vector<Agent> agent_;
  PerAgent<std::vector<double>> load_;
  PerAgent<double> total_{};
  std::vector<int> used_;
  std::vector<double> quality_load_;
  int max_used_ = 0;
  int distinct_ = 0;
  double weight_sum_ = 0.0;
  double workload_ = 0.0;

  std::int64_t nodes_ = 0;
  bool found_ = false;
  bool done_ = false;
  double best_objective_ = kInf;
  Labeling best_labeling_;
};

}  // namespace

std::size_t MilpInstance::summed_rows() const {
  return static_cast<std::size_t>(std::count_if(quality.begin(), quality.end(),
                                                [](const QualityRow& r) { return r.kind == MetricKind::Summed; }));
}

std::size_t MilpInstance::average_rows() const { return quality.size() - summed_rows(); }

int choose_level_count(const JobSpec& job) {
  validate_dag(job);
  return static_cast<int>(job.tasks.size());
}

MilpInstance build_milp(const JobSpec& job, const MetricState& state, const std::vector<MetricDef>& metrics) {
  validate_dag(job);
  MilpInstance inst;
  inst.job_id = job.job_id;
  inst.level_count = choose_level_count(job);
  const std::size_t n = job.tasks.size();
  for (Agent a : kAgents) {
    inst.weight[a].assign(n, 0.0);
    inst.duration[a].assign(n, 0.0);
    inst.allowed[a].assign(n, 0);
  }
  double t_max = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Task& t = job.tasks[i];
    inst.task_ids.push_back(t.id);
    bool any = false;
    for (Agent a : kAgents) {
      inst.weight[a][i] = t.weight[a];
      if (t.nominal_time[a]) t_max = std::max(t_max, *t.nominal_time[a]);
      if (t.executable_by(a)) {
        inst.allowed[a][i] = 1;
        inst.duration[a][i] = t.time(a);
        any = true;
      }
    }
    if (!any) {
      throw InfeasibleStructure("task " + std::to_string(t.id) + " of job " + std::to_string(job.job_id) +
                                " cannot be executed by either agent");
    }
    if (t.quality_load.size() != metrics.size()) {
      throw ScenarioError("task " + std::to_string(t.id) + " quality load does not match the metric list");
    }
  }
  inst.t_a_max = t_max > 0.0 ? t_max : 1.0;
  for (const auto& [from, to] : job.precedence) {
    inst.precedence.emplace_back(static_cast<int>(job.index_of(from)), static_cast<int>(job.index_of(to)));
  }
  for (std::size_t m = 0; m < metrics.size(); ++m) {
    QualityRow row;
    row.metric_id = metrics[m].id;
    row.kind = metrics[m].kind;
    row.bound = metrics[m].bound;
    if (const auto* acc = state.find(metrics[m].id); acc != nullptr) {
      row.cumulative = acc->cumulative_cost;
      row.elapsed = acc->elapsed;
    }
    if (!std::isfinite(row.cumulative) || !std::isfinite(row.elapsed)) {
      throw ScenarioError("metric state must be finite");
    }
    row.coefficient.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const Task& t = job.tasks[i];
      const double k = t.quality_load[m];
      row.coefficient[i] = row.kind == MetricKind::Summed ? k : t.nominal_time[Agent::Human].value_or(0.0) * k;
    }
    inst.quality.push_back(std::move(row));
  }
  return inst;
}

std::optional<double> cycle_time_of(const MilpInstance& inst, const Labeling& labeling) {
  const std::size_t n = inst.task_count();
  if (labeling.level.size() != n || labeling.agent.size() != n) return std::nullopt;
  std::map<int, PerAgent<double>> loads;
  std::vector<double> quality(inst.quality.size(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const Agent a = labeling.agent[i];
    if (!inst.allowed[a][i] || labeling.level[i] < 1) return std::nullopt;
    loads[labeling.level[i]][a] += inst.duration[a][i];
    if (a == Agent::Human) {
      for (std::size_t m = 0; m < quality.size(); ++m) quality[m] += inst.quality[m].coefficient[i];
    }
  }
  for (const auto& [i, j] : inst.precedence) {
    if (labeling.level[i] + 1 > labeling.level[j]) return std::nullopt;
  }
  if (!summed_ok(inst.quality, quality)) return std::nullopt;
  double workload = 0.0;
  for (const auto& [level, load] : loads) workload += std::max(load[Agent::Human], load[Agent::Robot]);
  return std::max({workload, pause_need(inst.quality, quality), 0.0});
}

std::optional<double> objective_of(const MilpInstance& inst, const Labeling& labeling) {
  const auto c = cycle_time_of(inst, labeling);
  if (!c) return std::nullopt;
  double weights = 0.0;
  for (std::size_t i = 0; i < inst.task_count(); ++i) weights += inst.weight[labeling.agent[i]][i];
  return weights + *c / inst.t_a_max;
}

Assignment to_assignment(const MilpInstance& inst, const Labeling& labeling) {
  std::set<int> used(labeling.level.begin(), labeling.level.end());
  std::map<int, std::size_t> compact;
  for (int l : used) compact.emplace(l, compact.size());

  Assignment out;
  out.levels.resize(compact.size());
  std::vector<PerAgent<double>> loads(compact.size());
  for (std::size_t i = 0; i < inst.task_count(); ++i) {
    const std::size_t l = compact.at(labeling.level[i]);
    const Agent a = labeling.agent[i];
    (a == Agent::Human ? out.levels[l].human : out.levels[l].robot).push_back(inst.task_ids[i]);
    loads[l][a] += inst.duration[a][i];
  }
  double workload = 0.0;
  for (std::size_t l = 0; l < out.levels.size(); ++l) {
    out.levels[l].cycle_time = std::max(loads[l][Agent::Human], loads[l][Agent::Robot]);
    workload += out.levels[l].cycle_time;
  }
  const auto total = cycle_time_of(inst, labeling);
  if (total && !out.levels.empty() && *total > workload) out.levels.back().cycle_time += *total - workload;
  if (const auto obj = objective_of(inst, labeling)) out.objective = *obj;
  return out;
}

SolveReport solve(const MilpInstance& instance, const SolverOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  SolveReport report;
  if (instance.task_count() == 0) {
    report.proven_optimal = true;
    report.wall_time = std::chrono::steady_clock::now() - start;
    return report;
  }
  BranchAndBound optimize(instance, options, topological_indices(instance), std::nullopt, 0);
  optimize.run();
  if (!optimize.found()) {
    throw Infeasible("job " + std::to_string(instance.job_id) + ": no assignment satisfies the quality bounds");
  }
  std::vector<int> by_id(instance.task_count());
  std::iota(by_id.begin(), by_id.end(), 0);
  BranchAndBound search(instance, options, std::move(by_id), optimize.best_objective(), optimize.nodes());
  search.run();
  report.nodes_explored = search.nodes();
  report.assignment = to_assignment(instance, search.best());
  report.objective = search.best_objective();
  report.assignment.objective = report.objective;
  report.proven_optimal = true;
  report.wall_time = std::chrono::steady_clock::now() - start;
  return report;
}

}  // namespace hrc
