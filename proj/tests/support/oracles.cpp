#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <set>

namespace oracle {

using hrc::Agent;

bool kahn_acyclic(const hrc::JobSpec& job) {
  std::map<int, int> indegree;
  for (const auto& t : job.tasks) indegree[t.id] = 0;
  for (const auto& [a, b] : job.precedence) ++indegree[b];
  std::deque<int> ready;
  for (const auto& [id, d] : indegree) {
    if (d == 0) ready.push_back(id);
  }
  std::size_t seen = 0;
  while (!ready.empty()) {
    const int v = ready.front();
    ready.pop_front();
    ++seen;
    for (const auto& [a, b] : job.precedence) {
      if (a == v && --indegree[b] == 0) ready.push_back(b);
    }
  }
  return seen == job.tasks.size();
}

namespace {

double t_max(const hrc::JobSpec& job) {
  double m = 0.0;
  for (const auto& t : job.tasks) {
    for (Agent a : hrc::kAgents) {
      if (t.nominal_time[a]) m = std::max(m, *t.nominal_time[a]);
    }
  }
  return m > 0.0 ? m : 1.0;
}

struct Base {
  double cumulative = 0.0;
  double elapsed = 0.0;
};

Base base_of(const hrc::MetricState& state, int id) {
  for (const auto& m : state.metrics) {
    if (m.metric_id == id) return {m.cumulative_cost, m.elapsed};
  }
  return {};
}

}  // namespace

Optimum enumerate(const hrc::JobSpec& job, const hrc::MetricState& state, const std::vector<hrc::MetricDef>& metrics) {
  const int n = static_cast<int>(job.tasks.size());
  const double tmax = t_max(job);
  Optimum best;
  if (n == 0) {
    best.feasible = true;
    return best;
  }
  std::vector<int> code(n, 0);  // code = 2 * (level - 1) + agent
  const int radix = 2 * n;
  while (true) {
    ++best.labelings;
    bool ok = true;
    std::vector<double> human_load(n + 1, 0.0), robot_load(n + 1, 0.0);
    std::map<int, int> level_of;
    double weights = 0.0;
    std::vector<double> quality(metrics.size(), 0.0);
    for (int i = 0; i < n && ok; ++i) {
      const auto& t = job.tasks[i];
      const int level = code[i] / 2 + 1;
      const Agent a = code[i] % 2 == 0 ? Agent::Human : Agent::Robot;
      if (!t.capability[a] || !t.nominal_time[a]) {
        ok = false;
        break;
      }
      level_of[t.id] = level;
      (a == Agent::Human ? human_load : robot_load)[level] += *t.nominal_time[a];
      weights += t.weight[a];
      if (a == Agent::Human) {
        for (std::size_t m = 0; m < metrics.size(); ++m) {
          const double k = t.quality_load[m];
          quality[m] += metrics[m].kind == hrc::MetricKind::Summed ? k : *t.nominal_time[Agent::Human] * k;
        }
      }
    }
    for (const auto& [a, b] : job.precedence) {
      if (ok && level_of[a] >= level_of[b]) ok = false;
    }
    if (ok) {
      double c = 0.0;
      for (int l = 1; l <= n; ++l) c += std::max(human_load[l], robot_load[l]);
      for (std::size_t m = 0; m < metrics.size() && ok; ++m) {
        const Base b = base_of(state, metrics[m].id);
        if (metrics[m].kind == hrc::MetricKind::Summed) {
          if (b.cumulative + quality[m] > metrics[m].bound * (1 + 1e-12)) ok = false;
        } else {
          // Smallest horizon with (C0 + q) <= B (t_m + c).
          c = std::max(c, (b.cumulative + quality[m]) / metrics[m].bound - b.elapsed);
        }
      }
      if (ok) {
        const double obj = weights + c / tmax;
        if (!best.feasible || obj < best.objective) {
          best.objective = obj;
          best.feasible = true;
        }
      }
    }
    int pos = 0;
    while (pos < n && ++code[pos] == radix) code[pos++] = 0;
    if (pos == n) break;
  }
  return best;
}

std::vector<std::string> violations(const hrc::JobSpec& job, const hrc::MetricState& state,
                                    const std::vector<hrc::MetricDef>& metrics, const hrc::Assignment& a) {
  std::vector<std::string> out;
  std::map<int, std::pair<std::size_t, Agent>> where;
  for (std::size_t l = 0; l < a.levels.size(); ++l) {
    for (Agent ag : hrc::kAgents) {
      double load = 0.0;
      for (int id : a.levels[l].tuple(ag)) {
        const auto* t = job.find(id);
        if (t == nullptr) {
          out.push_back("unknown task " + std::to_string(id));
          continue;
        }
        if (where.contains(id)) out.push_back("task " + std::to_string(id) + " placed twice");
        where[id] = {l, ag};
        if (!t->capability[ag] || !t->nominal_time[ag]) {
          out.push_back("task " + std::to_string(id) + " given to an incapable agent");
          continue;
        }
        load += *t->nominal_time[ag];
      }
      if (load > a.levels[l].cycle_time + 1e-9) out.push_back("level " + std::to_string(l + 1) + " overloaded");
    }
  }
  for (const auto& t : job.tasks) {
    if (!where.contains(t.id)) out.push_back("task " + std::to_string(t.id) + " not placed");
  }
  for (const auto& [i, j] : job.precedence) {
    if (where.contains(i) && where.contains(j) && where[i].first >= where[j].first) {
      out.push_back("precedence " + std::to_string(i) + "->" + std::to_string(j) + " violated");
    }
  }
  double c = 0.0;
  for (const auto& l : a.levels) c += l.cycle_time;
  for (std::size_t m = 0; m < metrics.size(); ++m) {
    const Base b = base_of(state, metrics[m].id);
    double q = b.cumulative;
    for (const auto& [id, place] : where) {
      if (place.second != Agent::Human) continue;
      const auto& t = job.task(id);
      q += metrics[m].kind == hrc::MetricKind::Summed ? t.quality_load[m]
                                                      : t.nominal_time[Agent::Human].value_or(0) * t.quality_load[m];
    }
    const bool ok = metrics[m].kind == hrc::MetricKind::Summed
                        ? q <= metrics[m].bound + 1e-9
                        : q <= metrics[m].bound * (b.elapsed + c) * (1 + 1e-9) + 1e-9;
    if (!ok) out.push_back("metric " + std::to_string(metrics[m].id) + " bound violated");
  }
  return out;
}

double objective(const hrc::JobSpec& job, const hrc::Assignment& a) {
  double w = 0.0;
  double c = 0.0;
  for (const auto& l : a.levels) {
    for (int id : l.human) w += job.task(id).weight[Agent::Human];
    for (int id : l.robot) w += job.task(id).weight[Agent::Robot];
    c += l.cycle_time;
  }
  return w + c / t_max(job);
}

hrc::JobSpec random_graph(std::mt19937_64& rng, int tasks, double edge_probability, bool allow_cycles) {
  hrc::JobSpec job;
  job.job_id = 1;
  for (int i = 1; i <= tasks; ++i) {
    hrc::Task t;
    t.id = i;
    t.nominal_time[Agent::Robot] = 1.0;
    t.nominal_time[Agent::Human] = 1.0;
    job.tasks.push_back(t);
  }
  std::vector<int> perm(tasks);
  for (int i = 0; i < tasks; ++i) perm[i] = i + 1;
  std::shuffle(perm.begin(), perm.end(), rng);
  std::bernoulli_distribution edge(edge_probability);
  for (int a = 0; a < tasks; ++a) {
    for (int b = 0; b < tasks; ++b) {
      if (a == b) continue;
      if (!allow_cycles && a > b) continue;
      if (edge(rng)) job.precedence.emplace_back(perm[a], perm[b]);
    }
  }
  return job;
}

RandomInstance random_instance(std::uint64_t seed, const RandomJobOptions& options) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> n_dist(1, options.max_tasks);
  std::uniform_int_distribution<int> m_dist(0, options.max_metrics);
  std::uniform_int_distribution<int> time_dist(1, 30);
  std::uniform_real_distribution<double> weight_dist(0.0, 1.0);
  std::uniform_int_distribution<int> k_dist(0, 9);
  std::bernoulli_distribution rare(0.15);
  std::bernoulli_distribution coin(0.5);

  RandomInstance r;
  const int n = n_dist(rng);
  r.job = random_graph(rng, n, options.edge_probability, false);
  const int metric_count = m_dist(rng);
  for (int m = 0; m < metric_count; ++m) {
    hrc::MetricDef d;
    d.id = m + 1;
    d.kind = coin(rng) ? hrc::MetricKind::Summed : hrc::MetricKind::Average;
    d.bound = d.kind == hrc::MetricKind::Summed ? 1.0 + k_dist(rng) * 2.0 : 0.5 + weight_dist(rng) * 3.0;
    r.metrics.push_back(d);
    hrc::MetricAccumulator acc;
    acc.metric_id = d.id;
    acc.cumulative_cost = coin(rng) ? 0.0 : k_dist(rng) * (d.kind == hrc::MetricKind::Summed ? 0.5 : 10.0);
    acc.elapsed = coin(rng) ? 0.0 : time_dist(rng) * 3.0;
    r.state.metrics.push_back(acc);
  }
  for (auto& t : r.job.tasks) {
    t.nominal_time[Agent::Robot] = time_dist(rng);
    t.nominal_time[Agent::Human] = time_dist(rng);
    if (rare(rng)) {
      t.nominal_time[Agent::Robot].reset();
      t.capability[Agent::Robot] = false;
    } else if (rare(rng)) {
      t.nominal_time[Agent::Human].reset();
      t.capability[Agent::Human] = false;
    }
    t.robot_distance = weight_dist(rng);
    t.attractiveness = weight_dist(rng);
    t.quality_load.clear();
    for (int m = 0; m < metric_count; ++m) t.quality_load.push_back(coin(rng) ? 0.0 : k_dist(rng));
    hrc::apply_derived_weights(t);
  }
  return r;
}

}  // namespace oracle
