#include "hrc/quality.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hrc {

namespace {

const MetricDef& definition(const std::vector<MetricDef>& metrics, int metric_id, std::size_t& slot) {
  for (std::size_t m = 0; m < metrics.size(); ++m) {
    if (metrics[m].id == metric_id) {
      slot = m;
      return metrics[m];
    }
  }
  throw UnknownMetric("unknown metric " + std::to_string(metric_id));
}

MetricAccumulator accumulator(const MetricState& state, int metric_id) {
  if (const auto* acc = state.find(metric_id); acc != nullptr) return *acc;
  return {metric_id, 0.0, 0.0};
}

// Bound check with room for the rounding of a pause computed to meet it exactly.
bool within(double value, double bound) { return value <= bound + 1e-9 * std::max(1.0, std::abs(bound)); }

double ratio(double cost, double elapsed, double cycle, int metric_id) {
  const double horizon = elapsed + cycle;
  if (horizon <= 0.0) throw ZeroHorizon("metric " + std::to_string(metric_id) + " has a zero time horizon");
  return cost / horizon;
}

template <typename Fn>
void for_each_human_task(const Assignment& assignment, Fn&& fn) {
  for (const auto& level : assignment.levels) {
    for (TaskId id : level.human) fn(id);
  }
}

}  // namespace

double summed_metric(const Assignment& assignment, const JobSpec& job, const MetricState& state,
                     const std::vector<MetricDef>& metrics, int metric_id) {
  std::size_t slot = 0;
  definition(metrics, metric_id, slot);
  double value = accumulator(state, metric_id).cumulative_cost;
  for_each_human_task(assignment, [&](TaskId id) { value += job.task(id).quality_load[slot]; });
  return value;
}

double average_metric(const Assignment& assignment, const JobSpec& job, const MetricState& state,
                      const std::vector<MetricDef>& metrics, int metric_id) {
  std::size_t slot = 0;
  definition(metrics, metric_id, slot);
  const auto acc = accumulator(state, metric_id);
  double cost = acc.cumulative_cost;
  for_each_human_task(assignment, [&](TaskId id) {
    const Task& t = job.task(id);
    cost += t.nominal_time[Agent::Human].value_or(0.0) * t.quality_load[slot];
  });
  return ratio(cost, acc.elapsed, assignment.total_cycle_time(), metric_id);
}

double average_metric(const Realization& realized, double realized_cycle, const JobSpec& job,
                      const MetricState& state, const std::vector<MetricDef>& metrics, int metric_id) {
  std::size_t slot = 0;
  definition(metrics, metric_id, slot);
  const auto acc = accumulator(state, metric_id);
  double cost = acc.cumulative_cost;
  for (const auto& [id, r] : realized) {
    if (r.agent == Agent::Human) cost += r.duration * job.task(id).quality_load[slot];
  }
  return ratio(cost, acc.elapsed, realized_cycle, metric_id);
}

std::vector<MetricEvaluation> evaluate_metrics(const Assignment& assignment, const JobSpec& job,
                                               const MetricState& state, const std::vector<MetricDef>& metrics) {
  std::vector<MetricEvaluation> out;
  for (const auto& def : metrics) {
    MetricEvaluation e{def.id, def.kind, 0.0, def.bound, true};
    e.value = def.kind == MetricKind::Summed ? summed_metric(assignment, job, state, metrics, def.id)
                                             : average_metric(assignment, job, state, metrics, def.id);
    e.satisfied = within(e.value, def.bound);
    out.push_back(e);
  }
  return out;
}

std::vector<MetricEvaluation> evaluate_metrics(const Realization& realized, double realized_cycle,
                                               const JobSpec& job, const MetricState& state,
                                               const std::vector<MetricDef>& metrics) {
  std::vector<MetricEvaluation> out;
  for (std::size_t m = 0; m < metrics.size(); ++m) {
    const auto& def = metrics[m];
    MetricEvaluation e{def.id, def.kind, 0.0, def.bound, true};
    if (def.kind == MetricKind::Summed) {
      e.value = accumulator(state, def.id).cumulative_cost;
      for (const auto& [id, r] : realized) {
        if (r.agent == Agent::Human) e.value += job.task(id).quality_load[m];
      }
    } else {
      e.value = average_metric(realized, realized_cycle, job, state, metrics, def.id);
    }
    e.satisfied = within(e.value, def.bound);
    out.push_back(e);
  }
  return out;
}

MetricState update_jq(const MetricState& state, const JobSpec& job, const std::vector<MetricDef>& metrics,
                      const Realization& realized, double realized_cycle) {
  for (const auto& t : job.tasks) {
    if (!realized.contains(t.id)) {
      throw MissingRealization("job " + std::to_string(job.job_id) + ": task " + std::to_string(t.id) +
                               " has no realized execution");
    }
  }
  MetricState next = state;
  for (const auto& def : metrics) {
    if (next.find(def.id) == nullptr) next.metrics.push_back({def.id, 0.0, 0.0});
  }
  for (std::size_t m = 0; m < metrics.size(); ++m) {
    auto& acc = next.at(metrics[m].id);
    for (const auto& [id, r] : realized) {
      if (r.agent != Agent::Human) continue;
      const double k = job.task(id).quality_load[m];
      acc.cumulative_cost += metrics[m].kind == MetricKind::Summed ? k : r.duration * k;
    }
    acc.elapsed += realized_cycle;
  }
  return next;
}

}  // namespace hrc
