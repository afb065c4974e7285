#pragma once

#include <map>
#include <vector>

#include "hrc/model.hpp"

namespace hrc {

struct MetricEvaluation {
  int metric_id = 0;
  MetricKind kind = MetricKind::Average;
  double value = 0.0;
  double bound = 0.0;
  bool satisfied = true;
};

// Final executing agent and realized duration of one task.
struct RealizedTask {
  Agent agent = Agent::Robot;
  double duration = 0.0;
};

using Realization = std::map<TaskId, RealizedTask>;

// K_0 plus the quality load of every human task in the assignment.
double summed_metric(const Assignment& assignment, const JobSpec& job, const MetricState& state,
                     const std::vector<MetricDef>& metrics, int metric_id);

// (C_0 + sum of t_H * k over human tasks) / (t_m + c) with nominal human
// times and c the assignment's total cycle time. Throws ZeroHorizon.
double average_metric(const Assignment& assignment, const JobSpec& job, const MetricState& state,
                      const std::vector<MetricDef>& metrics, int metric_id);

// Same ratio from realized human durations and a realized cycle time.
double average_metric(const Realization& realized, double realized_cycle, const JobSpec& job,
                      const MetricState& state, const std::vector<MetricDef>& metrics, int metric_id);

std::vector<MetricEvaluation> evaluate_metrics(const Assignment& assignment, const JobSpec& job,
                                               const MetricState& state, const std::vector<MetricDef>& metrics);

std::vector<MetricEvaluation> evaluate_metrics(const Realization& realized, double realized_cycle,
                                               const JobSpec& job, const MetricState& state,
                                               const std::vector<MetricDef>& metrics);

// Folds one finished job into the cross-job state. Average metrics add
// realized_duration * k for each human task, summed metrics add k, and
// every t_m advances by the realized cycle. Throws MissingRealization when
// a task of the job has no realization.
MetricState update_jq(const MetricState& state, const JobSpec& job, const std::vector<MetricDef>& metrics,
                      const Realization& realized, double realized_cycle);

}  // namespace hrc
