#include "hrc/monitor.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace hrc {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

ProgressProfile ProgressProfile::piecewise(std::vector<std::pair<double, double>> knots) {
  double last_t = 0.0;
  double last_p = 0.0;
  for (const auto& [t, p] : knots) {
    if (t < last_t || p < last_p || p > 1.0 || t < 0.0) {
      throw ScenarioError("progress profile must be nondecreasing with fractions in [0,1]");
    }
    last_t = t;
    last_p = p;
  }
  ProgressProfile out;
  out.knots_ = std::move(knots);
  return out;
}

double ProgressProfile::completion(double elapsed, double realized_duration) const {
  if (elapsed <= 0.0) return 0.0;
  if (elapsed >= realized_duration) return 1.0;
  if (knots_.empty()) return elapsed / realized_duration;

  double t0 = 0.0;
  double p0 = 0.0;
  for (const auto& [t1, p1] : knots_) {
    if (elapsed <= t1) {
      if (t1 == t0) return p1;
      return p0 + (p1 - p0) * (elapsed - t0) / (t1 - t0);
    }
    t0 = t1;
    p0 = p1;
  }
  // Past the last knot: head for 1 at the realized duration.
  if (realized_duration <= t0) return 1.0;
  return p0 + (1.0 - p0) * (elapsed - t0) / (realized_duration - t0);
}

double monitor_h(const std::optional<TaskId>& current, double nominal_human_time,
                 const ProgressProfile& profile, double elapsed, double realized_duration) {
  if (!current) throw NotExecuting("human is not executing a task");
  const double pct = std::clamp(profile.completion(elapsed, realized_duration), 0.0, 1.0);
  return (1.0 - pct) * nominal_human_time;
}

RobotStatus monitor_r(const std::optional<TaskId>& current, const RobotBehavior& behavior,
                      double elapsed) {
  if (!current) return RobotStatus::Done;
  if (behavior.fail_after && elapsed >= *behavior.fail_after && *behavior.fail_after < behavior.duration) {
    return RobotStatus::Failed;
  }
  return elapsed >= behavior.duration ? RobotStatus::Done : RobotStatus::Running;
}

TraceResolver::TraceResolver(const Trace& trace, StochasticOptions options)
    : trace_(trace), options_(options) {}

const HumanTaskTrace* TraceResolver::find_human(int job_id, TaskId task) const {
  const HumanTaskTrace* fallback = nullptr;
  for (const auto& h : trace_.human) {
    if (h.task != task) continue;
    if (h.job == job_id) return &h;
    if (!h.job && fallback == nullptr) fallback = &h;
  }
  return fallback;
}

const RobotTaskTrace* TraceResolver::find_robot(int job_id, TaskId task) const {
  const RobotTaskTrace* fallback = nullptr;
  for (const auto& r : trace_.robot) {
    if (r.task != task) continue;
    if (r.job == job_id) return &r;
    if (!r.job && fallback == nullptr) fallback = &r;
  }
  return fallback;
}

double TraceResolver::draw(int job_id, TaskId task, Agent agent, int occurrence, double sigma) const {
  if (sigma <= 0.0) return 1.0;
  std::uint64_t h = splitmix(trace_.seed);
  h = splitmix(h ^ static_cast<std::uint64_t>(job_id));
  h = splitmix(h ^ static_cast<std::uint64_t>(task));
  h = splitmix(h ^ (static_cast<std::uint64_t>(index(agent)) << 32 | static_cast<std::uint32_t>(occurrence)));
  std::mt19937_64 rng(h);
  std::lognormal_distribution<double> dist(0.0, sigma);
  return dist(rng);
}

double TraceResolver::human_duration(int job_id, const Task& task, int occurrence) const {
  if (const auto* h = find_human(job_id, task.id); h != nullptr && occurrence == 0) return h->duration;
  const double nominal = task.nominal_time[Agent::Human].value_or(0.0);
  return nominal * draw(job_id, task.id, Agent::Human, occurrence, options_.human_sigma);
}

ProgressProfile TraceResolver::human_profile(int job_id, TaskId task) const {
  if (const auto* h = find_human(job_id, task); h != nullptr) return h->profile;
  return ProgressProfile::linear();
}

RobotBehavior TraceResolver::robot_behavior(int job_id, const Task& task, int occurrence) const {
  RobotBehavior b;
  const double nominal = task.nominal_time[Agent::Robot].value_or(0.0);
  b.duration = nominal * draw(job_id, task.id, Agent::Robot, occurrence, options_.robot_sigma);
  if (const auto* r = find_robot(job_id, task.id); r != nullptr) {
    if (r->duration) b.duration = *r->duration;
    // A failure is injected into the first attempt only.
    if (occurrence == 0) b.fail_after = r->fail_after;
  }
  return b;
}

Trace random_trace(const ShiftSpec& shift, std::uint64_t seed, double sigma) {
  Trace trace;
  trace.seed = seed;
  TraceResolver resolver(trace, {sigma, 0.0});
  for (const auto& job : shift.jobs) {
    for (const auto& task : job.tasks) {
      if (!task.nominal_time[Agent::Human]) continue;
      trace.human.push_back({task.id, job.job_id, resolver.human_duration(job.job_id, task, 0),
                             ProgressProfile::linear()});
    }
  }
  return trace;
}

}  // namespace hrc
