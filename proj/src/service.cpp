#include "hrc/service.hpp"

#include <algorithm>
#include <cmath>

#include "httplib.h"

namespace hrc {

namespace {

Json tuples_json(const ScheduleState& s) {
  Json levels = Json::array();
  for (const auto& l : s.levels) levels.push_back({{"S_H", l.human}, {"S_R", l.robot}});
  return levels;
}

Json optional_task(const std::optional<TaskId>& t) { return t ? Json(*t) : Json(nullptr); }

InputResult error_result(int status, const std::string& message) { return {status, {{"error", message}}}; }

int outcome_status(std::string_view outcome) {
  if (outcome == "applied") return 200;
  if (outcome == "unknown_task") return 404;
  return 409;
}

}  // namespace

std::string_view to_string(ShiftStatus s) {
  switch (s) {
    case ShiftStatus::Loaded:
      return "loaded";
    case ShiftStatus::Running:
      return "running";
    case ShiftStatus::Finished:
      return "finished";
    case ShiftStatus::Failed:
      return "failed";
  }
  return "?";
}

LiveShift::LiveShift(int id, ShiftSpec shift, Trace trace, SimOptions options)
    : id_(id), shift_(std::move(shift)), trace_(std::move(trace)), options_(std::move(options)) {
  check_trace(shift_, trace_);
  metric_state_ = MetricState::initial(shift_.metrics);
  snapshot_ = {{"id", id_}, {"status", "loaded"}, {"metrics", state_to_json(metric_state_)}};
}

LiveShift::~LiveShift() { stop(); }

ShiftStatus LiveShift::status() const {
  std::lock_guard lock(mutex_);
  return status_;
}

bool LiveShift::start(double speed) {
  std::lock_guard lock(mutex_);
  if (status_ != ShiftStatus::Loaded) return false;
  status_ = ShiftStatus::Running;
  speed_ = speed;
  origin_ = std::chrono::steady_clock::now();
  snapshot_["status"] = "running";
  worker_ = std::thread([this] { run(); });
  return true;
}

void LiveShift::stop() {
  stop_ = true;
  inputs_ready_.notify_all();
  if (worker_.joinable()) worker_.join();
}

InputResult LiveShift::submit(Input input, std::chrono::milliseconds timeout) {
  std::unique_lock lock(mutex_);
  if (status_ != ShiftStatus::Running) return error_result(409, "shift is " + std::string(to_string(status_)));
  const std::uint64_t seq = next_seq_++;
  input.seq = seq;
  if (input.message) input.message->seq = seq;
  inputs_.push_back(std::move(input));
  inputs_ready_.notify_all();
  if (!changed_.wait_for(lock, timeout, [&] { return results_.contains(seq); })) {
    return error_result(503, "scheduler did not answer in time");
  }
  InputResult r = std::move(results_.at(seq));
  results_.erase(seq);
  return r;
}

InputResult LiveShift::message(MessageKind kind, TaskId task, std::chrono::milliseconds timeout) {
  return submit({0, Message{Agent::Human, kind, task, 0}, std::nullopt}, timeout);
}

InputResult LiveShift::complete(TaskId task, std::chrono::milliseconds timeout) {
  return submit({0, std::nullopt, task}, timeout);
}

Json LiveShift::snapshot() const {
  std::lock_guard lock(mutex_);
  return snapshot_;
}

std::vector<Json> LiveShift::events_since(std::size_t offset, std::chrono::milliseconds wait, bool& closed) const {
  std::unique_lock lock(mutex_);
  auto done = [&] { return status_ == ShiftStatus::Finished || status_ == ShiftStatus::Failed; };
  changed_.wait_for(lock, wait, [&] { return log_.size() > offset || done() || stop_; });
  closed = done() || stop_;
  if (offset >= log_.size()) return {};
  return {log_.begin() + static_cast<std::ptrdiff_t>(offset), log_.end()};
}

std::optional<Json> LiveShift::report() const {
  std::lock_guard lock(mutex_);
  return report_;
}

Millis LiveShift::sim_now() const {
  const auto wall = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - origin_).count();
  return static_cast<Millis>(std::floor(wall * speed_));
}

void LiveShift::append_event(Json event) {
  {
    std::lock_guard lock(mutex_);
    log_.push_back(std::move(event));
  }
  changed_.notify_all();
}

void LiveShift::publish(const JobExecutor& exec, int job_id, Millis offset, std::size_t& published) {
  const auto& events = exec.events();
  {
    std::lock_guard lock(mutex_);
    for (; published < events.size(); ++published) {
      Json e = events[published].to_json();
      e["job"] = job_id;
      e["job_t"] = events[published].t;
      e["t"] = offset + events[published].t;
      log_.push_back(std::move(e));
    }
  }
  publish_snapshot(&exec, job_id, offset);
}

void LiveShift::publish_snapshot(const JobExecutor* exec, int job_id, Millis offset) {
  Json snap{{"id", id_}, {"job", job_id}};
  if (exec != nullptr) {
    const ScheduleState& s = exec->state();
    snap["clock_ms"] = offset + s.clock;
    snap["job_clock_ms"] = s.clock;
    snap["level"] = std::min(s.level, s.levels.empty() ? 0 : s.levels.size() - 1) + 1;
    snap["levels"] = tuples_json(s);
    snap["current"] = {{"human", optional_task(s.current[Agent::Human])},
                       {"robot", optional_task(s.current[Agent::Robot])}};
    snap["completed"] = s.completed;
    const auto t_res = exec->human_remaining();
    snap["t_res"] = t_res ? Json(*t_res) : Json(nullptr);
  }
  {
    std::lock_guard lock(mutex_);
    snap["status"] = std::string(to_string(status_));
    snap["speed"] = speed_;
    snap["metrics"] = state_to_json(metric_state_);
    snap["events"] = log_.size();
    snapshot_ = std::move(snap);
  }
  changed_.notify_all();
}

void LiveShift::run() {
  ShiftReport report;
  try {
    Trace seeded = trace_;
    if (options_.seed) seeded.seed = *options_.seed;
    const TraceResolver resolver(seeded, options_.stochastic);
    JobOptions job_options = options_.job_options();
    job_options.external_human_completion = true;
    MetricState state = MetricState::initial(shift_.metrics);
    Millis offset = 0;

    for (const auto& job : shift_.jobs) {
      JobRun run;
      run.solve = solve(build_milp(job, state, shift_.metrics), options_.solver);
      append_event({{"t", offset},
                    {"kind", "assignment"},
                    {"job", job.job_id},
                    {"assignment", assignment_to_json(run.solve.assignment)},
                    {"nodes", run.solve.nodes_explored}});
      JobExecutor exec(job, run.solve.assignment, state, shift_.metrics, resolver, job_options,
                       messages_for(shift_, seeded, job.job_id));
      std::size_t published = 0;
      exec.advance_to(0);
      publish(exec, job.job_id, offset, published);

      while (!exec.finished()) {
        if (stop_) throw Error("shift stopped");
        exec.advance_to(std::max<Millis>(0, sim_now() - offset));

        std::deque<Input> batch;
        {
          std::lock_guard lock(mutex_);
          batch.swap(inputs_);
        }
        for (auto& input : batch) {
          InputResult result;
          if (exec.finished()) {
            result = error_result(409, "job finished before the input was applied");
          } else if (input.message) {
            const std::size_t before = exec.events().size();
            exec.post(*input.message);
            result = error_result(409, "message was not processed");
            for (std::size_t i = before; i < exec.events().size(); ++i) {
              const auto& e = exec.events()[i];
              if (e.kind == "message" && e.detail.value("seq", std::uint64_t{0}) == input.seq) {
                const std::string outcome = e.detail.at("outcome").get<std::string>();
                result = {outcome_status(outcome), e.to_json()};
                break;
              }
            }
          } else {
            const TaskId task = *input.complete;
            if (exec.complete_human(task)) {
              result = {200, {{"task", task}, {"outcome", "completed"}}};
            } else if (!job.contains(task)) {
              result = error_result(404, "unknown task " + std::to_string(task));
            } else {
              result = error_result(409, "task " + std::to_string(task) + " is not the human's current task");
            }
          }
          publish(exec, job.job_id, offset, published);
          {
            std::lock_guard lock(mutex_);
            results_[input.seq] = std::move(result);
          }
          changed_.notify_all();
        }
        publish(exec, job.job_id, offset, published);
        if (exec.finished()) break;

        auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(100);
        if (const auto next = exec.next_event_time()) {
          const auto wall = origin_ + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                          std::chrono::duration<double, std::milli>((offset + *next) / speed_));
          deadline = std::min(deadline, wall);
        }
        std::unique_lock lock(mutex_);
        inputs_ready_.wait_until(lock, deadline, [&] { return !inputs_.empty() || stop_; });
      }

      run.execution = exec.report();
      state = run.execution.state_after;
      offset += to_millis(run.execution.cycle_time);
      {
        std::lock_guard lock(mutex_);
        metric_state_ = state;
      }
      report.jobs.push_back(std::move(run));
    }
    report.final_state = state;
    append_event({{"t", offset}, {"kind", "shift_end"}, {"c", report.total_cycle_time()}});
    std::lock_guard lock(mutex_);
    report_ = report.to_json();
    status_ = ShiftStatus::Finished;
  } catch (const std::exception& e) {
    append_event({{"kind", "error"}, {"message", e.what()}});
    std::lock_guard lock(mutex_);
    status_ = ShiftStatus::Failed;
  }
  {
    std::lock_guard lock(mutex_);
    snapshot_["status"] = std::string(to_string(status_));
    snapshot_["metrics"] = state_to_json(metric_state_);
    snapshot_["events"] = log_.size();
    for (auto& input : inputs_) results_[input.seq] = error_result(409, "shift is no longer running");
    inputs_.clear();
  }
  changed_.notify_all();
}

struct ShiftService::Impl {
  httplib::Server server;
  std::optional<ShiftSpec> default_scenario;
  Trace default_trace;
  SimOptions defaults;
  mutable std::mutex mutex;
  std::map<int, std::shared_ptr<LiveShift>> shifts;
  int next_id = 1;
  std::atomic<bool> stopping{false};
};

namespace {

void reply(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void reply(httplib::Response& res, const InputResult& r) { reply(res, r.http_status, r.body); }

Json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return Json::object();
  return Json::parse(req.body);
}

TaskId task_field(const Json& body) {
  if (!body.contains("task") || !body.at("task").is_number_integer()) throw ScenarioError("body needs an integer 'task'");
  return body.at("task").get<TaskId>();
}

}  // namespace

ShiftService::ShiftService(std::optional<ShiftSpec> default_scenario, Trace default_trace, SimOptions defaults)
    : impl_(std::make_unique<Impl>()) {
  impl_->default_scenario = std::move(default_scenario);
  impl_->default_trace = std::move(default_trace);
  impl_->defaults = std::move(defaults);
  auto& srv = impl_->server;
  Impl* impl = impl_.get();

  auto with_shift = [this](const httplib::Request& req, httplib::Response& res, auto&& fn) {
    const auto s = shift(std::stoi(req.matches[1]));
    if (!s) return reply(res, 404, {{"error", "unknown shift"}});
    try {
      fn(*s);
    } catch (const Json::exception& e) {
      reply(res, 400, {{"error", e.what()}});
    } catch (const ScenarioError& e) {
      reply(res, 400, {{"error", e.what()}});
    }
  };

  srv.Post("/shift", [this, impl](const httplib::Request& req, httplib::Response& res) {
    try {
      const Json body = parse_body(req);
      SimOptions options = impl->defaults;
      Trace trace = impl->default_trace;
      std::optional<ShiftSpec> spec;
      if (body.contains("scenario")) {
        spec = parse_scenario(body.at("scenario"));
        trace = body.contains("trace") ? parse_trace(body.at("trace")) : Trace{};
        options.reschedule = body.value("reschedule", options.reschedule);
        options.comms = body.value("comms", options.comms);
        options.home_duration = body.value("home_duration", options.home_duration);
        if (body.contains("seed")) options.seed = body.at("seed").get<std::uint64_t>();
      } else if (body.contains("jobs")) {
        spec = parse_scenario(body);
        trace = {};
      } else {
        spec = impl->default_scenario;
      }
      if (!spec) return reply(res, 400, {{"error", "no scenario given and none loaded"}});
      const int id = create_shift(std::move(*spec), std::move(trace), options);
      reply(res, 201, {{"id", id}});
    } catch (const Json::exception& e) {
      reply(res, 400, {{"error", e.what()}});
    } catch (const Error& e) {
      reply(res, 400, {{"error", e.what()}});
    }
  });

  srv.Post(R"(/shift/(\d+)/start)", [with_shift](const httplib::Request& req, httplib::Response& res) {
    with_shift(req, res, [&](LiveShift& s) {
      double speed = 1.0;
      if (req.has_param("speed")) {
        try {
          speed = std::stod(req.get_param_value("speed"));
        } catch (const std::exception&) {
          speed = -1.0;
        }
      }
      if (!(speed > 0.0) || !std::isfinite(speed)) return reply(res, 400, {{"error", "speed must be positive"}});
      if (!s.start(speed)) return reply(res, 409, {{"error", "shift already started"}});
      reply(res, 200, s.snapshot());
    });
  });

  srv.Get(R"(/shift/(\d+)/state)", [with_shift](const httplib::Request& req, httplib::Response& res) {
    with_shift(req, res, [&](LiveShift& s) { reply(res, 200, s.snapshot()); });
  });

  srv.Post(R"(/shift/(\d+)/message)", [with_shift](const httplib::Request& req, httplib::Response& res) {
    with_shift(req, res, [&](LiveShift& s) {
      const Json body = parse_body(req);
      if (!body.contains("kind") || !body.at("kind").is_string()) throw ScenarioError("body needs a string 'kind'");
      const MessageKind kind = message_kind_from_string(body.at("kind").get<std::string>());
      reply(res, s.message(kind, task_field(body)));
    });
  });

  srv.Post(R"(/shift/(\d+)/complete)", [with_shift](const httplib::Request& req, httplib::Response& res) {
    with_shift(req, res, [&](LiveShift& s) { reply(res, s.complete(task_field(parse_body(req)))); });
  });

  srv.Get(R"(/shift/(\d+)/report)", [with_shift](const httplib::Request& req, httplib::Response& res) {
    with_shift(req, res, [&](LiveShift& s) {
      if (auto r = s.report()) return reply(res, 200, *r);
      reply(res, 409, {{"error", "shift has not finished"}});
    });
  });

  srv.Get(R"(/shift/(\d+)/events)", [this, impl](const httplib::Request& req, httplib::Response& res) {
    const auto s = shift(std::stoi(req.matches[1]));
    if (!s) return reply(res, 404, {{"error", "unknown shift"}});
    std::size_t from = 0;
    if (req.has_param("from")) from = std::stoul(req.get_param_value("from"));
    const bool sse = req.get_header_value("Accept").find("text/event-stream") != std::string::npos ||
                     req.get_param_value("format") == "sse";
    res.set_chunked_content_provider(
        sse ? "text/event-stream" : "application/x-ndjson",
        [s, impl, offset = from, sse](std::size_t, httplib::DataSink& sink) mutable {
          bool closed = false;
          const auto events = s->events_since(offset, std::chrono::milliseconds(250), closed);
          for (const auto& e : events) {
            const std::string line = sse ? "data: " + e.dump() + "\n\n" : e.dump() + "\n";
            if (!sink.is_writable() || !sink.write(line.data(), line.size())) return false;
          }
          offset += events.size();
          if (closed || impl->stopping) sink.done();
          return true;
        });
  });
}

ShiftService::~ShiftService() { stop(); }

int ShiftService::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  if (!impl_->server.bind_to_port(host, port)) throw Error("cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void ShiftService::run() { impl_->server.listen_after_bind(); }

void ShiftService::stop() {
  impl_->stopping = true;
  impl_->server.stop();
  std::map<int, std::shared_ptr<LiveShift>> shifts;
  {
    std::lock_guard lock(impl_->mutex);
    shifts = impl_->shifts;
  }
  for (auto& [id, s] : shifts) s->stop();
}

int ShiftService::create_shift(ShiftSpec shift, Trace trace, SimOptions options) {
  std::lock_guard lock(impl_->mutex);
  const int id = impl_->next_id++;
  impl_->shifts.emplace(id, std::make_shared<LiveShift>(id, std::move(shift), std::move(trace), std::move(options)));
  return id;
}

std::shared_ptr<LiveShift> ShiftService::shift(int id) const {
  std::lock_guard lock(impl_->mutex);
  const auto it = impl_->shifts.find(id);
  return it == impl_->shifts.end() ? nullptr : it->second;
}

}  // namespace hrc
