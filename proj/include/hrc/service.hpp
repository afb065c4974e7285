#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "hrc/sim.hpp"

namespace hrc {

enum class ShiftStatus { Loaded, Running, Finished, Failed };

std::string_view to_string(ShiftStatus s);

// Result of a human input as seen by the HTTP layer.
struct InputResult {
  int http_status = 200;
  Json body;
};

// One live shift: a scheduler thread paced by the wall clock, fed by human
// inputs through a locked queue, publishing an append-only event log and a
// state snapshot after every change.
class LiveShift {
 public:
  LiveShift(int id, ShiftSpec shift, Trace trace, SimOptions options);
  ~LiveShift();
  LiveShift(const LiveShift&) = delete;
  LiveShift& operator=(const LiveShift&) = delete;

  int id() const { return id_; }
  ShiftStatus status() const;

  // Returns false when already started.
  bool start(double speed);
  void stop();

  InputResult message(MessageKind kind, TaskId task, std::chrono::milliseconds timeout = std::chrono::seconds(5));
  InputResult complete(TaskId task, std::chrono::milliseconds timeout = std::chrono::seconds(5));

  Json snapshot() const;
  // Events from `offset` on; waits up to `wait` for at least one when none
  // are available yet. Sets `closed` once the log will not grow any more.
  std::vector<Json> events_since(std::size_t offset, std::chrono::milliseconds wait, bool& closed) const;
  std::optional<Json> report() const;

 private:
  struct Input {
    std::uint64_t seq = 0;
    std::optional<Message> message;
    std::optional<TaskId> complete;
  };

  InputResult submit(Input input, std::chrono::milliseconds timeout);
  void run();
  Millis sim_now() const;
  void publish(const JobExecutor& exec, int job_id, Millis offset, std::size_t& published);
  void publish_snapshot(const JobExecutor* exec, int job_id, Millis offset);
  void append_event(Json event);

  const int id_;
  const ShiftSpec shift_;
  const Trace trace_;
  const SimOptions options_;

  mutable std::mutex mutex_;
  mutable std::condition_variable changed_;
  std::condition_variable inputs_ready_;
  ShiftStatus status_ = ShiftStatus::Loaded;
  double speed_ = 1.0;
  std::chrono::steady_clock::time_point origin_;
  std::deque<Input> inputs_;
  std::uint64_t next_seq_ = 1;
  std::map<std::uint64_t, InputResult> results_;
  std::vector<Json> log_;
  Json snapshot_;
  std::optional<Json> report_;
  MetricState metric_state_;
  std::atomic<bool> stop_{false};
  std::thread worker_;
};

// HTTP front end over a set of live shifts.
class ShiftService {
 public:
  explicit ShiftService(std::optional<ShiftSpec> default_scenario = std::nullopt, Trace default_trace = {},
                        SimOptions defaults = {});
  ~ShiftService();

  // Port 0 binds an ephemeral port. Returns the bound port.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  void run();
  void stop();

  int create_shift(ShiftSpec shift, Trace trace, SimOptions options);
  std::shared_ptr<LiveShift> shift(int id) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace hrc
