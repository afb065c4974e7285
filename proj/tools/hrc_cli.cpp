#include <csignal>
#include <cstdio>
#include <iostream>

#include "CLI11.hpp"

#include "hrc/service.hpp"
#include "hrc/sim.hpp"

namespace {

hrc::ShiftService* g_service = nullptr;

void on_signal(int) {
  if (g_service != nullptr) g_service->stop();
}

void emit(const hrc::Json& j, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << j.dump(2) << '\n';
  } else {
    hrc::write_json_file(out, j);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-layer human-robot collaborative scheduler"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string trace_path;
  std::string out_path;

  auto* solve_cmd = app.add_subcommand("solve", "Solve the task assignment of one job");
  int job_id = 0;
  std::string state_path;
  std::int64_t node_budget = 10'000'000;
  solve_cmd->add_option("scenario", scenario_path, "Scenario JSON")->required()->check(CLI::ExistingFile);
  solve_cmd->add_option("--job", job_id, "Job id")->required();
  solve_cmd->add_option("--state", state_path, "Metric state JSON")->check(CLI::ExistingFile);
  solve_cmd->add_option("--out", out_path, "Assignment JSON output (default stdout)");
  solve_cmd->add_option("--node-budget", node_budget, "Branch and bound node cap");

  auto* sim_cmd = app.add_subcommand("simulate", "Run a full shift on a trace");
  bool no_reschedule = false;
  bool no_comms = false;
  std::optional<std::uint64_t> seed;
  double sigma = 0.25;
  sim_cmd->add_option("scenario", scenario_path, "Scenario JSON")->required()->check(CLI::ExistingFile);
  sim_cmd->add_option("--trace", trace_path, "Trace JSON")->check(CLI::ExistingFile);
  sim_cmd->add_flag("--no-reschedule", no_reschedule, "Disable rescheduling");
  sim_cmd->add_flag("--no-comms", no_comms, "Ignore human messages");
  sim_cmd->add_option("--seed", seed, "Seed for durations the trace leaves open");
  sim_cmd->add_option("--sigma", sigma, "Lognormal sigma of unscripted human durations");
  sim_cmd->add_option("--report", out_path, "Report JSON output (default stdout)");

  auto* cmp_cmd = app.add_subcommand("compare", "Compare rescheduling on and off on one trace");
  std::string json_path;
  cmp_cmd->add_option("scenario", scenario_path, "Scenario JSON")->required()->check(CLI::ExistingFile);
  cmp_cmd->add_option("--trace", trace_path, "Trace JSON")->check(CLI::ExistingFile);
  cmp_cmd->add_option("--seed", seed, "Seed for durations the trace leaves open");
  cmp_cmd->add_option("--json", json_path, "Also write the diff as JSON");

  auto* serve_cmd = app.add_subcommand("serve", "Serve live shifts over HTTP");
  int port = 8080;
  std::string host = "127.0.0.1";
  serve_cmd->add_option("--port", port, "Port (0 picks a free one)");
  serve_cmd->add_option("--host", host, "Bind address");
  serve_cmd->add_option("--scenario", scenario_path, "Default scenario for POST /shift")->check(CLI::ExistingFile);
  serve_cmd->add_option("--trace", trace_path, "Default trace (robot behaviour)")->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    const hrc::Trace trace = trace_path.empty() ? hrc::Trace{} : hrc::load_trace(trace_path);
    hrc::SimOptions options;
    options.seed = seed;
    options.stochastic.human_sigma = sigma;

    if (solve_cmd->parsed()) {
      const auto shift = hrc::load_scenario(scenario_path);
      const auto state = state_path.empty() ? hrc::MetricState::initial(shift.metrics)
                                            : hrc::parse_state(hrc::read_json_file(state_path));
      const auto report = hrc::solve(hrc::build_milp(shift.job(job_id), state, shift.metrics), {node_budget});
      emit(hrc::assignment_to_json(report.assignment), out_path);
      std::fprintf(stderr, "objective %.6f, %lld nodes, %.3f s\n", report.objective,
                   static_cast<long long>(report.nodes_explored), report.wall_time.count());
    } else if (sim_cmd->parsed()) {
      options.reschedule = !no_reschedule;
      options.comms = !no_comms;
      const auto report = hrc::run_shift(hrc::load_scenario(scenario_path), trace, options);
      emit(report.to_json(), out_path);
    } else if (cmp_cmd->parsed()) {
      const auto diff = hrc::compare_policies(hrc::load_scenario(scenario_path), trace, options);
      std::cout << diff.table();
      if (!json_path.empty()) hrc::write_json_file(json_path, diff.to_json());
    } else if (serve_cmd->parsed()) {
      std::optional<hrc::ShiftSpec> shift;
      if (!scenario_path.empty()) shift = hrc::load_scenario(scenario_path);
      hrc::ShiftService service(shift, trace, options);
      const int bound = service.bind(host, port);
      std::fprintf(stderr, "listening on %s:%d\n", host.c_str(), bound);
      g_service = &service;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      service.run();
      g_service = nullptr;
    }
  } catch (const hrc::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
