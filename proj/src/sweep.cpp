#include "hrc/sweep.hpp"

#include <exception>

namespace hrc {

namespace {

SweepResult sweep_one(const ShiftSpec& shift, std::uint64_t seed, double sigma, const SimOptions& options) {
  return {seed, compare_policies(shift, random_trace(shift, seed, sigma), options)};
}

// Runs fn(i) for every index under OpenMP and rethrows the first failure.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

std::vector<SweepResult> sweep_policies(const ShiftSpec& shift, const std::vector<std::uint64_t>& seeds,
                                        double sigma, const SimOptions& options) {
  std::vector<SweepResult> out(seeds.size());
  parallel_for(seeds.size(), [&](std::size_t i) { out[i] = sweep_one(shift, seeds[i], sigma, options); });
  return out;
}

std::vector<SweepResult> sweep_policies_serial(const ShiftSpec& shift, const std::vector<std::uint64_t>& seeds,
                                               double sigma, const SimOptions& options) {
  std::vector<SweepResult> out;
  out.reserve(seeds.size());
  for (auto seed : seeds) out.push_back(sweep_one(shift, seed, sigma, options));
  return out;
}

std::vector<SolveReport> solve_batch(const std::vector<MilpInstance>& instances, const SolverOptions& options) {
  std::vector<SolveReport> out(instances.size());
  parallel_for(instances.size(), [&](std::size_t i) { out[i] = solve(instances[i], options); });
  return out;
}

std::vector<SolveReport> solve_batch_serial(const std::vector<MilpInstance>& instances,
                                            const SolverOptions& options) {
  std::vector<SolveReport> out;
  out.reserve(instances.size());
  for (const auto& inst : instances) out.push_back(solve(inst, options));
  return out;
}

}  // namespace hrc
