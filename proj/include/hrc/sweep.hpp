#pragma once

#include <cstdint>
#include <vector>

#include "hrc/sim.hpp"

namespace hrc {

struct SweepResult {
  std::uint64_t seed = 0;
  PolicyDiff diff;
};

// One policy comparison per seed on a random trace (nominal * lognormal(sigma)
// human durations). The parallel and serial versions return identical results
// in seed order.
std::vector<SweepResult> sweep_policies(const ShiftSpec& shift, const std::vector<std::uint64_t>& seeds,
                                        double sigma, const SimOptions& options = {});
std::vector<SweepResult> sweep_policies_serial(const ShiftSpec& shift, const std::vector<std::uint64_t>& seeds,
                                               double sigma, const SimOptions& options = {});

// Independent solves.
std::vector<SolveReport> solve_batch(const std::vector<MilpInstance>& instances, const SolverOptions& options = {});
std::vector<SolveReport> solve_batch_serial(const std::vector<MilpInstance>& instances,
                                            const SolverOptions& options = {});

}  // namespace hrc
