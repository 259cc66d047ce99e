#pragma once
// Threaded trajectory ensembles with scheduling-independent results: every
// trajectory draws from its own (seed, index)-keyed stream and lands in its
// own slot; reductions run in index order after the pool joins, so outputs
// are bit-identical for any worker count.

#include <cstdint>
#include <vector>

#include "gptraj/echo.hpp"
#include "gptraj/trajectory.hpp"
#include "gptraj/types.hpp"

namespace gptraj {

struct EnsembleResult {
  std::vector<double> phases;           // per-trajectory phase; NaN if excluded
  std::vector<std::int32_t> jump_counts;
  std::vector<std::uint8_t> excluded;   // 1 = no usable phase
  std::vector<Mat2> mean_state;         // mean projector at each sample time
  std::int64_t n_excluded = 0;
  double mean_jumps = 0.0;
};

// Stochastic ensemble over [0, duration] (duration < 0 selects one period),
// started from the upper instantaneous eigenstate. Uses p.n_traj and p.seed.
EnsembleResult run_gp_ensemble(const ModelParams& p, double duration = -1.0,
                               int workers = 1,
                               const std::vector<double>& sample_times = {});

struct EchoEnsembleResult {
  std::vector<double> varphis;
  std::vector<double> persistences;
  std::vector<std::int32_t> jump_counts;
  std::vector<std::uint8_t> excluded;   // singular-phase records (varphi still valid)
  double mean_jumps = 0.0;
};

EchoEnsembleResult run_echo_ensemble(const ModelParams& p, int workers = 1);

// Worker count resolution: explicit > 0 wins; 0 consults the
// GPTRAJ_WORKERS environment variable, then hardware_concurrency.
int resolve_workers(int requested);

}  // namespace gptraj
