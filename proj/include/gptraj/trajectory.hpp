#pragma once
// Stochastic jump unravelling of the monitored model: per-step Kraus
// evolution with one uniform draw per step, online geometric-phase
// accumulation, and the deterministic no-jump path.

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "gptraj/gp.hpp"
#include "gptraj/model.hpp"
#include "gptraj/rng.hpp"
#include "gptraj/types.hpp"

namespace gptraj {

struct JumpEvent {
  JumpLabel label;
  double time;  // start time of the step that resolved the jump
};

struct TrajectoryRecord {
  std::vector<JumpEvent> events;
  PureState final_state;
  Phase gp = std::numeric_limits<double>::quiet_NaN();
  std::int64_t n_steps = 0;
  std::uint64_t seed = 0;           // stream index used for reproducibility
  bool singular_jump = false;       // some step overlap was phase-undefined
  bool singular_overlap = false;    // final state orthogonal to initial
  GpAccumulator acc;                // closed into `gp` unless singular
  std::vector<PureState> history;   // per-step states (debug capture only)
  std::vector<PureState> samples;   // states at requested sample times
};

struct RunOptions {
  bool capture_history = false;
  std::vector<double> sample_times;  // ascending; sampled at step boundaries
};

// Advance one step from time t. Returns the normalized post-step state and
// the jump event, if any. Throws StepTooCoarse when first-order probability
// bookkeeping breaks down (sum of jump probabilities > 1e-2, or total
// probability defect > 1e-4).
struct StepResult {
  PureState state;
  std::optional<JumpEvent> event;
};
StepResult step(const PureState& state, const ModelParams& p, double t,
                Rng& rng);

// Apply one forced jump of the given channel at time t (no probability draw).
// Throws SingularOverlap if the channel annihilates the state.
PureState apply_forced_jump(const PureState& state, const ModelParams& p,
                            double t, JumpLabel label);

// Forced jump at an explicit drive azimuth, threading the jump phase into the
// record's accumulator (flagging it singular when phase-undefined).
void apply_forced_jump_at_azimuth(const ModelParams& p, double az,
                                  PureState& state, JumpLabel label,
                                  TrajectoryRecord& rec);

// Run a full stochastic trajectory over [0, duration].
TrajectoryRecord run_trajectory(const ModelParams& p, double duration,
                                const PureState& initial, Rng& rng,
                                const RunOptions& opts = {});

// Deterministic no-jump path: always take the smooth Kraus branch, tracking
// the accumulated survival probability (product of the jump sampler's
// smooth-branch probabilities 1 - sum(p_jump); converges to the squared norm
// of the unnormalized filtered path as dt -> 0).
struct NoJumpRun {
  TrajectoryRecord record;
  double survival = 1.0;      // prod of (1 - sum p_jump)
  double log_survival = 0.0;  // sum of log(1 - sum p_jump)
};
NoJumpRun run_no_jump(const ModelParams& p, double duration,
                      const PureState& initial, const RunOptions& opts = {});
// Convenience: start from the upper instantaneous eigenstate at t = 0.
NoJumpRun run_no_jump(const ModelParams& p, double duration);

// Largest dt <= p.dt (obtained by halving) whose first-step probability
// defect passes the coarseness guard from the given state.
double resolve_dt(const ModelParams& p, const PureState& initial);

// ----- generalized drive frame (used by the echo protocol) -----------------

// Azimuth evolves as az(t) = az0 + dir * Omega * (t - t0).
struct DriveFrame {
  double t0 = 0.0;
  double az0 = 0.0;
  double dir = 1.0;
};

// Run a stochastic segment over [t_begin, t_end] in an arbitrary drive frame,
// continuing an existing record/accumulator. Used by multi-segment protocols.
void evolve_segment(const ModelParams& p, const DriveFrame& frame,
                    double t_begin, double t_end, PureState& state,
                    TrajectoryRecord& rec, Rng* rng, double* log_survival,
                    const RunOptions& opts = {});

}  // namespace gptraj
