#pragma once
// Two-cycle echo protocol: prepare an equal eigenbasis superposition, monitor
// for one drive period, apply an ideal instantaneous eigenbasis exchange,
// then monitor for a second period with the drive azimuth reversed. The
// persistence probability maps onto an echo phase on a fixed branch.

#include "gptraj/trajectory.hpp"

namespace gptraj {

struct EchoOutcome {
  double persistence = 0.0;  // |<psi(0)|psi(2T)>|^2
  double varphi = 0.0;       // echo phase on the branch [1.25 pi, 1.5 pi]
  TrajectoryRecord record;   // full two-segment record (events, gp, flags)
};

// Stochastic echo run.
EchoOutcome run_echo(const ModelParams& p, Rng& rng);

// Deterministic drift-only echo (no jumps anywhere).
EchoOutcome run_echo_no_jump(const ModelParams& p);

// Drift-only echo with a single forced jump of the given channel at t_jump
// (0 <= t_jump <= 2T).
EchoOutcome run_echo_forced(const ModelParams& p, JumpLabel label,
                            double t_jump);

// Invert P = cos^2(2 varphi) on the branch varphi in [1.25 pi, 1.5 pi]:
// varphi = pi + arccos(-sqrt(P)) / 2.
double varphi_from_persistence(double persistence);

}  // namespace gptraj
