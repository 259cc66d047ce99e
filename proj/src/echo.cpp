#include "gptraj/echo.hpp"

#include <algorithm>
#include <cmath>

namespace gptraj {

namespace {

// Ideal eigenbasis exchange at azimuth az: |+> <-> |-> (phase-free in the
// instantaneous eigenbasis). Recorded as one step of the state chain.
void apply_flip(const ModelParams& p, double az, PureState& psi,
                TrajectoryRecord& rec) {
  const EigenPair eig = eigensystem_at_azimuth(p, az);
  const Cplx cp = dot(eig.state_plus, psi);
  const Cplx cm = dot(eig.state_minus, psi);
  const PureState flipped = cp * eig.state_minus + cm * eig.state_plus;
  const Cplx ov = dot(psi, flipped);
  if (!rec.acc.add_smooth(ov)) rec.singular_jump = true;
  psi = flipped;
}

EchoOutcome finish(PureState psi, TrajectoryRecord rec) {
  rec.final_state = psi;
  EchoOutcome out;
  const Cplx ov = dot(rec.acc.initial_state, psi);
  out.persistence = std::norm(ov) / rec.acc.initial_state.norm2();
  if (!rec.singular_jump) {
    if (std::abs(ov) <= kEpsOverlap) {
      rec.singular_overlap = true;
    } else {
      rec.gp = gp_trajectory(rec.acc, psi);
    }
  }
  out.varphi = varphi_from_persistence(out.persistence);
  out.record = std::move(rec);
  return out;
}

EchoOutcome run_echo_impl(const ModelParams& p, Rng* rng,
                          const JumpLabel* forced, double t_jump) {
  p.validate();
  const double T = p.period();
  const EigenPair eig0 = eigensystem(p, 0.0);
  PureState psi =
      (1.0 / std::sqrt(2.0)) * (eig0.state_plus + eig0.state_minus);
  TrajectoryRecord rec;
  rec.acc.initial_state = psi;

  const DriveFrame fwd{0.0, 0.0, 1.0};
  // Reversed drive: az(t) = Omega (2T - t) for t in [T, 2T].
  const DriveFrame rev{T, p.Omega * T, -1.0};

  if (forced == nullptr) {
    evolve_segment(p, fwd, 0.0, T, psi, rec, rng, nullptr);
    apply_flip(p, p.Omega * T, psi, rec);
    evolve_segment(p, rev, T, 2.0 * T, psi, rec, rng, nullptr);
  } else {
    const double tj = std::clamp(t_jump, 0.0, 2.0 * T);
    if (tj <= T) {
      evolve_segment(p, fwd, 0.0, tj, psi, rec, nullptr, nullptr);
      apply_forced_jump_at_azimuth(p, p.Omega * tj, psi, *forced, rec);
      rec.events.push_back({*forced, tj});
      evolve_segment(p, fwd, tj, T, psi, rec, nullptr, nullptr);
      apply_flip(p, p.Omega * T, psi, rec);
      evolve_segment(p, rev, T, 2.0 * T, psi, rec, nullptr, nullptr);
    } else {
      evolve_segment(p, fwd, 0.0, T, psi, rec, nullptr, nullptr);
      apply_flip(p, p.Omega * T, psi, rec);
      evolve_segment(p, rev, T, tj, psi, rec, nullptr, nullptr);
      const double az = p.Omega * T - p.Omega * (tj - T);
      apply_forced_jump_at_azimuth(p, az, psi, *forced, rec);
      rec.events.push_back({*forced, tj});
      evolve_segment(p, rev, tj, 2.0 * T, psi, rec, nullptr, nullptr);
    }
  }
  return finish(psi, rec);
}

}  // namespace

EchoOutcome run_echo(const ModelParams& p, Rng& rng) {
  return run_echo_impl(p, &rng, nullptr, 0.0);
}

EchoOutcome run_echo_no_jump(const ModelParams& p) {
  return run_echo_impl(p, nullptr, nullptr, 0.0);
}

EchoOutcome run_echo_forced(const ModelParams& p, JumpLabel label,
                            double t_jump) {
  return run_echo_impl(p, nullptr, &label, t_jump);
}

double varphi_from_persistence(double persistence) {
  const double P = std::clamp(persistence, 0.0, 1.0);
  return kPi + 0.5 * std::acos(-std::sqrt(P));
}

}  // namespace gptraj
