#pragma once
// Geometric phase of pure-state paths: discrete (overlap-chain) form with an
// online accumulator, plus the mixed-state spectral decomposition.

#include <cstddef>
#include <vector>

#include "gptraj/types.hpp"

namespace gptraj {

// Online accumulator for the discrete geometric phase of a stepped path.
// Each evolution step (smooth or jump) contributes the phase of the
// consecutive-state overlap; the geometric phase is the total (Pancharatnam)
// phase between endpoints minus the accumulated dynamical-like step phases:
//   gp = wrap( arg<psi_0|psi_N> + pancharatnam_sum + jump_phase_sum )
// where the sums store the *negated* step phases.
struct GpAccumulator {
  double pancharatnam_sum = 0.0;  // -sum over smooth steps of arg<psi_k|psi_{k+1}>
  double jump_phase_sum = 0.0;    // -sum over jumps of arg<psi|K_a psi>
  PureState initial_state;

  // Returns false (accumulating nothing) when the overlap is singular.
  bool add_smooth(const Cplx& overlap) {
    if (!admissible(overlap)) return false;
    pancharatnam_sum -= std::arg(overlap);
    return true;
  }
  bool add_jump(const Cplx& overlap) {
    if (!admissible(overlap)) return false;
    jump_phase_sum -= std::arg(overlap);
    return true;
  }

 private:
  static bool admissible(const Cplx& ov) { return std::abs(ov) > kEpsOverlap; }
};

// Close the accumulator against the final state. Throws SingularOverlap when
// |<initial|final>| <= kEpsOverlap (relative).
Phase gp_trajectory(const GpAccumulator& acc, const PureState& final_state);

// Discrete geometric phase of an explicit state history (full-history oracle
// for the online form). Throws SingularOverlap naming the offending pair.
Phase gp_pancharatnam(const std::vector<PureState>& states);

// Geometric phase of the deterministic no-jump path over `duration`
// (default: one drive period), starting from the upper instantaneous
// eigenstate. Throws SingularOverlap at singular parameter points.
Phase gp_no_jump(const ModelParams& p, double duration = -1.0);

// Mixed-state geometric phase of a density-matrix path sampled at spacing dt:
//   gp_m = arg sum_m sqrt(l_m(0) l_m(T)) <v_m(0)|v_m(T)>
//                  exp(-integral <v_m|d/dt v_m> dt)
// summed over both eigenbranches, with continuity-gauged eigenvectors and the
// exponential realized as a discrete phase product. Throws DegenerateSpectrum
// when the spectral gap falls below 1e-8 anywhere on the path.
Phase gp_mixed(const std::vector<Mat2>& rho_path, double dt);

// Circular mean of a set of phases: arg sum_j exp(i phi_j).
Phase mean_phase(const std::vector<double>& phases);

}  // namespace gptraj
