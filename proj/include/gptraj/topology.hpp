#pragma once
// Winding of the no-jump geometric phase as the field axis sweeps from pole
// to pole, and the resulting sector decomposition of the parameter plane.

#include <vector>

#include "gptraj/types.hpp"

namespace gptraj {

// Continuous lift of the no-jump cycle phase along an adaptive theta grid
// spanning [0, pi], anchored to 0 at theta = 0; consecutive entries differ
// by less than pi.
struct ThetaSweep {
  std::vector<double> thetas;
  std::vector<double> phases;  // unwrapped, radians
};

// Adaptive sweep of gp_no_jump over theta in [0, pi] at the base parameters
// (base.theta is ignored). Throws SweepThroughSingularity when refinement
// cannot restore continuity.
ThetaSweep theta_sweep(const ModelParams& base);

// Net number of turns of the no-jump phase across the sweep:
// round(phase(pi) / 2 pi), with the residual required below 0.05 turns.
int winding_number(const ModelParams& base);

// Pointwise difference of two sweeps evaluated on a common refined grid:
// phases[i] = phase_1(theta_i) - phase_2(theta_i).
ThetaSweep delta_theta(const ModelParams& p1, const ModelParams& p2);

// Sector classification of one parameter-plane cell: winding number plus the
// theta closest to criticality (argmin over theta of the drift cycle-return
// overlap). Cells whose minimal squared overlap falls below 1e-8 are flagged
// singular and carry no winding value.
struct SectorCell {
  double Omega = 0.0;
  double Gamma = 0.0;
  int n = 0;
  double theta_c = 0.0;
  double min_survival = 1.0;  // squared cycle-return overlap at theta_c
  bool singular = false;
};

// Row-major over (omega_grid x gamma_grid); theta_grid seeds the per-cell
// criticality scan.
std::vector<SectorCell> sector_map(const std::vector<double>& theta_grid,
                                   const std::vector<double>& omega_grid,
                                   const std::vector<double>& gamma_grid);

}  // namespace gptraj
