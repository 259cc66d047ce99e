#pragma once
// Deterministic master-equation integration for the 2x2 density matrix:
// fixed-step RK4 with hermiticity/trace/positivity guards. Serves as the
// ensemble-averaging oracle and supplies density-matrix paths.

#include <vector>

#include "gptraj/types.hpp"

namespace gptraj {

using DensityMatrix = Mat2;

// rho_dot = -i[H, rho] + sum_a (L_a rho L_a^dag - (1/2){L_a^dag L_a, rho}),
// with the same channel set as the trajectory engine (no displacement:
// the displacement transform leaves this generator invariant).
Mat2 lindblad_rhs(const Mat2& rho, const ModelParams& p, double t);

// Integrate over [0, duration] with fixed step p.dt, keeping every
// `sample_stride`-th state (plus the final one). Samples are re-hermitized
// and trace-renormalized; raw internal steps are not. Throws
// IntegrationDiverged when trace, hermiticity, or positivity guards fail.
std::vector<DensityMatrix> integrate(const DensityMatrix& rho0,
                                     const ModelParams& p, double duration,
                                     int sample_stride = 1);

// Trace distance (1/2)||a - b||_1 for 2x2 Hermitian arguments.
double trace_distance(const Mat2& a, const Mat2& b);

// |psi><psi| for a normalized state.
Mat2 projector(const PureState& psi);

}  // namespace gptraj
