#pragma once
// Rotating-frame analysis of the deterministic no-jump path: mean-transition
// closed form, asymptotic geometric-phase approximation, and the singular
// parameter-point locator.

#include <utility>

#include "gptraj/types.hpp"

namespace gptraj {

// nu  = omega - Omega cos th - i (G/2)(1 - sin^2 th / 2),
// eps = sqrt(nu^2 + Omega^2 sin^2 th),    G = gamma_minus - gamma_plus.
// eps uses the principal square root; the singularity residual is even in
// eps, so the branch choice never moves a root.
struct RotFrameParams {
  Cplx nu;
  Cplx eps;
};
RotFrameParams rot_frame_params(const ModelParams& p);

// Exact-(f) amplitude equations for the no-jump path, projected on the
// instantaneous eigenbasis: amplitudes c_pm(t) = <psi_pm(t)|psi(t)> evolve as
//   d/dt c_pm = (∓ i w/2 - i (W/2)(1 ∓ cos th) ∓ (G/4) f(t)) c_pm
//               + i (W/2) sin th c_mp
// up to a common (branch-independent) damping that drops out of rays.
struct BranchCoeffs {
  Cplx c_plus;
  Cplx c_minus;
};
BranchCoeffs coeff_odes_rhs(const BranchCoeffs& c, const ModelParams& p,
                            double t);

// Mean-transition-weight closed form of the no-jump coefficients (f replaced
// by its drive-cycle mean 1 - sin^2 th / 2). branch = +1 starts from the
// upper eigenstate, -1 from the lower one; at t = 0 the state is exactly the
// chosen eigenstate. Also available: the exact time derivative, for residual
// checks against coeff_odes_rhs.
BranchCoeffs analytic_no_jump_coeffs(const ModelParams& p, double t,
                                     int branch);
BranchCoeffs analytic_no_jump_coeff_derivs(const ModelParams& p, double t,
                                           int branch);

// Normalized lab-frame state assembled from the closed-form coefficients.
PureState analytic_no_jump_state(const ModelParams& p, double t, int branch);

// Asymptotic no-jump geometric phase over one cycle (small Omega/omega and
// G/omega):
//   phi0 ~ -pi (1 - cos th)
//          - pi sin^2 th (W/w + cos th W^2/w^2)
//          - (sin^2 th / 4)(W/w + cos th W^2/w^2)
//            * (1 - e^{-4 pi Im nu / W}) / (2 Im nu / W),
// where the dissipative factor tends to 2 pi as Im nu -> 0.
Phase gp_no_jump_approx(const ModelParams& p);

// Closed-form singularity residual (nu+eps) - (nu-eps) e^{2 i pi eps / W}:
// zero exactly when the mean-transition upper-branch amplitude vanishes
// after one cycle.
Cplx singularity_residual(const ModelParams& p);

// Normalized overlap <psi_+(0)|psi(T)> of the drift-propagated upper
// eigenstate after one cycle (fixed-step RK4 on the traceless drift
// generator at resolution p.dt).
Cplx drift_cycle_overlap(const ModelParams& p);

// Drift-cycle return computed in one pass: the geometric phase of the
// closed no-jump ray (return-overlap phase minus the accumulated path
// phase) together with the squared normalized return amplitude.  Agrees
// with the jump-engine no-jump phase away from singular points, but keeps
// fourth-order accuracy on the exponentially small amplitudes near them,
// where the first-order engine's truncation error swamps the phase.
struct DriftCycleGp {
  double gp = 0.0;          // geometric phase of the cycle, wrapped to (-pi, pi]
  double survival = 0.0;    // |<psi_+(0)|psi(T)>|^2 / <psi(T)|psi(T)>
  double path_phase = 0.0;  // accumulated per-step overlap phase (exact real
                            // number, no mod-2pi ambiguity): gp = wrap(
                            // arg(overlap) - path_phase)
  Cplx overlap;             // normalized return amplitude
};
DriftCycleGp drift_cycle_gp(const ModelParams& p);

// Locate the parameter point (Omega, Gamma) inside the given windows where
// the drift path returns orthogonal to the start (|overlap| < 1e-6): Newton
// refinement of the numeric overlap, seeded by the closed-form residual.
// Rates other than the decay channel are irrelevant here and ignored.
// Such zeros recur with spacing ~ Omega^2/omega along the drive-frequency
// axis; size the window to bracket the one of interest.
std::pair<double, double> locate_singularity(
    double theta, std::pair<double, double> omega_window,
    std::pair<double, double> gamma_window);

}  // namespace gptraj
