#pragma once
// Driven two-level model: rotating-axis Hamiltonian, instantaneous
// eigensystem, monitored jump channels, and the per-step Kraus operators of
// the jump unravelling.

#include <utility>
#include <vector>

#include "gptraj/types.hpp"

namespace gptraj {

enum class JumpLabel { minus, plus, dephase, z };
const char* to_string(JumpLabel label);

struct EigenPair {
  double energy_plus = 0.0;
  double energy_minus = 0.0;
  PureState state_plus;
  PureState state_minus;
};

// Drive azimuth at time t in the forward frame.
inline double azimuth(const ModelParams& p, double t) { return p.Omega * t; }

// H(t) = (omega/2) n(t).sigma with n = (sin th cos az, sin th sin az, cos th).
Mat2 hamiltonian(const ModelParams& p, double t);
Mat2 hamiltonian_at_azimuth(const ModelParams& p, double az);

// Instantaneous eigensystem. Default gauge: first nonzero component of each
// eigenvector is real and positive. With gauge_ref, each eigenvector's phase
// is chosen so Re<ref|new> > 0 (continuity along a path).
EigenPair eigensystem(const ModelParams& p, double t,
                      const EigenPair* gauge_ref = nullptr);
EigenPair eigensystem_at_azimuth(const ModelParams& p, double az,
                                 const EigenPair* gauge_ref = nullptr);

// Longitudinal moment m(t) = <+|sigma_x|+> = sin th cos az and transition
// weight f(t) = |<-|sigma_x|+>|^2 = cos^2 th + sin^2 th sin^2 az.
double m_factor(const ModelParams& p, double t);
double f_factor(const ModelParams& p, double t);
double m_factor_at_azimuth(const ModelParams& p, double az);
double f_factor_at_azimuth(const ModelParams& p, double az);

// Monitored jump operators built on the instantaneous eigenbasis:
//   L_minus = sqrt(g-) <-(sx)+> |-><+|         (decay)
//   L_plus  = sqrt(g+) <+(sx)-> |+><-|         (excitation)
//   L_d     = sqrt(g_d/2) m(t) sigma~_z        (eigenbasis dephasing)
//   L_z     = sqrt(g_z/2) sigma_z              (bare dephasing)
// Hermitian (dephasing-type) channels enter the dissipator with the
// conventional factor 1/2; raising/lowering channels carry their full rates.
// Channels with zero rate are omitted. sigma~_z = (2/omega) H is the
// eigenbasis z operator.
std::vector<std::pair<JumpLabel, Mat2>> lindblad_ops(const ModelParams& p,
                                                     const EigenPair& eig);

// Jump operators at time t, including the detector displacement
// L'_a = L_a + sqrt(lambda) 1 when lambda_disp > 0 (z channel skipped when
// displace_all is false). Also returns the matching drift Hamiltonian
// H' = H - (i/2) sqrt(lambda) sum_a (L_a - L_a^dag).
struct ChannelSet {
  Mat2 H;                                      // effective Hamiltonian
  std::vector<std::pair<JumpLabel, Mat2>> jumps;  // jump (rate-level) operators
};
ChannelSet displaced_ops(const ModelParams& p, double t);

// One-step Kraus family: K_o = 1 - i dt (H - (i/2) sum L^dag L), K_a = sqrt(dt) L_a.
// Includes the displacement transform when lambda_disp > 0.
struct KrausSet {
  Mat2 K_o;
  std::vector<std::pair<JumpLabel, Mat2>> jumps;
};
KrausSet kraus_step_ops(const ModelParams& p, double t);

// Traceless non-Hermitian generator of the no-jump drift:
//   H_o(t) = [1 - i (g- - g+) f(t) / (2 omega)] H(t).
// This equals H - (i/2) sum_a L_a^dag L_a up to a term proportional to the
// identity, which only rescales the no-jump norm and drops out of phases.
Mat2 drift_hamiltonian(const ModelParams& p, double t);

}  // namespace gptraj
