#include "gptraj/model.hpp"

namespace gptraj {

const char* to_string(JumpLabel label) {
  switch (label) {
    case JumpLabel::minus: return "minus";
    case JumpLabel::plus: return "plus";
    case JumpLabel::dephase: return "dephase";
    case JumpLabel::z: return "z";
  }
  return "?";
}

Mat2 hamiltonian_at_azimuth(const ModelParams& p, double az) {
  const double w2 = 0.5 * p.omega;
  const double st = std::sin(p.theta), ct = std::cos(p.theta);
  const Cplx ph(std::cos(az), std::sin(az));
  // (w/2) [st (cos az sx + sin az sy) + ct sz]
  return {w2 * ct, w2 * st * std::conj(ph), w2 * st * ph, -w2 * ct};
}

Mat2 hamiltonian(const ModelParams& p, double t) {
  return hamiltonian_at_azimuth(p, azimuth(p, t));
}

namespace {

// Fix an eigenvector's phase: first component with magnitude above tol is
// made real positive; with a reference, demand Re<ref|v> > 0 instead.
PureState fix_gauge(const PureState& v, const PureState* ref) {
  if (ref != nullptr) {
    const Cplx ov = dot(*ref, v);
    if (std::abs(ov) > kEpsOverlap) {
      const Cplx ph = ov / std::abs(ov);
      return {v.a0 / ph, v.a1 / ph};
    }
    // Orthogonal to the reference: fall through to the canonical rule.
  }
  const double tol = 1e-14;
  Cplx lead = (std::abs(v.a0) > tol) ? v.a0 : v.a1;
  const Cplx ph = lead / std::abs(lead);
  return {v.a0 / ph, v.a1 / ph};
}

}  // namespace

EigenPair eigensystem_at_azimuth(const ModelParams& p, double az,
                                 const EigenPair* gauge_ref) {
  const double h = 0.5 * p.theta;
  const double ch = std::cos(h), sh = std::sin(h);
  const Cplx ph(std::cos(az), std::sin(az));
  EigenPair e;
  e.energy_plus = 0.5 * p.omega;
  e.energy_minus = -0.5 * p.omega;
  e.state_plus = {Cplx(ch, 0.0), sh * ph};
  e.state_minus = {Cplx(sh, 0.0), -ch * ph};
  const PureState* ref_p = gauge_ref ? &gauge_ref->state_plus : nullptr;
  const PureState* ref_m = gauge_ref ? &gauge_ref->state_minus : nullptr;
  e.state_plus = fix_gauge(e.state_plus, ref_p);
  e.state_minus = fix_gauge(e.state_minus, ref_m);
  return e;
}

EigenPair eigensystem(const ModelParams& p, double t,
                      const EigenPair* gauge_ref) {
  return eigensystem_at_azimuth(p, azimuth(p, t), gauge_ref);
}

double m_factor_at_azimuth(const ModelParams& p, double az) {
  return std::sin(p.theta) * std::cos(az);
}
double m_factor(const ModelParams& p, double t) {
  return m_factor_at_azimuth(p, azimuth(p, t));
}

double f_factor_at_azimuth(const ModelParams& p, double az) {
  const double ct = std::cos(p.theta), st = std::sin(p.theta);
  const double s = std::sin(az);
  return ct * ct + st * st * s * s;
}
double f_factor(const ModelParams& p, double t) {
  return f_factor_at_azimuth(p, azimuth(p, t));
}

namespace {

std::vector<std::pair<JumpLabel, Mat2>> lindblad_ops_impl(
    const ModelParams& p, const EigenPair& eig, double m) {
  std::vector<std::pair<JumpLabel, Mat2>> ops;
  // <-(sx)+> in the supplied gauge.
  const Cplx sx_mp = dot(eig.state_minus, sigma_x().apply(eig.state_plus));
  if (p.gamma_minus > 0.0) {
    Mat2 L = std::sqrt(p.gamma_minus) * sx_mp *
             outer(eig.state_minus, eig.state_plus);
    ops.emplace_back(JumpLabel::minus, L);
  }
  if (p.gamma_plus > 0.0) {
    Mat2 L = std::sqrt(p.gamma_plus) * std::conj(sx_mp) *
             outer(eig.state_plus, eig.state_minus);
    ops.emplace_back(JumpLabel::plus, L);
  }
  if (p.gamma_d > 0.0) {
    // sigma~_z = P+ - P- in the instantaneous eigenbasis.
    Mat2 sz_tilde = outer(eig.state_plus, eig.state_plus) -
                    outer(eig.state_minus, eig.state_minus);
    ops.emplace_back(JumpLabel::dephase,
                     std::sqrt(0.5 * p.gamma_d) * m * sz_tilde);
  }
  if (p.gamma_z > 0.0) {
    ops.emplace_back(JumpLabel::z, std::sqrt(0.5 * p.gamma_z) * sigma_z());
  }
  return ops;
}

}  // namespace

std::vector<std::pair<JumpLabel, Mat2>> lindblad_ops(const ModelParams& p,
                                                     const EigenPair& eig) {
  // m = <+|sx|+> evaluated from the supplied eigenpair (gauge invariant).
  const double m =
      std::real(dot(eig.state_plus, sigma_x().apply(eig.state_plus)));
  return lindblad_ops_impl(p, eig, m);
}

ChannelSet displaced_ops(const ModelParams& p, double t) {
  const EigenPair eig = eigensystem(p, t);
  ChannelSet cs;
  cs.H = hamiltonian(p, t);
  cs.jumps = lindblad_ops(p, eig);
  if (p.lambda_disp > 0.0) {
    const double sl = std::sqrt(p.lambda_disp);
    Mat2 anti = Mat2::zero();  // sum over displaced channels of (L - L^dag)
    for (auto& [label, L] : cs.jumps) {
      if (!p.displace_all && label == JumpLabel::z) continue;
      anti = anti + (L - L.adjoint());
      L = L + sl * Mat2::identity();
    }
    cs.H = cs.H - Cplx(0.0, 0.5 * sl) * anti;
  }
  return cs;
}

KrausSet kraus_step_ops(const ModelParams& p, double t) {
  const ChannelSet cs = displaced_ops(p, t);
  Mat2 sum = Mat2::zero();
  KrausSet ks;
  ks.jumps.reserve(cs.jumps.size());
  const double sdt = std::sqrt(p.dt);
  for (const auto& [label, L] : cs.jumps) {
    sum = sum + L.adjoint() * L;
    ks.jumps.emplace_back(label, sdt * L);
  }
  const Mat2 G = cs.H - Cplx(0.0, 0.5) * sum;
  ks.K_o = Mat2::identity() - Cplx(0.0, p.dt) * G;
  return ks;
}

Mat2 drift_hamiltonian(const ModelParams& p, double t) {
  const double f = f_factor(p, t);
  const Cplx pref(1.0, -0.5 * (p.gamma_minus - p.gamma_plus) * f / p.omega);
  return pref * hamiltonian(p, t);
}

}  // namespace gptraj
