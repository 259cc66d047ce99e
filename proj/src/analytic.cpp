#include "gptraj/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gptraj/model.hpp"

namespace gptraj {

RotFrameParams rot_frame_params(const ModelParams& p) {
  const double st = std::sin(p.theta);
  const double G = p.gamma_minus - p.gamma_plus;
  const double fbar = 1.0 - 0.5 * st * st;
  RotFrameParams r;
  r.nu = Cplx(p.omega - p.Omega * std::cos(p.theta), -0.5 * G * fbar);
  r.eps = std::sqrt(r.nu * r.nu + Cplx(p.Omega * p.Omega * st * st, 0.0));
  return r;
}

BranchCoeffs coeff_odes_rhs(const BranchCoeffs& c, const ModelParams& p,
                            double t) {
  const double st = std::sin(p.theta), ct = std::cos(p.theta);
  const double G = p.gamma_minus - p.gamma_plus;
  const double f = f_factor(p, t);
  const Cplx cross(0.0, 0.5 * p.Omega * st);
  const Cplx dp = Cplx(-0.25 * G * f, -0.5 * p.omega - 0.5 * p.Omega * (1.0 - ct));
  const Cplx dm = Cplx(+0.25 * G * f, +0.5 * p.omega - 0.5 * p.Omega * (1.0 + ct));
  return {dp * c.c_plus + cross * c.c_minus, dm * c.c_minus + cross * c.c_plus};
}

namespace {

struct ClosedForm {
  Cplx pre;    // e^{-i W t / 2}
  Cplx cos_e;  // cos(eps t / 2)
  Cplx sin_e;  // sin(eps t / 2)
  Cplx nu_eps; // nu / eps
  Cplx amp;    // i W sin th / eps
};

ClosedForm closed_form_terms(const ModelParams& p, double t) {
  const RotFrameParams r = rot_frame_params(p);
  ClosedForm c;
  const double half_wt = 0.5 * p.Omega * t;
  c.pre = Cplx(std::cos(half_wt), -std::sin(half_wt));
  const Cplx x = 0.5 * r.eps * t;
  c.cos_e = std::cos(x);
  c.sin_e = std::sin(x);
  c.nu_eps = r.nu / r.eps;
  c.amp = Cplx(0.0, 1.0) * (p.Omega * std::sin(p.theta)) / r.eps;
  return c;
}

}  // namespace

BranchCoeffs analytic_no_jump_coeffs(const ModelParams& p, double t,
                                     int branch) {
  if (branch != 1 && branch != -1) {
    throw ConfigError("analytic_no_jump_coeffs: branch must be +1 or -1");
  }
  const ClosedForm c = closed_form_terms(p, t);
  const Cplx i(0.0, 1.0);
  BranchCoeffs out;
  if (branch == 1) {
    out.c_plus = c.pre * (c.cos_e - i * c.nu_eps * c.sin_e);
    out.c_minus = c.pre * (c.amp * c.sin_e);
  } else {
    out.c_minus = c.pre * (c.cos_e + i * c.nu_eps * c.sin_e);
    out.c_plus = c.pre * (c.amp * c.sin_e);
  }
  return out;
}

BranchCoeffs analytic_no_jump_coeff_derivs(const ModelParams& p, double t,
                                           int branch) {
  if (branch != 1 && branch != -1) {
    throw ConfigError("analytic_no_jump_coeff_derivs: branch must be +1 or -1");
  }
  const RotFrameParams r = rot_frame_params(p);
  const ClosedForm c = closed_form_terms(p, t);
  const Cplx i(0.0, 1.0);
  const Cplx dpre = -i * (0.5 * p.Omega);       // (d/dt pre) / pre
  const Cplx half_eps = 0.5 * r.eps;
  // d/dt cos = -(eps/2) sin ; d/dt sin = (eps/2) cos.
  BranchCoeffs out;
  if (branch == 1) {
    const Cplx g = c.cos_e - i * c.nu_eps * c.sin_e;
    const Cplx dg = -half_eps * c.sin_e - i * (0.5 * r.nu) * c.cos_e;
    out.c_plus = c.pre * (dpre * g + dg);
    const Cplx h = c.amp * c.sin_e;
    const Cplx dh = c.amp * half_eps * c.cos_e;
    out.c_minus = c.pre * (dpre * h + dh);
  } else {
    const Cplx g = c.cos_e + i * c.nu_eps * c.sin_e;
    const Cplx dg = -half_eps * c.sin_e + i * (0.5 * r.nu) * c.cos_e;
    out.c_minus = c.pre * (dpre * g + dg);
    const Cplx h = c.amp * c.sin_e;
    const Cplx dh = c.amp * half_eps * c.cos_e;
    out.c_plus = c.pre * (dpre * h + dh);
  }
  return out;
}

PureState analytic_no_jump_state(const ModelParams& p, double t, int branch) {
  const BranchCoeffs c = analytic_no_jump_coeffs(p, t, branch);
  const EigenPair eig = eigensystem(p, t);
  const PureState raw = c.c_plus * eig.state_plus + c.c_minus * eig.state_minus;
  const double n = raw.norm();
  if (n <= 1e-300) {
    throw SingularOverlap("analytic_no_jump_state: state annihilated");
  }
  return (1.0 / n) * raw;
}

Phase gp_no_jump_approx(const ModelParams& p) {
  const double st = std::sin(p.theta), ct = std::cos(p.theta);
  const double s2 = st * st;
  const double w = p.omega, W = p.Omega;
  const double poly = W / w + ct * W * W / (w * w);
  const double term1 = -kPi * (1.0 - ct);
  const double term2 = -kPi * s2 * poly;
  const double im_nu = rot_frame_params(p).nu.imag();
  // (1 - e^{-4 pi y / W}) / (2 y / W) -> 2 pi as y -> 0.
  double damp;
  if (im_nu == 0.0) {
    damp = kTwoPi;
  } else {
    damp = -std::expm1(-4.0 * kPi * im_nu / W) / (2.0 * im_nu / W);
  }
  const double term3 = -(s2 / 4.0) * poly * damp;
  return wrap_phase(term1 + term2 + term3);
}

Cplx singularity_residual(const ModelParams& p) {
  const RotFrameParams r = rot_frame_params(p);
  const Cplx phase = std::exp(Cplx(0.0, kTwoPi / p.Omega) * r.eps);
  return (r.nu + r.eps) - (r.nu - r.eps) * phase;
}

namespace {

// RK4 propagation of i d/dt psi = H_o(t) psi over one cycle, using
// incremental drive phasors (trig only at resync points).
// End state of one no-jump drive cycle plus the accumulated per-step
// overlap phase along the path (the discrete connection integral).
struct DriftCycleEnd {
  PureState psi;
  double path_phase = 0.0;
};

DriftCycleEnd propagate_drift_cycle(const ModelParams& p) {
  const double T = p.period();
  const auto n = static_cast<std::int64_t>(std::llround(T / p.dt));
  const double h = T / static_cast<double>(n);
  const double w2 = 0.5 * p.omega;
  const double st = std::sin(p.theta), ct = std::cos(p.theta);
  const double G = p.gamma_minus - p.gamma_plus;

  auto rhs = [&](const PureState& s, const Cplx& z) {
    const double zi = z.imag();
    const double f = ct * ct + st * st * zi * zi;
    const Cplx zc = std::conj(z);
    const Cplx Hp0 = w2 * ct * s.a0 + w2 * st * zc * s.a1;
    const Cplx Hp1 = w2 * st * z * s.a0 - w2 * ct * s.a1;
    // -i (1 - i G f / (2w)) H psi
    const Cplx pref(-0.5 * G * f / p.omega, -1.0);
    return PureState{pref * Hp0, pref * Hp1};
  };

  PureState psi = eigensystem(p, 0.0).state_plus;
  const double daz = p.Omega * h;
  const Cplx rot(std::cos(daz), std::sin(daz));
  const Cplx rot_half(std::cos(0.5 * daz), std::sin(0.5 * daz));
  Cplx z0(1.0, 0.0);
  double path_phase = 0.0;
  Cplx acc(1.0, 0.0);
  for (std::int64_t k = 0; k < n; ++k) {
    if (k % 512 == 0) {
      const double az = p.Omega * (static_cast<double>(k) * h);
      z0 = Cplx(std::cos(az), std::sin(az));
    }
    if (k % 128 == 0) {
      // Fold the running overlap product before it underflows (the state
      // decays exponentially) or its phase wraps (block args stay << pi).
      path_phase += std::arg(acc);
      acc = Cplx(1.0, 0.0);
      psi = (1.0 / psi.norm()) * psi;
    }
    const Cplx zh = z0 * rot_half;
    const Cplx z1 = z0 * rot;
    const PureState k1 = rhs(psi, z0);
    const PureState k2 = rhs(psi + (0.5 * h) * k1, zh);
    const PureState k3 = rhs(psi + (0.5 * h) * k2, zh);
    const PureState k4 = rhs(psi + h * k3, z1);
    const PureState next = psi + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    acc *= dot(psi, next);
    psi = next;
    z0 = z1;
  }
  path_phase += std::arg(acc);
  return {psi, path_phase};
}

}  // namespace

Cplx drift_cycle_overlap(const ModelParams& p) {
  return drift_cycle_gp(p).overlap;
}

DriftCycleGp drift_cycle_gp(const ModelParams& p) {
  p.validate();
  const DriftCycleEnd end = propagate_drift_cycle(p);
  const PureState start = eigensystem(p, 0.0).state_plus;
  DriftCycleGp out;
  out.overlap = dot(start, end.psi) / end.psi.norm();
  out.survival = std::norm(out.overlap);
  out.path_phase = end.path_phase;
  out.gp = wrap_phase(std::arg(out.overlap) - end.path_phase);
  return out;
}

namespace {

// Damped 2-D Newton with central-difference Jacobian on a complex-valued
// function of (x, y); returns true on convergence inside the windows.
template <typename F>
bool newton_2d(F&& fn, double& x, double& y,
               std::pair<double, double> xw, std::pair<double, double> yw,
               double target_abs, int max_iter) {
  for (int it = 0; it < max_iter; ++it) {
    const Cplx g = fn(x, y);
    if (std::abs(g) < target_abs) return true;
    const double hx = std::max(1e-9 * std::abs(x), 1e-14);
    const double hy = std::max(1e-9 * std::abs(y), 1e-14);
    const Cplx gx = (fn(x + hx, y) - fn(x - hx, y)) / (2.0 * hx);
    const Cplx gy = (fn(x, y + hy) - fn(x, y - hy)) / (2.0 * hy);
    // Solve [Re gx Re gy; Im gx Im gy] d = -[Re g; Im g].
    const double det = gx.real() * gy.imag() - gy.real() * gx.imag();
    if (det == 0.0 || !std::isfinite(det)) return false;
    double dx = (-g.real() * gy.imag() + g.imag() * gy.real()) / det;
    double dy = (-gx.real() * g.imag() + gx.imag() * g.real()) / det;
    // Damp overly large steps to a fraction of the window.
    const double max_dx = 0.25 * (xw.second - xw.first);
    const double max_dy = 0.25 * (yw.second - yw.first);
    const double scale =
        std::max({1.0, std::abs(dx) / max_dx, std::abs(dy) / max_dy});
    x += dx / scale;
    y += dy / scale;
    if (x < xw.first || x > xw.second || y < yw.first || y > yw.second) {
      return false;
    }
  }
  return false;
}

}  // namespace

std::pair<double, double> locate_singularity(
    double theta, std::pair<double, double> omega_window,
    std::pair<double, double> gamma_window) {
  if (!(omega_window.first > 0.0 && omega_window.second > omega_window.first))
    throw ConfigError("locate_singularity: bad omega window");
  if (!(gamma_window.first >= 0.0 && gamma_window.second > gamma_window.first))
    throw ConfigError("locate_singularity: bad gamma window");

  auto make_params = [&](double W, double G) {
    ModelParams p;
    p.theta = theta;
    p.Omega = W;
    p.Gamma = G;
    p.gamma_minus = G;  // only the net decay shapes the drift ray path
    return p;
  };
  auto residual = [&](double W, double G) {
    return singularity_residual(make_params(W, G));
  };
  auto overlap = [&](double W, double G) {
    return drift_cycle_overlap(make_params(W, G));
  };

  // Seed: coarse scan of the closed-form residual over the windows.
  const int nw = 24, ng = 24;
  double sx = 0.0, sy = 0.0, best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= nw; ++i) {
    const double W = omega_window.first +
                     (omega_window.second - omega_window.first) * i / nw;
    for (int j = 0; j <= ng; ++j) {
      const double G = gamma_window.first +
                       (gamma_window.second - gamma_window.first) * j / ng;
      const double r = std::abs(residual(W, G));
      if (r < best) {
        best = r;
        sx = W;
        sy = G;
      }
    }
  }
  // Sharpen the analytic seed, then refine on the numeric overlap.
  newton_2d(residual, sx, sy, omega_window, gamma_window, 1e-12, 32);
  double x = std::clamp(sx, omega_window.first, omega_window.second);
  double y = std::clamp(sy, gamma_window.first, gamma_window.second);
  if (newton_2d(overlap, x, y, omega_window, gamma_window, 1e-7, 24)) {
    return {x, y};
  }

  // Fallback: scan the numeric overlap directly.
  best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 12; ++i) {
    const double W = omega_window.first +
                     (omega_window.second - omega_window.first) * i / 12;
    for (int j = 0; j <= 12; ++j) {
      const double G = gamma_window.first +
                       (gamma_window.second - gamma_window.first) * j / 12;
      const double r = std::abs(overlap(W, G));
      if (r < best) {
        best = r;
        x = W;
        y = G;
      }
    }
  }
  if (newton_2d(overlap, x, y, omega_window, gamma_window, 1e-7, 24)) {
    return {x, y};
  }
  throw NoRootInWindow(
      "locate_singularity: no vanishing-overlap point found in window");
}

}  // namespace gptraj
