#include "gptraj/lindblad.hpp"

#include <cmath>
#include <string>

#include "gptraj/model.hpp"

namespace gptraj {

Mat2 lindblad_rhs(const Mat2& rho, const ModelParams& p, double t) {
  const Mat2 H = hamiltonian(p, t);
  const Cplx mi(0.0, -1.0);
  Mat2 out = mi * (H * rho - rho * H);
  const EigenPair eig = eigensystem(p, t);
  for (const auto& [label, L] : lindblad_ops(p, eig)) {
    const Mat2 Ld = L.adjoint();
    const Mat2 LdL = Ld * L;
    out = out + L * rho * Ld - 0.5 * (LdL * rho + rho * LdL);
  }
  return out;
}

namespace {

Mat2 hermitize(const Mat2& a) {
  const Mat2 ad = a.adjoint();
  return 0.5 * (a + ad);
}

// Eigenvalues of a Hermitian 2x2.
std::pair<double, double> herm_eigs(const Mat2& r) {
  const double a = std::real(r.m00), b = std::real(r.m11);
  const double half_gap =
      std::sqrt(0.25 * (a - b) * (a - b) + std::norm(r.m01));
  const double mid = 0.5 * (a + b);
  return {mid - half_gap, mid + half_gap};
}

}  // namespace

std::vector<DensityMatrix> integrate(const DensityMatrix& rho0,
                                     const ModelParams& p, double duration,
                                     int sample_stride) {
  p.validate();
  if (sample_stride < 1) throw ConfigError("integrate: sample_stride >= 1");
  const auto n_steps =
      static_cast<std::int64_t>(std::llround(duration / p.dt));
  const double h = p.dt;

  auto checked_sample = [&](Mat2 r, std::int64_t k) {
    // Guards on the raw state, then cleanup for the stored sample.
    const double herm_dev = (r - r.adjoint()).fnorm2();
    if (herm_dev > 1e-20) {
      throw IntegrationDiverged("integrate: hermiticity lost at step " +
                                std::to_string(k));
    }
    const double tr = std::real(r.trace());
    if (std::abs(tr - 1.0) > 1e-8) {
      throw IntegrationDiverged("integrate: trace drifted to " +
                                std::to_string(tr) + " at step " +
                                std::to_string(k));
    }
    Mat2 clean = (1.0 / tr) * hermitize(r);
    const auto [lo, hi] = herm_eigs(clean);
    (void)hi;
    if (lo < -1e-10) {
      throw IntegrationDiverged("integrate: negative eigenvalue " +
                                std::to_string(lo) + " at step " +
                                std::to_string(k));
    }
    return clean;
  };

  std::vector<DensityMatrix> out;
  out.reserve(static_cast<std::size_t>(n_steps / sample_stride) + 2);
  Mat2 rho = rho0;
  out.push_back(checked_sample(rho, 0));
  for (std::int64_t k = 0; k < n_steps; ++k) {
    const double t = static_cast<double>(k) * h;
    const Mat2 k1 = lindblad_rhs(rho, p, t);
    const Mat2 k2 = lindblad_rhs(rho + (0.5 * h) * k1, p, t + 0.5 * h);
    const Mat2 k3 = lindblad_rhs(rho + (0.5 * h) * k2, p, t + 0.5 * h);
    const Mat2 k4 = lindblad_rhs(rho + h * k3, p, t + h);
    rho = rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if ((k + 1) % sample_stride == 0 || k + 1 == n_steps) {
      out.push_back(checked_sample(rho, k + 1));
    }
  }
  return out;
}

double trace_distance(const Mat2& a, const Mat2& b) {
  // For Hermitian d = a - b: (1/2) sum |eig(d)|.
  const Mat2 d = hermitize(a - b);
  const auto [lo, hi] = herm_eigs(d);
  return 0.5 * (std::abs(lo) + std::abs(hi));
}

Mat2 projector(const PureState& psi) { return outer(psi, psi); }

}  // namespace gptraj
