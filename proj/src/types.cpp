#include "gptraj/types.hpp"

namespace gptraj {

double wrap_phase(double x) {
  if (!std::isfinite(x)) throw Error("wrap_phase: non-finite input");
  double y = std::remainder(x, kTwoPi);  // lands in [-pi, pi]
  if (y <= -kPi) y += kTwoPi;            // shift -pi to +pi
  return y;
}

Phase arg_overlap(const PureState& a, const PureState& b) {
  const Cplx ov = dot(a, b);
  const double scale = a.norm() * b.norm();
  if (std::abs(ov) <= kEpsOverlap * scale) {
    throw SingularOverlap("arg_overlap: |<a|b>| below singular threshold");
  }
  return std::arg(ov);
}

ModelParams ModelParams::standard(double Omega, double Gamma, double theta,
                                  double gamma_z) {
  ModelParams p;
  p.Omega = Omega;
  p.Gamma = Gamma;
  p.theta = theta;
  p.gamma_minus = Gamma;
  p.gamma_plus = 0.0;
  p.gamma_d = 0.32 * Gamma;
  p.gamma_z = gamma_z;
  return p;
}

void ModelParams::validate() const {
  auto bad = [](const std::string& what) { throw ConfigError("ModelParams: " + what); };
  if (!(omega > 0.0)) bad("omega must be positive");
  if (!(Omega > 0.0)) bad("Omega must be positive");
  if (!(theta >= 0.0 && theta <= kPi)) bad("theta must lie in [0, pi]");
  if (gamma_minus < 0.0 || gamma_plus < 0.0 || gamma_d < 0.0 || gamma_z < 0.0)
    bad("rates must be non-negative");
  if (Gamma < 0.0) bad("Gamma must be non-negative");
  if (lambda_disp < 0.0) bad("lambda_disp must be non-negative");
  if (!(dt > 0.0)) bad("dt must be positive");
  if (n_traj < 0) bad("n_traj must be non-negative");
}

}  // namespace gptraj
