#pragma once
// Core value types and error taxonomy for the trajectory simulator.

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace gptraj {

using Cplx = std::complex<double>;

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kTwoPi = 2.0 * kPi;

// Overlaps with magnitude at or below this (relative to the state norms) are
// treated as singular: their phase carries no information.
inline constexpr double kEpsOverlap = 1e-12;

// ----- error taxonomy ------------------------------------------------------

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Phase requested of a vanishing overlap.
struct SingularOverlap : Error {
  using Error::Error;
};

// Step size too coarse: first-order probability bookkeeping broke down.
struct StepTooCoarse : Error {
  using Error::Error;
};

// Spectral gap below resolvable tolerance.
struct DegenerateSpectrum : Error {
  using Error::Error;
};

// Statistic requested of a distribution with no included samples.
struct EmptyDistribution : Error {
  using Error::Error;
};

// Density-matrix integration violated trace/hermiticity/positivity guards.
struct IntegrationDiverged : Error {
  using Error::Error;
};

// Root search exhausted its window without locating a zero.
struct NoRootInWindow : Error {
  using Error::Error;
};

// A parameter sweep could not be resolved into continuous segments.
struct SweepThroughSingularity : Error {
  using Error::Error;
};

// Invalid or inconsistent run configuration.
struct ConfigError : Error {
  using Error::Error;
};

// ----- phases ---------------------------------------------------------------

// Phases are plain doubles wrapped to (-pi, pi].
using Phase = double;

// Wrap any finite angle into (-pi, pi].
double wrap_phase(double x);

// ----- two-level state and 2x2 complex matrix -------------------------------

struct PureState {
  Cplx a0{1.0, 0.0};
  Cplx a1{0.0, 0.0};

  double norm2() const { return std::norm(a0) + std::norm(a1); }
  double norm() const { return std::sqrt(norm2()); }
  PureState normalized() const {
    const double n = norm();
    return {a0 / n, a1 / n};
  }
};

// Inner product <a|b>, conjugate-linear in the first argument.
inline Cplx dot(const PureState& a, const PureState& b) {
  return std::conj(a.a0) * b.a0 + std::conj(a.a1) * b.a1;
}

inline PureState operator+(const PureState& a, const PureState& b) {
  return {a.a0 + b.a0, a.a1 + b.a1};
}
inline PureState operator-(const PureState& a, const PureState& b) {
  return {a.a0 - b.a0, a.a1 - b.a1};
}
inline PureState operator*(Cplx c, const PureState& s) {
  return {c * s.a0, c * s.a1};
}
inline PureState operator*(double c, const PureState& s) {
  return {c * s.a0, c * s.a1};
}

struct Mat2 {
  Cplx m00{0.0}, m01{0.0}, m10{0.0}, m11{0.0};

  static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  static Mat2 zero() { return {}; }

  Mat2 adjoint() const {
    return {std::conj(m00), std::conj(m10), std::conj(m01), std::conj(m11)};
  }
  Cplx trace() const { return m00 + m11; }
  // Frobenius norm squared.
  double fnorm2() const {
    return std::norm(m00) + std::norm(m01) + std::norm(m10) + std::norm(m11);
  }
  PureState apply(const PureState& s) const {
    return {m00 * s.a0 + m01 * s.a1, m10 * s.a0 + m11 * s.a1};
  }
};

inline Mat2 operator+(const Mat2& a, const Mat2& b) {
  return {a.m00 + b.m00, a.m01 + b.m01, a.m10 + b.m10, a.m11 + b.m11};
}
inline Mat2 operator-(const Mat2& a, const Mat2& b) {
  return {a.m00 - b.m00, a.m01 - b.m01, a.m10 - b.m10, a.m11 - b.m11};
}
inline Mat2 operator*(const Mat2& a, const Mat2& b) {
  return {a.m00 * b.m00 + a.m01 * b.m10, a.m00 * b.m01 + a.m01 * b.m11,
          a.m10 * b.m00 + a.m11 * b.m10, a.m10 * b.m01 + a.m11 * b.m11};
}
inline Mat2 operator*(Cplx c, const Mat2& a) {
  return {c * a.m00, c * a.m01, c * a.m10, c * a.m11};
}
inline Mat2 operator*(double c, const Mat2& a) {
  return {c * a.m00, c * a.m01, c * a.m10, c * a.m11};
}

// Outer product |a><b|.
inline Mat2 outer(const PureState& a, const PureState& b) {
  return {a.a0 * std::conj(b.a0), a.a0 * std::conj(b.a1),
          a.a1 * std::conj(b.a0), a.a1 * std::conj(b.a1)};
}

// Pauli matrices.
inline Mat2 sigma_x() { return {0.0, 1.0, 1.0, 0.0}; }
inline Mat2 sigma_y() { return {0.0, Cplx(0.0, -1.0), Cplx(0.0, 1.0), 0.0}; }
inline Mat2 sigma_z() { return {1.0, 0.0, 0.0, -1.0}; }

// arg<a|b>, throwing SingularOverlap when |<a|b>| <= kEpsOverlap * |a||b|.
Phase arg_overlap(const PureState& a, const PureState& b);

// ----- model parameters ------------------------------------------------------

// All rates and frequencies are in units of the level splitting omega unless
// stated otherwise; dt is in inverse-omega time units.
struct ModelParams {
  double omega = 1.0;        // level splitting
  double Omega = 5e-3;       // drive angular frequency
  double theta = 0.34 * kPi; // polar angle of the rotating field axis
  double Gamma = 0.0;        // overall dissipation scale (bookkeeping value)
  double gamma_minus = 0.0;  // decay rate (upper -> lower instantaneous level)
  double gamma_plus = 0.0;   // excitation rate (lower -> upper)
  double gamma_d = 0.0;      // eigenbasis dephasing rate
  double gamma_z = 0.0;      // bare sigma_z dephasing rate
  double lambda_disp = 0.0;  // detector displacement strength (0 = direct)
  bool displace_all = true;  // displace every monitored channel (else skip z)
  double dt = kTwoPi * 1e-3; // integrator step
  std::int64_t n_traj = 10000;
  std::uint64_t seed = 1;

  double period() const { return kTwoPi / Omega; }

  // Standard rate assignment: gamma_minus = Gamma, gamma_d = 0.32 Gamma,
  // gamma_plus = 0, with gamma_z supplied separately.
  static ModelParams standard(double Omega, double Gamma, double theta,
                              double gamma_z = 0.0);

  // Throws ConfigError on out-of-range parameters.
  void validate() const;
};

}  // namespace gptraj
