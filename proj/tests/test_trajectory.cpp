#include <cmath>
#include <vector>

#include "doctest.h"
#include "gptraj/analytic.hpp"
#include "gptraj/gp.hpp"
#include "gptraj/lindblad.hpp"
#include "gptraj/model.hpp"
#include "gptraj/rng.hpp"
#include "gptraj/trajectory.hpp"

namespace gptraj {
namespace {

TEST_CASE("closed system: no jumps, near-adiabatic cycle phase") {
  const ModelParams p = ModelParams::standard(1e-3, 0.0, 0.34 * kPi);
  Rng rng(11, 0);
  const auto rec =
      run_trajectory(p, p.period(), eigensystem(p, 0.0).state_plus, rng);
  CHECK(rec.events.empty());
  CHECK(rec.final_state.norm() == doctest::Approx(1.0).epsilon(1e-12));
  const double berry = -kPi * (1.0 - std::cos(0.34 * kPi));
  // non-adiabatic correction at this drive rate stays below 5e-3
  CHECK(std::fabs(wrap_phase(rec.gp - berry)) < 5e-3);
  // without jump probability the stochastic run is the deterministic path
  const auto nj = run_no_jump(p, p.period());
  CHECK(std::fabs(wrap_phase(rec.gp - nj.record.gp)) < 1e-12);
  CHECK(nj.survival == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("step: too-coarse time resolution is refused, resolve_dt repairs it") {
  ModelParams p = ModelParams::standard(5e-3, 0.5, 0.34 * kPi);
  p.dt = kTwoPi * 0.05;
  const PureState psi = eigensystem(p, 0.0).state_plus;
  Rng rng(1, 0);
  CHECK_THROWS_AS(step(psi, p, 0.0, rng), StepTooCoarse);

  const double dt = resolve_dt(p, psi);
  CHECK(dt < p.dt);
  // halving only
  const double ratio = p.dt / dt;
  CHECK(std::fabs(ratio - std::round(ratio)) < 1e-12);
  ModelParams q = p;
  q.dt = dt;
  CHECK_NOTHROW(step(psi, q, 0.0, rng));
}

TEST_CASE("no-jump survival matches the unnormalized filtered-path norm") {
  const ModelParams p = ModelParams::standard(5e-3, 1e-3, 0.34 * kPi);
  const auto nj = run_no_jump(p, p.period());
  CHECK(nj.survival <= 1.0);
  CHECK(std::exp(nj.log_survival) == doctest::Approx(nj.survival).epsilon(1e-12));
  CHECK(std::fabs(wrap_phase(nj.record.gp - drift_cycle_gp(p).gp)) < 1e-4);

  // oracle: ||psi(T)||^2 under dpsi/dt = -i (H - (i/2) sum L^dag L) psi,
  // integrated unnormalized at fourth order
  auto rhs = [&p](const PureState& s, double t) {
    const Mat2 H = hamiltonian(p, t);
    const auto ops = lindblad_ops(p, eigensystem(p, t));
    Mat2 sum = Mat2::zero();
    for (const auto& [label, L] : ops) sum = sum + L.adjoint() * L;
    const Mat2 heff = H - Cplx(0.0, 0.5) * sum;
    const PureState hs = heff.apply(s);
    return PureState{Cplx(0.0, -1.0) * hs.a0, Cplx(0.0, -1.0) * hs.a1};
  };
  PureState psi = eigensystem(p, 0.0).state_plus;
  const double h = p.dt / 4.0;
  const auto n = static_cast<std::int64_t>(std::llround(p.period() / h));
  for (std::int64_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * h;
    const PureState k1 = rhs(psi, t);
    const PureState k2 = rhs(psi + (0.5 * h) * k1, t + 0.5 * h);
    const PureState k3 = rhs(psi + (0.5 * h) * k2, t + 0.5 * h);
    const PureState k4 = rhs(psi + h * k3, t + h);
    psi = psi + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  CHECK(nj.survival == doctest::Approx(psi.norm2()).epsilon(1e-2));
}

TEST_CASE("mean jump count agrees with the master-equation rate integral") {
  ModelParams p = ModelParams::standard(5e-3, 1e-3, 0.34 * kPi);
  const double T = p.period();

  // oracle: integral of the total jump rate over the averaged state
  const int stride = 64;
  const auto rho = integrate(projector(eigensystem(p, 0.0).state_plus), p, T, stride);
  double expected = 0.0;
  std::vector<double> rate(rho.size());
  for (std::size_t k = 0; k < rho.size(); ++k) {
    const double t = std::min(T, static_cast<double>(k) * stride * p.dt);
    double r = 0.0;
    for (const auto& [lab, L] : lindblad_ops(p, eigensystem(p, t)))
      r += std::real(((L.adjoint() * L) * rho[k]).trace());
    rate[k] = r;
  }
  for (std::size_t k = 0; k + 1 < rate.size(); ++k)
    expected += 0.5 * (rate[k] + rate[k + 1]) * stride * p.dt;

  const int n = 1000;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    Rng rng(2024, static_cast<std::uint64_t>(i));
    const auto rec = run_trajectory(p, T, eigensystem(p, 0.0).state_plus, rng);
    total += static_cast<double>(rec.events.size());
  }
  const double mean = total / n;
  CHECK(std::fabs(mean - expected) < 3.0 * std::sqrt(expected / n));
}

TEST_CASE("forced jumps land on the monitored channel's image") {
  const ModelParams p = ModelParams::standard(5e-3, 1e-3, 0.34 * kPi, 1e-4);
  const double t = 0.37 * p.period();
  const EigenPair e = eigensystem(p, t);
  const PureState after = apply_forced_jump(e.state_plus, p, t, JumpLabel::minus);
  CHECK(std::abs(dot(e.state_minus, after)) == doctest::Approx(1.0).epsilon(1e-12));
  // decay annihilates the lower state: no post-jump ray exists
  CHECK_THROWS_AS(apply_forced_jump(e.state_minus, p, t, JumpLabel::minus),
                  SingularOverlap);
}

TEST_CASE("forced jump threads its phase into the running record") {
  const ModelParams p = ModelParams::standard(5e-3, 1e-3, 0.34 * kPi, 1e-4);
  TrajectoryRecord rec;
  PureState psi = eigensystem(p, 0.0).state_plus;
  rec.acc.initial_state = psi;
  const PureState before = psi;
  const double az = azimuth(p, 0.1 * p.period());
  apply_forced_jump_at_azimuth(p, az, psi, JumpLabel::dephase, rec);
  CHECK(!rec.singular_jump);
  CHECK(psi.norm() == doctest::Approx(1.0).epsilon(1e-12));
  // dephasing preserves populations in the instantaneous eigenbasis
  const EigenPair e = eigensystem_at_azimuth(p, az);
  CHECK(std::abs(dot(e.state_plus, psi)) ==
        doctest::Approx(std::abs(dot(e.state_plus, before))).epsilon(1e-10));
  CHECK(std::abs(dot(e.state_minus, psi)) ==
        doctest::Approx(std::abs(dot(e.state_minus, before))).epsilon(1e-10));
}

TEST_CASE("trajectories are reproducible from their stream key") {
  ModelParams p = ModelParams::standard(5e-4, 1e-3, 0.34 * kPi);
  p.dt = kTwoPi * 2e-3;
  const PureState init = eigensystem(p, 0.0).state_plus;
  Rng r1(77, 9), r2(77, 9);
  const auto a = run_trajectory(p, p.period(), init, r1);
  const auto b = run_trajectory(p, p.period(), init, r2);
  CHECK(a.n_steps == b.n_steps);
  REQUIRE(a.events.size() == b.events.size());
  for (std::size_t k = 0; k < a.events.size(); ++k) {
    CHECK(a.events[k].label == b.events[k].label);
    CHECK(a.events[k].time == b.events[k].time);
  }
  CHECK(a.gp == b.gp);  // bitwise
  CHECK(a.final_state.a0 == b.final_state.a0);
}

TEST_CASE("sampling grid: states captured at requested boundaries") {
  const ModelParams p = ModelParams::standard(5e-3, 1e-3, 0.34 * kPi);
  RunOptions opts;
  opts.sample_times = {0.5 * p.period(), p.period()};
  Rng rng(3, 1);
  const auto rec =
      run_trajectory(p, p.period(), eigensystem(p, 0.0).state_plus, rng, opts);
  REQUIRE(rec.samples.size() == 2);
  for (const auto& s : rec.samples)
    CHECK(s.norm() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("reversed drive frame undoes the closed-system segment") {
  const ModelParams p = ModelParams::standard(1e-3, 0.0, 0.34 * kPi);
  PureState psi = eigensystem(p, 0.0).state_plus;
  const PureState start = psi;
  TrajectoryRecord rec;
  rec.acc.initial_state = psi;
  double logs = 0.0;
  const double T = p.period();
  evolve_segment(p, DriveFrame{0.0, 0.0, +1.0}, 0.0, 0.25 * T, psi, rec,
                 nullptr, &logs, {});
  evolve_segment(p, DriveFrame{0.25 * T, 0.25 * kTwoPi, -1.0}, 0.25 * T,
                 0.5 * T, psi, rec, nullptr, &logs, {});
  CHECK(std::abs(dot(start, psi)) == doctest::Approx(1.0).epsilon(1e-6));
}

}  // namespace
}  // namespace gptraj
