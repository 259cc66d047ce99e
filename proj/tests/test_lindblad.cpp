#include <cmath>
#include <vector>

#include "doctest.h"
#include "gptraj/ensemble.hpp"
#include "gptraj/lindblad.hpp"
#include "gptraj/model.hpp"
#include "gptraj/trajectory.hpp"

namespace gptraj {
namespace {

double fnorm(const Mat2& m) { return std::sqrt(m.fnorm2()); }

Mat2 dissipator_rhs(const Mat2& rho, const ModelParams& p, double t) {
  const Cplx i(0.0, 1.0);
  const Mat2 H = hamiltonian(p, t);
  Mat2 out = -i * (H * rho - rho * H);
  for (const auto& [lab, L] : lindblad_ops(p, eigensystem(p, t))) {
    const Mat2 LdL = L.adjoint() * L;
    out = out + L * rho * L.adjoint() +
          (-0.5) * (LdL * rho + rho * LdL);
  }
  return out;
}

TEST_CASE("generator matches the explicit dissipator sum") {
  const ModelParams p = ModelParams::standard(5e-3, 1e-3, 0.34 * kPi, 1e-4);
  const Mat2 rho =
      projector((PureState{Cplx(0.8, 0.1), Cplx(0.3, -0.5)}).normalized());
  for (double t : {0.0, 41.0, 0.6 * p.period()}) {
    CHECK(fnorm(lindblad_rhs(rho, p, t) - dissipator_rhs(rho, p, t)) < 1e-13);
  }
}

TEST_CASE("detector displacement leaves the averaged generator invariant") {
  ModelParams p = ModelParams::standard(5e-3, 1e-3, 0.34 * kPi, 1e-4);
  ModelParams q = p;
  q.lambda_disp = 2.5e-5;
  const Mat2 rho =
      projector((PureState{Cplx(0.2, 0.6), Cplx(0.7, -0.1)}).normalized());
  const double t = 0.29 * p.period();

  // identity-shifted channels with the matching Hamiltonian, summed by hand
  const ChannelSet cs = displaced_ops(q, t);
  const Cplx i(0.0, 1.0);
  Mat2 manual = -i * (cs.H * rho - rho * cs.H);
  for (const auto& [lab, L] : cs.jumps) {
    const Mat2 LdL = L.adjoint() * L;
    manual = manual + L * rho * L.adjoint() + (-0.5) * (LdL * rho + rho * LdL);
  }
  CHECK(fnorm(manual - lindblad_rhs(rho, p, t)) < 1e-12);
  CHECK(fnorm(lindblad_rhs(rho, q, t) - lindblad_rhs(rho, p, t)) < 1e-13);
}

TEST_CASE("integration preserves trace, hermiticity, and positivity") {
  const ModelParams p = ModelParams::standard(5e-3, 1e-3, 0.34 * kPi, 1e-4);
  const auto samples =
      integrate(projector(eigensystem(p, 0.0).state_plus), p, p.period(), 512);
  REQUIRE(samples.size() > 10);
  for (const auto& rho : samples) {
    CHECK(std::abs(rho.trace() - 1.0) < 1e-8);
    CHECK(fnorm(rho - rho.adjoint()) < 1e-12);
    const double tr = std::real(rho.trace());
    const double det = std::real(rho.m00 * rho.m11 - rho.m01 * rho.m10);
    const double disc = std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
    CHECK(0.5 * tr - disc > -1e-10);  // smaller eigenvalue
  }
}

TEST_CASE("closed system: integration stays pure and tracks the state") {
  const ModelParams p = ModelParams::standard(1e-3, 0.0, 0.34 * kPi);
  const auto rho = integrate(projector(eigensystem(p, 0.0).state_plus), p,
                             p.period(), 1 << 20);
  const Mat2 rT = rho.back();
  CHECK(std::real((rT * rT).trace()) == doctest::Approx(1.0).epsilon(1e-8));
  const auto nj = run_no_jump(p, p.period());
  // first-order engine vs fourth-order integrator: O(dt) ray deviation
  CHECK(trace_distance(rT, projector(nj.record.final_state)) < 1e-4);
}

TEST_CASE("step halving: fourth-order error decay") {
  ModelParams p = ModelParams::standard(5e-3, 1e-3, 0.34 * kPi);
  const Mat2 rho0 = projector(eigensystem(p, 0.0).state_plus);
  ModelParams p2 = p, p4 = p, p8 = p;
  p2.dt *= 0.5;
  p4.dt *= 0.25;
  p8.dt *= 0.125;
  const Mat2 a = integrate(rho0, p, p.period(), 1 << 20).back();
  const Mat2 b = integrate(rho0, p2, p.period(), 1 << 20).back();
  const Mat2 c = integrate(rho0, p4, p.period(), 1 << 20).back();
  const Mat2 ref = integrate(rho0, p8, p.period(), 1 << 20).back();
  const double e1 = trace_distance(a, ref);
  const double e2 = trace_distance(b, ref);
  const double e4 = trace_distance(c, ref);
  CHECK(e1 / e2 > 12.0);
  CHECK(e1 / e2 < 20.0);
  CHECK(e2 / e4 > 10.0);  // reference contamination loosens the last ratio
}

TEST_CASE("divergence guard fires on an unstable step size") {
  ModelParams p = ModelParams::standard(0.5, 1e-3, 0.34 * kPi);
  p.dt = 3.0;  // far outside the integrator's stability region
  const Mat2 rho0 = projector(eigensystem(p, 0.0).state_plus);
  CHECK_THROWS_AS(integrate(rho0, p, p.period(), 1), IntegrationDiverged);
}

TEST_CASE("trace distance: metric basics and a known value") {
  const Mat2 a = projector({Cplx(1.0, 0.0), Cplx(0.0, 0.0)});
  const Mat2 b = projector({Cplx(0.0, 0.0), Cplx(1.0, 0.0)});
  CHECK(trace_distance(a, a) == doctest::Approx(0.0));
  CHECK(trace_distance(a, b) == doctest::Approx(1.0));  // orthogonal pure states
  const Mat2 m = 0.5 * (a + b);
  CHECK(trace_distance(a, m) == doctest::Approx(0.5));
  CHECK(trace_distance(a, m) == doctest::Approx(trace_distance(m, a)));
}

TEST_CASE("ensemble average converges to the integrated state") {
  ModelParams p = ModelParams::standard(5e-3, 1e-3, 0.34 * kPi);
  p.n_traj = 1000;
  p.seed = 21;
  const double T = p.period();
  const auto ens = run_gp_ensemble(p, T, /*workers=*/2, {T});
  REQUIRE(ens.mean_state.size() == 1);
  const Mat2 rhoT =
      integrate(projector(eigensystem(p, 0.0).state_plus), p, T, 1 << 20).back();
  CHECK(trace_distance(ens.mean_state[0], rhoT) < 3.0 / std::sqrt(1000.0));
}

}  // namespace
}  // namespace gptraj
