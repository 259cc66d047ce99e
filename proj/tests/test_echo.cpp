#include <cmath>

#include "doctest.h"
#include "gptraj/echo.hpp"
#include "gptraj/model.hpp"
#include "gptraj/rng.hpp"

namespace gptraj {
namespace {

TEST_CASE("branch inversion: anchors, monotonicity, round trip") {
  CHECK(varphi_from_persistence(1.0) == doctest::Approx(1.5 * kPi));
  CHECK(varphi_from_persistence(0.5) == doctest::Approx(1.375 * kPi));
  CHECK(varphi_from_persistence(0.0) == doctest::Approx(1.25 * kPi));
  double prev = varphi_from_persistence(0.0);
  for (int k = 1; k <= 20; ++k) {
    const double v = varphi_from_persistence(k / 20.0);
    CHECK(v > prev);  // increasing in persistence
    prev = v;
  }
  for (double P : {0.05, 0.3, 0.77, 0.99}) {
    const double v = varphi_from_persistence(P);
    CHECK(v >= 1.25 * kPi);
    CHECK(v <= 1.5 * kPi);
    CHECK(std::pow(std::cos(2.0 * v), 2) == doctest::Approx(P).epsilon(1e-12));
  }
}

TEST_CASE("polar field, closed system: perfect echo") {
  // with the field (almost) along z there is no cone to traverse, so the
  // exchange-and-reverse protocol refocuses the state exactly
  const ModelParams p = ModelParams::standard(1e-3, 0.0, 0.01 * kPi);
  const EchoOutcome e = run_echo_no_jump(p);
  CHECK(e.persistence == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(e.varphi == doctest::Approx(1.5 * kPi).epsilon(1e-3));
  CHECK(e.record.events.empty());
}

TEST_CASE("fast drive, weak decay: echo phase near the cone phase") {
  const ModelParams p = ModelParams::standard(5e-2, 1e-3, 0.34 * kPi);
  const EchoOutcome e = run_echo_no_jump(p);
  // branch image of the adiabatic cycle phase -pi (1 - cos th)
  const double folded = (2.0 - (1.0 - std::cos(0.34 * kPi))) * kPi;
  CHECK(std::fabs(e.varphi - folded) < 0.05);
  CHECK(e.persistence > 0.9);
}

TEST_CASE("forced mid-protocol decay randomizes the persistence") {
  const ModelParams p = ModelParams::standard(5e-3, 1e-3, 0.34 * kPi);
  const EchoOutcome e =
      run_echo_forced(p, JumpLabel::minus, 0.5 * p.period());
  REQUIRE(e.record.events.size() == 1);
  CHECK(e.record.events[0].label == JumpLabel::minus);
  CHECK(e.persistence > 0.0);
  CHECK(e.persistence < 1.0);
  CHECK(e.varphi >= 1.25 * kPi);
  CHECK(e.varphi <= 1.5 * kPi);
}

TEST_CASE("a first-segment decay pins the echo phase to the branch center") {
  // the decay projects onto the lower eigenstate: both protocol halves then
  // evolve an eigenstate, the exchange erases the relative phase, and the
  // persistence of the equal superposition settles at one half
  const ModelParams p = ModelParams::standard(5e-4, 1e-3, 0.34 * kPi);
  const EchoOutcome e =
      run_echo_forced(p, JumpLabel::minus, 0.25 * p.period());
  CHECK(std::fabs(e.varphi - 1.375 * kPi) < 0.05);
}

TEST_CASE("stochastic echo: reproducible, bounded outputs") {
  ModelParams p = ModelParams::standard(5e-3, 1e-3, 0.34 * kPi, 1e-4);
  Rng r1(31, 4), r2(31, 4);
  const EchoOutcome a = run_echo(p, r1);
  const EchoOutcome b = run_echo(p, r2);
  CHECK(a.persistence == b.persistence);  // bitwise
  CHECK(a.varphi == b.varphi);
  CHECK(a.record.events.size() == b.record.events.size());
  CHECK(a.persistence >= 0.0);
  CHECK(a.persistence <= 1.0);
  CHECK(a.varphi >= 1.25 * kPi);
  CHECK(a.varphi <= 1.5 * kPi);
}

}  // namespace
}  // namespace gptraj
