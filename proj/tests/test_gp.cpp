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

std::vector<PureState> sample_path(int n) {
  // deterministic closed-ish path on the sphere
  std::vector<PureState> path;
  for (int k = 0; k <= n; ++k) {
    const double th = 0.4 * kPi * (0.5 - 0.5 * std::cos(kTwoPi * k / n));
    const double ph = kTwoPi * k / n;
    path.push_back({Cplx(std::cos(0.5 * th), 0.0),
                    std::polar(std::sin(0.5 * th), ph)});
  }
  return path;
}

TEST_CASE("gp_pancharatnam is invariant under per-state gauge phases") {
  const auto path = sample_path(80);
  const Phase base = gp_pancharatnam(path);
  Rng rng(99, 0);
  auto gauged = path;
  for (auto& s : gauged) s = std::polar(1.0, kTwoPi * rng.uniform() - kPi) * s;
  CHECK(std::fabs(wrap_phase(gp_pancharatnam(gauged) - base)) < 1e-9);
}

TEST_CASE("online accumulator reproduces the full-history oracle") {
  ModelParams p = ModelParams::standard(5e-3, 2e-3, 0.34 * kPi, 2e-4);
  p.dt = kTwoPi * 4e-3;  // keep history small
  Rng rng(5, 17);
  RunOptions opts;
  opts.capture_history = true;
  const auto rec =
      run_trajectory(p, p.period(), eigensystem(p, 0.0).state_plus, rng, opts);
  REQUIRE(!rec.singular_overlap);
  REQUIRE(!rec.history.empty());
  CHECK(std::fabs(wrap_phase(rec.gp - gp_pancharatnam(rec.history))) < 1e-9);
}

TEST_CASE("accumulator skips phase-undefined contributions") {
  GpAccumulator acc;
  CHECK(acc.add_smooth(Cplx(0.5, 0.5)));
  const double before = acc.pancharatnam_sum;
  CHECK(!acc.add_smooth(Cplx(1e-15, 0.0)));
  CHECK(acc.pancharatnam_sum == before);
  CHECK(!acc.add_jump(Cplx(0.0, 0.0)));
  CHECK(acc.jump_phase_sum == 0.0);
}

TEST_CASE("gp_trajectory throws when the path returns orthogonal") {
  GpAccumulator acc;
  acc.initial_state = {Cplx(1.0, 0.0), Cplx(0.0, 0.0)};
  CHECK_THROWS_AS(gp_trajectory(acc, PureState{Cplx(0.0, 0.0), Cplx(1.0, 0.0)}),
                  SingularOverlap);
}

TEST_CASE("frozen no-jump cycle phase at the fast operating point") {
  const ModelParams p = ModelParams::standard(5e-3, 1e-3, 0.34 * kPi);
  const Phase g = gp_no_jump(p);
  CHECK(g == doctest::Approx(-1.6494013211768959).epsilon(1e-6));
  // default duration is one period
  CHECK(gp_no_jump(p, p.period()) == doctest::Approx(g).epsilon(1e-12));
  // independent fourth-order evaluation of the same ray
  CHECK(std::fabs(wrap_phase(drift_cycle_gp(p).gp - g)) < 1e-5);
}

TEST_CASE("no-jump phase ignores dephasing-channel rates") {
  const ModelParams a = ModelParams::standard(5e-3, 1e-3, 0.34 * kPi, 0.0);
  ModelParams b = ModelParams::standard(5e-3, 1e-3, 0.34 * kPi, 1e-4);
  b.gamma_d = 0.9e-3;  // different eigenbasis-dephasing rate too
  CHECK(gp_no_jump(a) == doctest::Approx(gp_no_jump(b)).epsilon(1e-10));
}

TEST_CASE("mixed-state phase: pure paths reduce to the discrete pure form") {
  ModelParams p = ModelParams::standard(5e-3, 1e-3, 0.34 * kPi);
  p.dt = kTwoPi * 4e-3;
  RunOptions opts;
  opts.capture_history = true;
  const auto run = run_no_jump(p, p.period(), eigensystem(p, 0.0).state_plus, opts);
  REQUIRE(run.record.history.size() > 10);
  std::vector<Mat2> rho_path;
  for (const auto& s : run.record.history) rho_path.push_back(projector(s));
  const Phase mixed = gp_mixed(rho_path, p.dt);
  const Phase pure = gp_pancharatnam(run.record.history);
  CHECK(std::fabs(wrap_phase(mixed - pure)) < 1e-8);
}

TEST_CASE("mixed-state phase rejects degenerate spectra") {
  const std::vector<Mat2> flat(8, 0.5 * Mat2::identity());
  CHECK_THROWS_AS(gp_mixed(flat, 0.1), DegenerateSpectrum);
}

TEST_CASE("mean_phase is the resultant argument") {
  CHECK(mean_phase({0.3, 0.3, 0.3}) == doctest::Approx(0.3));
  // samples straddling the branch cut average to pi, not zero
  CHECK(std::fabs(wrap_phase(mean_phase({kPi - 0.1, -kPi + 0.1}) - kPi)) < 1e-12);
  CHECK_THROWS_AS(mean_phase({}), EmptyDistribution);
}

}  // namespace
}  // namespace gptraj
