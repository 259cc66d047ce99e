#include <cmath>
#include <complex>

#include "doctest.h"
#include "gptraj/model.hpp"
#include "gptraj/types.hpp"

#if GPTRAJ_HAVE_EIGEN
#include <Eigen/Dense>
#endif

namespace gptraj {
namespace {

double fnorm(const Mat2& m) { return std::sqrt(m.fnorm2()); }

ModelParams canonical() {
  return ModelParams::standard(5e-3, 1e-3, 0.34 * kPi, 1e-4);
}

TEST_CASE("hamiltonian: Hermitian, traceless, unit Bloch vector, periodic") {
  const ModelParams p = canonical();
  for (double t : {0.0, 13.7, 400.0, 0.49 * p.period()}) {
    const Mat2 H = hamiltonian(p, t);
    CHECK(fnorm(H - H.adjoint()) < 1e-14);
    CHECK(std::abs(H.trace()) < 1e-14);
    // H^2 = (omega/2)^2 for a unit field direction
    CHECK(fnorm(H * H - (0.25 * p.omega * p.omega) * Mat2::identity()) < 1e-14);
    CHECK(fnorm(hamiltonian(p, t + p.period()) - H) < 1e-12);
  }
}

TEST_CASE("eigensystem: exact eigenpairs with orthonormal states") {
  const ModelParams p = canonical();
  for (double t : {0.0, 57.3, 0.31 * p.period()}) {
    const EigenPair e = eigensystem(p, t);
    const Mat2 H = hamiltonian(p, t);
    CHECK(e.energy_plus == doctest::Approx(0.5 * p.omega).epsilon(1e-13));
    CHECK(e.energy_minus == doctest::Approx(-0.5 * p.omega).epsilon(1e-13));
    const PureState rp = H.apply(e.state_plus) - e.energy_plus * e.state_plus;
    const PureState rm = H.apply(e.state_minus) - e.energy_minus * e.state_minus;
    CHECK(rp.norm() < 1e-13);
    CHECK(rm.norm() < 1e-13);
    CHECK(e.state_plus.norm() == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(std::abs(dot(e.state_plus, e.state_minus)) < 1e-13);
  }
}

#if GPTRAJ_HAVE_EIGEN
TEST_CASE("eigensystem matches Eigen's self-adjoint solver up to phase") {
  const ModelParams p = canonical();
  for (double t : {3.0, 120.0, 0.77 * p.period()}) {
    const Mat2 H = hamiltonian(p, t);
    Eigen::Matrix2cd eh;
    eh << H.m00, H.m01, H.m10, H.m11;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(eh);
    const EigenPair e = eigensystem(p, t);
    CHECK(es.eigenvalues()(1) == doctest::Approx(e.energy_plus).epsilon(1e-12));
    CHECK(es.eigenvalues()(0) == doctest::Approx(e.energy_minus).epsilon(1e-12));
    const Eigen::Vector2cd vp = es.eigenvectors().col(1);
    const Cplx ov = std::conj(vp(0)) * e.state_plus.a0 + std::conj(vp(1)) * e.state_plus.a1;
    CHECK(std::abs(ov) == doctest::Approx(1.0).epsilon(1e-12));
  }
}
#endif

TEST_CASE("gauge_ref keeps the eigenbasis continuous along the drive") {
  const ModelParams p = canonical();
  EigenPair ref = eigensystem(p, 0.0);
  const int n = 400;
  for (int k = 1; k <= n; ++k) {
    const double t = p.period() * k / n;
    const EigenPair e = eigensystem(p, t, &ref);
    CHECK(std::real(dot(ref.state_plus, e.state_plus)) > 0.99);
    CHECK(std::real(dot(ref.state_minus, e.state_minus)) > 0.99);
    ref = e;
  }
  // one full cycle returns the gauge-tracked basis to the start
  CHECK(std::abs(dot(eigensystem(p, 0.0).state_plus, ref.state_plus)) ==
        doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("transition weight and longitudinal moment match the eigenbasis") {
  const ModelParams p = canonical();
  for (double t : {0.0, 33.0, 0.18 * p.period(), 0.62 * p.period()}) {
    const EigenPair e = eigensystem(p, t);
    const Mat2 sx = sigma_x();
    const Cplx cross = dot(e.state_minus, sx.apply(e.state_plus));
    const Cplx diag = dot(e.state_plus, sx.apply(e.state_plus));
    CHECK(std::norm(cross) == doctest::Approx(f_factor(p, t)).epsilon(1e-12));
    CHECK(std::real(diag) == doctest::Approx(m_factor(p, t)).epsilon(1e-12));
    const double az = azimuth(p, t);
    CHECK(f_factor_at_azimuth(p, az) == doctest::Approx(f_factor(p, t)));
    CHECK(m_factor_at_azimuth(p, az) == doctest::Approx(m_factor(p, t)));
  }
}

TEST_CASE("jump channels: rates, actions, and zero-rate omission") {
  ModelParams p = canonical();
  const double t = 0.23 * p.period();
  const EigenPair e = eigensystem(p, t);
  const auto ops = lindblad_ops(p, e);
  REQUIRE(ops.size() == 3);  // minus, dephase, z (plus has zero rate)

  const Mat2* Lm = nullptr;
  const Mat2* Ld = nullptr;
  const Mat2* Lz = nullptr;
  for (const auto& [lab, L] : ops) {
    if (lab == JumpLabel::minus) Lm = &L;
    if (lab == JumpLabel::dephase) Ld = &L;
    if (lab == JumpLabel::z) Lz = &L;
  }
  REQUIRE(Lm);
  REQUIRE(Ld);
  REQUIRE(Lz);

  // decay annihilates the lower state and carries rate g- f(t)
  CHECK(Lm->apply(e.state_minus).norm() < 1e-13);
  CHECK(Lm->apply(e.state_plus).norm2() ==
        doctest::Approx(p.gamma_minus * f_factor(p, t)).epsilon(1e-12));
  // the decay image is the lower eigenstate
  CHECK(std::abs(dot(e.state_minus, Lm->apply(e.state_plus).normalized())) ==
        doctest::Approx(1.0).epsilon(1e-12));

  // eigenbasis dephasing is proportional to H with the halved-rate factor
  const Mat2 want = std::sqrt(0.5 * p.gamma_d) * m_factor(p, t) *
                    ((2.0 / p.omega) * hamiltonian(p, t));
  CHECK(fnorm(*Ld - want) < 1e-13);

  // bare dephasing
  CHECK(fnorm(*Lz - std::sqrt(0.5 * p.gamma_z) * sigma_z()) < 1e-14);

  // omission: drop gamma_z and gamma_d
  p.gamma_z = 0.0;
  p.gamma_d = 0.0;
  CHECK(lindblad_ops(p, e).size() == 1);
}

TEST_CASE("Kraus family: probability defect shrinks at second order in dt") {
  const ModelParams p = canonical();
  const double t = 0.4 * p.period();
  const PureState psi =
      (0.6 * eigensystem(p, t).state_plus + 0.8 * eigensystem(p, t).state_minus)
          .normalized();
  auto defect = [&](double dt) {
    ModelParams q = p;
    q.dt = dt;
    const KrausSet ks = kraus_step_ops(q, t);
    Mat2 sum = ks.K_o.adjoint() * ks.K_o;
    for (const auto& [lab, K] : ks.jumps) sum = sum + K.adjoint() * K;
    const PureState v = (sum - Mat2::identity()).apply(psi);
    return v.norm();
  };
  const double d1 = defect(p.dt), d2 = defect(0.5 * p.dt), d4 = defect(0.25 * p.dt);
  CHECK(d1 / d2 == doctest::Approx(4.0).epsilon(0.15));
  CHECK(d2 / d4 == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("drift generator equals the effective Hamiltonian up to identity") {
  const ModelParams p = canonical();
  for (double t : {11.0, 0.35 * p.period()}) {
    const Mat2 Hd = drift_hamiltonian(p, t);
    CHECK(std::abs(Hd.trace()) < 1e-13);
    Mat2 eff = hamiltonian(p, t);
    for (const auto& [lab, L] : lindblad_ops(p, eigensystem(p, t)))
      eff = eff + Cplx(0.0, -0.5) * (L.adjoint() * L);
    const Mat2 diff = Hd - eff;
    CHECK(std::abs(diff.m01) < 1e-13);
    CHECK(std::abs(diff.m10) < 1e-13);
    CHECK(std::abs(diff.m00 - diff.m11) < 1e-13);
  }
}

TEST_CASE("displacement transform: identity shift of channels, matching drift") {
  ModelParams p = canonical();
  const double t = 0.11 * p.period();
  const ChannelSet base = displaced_ops(p, t);

  ModelParams q = p;
  q.lambda_disp = 2.5e-5;
  const ChannelSet disp = displaced_ops(q, t);
  REQUIRE(disp.jumps.size() == base.jumps.size());

  const double root = std::sqrt(q.lambda_disp);
  Mat2 anti = Mat2::zero();
  for (std::size_t k = 0; k < base.jumps.size(); ++k) {
    CHECK(disp.jumps[k].first == base.jumps[k].first);
    const Mat2 shift = disp.jumps[k].second - base.jumps[k].second;
    CHECK(fnorm(shift - root * Mat2::identity()) < 1e-13);
    anti = anti + (base.jumps[k].second - base.jumps[k].second.adjoint());
  }
  const Mat2 wantH = base.H + Cplx(0.0, -0.5) * (root * anti);
  CHECK(fnorm(disp.H - wantH) < 1e-13);

  // lambda = 0 reduces to the bare channel set
  CHECK(fnorm(base.H - hamiltonian(p, t)) < 1e-13);
}

}  // namespace
}  // namespace gptraj
