#include "gptraj/gp.hpp"

#include <string>

#include "gptraj/model.hpp"
#include "gptraj/trajectory.hpp"

namespace gptraj {

Phase gp_trajectory(const GpAccumulator& acc, const PureState& final_state) {
  const double total = arg_overlap(acc.initial_state, final_state);
  return wrap_phase(total + acc.pancharatnam_sum + acc.jump_phase_sum);
}

Phase gp_pancharatnam(const std::vector<PureState>& states) {
  if (states.size() < 2) throw Error("gp_pancharatnam: need at least 2 states");
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < states.size(); ++k) {
    const Cplx ov = dot(states[k], states[k + 1]);
    const double scale = states[k].norm() * states[k + 1].norm();
    if (std::abs(ov) <= kEpsOverlap * scale) {
      throw SingularOverlap("gp_pancharatnam: singular overlap between states " +
                            std::to_string(k) + " and " + std::to_string(k + 1));
    }
    sum += std::arg(ov);
  }
  const double total = arg_overlap(states.front(), states.back());
  return wrap_phase(total - sum);
}

Phase gp_no_jump(const ModelParams& p, double duration) {
  if (duration < 0.0) duration = p.period();
  const NoJumpRun run = run_no_jump(p, duration);
  if (run.record.singular_overlap) {
    throw SingularOverlap("gp_no_jump: path returns orthogonal to start");
  }
  return run.record.gp;
}

namespace {

struct EigDecomp {
  double lam_hi, lam_lo;
  PureState v_hi, v_lo;
};

// Closed-form eigendecomposition of a Hermitian 2x2 matrix.
EigDecomp eig_hermitian(const Mat2& r) {
  const double a = std::real(r.m00), b = std::real(r.m11);
  const Cplx c = r.m01;
  const double half_gap = std::sqrt(0.25 * (a - b) * (a - b) + std::norm(c));
  const double mid = 0.5 * (a + b);
  EigDecomp e;
  e.lam_hi = mid + half_gap;
  e.lam_lo = mid - half_gap;
  if (std::abs(c) < 1e-300) {  // already diagonal
    if (a >= b) {
      e.v_hi = {1.0, 0.0};
      e.v_lo = {0.0, 1.0};
    } else {
      e.v_hi = {0.0, 1.0};
      e.v_lo = {1.0, 0.0};
    }
    return e;
  }
  e.v_hi = PureState{c, Cplx(e.lam_hi - a, 0.0)}.normalized();
  e.v_lo = PureState{c, Cplx(e.lam_lo - a, 0.0)}.normalized();
  return e;
}

}  // namespace

Phase gp_mixed(const std::vector<Mat2>& rho_path, double dt) {
  (void)dt;  // pure phase product: sampling interval drops out
  if (rho_path.size() < 2) throw Error("gp_mixed: need at least 2 samples");

  EigDecomp prev = eig_hermitian(rho_path.front());
  if (prev.lam_hi - prev.lam_lo < 1e-8) {
    throw DegenerateSpectrum("gp_mixed: degenerate initial density matrix");
  }
  const EigDecomp first = prev;
  // Running negated connection phases, one per branch.
  double conn_hi = 0.0, conn_lo = 0.0;
  PureState last_hi = prev.v_hi, last_lo = prev.v_lo;

  for (std::size_t k = 1; k < rho_path.size(); ++k) {
    EigDecomp cur = eig_hermitian(rho_path[k]);
    if (cur.lam_hi - cur.lam_lo < 1e-8) {
      throw DegenerateSpectrum("gp_mixed: spectral gap collapsed at sample " +
                               std::to_string(k));
    }
    // Branch continuity: swap if the crossed pairing overlaps better.
    const double keep = std::abs(dot(last_hi, cur.v_hi)) +
                        std::abs(dot(last_lo, cur.v_lo));
    const double swap = std::abs(dot(last_hi, cur.v_lo)) +
                        std::abs(dot(last_lo, cur.v_hi));
    if (swap > keep) {
      std::swap(cur.v_hi, cur.v_lo);
      std::swap(cur.lam_hi, cur.lam_lo);
    }
    conn_hi -= std::arg(dot(last_hi, cur.v_hi));
    conn_lo -= std::arg(dot(last_lo, cur.v_lo));
    last_hi = cur.v_hi;
    last_lo = cur.v_lo;
    prev = cur;
  }

  // Clamp round-off-negative eigenvalues of nearly pure states to zero.
  auto w = [](double a, double b) {
    return std::sqrt(std::max(0.0, a) * std::max(0.0, b));
  };
  const Cplx term_hi = w(first.lam_hi, prev.lam_hi) * dot(first.v_hi, last_hi) *
                       std::exp(Cplx(0.0, conn_hi));
  const Cplx term_lo = w(first.lam_lo, prev.lam_lo) * dot(first.v_lo, last_lo) *
                       std::exp(Cplx(0.0, conn_lo));
  const Cplx total = term_hi + term_lo;
  if (std::abs(total) <= kEpsOverlap) {
    throw SingularOverlap("gp_mixed: vanishing interferometric sum");
  }
  return std::arg(total);
}

Phase mean_phase(const std::vector<double>& phases) {
  if (phases.empty()) throw EmptyDistribution("mean_phase: no samples");
  Cplx r{0.0, 0.0};
  for (double ph : phases) r += std::exp(Cplx(0.0, ph));
  if (std::abs(r) <= kEpsOverlap) {
    throw SingularOverlap("mean_phase: vanishing resultant");
  }
  return std::arg(r);
}

}  // namespace gptraj
