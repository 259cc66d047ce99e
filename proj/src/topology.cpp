#include "gptraj/topology.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "gptraj/analytic.hpp"
#include "gptraj/model.hpp"

namespace gptraj {

namespace {

constexpr double kMaxStepPhase = 0.5 * kPi;  // continuity threshold
constexpr double kMinThetaGap = 1e-9;        // refinement floor
constexpr double kSurvivalStep = 2.5;        // step cap in sqrt(survival) units
constexpr double kSurvivalFloor = 1e-16;     // return amplitude effectively 0
constexpr double kVerifyBand = 1e-3;         // certify intervals this deep
constexpr std::size_t kMaxEvals = 40000;

// The cycle phase splits as gp = arg(overlap) - path_phase.  The path-phase
// part is an exact real number per point (no mod-2pi ambiguity), yet varies
// steeply in theta: near the poles the conditional path's branch-transfer
// time diverges logarithmically, so d(path_phase)/d(theta) ~ 1/theta and the
// lift accumulates hundreds of radians no finite sampling can certify.  Only
// arg(overlap) needs continuity tracking, and it is tame everywhere except
// close approaches to zeros of the return amplitude, which the survival-
// scaled step rule resolves.
struct PhiPoint {
  double arg_ov = 0.0;
  double path_phase = 0.0;
  double survival = 1.0;
};

// Cached evaluator over theta, backed by the fourth-order drift-cycle
// propagation: near-singular regions leave exponentially small return
// amplitudes whose phase the first-order jump engine cannot resolve.
class PhiEvaluator {
 public:
  explicit PhiEvaluator(const ModelParams& base) : base_(base) {}

  const PhiPoint& operator()(double theta) {
    auto it = cache_.find(theta);
    if (it == cache_.end()) {
      if (cache_.size() >= kMaxEvals) {
        throw Error("theta_sweep: evaluation budget exhausted");
      }
      ModelParams q = base_;
      q.theta = theta;
      const DriftCycleGp d = drift_cycle_gp(q);
      if (d.survival < kSurvivalFloor) {
        throw SweepThroughSingularity(
            "theta sweep: cycle return amplitude vanishes near theta = " +
            std::to_string(theta));
      }
      it = cache_
               .emplace(theta, PhiPoint{std::arg(d.overlap), d.path_phase,
                                        d.survival})
               .first;
    }
    return it->second;
  }

 private:
  ModelParams base_;
  std::map<double, PhiPoint> cache_;
};

using Evals = std::vector<PhiEvaluator*>;

// An interval is resolved when, for every evaluator, the wrapped increment
// of arg(overlap) stays below the continuity threshold and the step is small
// on the local survival scale.  The overlap's phase slope grows like
// 1/sqrt(survival) near a zero of the return amplitude, so wrapped
// increments alone alias there: a bisection cascade stops early whenever a
// true swing lands within the threshold of a full turn, silently dropping
// 2*pi from the lift.
bool interval_ok(const Evals& evals, double a, double b) {
  for (PhiEvaluator* e : evals) {
    const PhiPoint pa = (*e)(a);
    const PhiPoint pb = (*e)(b);
    if (std::abs(wrap_phase(pb.arg_ov - pa.arg_ov)) >= kMaxStepPhase) {
      return false;
    }
    const double s = std::min(pa.survival, pb.survival);
    if (b - a > kSurvivalStep * std::sqrt(s)) return false;
  }
  return true;
}

// Certification sweep over low-survival bands: re-derive each interval's
// wrapped increment from its two halves; any mismatch is a hidden full turn
// and the midpoint joins the grid.  Midpoints that agree stay cached, so
// repeat passes cost nothing.
bool certify_low_survival(std::vector<double>& grid, const Evals& evals) {
  std::vector<double> inserted;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double a = grid[i], b = grid[i + 1];
    if (b - a < 2.0 * kMinThetaGap) continue;
    bool band = false;
    for (PhiEvaluator* e : evals) {
      band = band || std::min((*e)(a).survival, (*e)(b).survival) < kVerifyBand;
    }
    if (!band) continue;
    const double m = 0.5 * (a + b);
    bool keep = !interval_ok(evals, a, m) || !interval_ok(evals, m, b);
    for (PhiEvaluator* e : evals) {
      const double pa = (*e)(a).arg_ov, pm = (*e)(m).arg_ov,
                   pb = (*e)(b).arg_ov;
      const double direct = wrap_phase(pb - pa);
      const double halves = wrap_phase(pm - pa) + wrap_phase(pb - pm);
      if (std::abs(halves - direct) > kPi) keep = true;
    }
    if (keep) inserted.push_back(m);
  }
  if (inserted.empty()) return false;
  grid.insert(grid.end(), inserted.begin(), inserted.end());
  std::sort(grid.begin(), grid.end());
  return true;
}

// Refine `grid` until every interval is resolved for all evaluators, then
// certify; inserted midpoints restart refinement.
std::vector<double> refine_grid(std::vector<double> grid, const Evals& evals) {
  for (;;) {
    bool changed = true;
    while (changed) {
      changed = false;
      std::vector<double> next;
      next.reserve(grid.size() * 2);
      for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        next.push_back(grid[i]);
        const double a = grid[i], b = grid[i + 1];
        if (!interval_ok(evals, a, b)) {
          if (b - a < kMinThetaGap) {
            throw SweepThroughSingularity(
                "theta sweep: discontinuity persists near theta = " +
                std::to_string(0.5 * (a + b)));
          }
          next.push_back(0.5 * (a + b));
          changed = true;
        }
      }
      next.push_back(grid.back());
      grid = std::move(next);
    }
    if (!certify_low_survival(grid, evals)) return grid;
  }
}

std::vector<double> initial_grid() {
  std::vector<double> g;
  const int n = 64;
  g.reserve(n + 1);
  for (int i = 0; i <= n; ++i) g.push_back(kPi * i / n);
  return g;
}

// Forward declaration (lift used by the continuity enforcement below).
std::vector<double> unwrap_along(const std::vector<double>& grid,
                                 PhiEvaluator& eval);

// Refine + certify, then additionally bisect any interval over which the
// lifted phase of some evaluator moves by pi or more (the path-phase part is
// exact but steep near the poles, so the lift can outrun the arg-increment
// rules); repeat to a fixed point.
std::vector<double> resolved_grid(std::vector<double> grid,
                                  const Evals& evals) {
  for (;;) {
    grid = refine_grid(std::move(grid), evals);
    std::vector<double> inserted;
    for (PhiEvaluator* e : evals) {
      const std::vector<double> lift = unwrap_along(grid, *e);
      for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        if (std::abs(lift[i + 1] - lift[i]) >= kPi) {
          if (grid[i + 1] - grid[i] < kMinThetaGap) {
            throw SweepThroughSingularity(
                "theta sweep: lift discontinuity persists near theta = " +
                std::to_string(0.5 * (grid[i] + grid[i + 1])));
          }
          inserted.push_back(0.5 * (grid[i] + grid[i + 1]));
        }
      }
    }
    if (inserted.empty()) return grid;
    grid.insert(grid.end(), inserted.begin(), inserted.end());
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  }
}

// Continuous lift of the cycle phase along the grid, anchored to 0 at the
// first point: unwrapped arg(overlap) minus the exact path-phase difference.
// Equals the wrapped cycle phase mod 2*pi at every grid point (at theta = 0
// both vanish mod 2*pi, fixing the anchor gauge).
std::vector<double> unwrap_along(const std::vector<double>& grid,
                                 PhiEvaluator& eval) {
  std::vector<double> out;
  out.reserve(grid.size());
  const PhiPoint& first = eval(grid.front());
  double acc = 0.0;
  out.push_back(0.0);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    acc += wrap_phase(eval(grid[i]).arg_ov - eval(grid[i - 1]).arg_ov);
    out.push_back(acc - (eval(grid[i]).path_phase - first.path_phase));
  }
  return out;
}

}  // namespace

ThetaSweep theta_sweep(const ModelParams& base) {
  base.validate();
  PhiEvaluator eval(base);
  const Evals evals{&eval};
  const std::vector<double> grid = resolved_grid(initial_grid(), evals);
  ThetaSweep sweep;
  sweep.thetas = grid;
  sweep.phases = unwrap_along(grid, eval);
  return sweep;
}

int winding_number(const ModelParams& base) {
  const ThetaSweep sweep = theta_sweep(base);
  const double turns =
      (sweep.phases.back() - sweep.phases.front()) / kTwoPi;
  const int n = static_cast<int>(std::lround(turns));
  if (std::abs(turns - n) >= 0.05) {
    throw Error("winding_number: non-integer total (" +
                std::to_string(turns) + " turns)");
  }
  return n;
}

ThetaSweep delta_theta(const ModelParams& p1, const ModelParams& p2) {
  p1.validate();
  p2.validate();
  PhiEvaluator e1(p1), e2(p2);
  const Evals evals{&e1, &e2};
  const std::vector<double> grid = resolved_grid(initial_grid(), evals);
  const std::vector<double> u1 = unwrap_along(grid, e1);
  const std::vector<double> u2 = unwrap_along(grid, e2);
  ThetaSweep sweep;
  sweep.thetas = grid;
  sweep.phases.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    sweep.phases.push_back(u1[i] - u2[i]);
  }
  return sweep;
}

namespace {

// |drift cycle overlap|^2 at given theta.
double cycle_survival(const ModelParams& base, double theta) {
  ModelParams q = base;
  q.theta = theta;
  const Cplx g = drift_cycle_overlap(q);
  return std::norm(g);
}

}  // namespace

std::vector<SectorCell> sector_map(const std::vector<double>& theta_grid,
                                   const std::vector<double>& omega_grid,
                                   const std::vector<double>& gamma_grid) {
  if (theta_grid.size() < 3) {
    throw ConfigError("sector_map: theta_grid needs at least 3 points");
  }
  std::vector<SectorCell> cells;
  cells.reserve(omega_grid.size() * gamma_grid.size());
  for (double W : omega_grid) {
    for (double G : gamma_grid) {
      ModelParams base;
      base.Omega = W;
      base.Gamma = G;
      base.gamma_minus = G;
      SectorCell cell;
      cell.Omega = W;
      cell.Gamma = G;

      // Coarse scan of the cycle-return survival over theta.
      double best_th = theta_grid.front();
      double best = std::numeric_limits<double>::infinity();
      for (double th : theta_grid) {
        const double s = cycle_survival(base, th);
        if (s < best) {
          best = s;
          best_th = th;
        }
      }
      // Local ternary-search refinement around the coarse minimum.
      double step = kPi / static_cast<double>(theta_grid.size() - 1);
      double lo = std::max(0.0, best_th - step);
      double hi = std::min(kPi, best_th + step);
      for (int it = 0; it < 48 && hi - lo > 1e-10; ++it) {
        const double m1 = lo + (hi - lo) / 3.0;
        const double m2 = hi - (hi - lo) / 3.0;
        if (cycle_survival(base, m1) < cycle_survival(base, m2)) {
          hi = m2;
        } else {
          lo = m1;
        }
      }
      cell.theta_c = 0.5 * (lo + hi);
      cell.min_survival = cycle_survival(base, cell.theta_c);
      cell.singular = cell.min_survival < 1e-8;
      if (!cell.singular) {
        cell.n = winding_number(base);
      }
      cells.push_back(cell);
    }
  }
  return cells;
}

}  // namespace gptraj
