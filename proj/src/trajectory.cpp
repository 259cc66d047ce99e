#include "gptraj/trajectory.hpp"

#include <algorithm>
#include <cmath>

namespace gptraj {

namespace {

constexpr double kMaxJumpProb = 1e-2;   // sum of per-step jump probabilities
constexpr double kMaxProbDefect = 1e-4; // |p_o + sum p_a - 1|
constexpr int kResyncStride = 512;      // exact azimuth refresh cadence

// Per-run constants of the stepping kernel.
struct StepCore {
  double omega, w2, st, ct, ch, sh;
  double rm, rp, rd2, rz2;  // minus, plus, dephase/2, z/2 rates
  double dt, sqdt;
  double lam, sql;          // displacement strength and its sqrt
  bool displace_z;
  double half_lam_n;        // (lambda/2) * number of displaced channels
  double inv_omega2;        // 2/omega

  explicit StepCore(const ModelParams& p)
      : omega(p.omega),
        w2(0.5 * p.omega),
        st(std::sin(p.theta)),
        ct(std::cos(p.theta)),
        ch(std::cos(0.5 * p.theta)),
        sh(std::sin(0.5 * p.theta)),
        rm(p.gamma_minus),
        rp(p.gamma_plus),
        rd2(0.5 * p.gamma_d),
        rz2(0.5 * p.gamma_z),
        dt(p.dt),
        sqdt(std::sqrt(p.dt)),
        lam(p.lambda_disp),
        sql(std::sqrt(p.lambda_disp)),
        displace_z(p.displace_all),
        inv_omega2(2.0 / p.omega) {
    int n = 0;
    if (rm > 0.0) ++n;
    if (rp > 0.0) ++n;
    if (rd2 > 0.0) ++n;
    if (rz2 > 0.0 && displace_z) ++n;
    half_lam_n = 0.5 * lam * static_cast<double>(n);
  }
};

// Scratch quantities shared between the smooth and jump branches of a step.
struct StepScratch {
  Cplx z;       // drive phasor e^{i az}
  Cplx Hp0, Hp1;  // H |psi>
  Cplx cp, cm;    // <+|psi>, <-|psi>
  double f, m, hE;
};

inline void fill_scratch(const StepCore& c, const PureState& psi, Cplx z,
                         StepScratch& s) {
  s.z = z;
  const double zr = z.real(), zi = z.imag();
  s.f = c.ct * c.ct + c.st * c.st * zi * zi;
  s.m = c.st * zr;
  const Cplx zc = std::conj(z);
  const Cplx hx = c.w2 * c.st;
  s.Hp0 = c.w2 * c.ct * psi.a0 + hx * zc * psi.a1;
  s.Hp1 = hx * z * psi.a0 - c.w2 * c.ct * psi.a1;
  const Cplx zca1 = zc * psi.a1;
  s.cp = c.ch * psi.a0 + c.sh * zca1;
  s.cm = c.sh * psi.a0 - c.ch * zca1;
  s.hE = std::real(std::conj(psi.a0) * s.Hp0 + std::conj(psi.a1) * s.Hp1);
}

// Jump (rate-level) operator applied to psi, by channel, plus the matching
// squared amplitude; direct (undisplaced) scheme quantities.
struct ChannelAmps {
  double p_m, p_p, p_d, p_z, sum;
};

inline ChannelAmps channel_probs_direct(const StepCore& c,
                                        const StepScratch& s) {
  ChannelAmps a;
  a.p_m = c.dt * c.rm * s.f * std::norm(s.cp);
  a.p_p = c.dt * c.rp * s.f * std::norm(s.cm);
  a.p_d = c.dt * c.rd2 * s.m * s.m;
  a.p_z = c.dt * c.rz2;
  a.sum = a.p_m + a.p_p + a.p_d + a.p_z;
  return a;
}

// m~ = <-|sigma_x|+> = ch^2 - z^2 sh^2 in the canonical gauge.
inline Cplx mtilde(const StepCore& c, const Cplx& z) {
  return Cplx(c.ch * c.ch, 0.0) - z * z * Cplx(c.sh * c.sh, 0.0);
}

inline PureState eigen_plus(const StepCore& c, const Cplx& z) {
  return {Cplx(c.ch, 0.0), c.sh * z};
}
inline PureState eigen_minus(const StepCore& c, const Cplx& z) {
  return {Cplx(c.sh, 0.0), -c.ch * z};
}

// L_a |psi> for the direct channels.
inline PureState channel_apply(const StepCore& c, const StepScratch& s,
                               const PureState& psi, JumpLabel label) {
  switch (label) {
    case JumpLabel::minus: {
      const Cplx amp = std::sqrt(c.rm) * mtilde(c, s.z) * s.cp;
      return amp * eigen_minus(c, s.z);
    }
    case JumpLabel::plus: {
      const Cplx amp = std::sqrt(c.rp) * std::conj(mtilde(c, s.z)) * s.cm;
      return amp * eigen_plus(c, s.z);
    }
    case JumpLabel::dephase: {
      const double pref = std::sqrt(c.rd2) * s.m * c.inv_omega2;
      return {pref * s.Hp0, pref * s.Hp1};
    }
    case JumpLabel::z: {
      const double pref = std::sqrt(c.rz2);
      return {pref * psi.a0, -pref * psi.a1};
    }
  }
  return {};
}

struct JumpOutcome {
  PureState post;   // normalized post-jump state
  Cplx overlap;     // <psi|K_a psi>
  double rel;       // |overlap| / (|psi| |K_a psi|)
};

// Resolve a jump of the given channel, direct or displaced.
inline JumpOutcome resolve_jump(const StepCore& c, const StepScratch& s,
                                const PureState& psi, JumpLabel label,
                                bool displaced) {
  PureState v = channel_apply(c, s, psi, label);
  if (displaced && (c.displace_z || label != JumpLabel::z)) {
    v = v + c.sql * psi;
  }
  JumpOutcome out;
  const double vn = v.norm();
  out.overlap = c.sqdt * dot(psi, v);
  out.rel = (vn > 0.0) ? std::abs(dot(psi, v)) / vn : 0.0;
  out.post = (vn > 0.0) ? (1.0 / vn) * v : psi;
  return out;
}

// One smooth (no-jump) update; returns p_o and writes the new state and the
// smooth overlap <psi|K_o psi>.
inline double smooth_update(const StepCore& c, const StepScratch& s,
                            const PureState& psi, bool displaced,
                            PureState& out, Cplx& overlap) {
  const double beta =
      0.5 * s.f * (c.rm + c.rp) + c.rd2 * s.m * s.m + c.rz2;
  const double alpha = (c.rm - c.rp) * s.f / c.omega;
  const double sdiag = 1.0 - 0.5 * c.dt * beta;
  const Cplx cH(-0.5 * c.dt * alpha, -c.dt);
  Cplx n0 = sdiag * psi.a0 + cH * s.Hp0;
  Cplx n1 = sdiag * psi.a1 + cH * s.Hp1;
  Cplx ov = sdiag + cH * s.hE;
  if (displaced) {
    // K'_o psi = K_o psi - dt sqrt(l) Sum_a L_a psi - dt (l n/2) psi.
    PureState w{0.0, 0.0};
    if (c.rm > 0.0) w = w + channel_apply(c, s, psi, JumpLabel::minus);
    if (c.rp > 0.0) w = w + channel_apply(c, s, psi, JumpLabel::plus);
    if (c.rd2 > 0.0) w = w + channel_apply(c, s, psi, JumpLabel::dephase);
    if (c.rz2 > 0.0 && c.displace_z)
      w = w + channel_apply(c, s, psi, JumpLabel::z);
    const double dsl = c.dt * c.sql;
    const double dln = c.dt * c.half_lam_n;
    n0 -= dsl * w.a0 + dln * psi.a0;
    n1 -= dsl * w.a1 + dln * psi.a1;
    ov -= dsl * dot(psi, w) + dln;
  }
  out = {n0, n1};
  overlap = ov;
  return std::norm(n0) + std::norm(n1);
}

// Displaced jump probabilities: p'_a = dt (|L_a psi|^2 + 2 sqrt(l) Re<psi|L_a psi> + l).
inline ChannelAmps channel_probs_displaced(const StepCore& c,
                                           const StepScratch& s,
                                           const PureState& psi) {
  ChannelAmps a{0.0, 0.0, 0.0, 0.0, 0.0};
  const Cplx mt = mtilde(c, s.z);
  if (c.rm > 0.0) {
    const double re = std::sqrt(c.rm) * std::real(mt * s.cp * std::conj(s.cm));
    a.p_m = c.dt * (c.rm * s.f * std::norm(s.cp) + 2.0 * c.sql * re + c.lam);
  }
  if (c.rp > 0.0) {
    const double re =
        std::sqrt(c.rp) * std::real(std::conj(mt) * s.cm * std::conj(s.cp));
    a.p_p = c.dt * (c.rp * s.f * std::norm(s.cm) + 2.0 * c.sql * re + c.lam);
  }
  if (c.rd2 > 0.0) {
    const double re = std::sqrt(c.rd2) * s.m * c.inv_omega2 * s.hE;
    a.p_d = c.dt * (c.rd2 * s.m * s.m + 2.0 * c.sql * re + c.lam);
  }
  if (c.rz2 > 0.0) {
    const double zdiff = std::norm(psi.a0) - std::norm(psi.a1);
    const double re = std::sqrt(c.rz2) * zdiff;
    a.p_z = c.displace_z
                ? c.dt * (c.rz2 + 2.0 * c.sql * re + c.lam)
                : c.dt * c.rz2;
  }
  a.sum = a.p_m + a.p_p + a.p_d + a.p_z;
  return a;
}

[[noreturn]] void throw_coarse(double value, const char* what) {
  throw StepTooCoarse(std::string("step: ") + what + " = " +
                      std::to_string(value) + "; reduce dt");
}

// Core of one step given the current phasor. Mutates psi/rec; returns the
// event channel if a jump fired.
template <bool kDisplaced>
inline std::optional<JumpLabel> do_step(const StepCore& c, PureState& psi,
                                        const Cplx& z, Rng* rng,
                                        GpAccumulator& acc,
                                        bool& singular_jump,
                                        double* log_survival) {
  StepScratch s;
  fill_scratch(c, psi, z, s);
  const ChannelAmps a = kDisplaced ? channel_probs_displaced(c, s, psi)
                                   : channel_probs_direct(c, s);
  if (a.sum > kMaxJumpProb) throw_coarse(a.sum, "jump probability sum");

  std::optional<JumpLabel> fired;
  if (rng != nullptr) {
    const double u = rng->uniform();
    if (u < a.sum) {
      if (u < a.p_m) fired = JumpLabel::minus;
      else if (u < a.p_m + a.p_p) fired = JumpLabel::plus;
      else if (u < a.p_m + a.p_p + a.p_d) fired = JumpLabel::dephase;
      else fired = JumpLabel::z;
    }
  }

  if (fired) {
    const JumpOutcome out = resolve_jump(c, s, psi, *fired, kDisplaced);
    if (out.rel <= kEpsOverlap || !acc.add_jump(out.overlap)) {
      singular_jump = true;
    }
    psi = out.post;
    return fired;
  }

  PureState next;
  Cplx ov;
  const double po = smooth_update(c, s, psi, kDisplaced, next, ov);
  const double defect = std::abs(po + a.sum - 1.0);
  if (defect > kMaxProbDefect) throw_coarse(defect, "probability defect");
  if (!acc.add_smooth(ov)) singular_jump = true;
  // Survival bookkeeping uses the sampler's smooth-branch probability
  // 1 - sum(p_jump), not ||K_o psi||^2: the first-order K_o lacks the
  // -dt^2 H^2/2 term, so its norm carries a spurious +dt^2 ||H_eff psi||^2
  // that compounds coherently over long paths (survival would exceed 1).
  if (log_survival != nullptr) *log_survival += std::log1p(-a.sum);
  const double inv = 1.0 / std::sqrt(po);
  psi = {next.a0 * inv, next.a1 * inv};
  return std::nullopt;
}

template <bool kDisplaced>
void evolve_segment_impl(const ModelParams& p, const DriveFrame& frame,
                         double t_begin, double t_end, PureState& psi,
                         TrajectoryRecord& rec, Rng* rng,
                         double* log_survival, const RunOptions& opts) {
  const StepCore core(p);
  const auto n_steps =
      static_cast<std::int64_t>(std::llround((t_end - t_begin) / p.dt));
  const double daz = frame.dir * p.Omega * p.dt;
  const Cplx rot(std::cos(daz), std::sin(daz));
  auto exact_phasor = [&](std::int64_t k) {
    const double az =
        frame.az0 + frame.dir * p.Omega * (t_begin + static_cast<double>(k) * p.dt - frame.t0);
    return Cplx(std::cos(az), std::sin(az));
  };

  // Samples already taken by earlier segments stay taken; any pending time at
  // the segment's opening boundary (e.g. t = 0) records the pre-step state.
  std::size_t next_sample = rec.samples.size();
  while (next_sample < opts.sample_times.size() &&
         opts.sample_times[next_sample] <= t_begin + 0.5 * p.dt) {
    rec.samples.push_back(psi);
    ++next_sample;
  }
  if (opts.capture_history && rec.history.empty()) rec.history.push_back(psi);

  Cplx z = exact_phasor(0);
  for (std::int64_t k = 0; k < n_steps; ++k) {
    if (k % kResyncStride == 0 && k > 0) z = exact_phasor(k);
    const double t = t_begin + static_cast<double>(k) * p.dt;
    const auto fired =
        do_step<kDisplaced>(core, psi, z, rng, rec.acc, rec.singular_jump,
                            log_survival);
    if (fired) rec.events.push_back({*fired, t});
    ++rec.n_steps;
    z *= rot;
    if (opts.capture_history) rec.history.push_back(psi);
    const double t_next = t + p.dt;
    while (next_sample < opts.sample_times.size() &&
           opts.sample_times[next_sample] <= t_next + 0.5 * p.dt &&
           opts.sample_times[next_sample] <= t_end + 0.5 * p.dt) {
      rec.samples.push_back(psi);
      ++next_sample;
    }
  }
}

}  // namespace

void evolve_segment(const ModelParams& p, const DriveFrame& frame,
                    double t_begin, double t_end, PureState& state,
                    TrajectoryRecord& rec, Rng* rng, double* log_survival,
                    const RunOptions& opts) {
  if (p.lambda_disp > 0.0) {
    evolve_segment_impl<true>(p, frame, t_begin, t_end, state, rec, rng,
                              log_survival, opts);
  } else {
    evolve_segment_impl<false>(p, frame, t_begin, t_end, state, rec, rng,
                               log_survival, opts);
  }
}

StepResult step(const PureState& state, const ModelParams& p, double t,
                Rng& rng) {
  p.validate();
  const StepCore core(p);
  const double az = azimuth(p, t);
  const Cplx z(std::cos(az), std::sin(az));
  PureState psi = state.normalized();
  GpAccumulator acc;
  acc.initial_state = psi;
  bool singular = false;
  std::optional<JumpLabel> fired;
  if (p.lambda_disp > 0.0) {
    fired = do_step<true>(core, psi, z, &rng, acc, singular, nullptr);
  } else {
    fired = do_step<false>(core, psi, z, &rng, acc, singular, nullptr);
  }
  StepResult r;
  r.state = psi;
  if (fired) r.event = JumpEvent{*fired, t};
  return r;
}

namespace {

PureState forced_jump_state(const ModelParams& p, double az,
                            const PureState& state, JumpLabel label,
                            Cplx* overlap, double* rel) {
  const StepCore core(p);
  const Cplx z(std::cos(az), std::sin(az));
  StepScratch s;
  const PureState psi = state.normalized();
  fill_scratch(core, psi, z, s);
  PureState v = channel_apply(core, s, psi, label);
  if (p.lambda_disp > 0.0 && (p.displace_all || label != JumpLabel::z)) {
    v = v + core.sql * psi;
  }
  const double vn = v.norm();
  if (vn <= 1e-150) {
    throw SingularOverlap("apply_forced_jump: channel annihilates the state");
  }
  if (overlap != nullptr) *overlap = core.sqdt * dot(psi, v);
  if (rel != nullptr) *rel = std::abs(dot(psi, v)) / vn;
  return (1.0 / vn) * v;
}

}  // namespace

PureState apply_forced_jump(const PureState& state, const ModelParams& p,
                            double t, JumpLabel label) {
  p.validate();
  return forced_jump_state(p, azimuth(p, t), state, label, nullptr, nullptr);
}

void apply_forced_jump_at_azimuth(const ModelParams& p, double az,
                                  PureState& state, JumpLabel label,
                                  TrajectoryRecord& rec) {
  Cplx ov;
  double rel = 0.0;
  state = forced_jump_state(p, az, state, label, &ov, &rel);
  if (rel <= kEpsOverlap || !rec.acc.add_jump(ov)) rec.singular_jump = true;
}

TrajectoryRecord run_trajectory(const ModelParams& p, double duration,
                                const PureState& initial, Rng& rng,
                                const RunOptions& opts) {
  p.validate();
  TrajectoryRecord rec;
  PureState psi = initial.normalized();
  rec.acc.initial_state = psi;
  evolve_segment(p, DriveFrame{}, 0.0, duration, psi, rec, &rng, nullptr,
                 opts);
  rec.final_state = psi;
  if (!rec.singular_jump) {
    const Cplx ov = dot(rec.acc.initial_state, psi);
    if (std::abs(ov) <= kEpsOverlap) {
      rec.singular_overlap = true;
    } else {
      rec.gp = gp_trajectory(rec.acc, psi);
    }
  }
  return rec;
}

NoJumpRun run_no_jump(const ModelParams& p, double duration,
                      const PureState& initial, const RunOptions& opts) {
  p.validate();
  NoJumpRun run;
  PureState psi = initial.normalized();
  run.record.acc.initial_state = psi;
  evolve_segment(p, DriveFrame{}, 0.0, duration, psi, run.record,
                 /*rng=*/nullptr, &run.log_survival, opts);
  run.survival = std::exp(run.log_survival);
  run.record.final_state = psi;
  const Cplx ov = dot(run.record.acc.initial_state, psi);
  if (std::abs(ov) <= kEpsOverlap) {
    run.record.singular_overlap = true;
  } else {
    run.record.gp = gp_trajectory(run.record.acc, psi);
  }
  return run;
}

NoJumpRun run_no_jump(const ModelParams& p, double duration) {
  return run_no_jump(p, duration, eigensystem(p, 0.0).state_plus);
}

double resolve_dt(const ModelParams& p, const PureState& initial) {
  ModelParams q = p;
  for (int i = 0; i < 24; ++i) {
    try {
      // A no-jump probe step exercises both guards.
      const StepCore core(q);
      PureState psi = initial.normalized();
      GpAccumulator acc;
      bool singular = false;
      if (q.lambda_disp > 0.0) {
        do_step<true>(core, psi, Cplx(1.0, 0.0), nullptr, acc, singular,
                      nullptr);
      } else {
        do_step<false>(core, psi, Cplx(1.0, 0.0), nullptr, acc, singular,
                       nullptr);
      }
      return q.dt;
    } catch (const StepTooCoarse&) {
      q.dt *= 0.5;
    }
  }
  throw StepTooCoarse("resolve_dt: no admissible dt found by halving");
}

}  // namespace gptraj
