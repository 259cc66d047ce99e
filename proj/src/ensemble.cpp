#include "gptraj/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "gptraj/lindblad.hpp"
#include "gptraj/model.hpp"

namespace gptraj {

namespace {

// Run fn(idx) for idx in [0, n) across `workers` threads; first exception
// wins and is rethrown after the pool joins.
template <typename Fn>
void parallel_for(std::int64_t n, int workers, Fn&& fn) {
  workers = std::max(1, workers);
  if (n <= 0) return;
  workers = static_cast<int>(
      std::min<std::int64_t>(workers, n));
  if (workers == 1) {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mu;
  auto body = [&] {
    for (;;) {
      const std::int64_t i = next.fetch_add(1);
      if (i >= n || failed.load(std::memory_order_relaxed)) return;
      try {
        fn(i);
      } catch (...) {
        {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!error) error = std::current_exception();
        }
        failed.store(true, std::memory_order_relaxed);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

EnsembleResult run_gp_ensemble(const ModelParams& p, double duration,
                               int workers,
                               const std::vector<double>& sample_times) {
  p.validate();
  if (duration < 0.0) duration = p.period();
  const std::int64_t n = p.n_traj;
  EnsembleResult out;
  out.phases.assign(static_cast<std::size_t>(n), 0.0);
  out.jump_counts.assign(static_cast<std::size_t>(n), 0);
  out.excluded.assign(static_cast<std::size_t>(n), 0);
  std::vector<std::vector<PureState>> samples(
      sample_times.empty() ? 0 : static_cast<std::size_t>(n));

  const PureState initial = eigensystem(p, 0.0).state_plus;
  RunOptions opts;
  opts.sample_times = sample_times;

  parallel_for(n, workers, [&](std::int64_t idx) {
    Rng rng(p.seed, static_cast<std::uint64_t>(idx));
    TrajectoryRecord rec = run_trajectory(p, duration, initial, rng, opts);
    const auto u = static_cast<std::size_t>(idx);
    const bool bad = rec.singular_jump || rec.singular_overlap;
    out.excluded[u] = bad ? 1 : 0;
    out.phases[u] = bad ? std::numeric_limits<double>::quiet_NaN() : rec.gp;
    out.jump_counts[u] = static_cast<std::int32_t>(rec.events.size());
    if (!sample_times.empty()) samples[u] = std::move(rec.samples);
  });

  // Deterministic index-ordered reductions.
  std::int64_t jump_sum = 0;
  for (std::int64_t i = 0; i < n; ++i) {
    jump_sum += out.jump_counts[static_cast<std::size_t>(i)];
    out.n_excluded += out.excluded[static_cast<std::size_t>(i)];
  }
  out.mean_jumps = n > 0 ? static_cast<double>(jump_sum) / n : 0.0;
  if (!sample_times.empty()) {
    out.mean_state.assign(sample_times.size(), Mat2::zero());
    for (std::int64_t i = 0; i < n; ++i) {
      const auto& row = samples[static_cast<std::size_t>(i)];
      for (std::size_t s = 0; s < row.size() && s < out.mean_state.size(); ++s) {
        out.mean_state[s] = out.mean_state[s] + projector(row[s]);
      }
    }
    if (n > 0) {
      for (auto& m : out.mean_state) m = (1.0 / static_cast<double>(n)) * m;
    }
  }
  return out;
}

EchoEnsembleResult run_echo_ensemble(const ModelParams& p, int workers) {
  p.validate();
  const std::int64_t n = p.n_traj;
  EchoEnsembleResult out;
  out.varphis.assign(static_cast<std::size_t>(n), 0.0);
  out.persistences.assign(static_cast<std::size_t>(n), 0.0);
  out.jump_counts.assign(static_cast<std::size_t>(n), 0);
  out.excluded.assign(static_cast<std::size_t>(n), 0);

  parallel_for(n, workers, [&](std::int64_t idx) {
    Rng rng(p.seed, static_cast<std::uint64_t>(idx));
    const EchoOutcome e = run_echo(p, rng);
    const auto u = static_cast<std::size_t>(idx);
    out.varphis[u] = e.varphi;
    out.persistences[u] = e.persistence;
    out.jump_counts[u] = static_cast<std::int32_t>(e.record.events.size());
    out.excluded[u] =
        (e.record.singular_jump || e.record.singular_overlap) ? 1 : 0;
  });

  std::int64_t jump_sum = 0;
  for (auto c : out.jump_counts) jump_sum += c;
  out.mean_jumps = n > 0 ? static_cast<double>(jump_sum) / n : 0.0;
  return out;
}

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("GPTRAJ_WORKERS")) {
    const int w = std::atoi(env);
    if (w > 0) return w;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

}  // namespace gptraj
