#include "cli/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cli/sha256.hpp"
#include "gptraj/analytic.hpp"
#include "gptraj/echo.hpp"
#include "gptraj/ensemble.hpp"
#include "gptraj/gp.hpp"
#include "gptraj/lindblad.hpp"
#include "gptraj/stats.hpp"
#include "gptraj/topology.hpp"
#include "gptraj/trajectory.hpp"
#include "gptraj/types.hpp"

namespace gptraj::cli {

const char* const kVersion = "0.1.0";

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

const std::set<std::string> kModes = {
    "gp-dist",      "gp-vs-omega", "echo-dist",     "echo-vs-omega",
    "no-jump-gp",   "phase-diagram", "sector-map",  "delta-theta",
    "lindblad-check", "unravel-compare"};

std::string g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// CSV table with the provenance hash on a comment line above the header.
class CsvTable {
 public:
  CsvTable(const fs::path& path, const std::string& hash,
           const std::vector<std::string>& columns)
      : out_(path, std::ios::binary) {
    if (!out_) throw Error("cannot open output file: " + path.string());
    out_ << "# manifest_hash=" << hash << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i) {
      out_ << (i ? "," : "") << columns[i];
    }
    out_ << "\n";
  }
  void row(const std::vector<double>& vals) {
    for (std::size_t i = 0; i < vals.size(); ++i) {
      out_ << (i ? "," : "") << g17(vals[i]);
    }
    out_ << "\n";
  }

 private:
  std::ofstream out_;
};

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double u = n == 1 ? 0.0
                            : static_cast<double>(i) / static_cast<double>(n - 1);
    v[static_cast<std::size_t>(i)] = lo * std::pow(hi / lo, u);
  }
  return v;
}

std::vector<double> linear_grid(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double u = n == 1 ? 0.0
                            : static_cast<double>(i) / static_cast<double>(n - 1);
    v[static_cast<std::size_t>(i)] = lo + (hi - lo) * u;
  }
  return v;
}

std::vector<double> sweep_values(const ExperimentConfig& cfg) {
  if (!cfg.sweep.values.empty()) return cfg.sweep.values;
  return log_grid(5e-4, 5e-2, 10);  // default drive-frequency sweep
}

CircularHistogram phase_histogram(const EnsembleResult& r, int bins) {
  CircularHistogram h(bins);
  for (std::size_t i = 0; i < r.phases.size(); ++i) {
    if (r.excluded[i]) {
      h.add_excluded();
    } else {
      h.accumulate(r.phases[i]);
    }
  }
  return h;
}

// Echo phases live on the fixed branch [1.25 pi, 1.5 pi].
CircularHistogram echo_histogram(const std::vector<double>& varphis,
                                 int bins) {
  CircularHistogram h(bins, 1.25 * kPi, 1.5 * kPi);
  for (double v : varphis) h.accumulate(v);
  return h;
}

void write_histogram(const fs::path& path, const std::string& hash,
                     const CircularHistogram& h) {
  CsvTable csv(path, hash, {"bin_center_rad", "count", "probability"});
  for (int i = 0; i < h.n_bins(); ++i) {
    csv.row({h.bin_center(i), static_cast<double>(h.bin_count(i)),
             h.probability(i)});
  }
}

json peaks_json(const CircularHistogram& h, double min_prominence,
                std::size_t max_n) {
  json arr = json::array();
  auto peaks = h.find_peaks(min_prominence);
  for (std::size_t i = 0; i < peaks.size() && i < max_n; ++i) {
    arr.push_back({{"center_rad", peaks[i].center}, {"mass", peaks[i].mass}});
  }
  return arr;
}

double safe_circular_mean(const CircularHistogram& h) {
  return h.n_included() ? h.circular_mean()
                        : std::numeric_limits<double>::quiet_NaN();
}

double safe_circular_variance(const CircularHistogram& h) {
  return h.n_included() ? h.circular_variance()
                        : std::numeric_limits<double>::quiet_NaN();
}

// ----- mode handlers (each returns the manifest's volatile stats) ---------

json do_gp_dist(const ExperimentConfig& cfg, const fs::path& dir,
                const std::string& hash, int workers) {
  const double duration = cfg.duration_cycles * cfg.params.period();
  const auto r = run_gp_ensemble(cfg.params, duration, workers);
  const auto h = phase_histogram(r, cfg.bins);
  write_histogram(dir / "gp_dist.csv", hash, h);
  return {{"mean_jumps", r.mean_jumps},
          {"n_excluded", r.n_excluded},
          {"circular_mean_rad", safe_circular_mean(h)},
          {"circular_variance", safe_circular_variance(h)},
          {"peaks", peaks_json(h, 1e-3, 5)}};
}

json do_gp_vs_omega(const ExperimentConfig& cfg, const fs::path& dir,
                    const std::string& hash, int workers) {
  CsvTable csv(dir / "gp_vs_omega.csv", hash,
               {"omega_ratio", "circular_mean_rad", "circular_variance",
                "mean_jumps", "n_excluded"});
  double total_jumps = 0.0;
  std::int64_t total_excluded = 0;
  const auto values = sweep_values(cfg);
  for (double v : values) {
    ModelParams q = cfg.params;
    q.Omega = v * q.omega;
    const auto r =
        run_gp_ensemble(q, cfg.duration_cycles * q.period(), workers);
    const auto h = phase_histogram(r, cfg.bins);
    csv.row({v, safe_circular_mean(h), safe_circular_variance(h),
             r.mean_jumps, static_cast<double>(r.n_excluded)});
    total_jumps += r.mean_jumps;
    total_excluded += r.n_excluded;
  }
  return {{"mean_jumps", total_jumps / static_cast<double>(values.size())},
          {"n_excluded", total_excluded},
          {"n_points", values.size()}};
}

json do_echo_dist(const ExperimentConfig& cfg, const fs::path& dir,
                  const std::string& hash, int workers) {
  const auto r = run_echo_ensemble(cfg.params, workers);
  const auto h = echo_histogram(r.varphis, cfg.bins);
  write_histogram(dir / "echo_dist.csv", hash, h);
  double mean_p = 0.0;
  for (double p : r.persistences) mean_p += p;
  if (!r.persistences.empty()) {
    mean_p /= static_cast<double>(r.persistences.size());
  }
  std::int64_t singular = 0;
  for (auto e : r.excluded) singular += e;
  return {{"mean_jumps", r.mean_jumps},
          {"n_excluded", singular},
          {"mean_persistence", mean_p},
          {"peaks", peaks_json(h, 1e-3, 5)}};
}

json do_echo_vs_omega(const ExperimentConfig& cfg, const fs::path& dir,
                      const std::string& hash, int workers) {
  CsvTable csv(dir / "echo_vs_omega.csv", hash,
               {"omega_ratio", "circular_mean_rad", "circular_variance",
                "mean_persistence", "central_mass", "side_mass",
                "mean_jumps"});
  const auto values = sweep_values(cfg);
  double total_jumps = 0.0;
  for (double v : values) {
    ModelParams q = cfg.params;
    q.Omega = v * q.omega;
    const auto r = run_echo_ensemble(q, workers);
    const auto h = echo_histogram(r.varphis, cfg.bins);
    double mean_p = 0.0;
    for (double p : r.persistences) mean_p += p;
    if (!r.persistences.empty()) {
      mean_p /= static_cast<double>(r.persistences.size());
    }
    const int halfwidth = std::max(1, cfg.bins / 16);
    const double side = mass_outside(h, {1.375 * kPi}, halfwidth);
    csv.row({v, safe_circular_mean(h), safe_circular_variance(h), mean_p,
             1.0 - side, side, r.mean_jumps});
    total_jumps += r.mean_jumps;
  }
  return {{"mean_jumps", total_jumps / static_cast<double>(values.size())},
          {"n_excluded", 0},
          {"n_points", values.size()}};
}

json do_no_jump_gp(const ExperimentConfig& cfg, const fs::path& dir,
                   const std::string& hash, int /*workers*/) {
  CsvTable csv(dir / "no_jump_gp.csv", hash,
               {"omega_ratio", "gp_exact_rad", "gp_asymptotic_rad",
                "return_fidelity"});
  std::int64_t singular = 0;
  const auto values = sweep_values(cfg);
  for (double v : values) {
    ModelParams q = cfg.params;
    q.Omega = v * q.omega;
    double exact = std::numeric_limits<double>::quiet_NaN();
    try {
      exact = gp_no_jump(q);
    } catch (const SingularOverlap&) {
      ++singular;
    }
    const double approx = gp_no_jump_approx(q);
    const Cplx ov = drift_cycle_overlap(q);
    csv.row({v, exact, approx, std::norm(ov)});
  }
  return {{"n_excluded", singular}, {"n_points", values.size()}};
}

json do_phase_diagram(const ExperimentConfig& cfg, const fs::path& dir,
                      const std::string& hash, int /*workers*/) {
  CsvTable csv(dir / "phase_diagram.csv", hash,
               {"omega_ratio", "gamma_ratio", "phi0_rad", "return_fidelity",
                "singular"});
  const auto omegas =
      linear_grid(cfg.omega_window[0], cfg.omega_window[1], cfg.grid_n);
  const auto gammas =
      linear_grid(cfg.gamma_window[0], cfg.gamma_window[1], cfg.grid_n);
  std::int64_t singular = 0;
  for (double W : omegas) {
    for (double G : gammas) {
      ModelParams q = ModelParams::standard(W * cfg.params.omega,
                                            G * cfg.params.omega,
                                            cfg.params.theta,
                                            cfg.params.gamma_z);
      q.omega = cfg.params.omega;
      q.dt = cfg.params.dt;
      double phi0 = std::numeric_limits<double>::quiet_NaN();
      bool is_singular = false;
      try {
        phi0 = gp_no_jump(q);
      } catch (const SingularOverlap&) {
        is_singular = true;
        ++singular;
      }
      const Cplx ov = drift_cycle_overlap(q);
      csv.row({W, G, phi0, std::norm(ov), is_singular ? 1.0 : 0.0});
    }
  }
  return {{"n_excluded", singular},
          {"n_cells", static_cast<std::int64_t>(omegas.size()) *
                          static_cast<std::int64_t>(gammas.size())}};
}

json do_sector_map(const ExperimentConfig& cfg, const fs::path& dir,
                   const std::string& hash, int /*workers*/) {
  CsvTable csv(dir / "sector_map.csv", hash,
               {"omega_ratio", "gamma_ratio", "winding", "theta_c_pi",
                "min_return_fidelity", "singular"});
  const auto thetas = linear_grid(0.02 * kPi, 0.98 * kPi, cfg.theta_grid_n);
  const auto omegas =
      linear_grid(cfg.omega_window[0], cfg.omega_window[1], cfg.grid_n);
  const auto gammas =
      linear_grid(cfg.gamma_window[0], cfg.gamma_window[1], cfg.grid_n);
  const auto cells = sector_map(thetas, omegas, gammas);
  std::int64_t singular = 0;
  for (const auto& c : cells) {
    if (c.singular) ++singular;
    csv.row({c.Omega, c.Gamma, static_cast<double>(c.n), c.theta_c / kPi,
             c.min_survival, c.singular ? 1.0 : 0.0});
  }
  return {{"n_excluded", singular},
          {"n_cells", static_cast<std::int64_t>(cells.size())}};
}

json do_delta_theta(const ExperimentConfig& cfg, const fs::path& dir,
                    const std::string& hash, int /*workers*/) {
  const PointSpec& pt = *cfg.point2;
  ModelParams p2 = ModelParams::standard(pt.omega_ratio * cfg.params.omega,
                                         pt.gamma_ratio * cfg.params.omega,
                                         cfg.params.theta,
                                         pt.gz_ratio * cfg.params.omega);
  p2.omega = cfg.params.omega;
  p2.dt = cfg.params.dt;
  const ThetaSweep d = delta_theta(cfg.params, p2);
  CsvTable csv(dir / "delta_theta.csv", hash, {"theta_pi", "delta_rad"});
  for (std::size_t i = 0; i < d.thetas.size(); ++i) {
    csv.row({d.thetas[i] / kPi, d.phases[i]});
  }
  const double delta_pi = d.phases.empty() ? 0.0 : d.phases.back();
  return {{"n_excluded", 0},
          {"delta_at_pi_rad", delta_pi},
          {"winding_difference", std::llround(delta_pi / kTwoPi)}};
}

json do_lindblad_check(const ExperimentConfig& cfg, const fs::path& dir,
                       const std::string& hash, int workers) {
  const ModelParams& p = cfg.params;
  const double duration = cfg.duration_cycles * p.period();
  const auto n_steps = static_cast<std::int64_t>(std::llround(duration / p.dt));
  std::int64_t stride = cfg.sample_stride;
  if (stride <= 0) stride = std::max<std::int64_t>(1, n_steps / 200);

  std::vector<double> times;
  for (std::int64_t k = 0; k * stride <= n_steps; ++k) {
    times.push_back(static_cast<double>(k * stride) * p.dt);
  }
  if (times.empty() || times.back() < (static_cast<double>(n_steps) - 0.5) * p.dt) {
    times.push_back(static_cast<double>(n_steps) * p.dt);
  }

  const auto r = run_gp_ensemble(p, duration, workers, times);
  const auto eig = eigensystem(p, 0.0);
  const auto rho_path =
      integrate(projector(eig.state_plus), p, duration, static_cast<int>(stride));
  if (rho_path.size() != times.size() || r.mean_state.size() != times.size()) {
    throw Error("lindblad-check: sample-grid mismatch between integrator and "
                "ensemble");
  }

  CsvTable csv(dir / "lindblad_check.csv", hash, {"time", "trace_distance"});
  double max_td = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double td = trace_distance(r.mean_state[i], rho_path[i]);
    max_td = std::max(max_td, td);
    csv.row({times[i], td});
  }
  const double bound =
      3.0 / std::sqrt(static_cast<double>(std::max<std::int64_t>(1, p.n_traj)));
  return {{"mean_jumps", r.mean_jumps},
          {"n_excluded", r.n_excluded},
          {"max_trace_distance", max_td},
          {"monte_carlo_bound", bound}};
}

json do_unravel_compare(const ExperimentConfig& cfg, const fs::path& dir,
                        const std::string& hash, int workers) {
  const double duration = cfg.duration_cycles * cfg.params.period();
  ModelParams direct = cfg.params;
  direct.lambda_disp = 0.0;
  const ModelParams& displaced = cfg.params;

  const std::vector<double> t_end = {duration};
  const auto r0 = run_gp_ensemble(direct, duration, workers, t_end);
  const auto r1 = run_gp_ensemble(displaced, duration, workers, t_end);
  const auto h0 = phase_histogram(r0, cfg.bins);
  const auto h1 = phase_histogram(r1, cfg.bins);

  CsvTable csv(dir / "unravel_compare.csv", hash,
               {"bin_center_rad", "prob_direct", "prob_displaced"});
  for (int i = 0; i < cfg.bins; ++i) {
    csv.row({h0.bin_center(i), h0.probability(i), h1.probability(i)});
  }

  const auto eig = eigensystem(direct, 0.0);
  const auto rho_T = integrate(projector(eig.state_plus), direct, duration,
                               std::max<int>(1, 1 << 20))
                         .back();
  const double td0 = trace_distance(r0.mean_state.back(), rho_T);
  const double td1 = trace_distance(r1.mean_state.back(), rho_T);
  const double td01 =
      trace_distance(r0.mean_state.back(), r1.mean_state.back());

  // Background flatness relative to the direct scheme's dominant peak.
  const auto peaks0 = h0.find_peaks(1e-3);
  std::vector<double> centers;
  if (!peaks0.empty()) centers.push_back(peaks0.front().center);
  const int halfwidth = std::max(1, cfg.bins / 32);
  const double chi2_direct = background_chi2(h0, centers, halfwidth);
  const double chi2_displaced = background_chi2(h1, centers, halfwidth);

  return {{"mean_jumps", r1.mean_jumps},
          {"mean_jumps_direct", r0.mean_jumps},
          {"n_excluded", r0.n_excluded + r1.n_excluded},
          {"trace_distance_direct_vs_lindblad", td0},
          {"trace_distance_displaced_vs_lindblad", td1},
          {"trace_distance_between_schemes", td01},
          {"background_chi2_direct", chi2_direct},
          {"background_chi2_displaced", chi2_displaced},
          {"monte_carlo_bound",
           3.0 / std::sqrt(static_cast<double>(
                     std::max<std::int64_t>(1, cfg.params.n_traj)))}};
}

// ----- config plumbing -----------------------------------------------------

void require_keys(const json& j, const std::set<std::string>& allowed,
                  const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) {
      throw ConfigError("unknown config key in " + where + ": " + it.key());
    }
  }
}

double jnum(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number()) throw ConfigError(std::string(key) + " must be a number");
  return v.get<double>();
}

std::int64_t jint(const json& j, const char* key, std::int64_t fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number_integer()) {
    throw ConfigError(std::string(key) + " must be an integer");
  }
  return v.get<std::int64_t>();
}

}  // namespace

void ExperimentConfig::validate() const {
  if (!kModes.count(mode)) {
    std::string all;
    for (const auto& m : kModes) all += (all.empty() ? "" : ", ") + m;
    throw ConfigError("mode must be one of {" + all + "}, got '" + mode + "'");
  }
  params.validate();
  if (bins < 8 || bins > 100000) {
    throw ConfigError("bins must lie in [8, 100000]");
  }
  if (!(duration_cycles > 0.0) || !std::isfinite(duration_cycles)) {
    throw ConfigError("duration_cycles must be positive");
  }
  if (workers < 0) throw ConfigError("workers must be >= 0");
  if (sample_stride < 0) throw ConfigError("sample_stride must be >= 0");
  if (out_dir.empty()) throw ConfigError("output directory must be non-empty");
  for (double v : sweep.values) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ConfigError("sweep values must be positive and finite");
    }
  }
  if (sweep.axis != "omega") {
    throw ConfigError("sweep axis must be 'omega'");
  }
  if (mode == "phase-diagram" || mode == "sector-map") {
    if (grid_n < 2) throw ConfigError("grid_n must be >= 2");
    for (const auto& w : {omega_window, gamma_window}) {
      if (!(w[0] > 0.0) || !(w[1] > w[0]) || !std::isfinite(w[1])) {
        throw ConfigError("windows must satisfy 0 < lo < hi");
      }
    }
  }
  if (mode == "sector-map" && theta_grid_n < 3) {
    throw ConfigError("theta_grid_n must be >= 3");
  }
  if (mode == "delta-theta") {
    if (!point2) throw ConfigError("delta-theta requires point2");
    if (!(point2->omega_ratio > 0.0) || point2->gamma_ratio < 0.0 ||
        point2->gz_ratio < 0.0) {
      throw ConfigError("point2 requires omega_ratio > 0 and rates >= 0");
    }
  }
  if (mode == "unravel-compare" && !(params.lambda_disp > 0.0)) {
    throw ConfigError("unravel-compare requires lambda_ratio > 0");
  }
}

ExperimentConfig config_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");
  require_keys(j,
               {"mode", "omega_ratio", "gamma_ratio", "theta_pi_units",
                "gz_ratio", "gm_ratio", "gp_ratio", "gd_ratio", "lambda_ratio",
                "displace_all", "dt", "n_traj", "seed", "workers", "bins",
                "duration_cycles", "out", "sweep", "omega_window",
                "gamma_window", "grid_n", "theta_grid_n", "point2",
                "sample_stride"},
               "config");

  ExperimentConfig cfg;
  if (j.contains("mode")) {
    if (!j.at("mode").is_string()) throw ConfigError("mode must be a string");
    cfg.mode = j.at("mode").get<std::string>();
  }

  ModelParams p;  // omega stays 1: every physical input is a ratio to omega
  p.Omega = jnum(j, "omega_ratio", p.Omega / p.omega) * p.omega;
  p.theta = jnum(j, "theta_pi_units", p.theta / kPi) * kPi;
  cfg.gamma_ratio = jnum(j, "gamma_ratio", 0.0);
  const bool explicit_rates =
      j.contains("gm_ratio") || j.contains("gp_ratio") || j.contains("gd_ratio");
  if (explicit_rates) {
    p.gamma_minus = jnum(j, "gm_ratio", 0.0) * p.omega;
    p.gamma_plus = jnum(j, "gp_ratio", 0.0) * p.omega;
    p.gamma_d = jnum(j, "gd_ratio", 0.0) * p.omega;
    p.Gamma = cfg.gamma_ratio * p.omega;
  } else {
    const ModelParams split = ModelParams::standard(
        p.Omega, cfg.gamma_ratio * p.omega, p.theta, 0.0);
    p.Gamma = split.Gamma;
    p.gamma_minus = split.gamma_minus;
    p.gamma_plus = split.gamma_plus;
    p.gamma_d = split.gamma_d;
  }
  p.gamma_z = jnum(j, "gz_ratio", 0.0) * p.omega;
  p.lambda_disp = jnum(j, "lambda_ratio", 0.0) * p.omega;
  if (j.contains("displace_all")) {
    if (!j.at("displace_all").is_boolean()) {
      throw ConfigError("displace_all must be a boolean");
    }
    p.displace_all = j.at("displace_all").get<bool>();
  }
  p.dt = jnum(j, "dt", p.dt);
  p.n_traj = jint(j, "n_traj", p.n_traj);
  const std::int64_t seed = jint(j, "seed", static_cast<std::int64_t>(p.seed));
  if (seed < 0) throw ConfigError("seed must be >= 0");
  p.seed = static_cast<std::uint64_t>(seed);
  cfg.params = p;

  cfg.workers = static_cast<int>(jint(j, "workers", cfg.workers));
  cfg.bins = static_cast<int>(jint(j, "bins", cfg.bins));
  cfg.duration_cycles = jnum(j, "duration_cycles", cfg.duration_cycles);
  if (j.contains("out")) {
    if (!j.at("out").is_string()) throw ConfigError("out must be a string");
    cfg.out_dir = j.at("out").get<std::string>();
  }
  if (j.contains("sweep")) {
    const auto& s = j.at("sweep");
    if (!s.is_object()) throw ConfigError("sweep must be an object");
    require_keys(s, {"axis", "values"}, "sweep");
    if (s.contains("axis")) cfg.sweep.axis = s.at("axis").get<std::string>();
    if (s.contains("values")) {
      if (!s.at("values").is_array()) {
        throw ConfigError("sweep.values must be an array of numbers");
      }
      for (const auto& v : s.at("values")) {
        if (!v.is_number()) {
          throw ConfigError("sweep.values must be an array of numbers");
        }
        cfg.sweep.values.push_back(v.get<double>());
      }
    }
  }
  for (auto [key, window] : {std::pair<const char*, std::array<double, 2>*>{
                                 "omega_window", &cfg.omega_window},
                             {"gamma_window", &cfg.gamma_window}}) {
    if (j.contains(key)) {
      const auto& w = j.at(key);
      if (!w.is_array() || w.size() != 2 || !w[0].is_number() ||
          !w[1].is_number()) {
        throw ConfigError(std::string(key) + " must be [lo, hi]");
      }
      (*window)[0] = w[0].get<double>();
      (*window)[1] = w[1].get<double>();
    }
  }
  cfg.grid_n = static_cast<int>(jint(j, "grid_n", cfg.grid_n));
  cfg.theta_grid_n = static_cast<int>(jint(j, "theta_grid_n", cfg.theta_grid_n));
  if (j.contains("point2")) {
    const auto& q = j.at("point2");
    if (!q.is_object()) throw ConfigError("point2 must be an object");
    require_keys(q, {"omega_ratio", "gamma_ratio", "gz_ratio"}, "point2");
    PointSpec pt;
    pt.omega_ratio = jnum(q, "omega_ratio", 0.0);
    pt.gamma_ratio = jnum(q, "gamma_ratio", 0.0);
    pt.gz_ratio = jnum(q, "gz_ratio", 0.0);
    cfg.point2 = pt;
  }
  cfg.sample_stride = static_cast<int>(jint(j, "sample_stride", cfg.sample_stride));
  return cfg;
}

namespace {

json config_json(const ExperimentConfig& cfg) {
  const ModelParams& p = cfg.params;
  json j{{"mode", cfg.mode},
         {"omega_ratio", p.Omega / p.omega},
         {"gamma_ratio", cfg.gamma_ratio},
         {"theta_pi_units", p.theta / kPi},
         {"gz_ratio", p.gamma_z / p.omega},
         {"gm_ratio", p.gamma_minus / p.omega},
         {"gp_ratio", p.gamma_plus / p.omega},
         {"gd_ratio", p.gamma_d / p.omega},
         {"lambda_ratio", p.lambda_disp / p.omega},
         {"displace_all", p.displace_all},
         {"dt", p.dt},
         {"n_traj", p.n_traj},
         {"seed", p.seed},
         {"workers", cfg.workers},
         {"bins", cfg.bins},
         {"duration_cycles", cfg.duration_cycles},
         {"out", cfg.out_dir},
         {"sweep", {{"axis", cfg.sweep.axis}, {"values", cfg.sweep.values}}},
         {"omega_window", cfg.omega_window},
         {"gamma_window", cfg.gamma_window},
         {"grid_n", cfg.grid_n},
         {"theta_grid_n", cfg.theta_grid_n},
         {"sample_stride", cfg.sample_stride}};
  if (cfg.point2) {
    j["point2"] = {{"omega_ratio", cfg.point2->omega_ratio},
                   {"gamma_ratio", cfg.point2->gamma_ratio},
                   {"gz_ratio", cfg.point2->gz_ratio}};
  }
  return j;
}

}  // namespace

std::string config_to_json_text(const ExperimentConfig& cfg) {
  return config_json(cfg).dump(2);
}

std::string manifest_hash(const ExperimentConfig& cfg) {
  json core = config_json(cfg);
  core.erase("workers");  // cannot affect any output byte
  core.erase("out");
  core["version"] = kVersion;
  return detail::sha256_hex(core.dump());
}

void run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const fs::path dir(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory: " + dir.string());

  const std::string hash = manifest_hash(cfg);
  const int workers = resolve_workers(cfg.workers);
  const auto t0 = std::chrono::steady_clock::now();

  json stats;
  if (cfg.mode == "gp-dist") {
    stats = do_gp_dist(cfg, dir, hash, workers);
  } else if (cfg.mode == "gp-vs-omega") {
    stats = do_gp_vs_omega(cfg, dir, hash, workers);
  } else if (cfg.mode == "echo-dist") {
    stats = do_echo_dist(cfg, dir, hash, workers);
  } else if (cfg.mode == "echo-vs-omega") {
    stats = do_echo_vs_omega(cfg, dir, hash, workers);
  } else if (cfg.mode == "no-jump-gp") {
    stats = do_no_jump_gp(cfg, dir, hash, workers);
  } else if (cfg.mode == "phase-diagram") {
    stats = do_phase_diagram(cfg, dir, hash, workers);
  } else if (cfg.mode == "sector-map") {
    stats = do_sector_map(cfg, dir, hash, workers);
  } else if (cfg.mode == "delta-theta") {
    stats = do_delta_theta(cfg, dir, hash, workers);
  } else if (cfg.mode == "lindblad-check") {
    stats = do_lindblad_check(cfg, dir, hash, workers);
  } else {
    stats = do_unravel_compare(cfg, dir, hash, workers);
  }

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  json manifest{{"config", config_json(cfg)},
                {"manifest_hash", hash},
                {"version", kVersion},
                {"seed", cfg.params.seed},
                {"workers_resolved", workers},
                {"wall_time_s", wall},
                {"stats", stats}};
  std::ofstream out(dir / "manifest.json", std::ios::binary);
  if (!out) throw Error("cannot write manifest.json");
  out << manifest.dump(2) << "\n";
}

int experiment_main(int argc, const char* const* argv) {
  CLI::App app{"Monte Carlo geometric phases of a driven dissipative qubit"};
  app.set_version_flag("--version", kVersion);

  std::string config_path, mode, out_dir;
  std::uint64_t seed = 0;
  int workers = 0;
  std::int64_t ntraj = 0;
  double omega_ratio = 0, gamma_ratio = 0, theta_pi = 0, gz_ratio = 0,
         lambda_ratio = 0, dt = 0;

  app.add_option("--config", config_path, "JSON experiment file");
  app.add_option("--mode", mode, "experiment mode");
  app.add_option("--seed", seed, "base RNG seed");
  app.add_option("--workers", workers, "worker threads (0 = auto)");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--omega-ratio", omega_ratio, "drive frequency / omega");
  app.add_option("--gamma-ratio", gamma_ratio,
                 "dissipation scale / omega (standard channel split)");
  app.add_option("--theta-pi-units", theta_pi, "field polar angle / pi");
  app.add_option("--gz-ratio", gz_ratio, "bare-dephasing rate / omega");
  app.add_option("--lambda-ratio", lambda_ratio,
                 "detector displacement / omega");
  app.add_option("--ntraj", ntraj, "trajectories per ensemble");
  app.add_option("--dt", dt, "integrator step (units of 1/omega)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    std::string text = "{}";
    if (!config_path.empty()) {
      std::ifstream in(config_path, std::ios::binary);
      if (!in) throw ConfigError("cannot read config file: " + config_path);
      std::ostringstream buf;
      buf << in.rdbuf();
      text = buf.str();
    }
    ExperimentConfig cfg = config_from_json_text(text);

    if (app.count("--mode")) cfg.mode = mode;
    if (app.count("--seed")) cfg.params.seed = seed;
    if (app.count("--workers")) cfg.workers = workers;
    if (app.count("--out")) cfg.out_dir = out_dir;
    if (app.count("--theta-pi-units")) cfg.params.theta = theta_pi * kPi;
    if (app.count("--omega-ratio")) {
      cfg.params.Omega = omega_ratio * cfg.params.omega;
    }
    if (app.count("--gamma-ratio")) {
      cfg.gamma_ratio = gamma_ratio;
      const ModelParams split =
          ModelParams::standard(cfg.params.Omega,
                                gamma_ratio * cfg.params.omega,
                                cfg.params.theta, cfg.params.gamma_z);
      cfg.params.Gamma = split.Gamma;
      cfg.params.gamma_minus = split.gamma_minus;
      cfg.params.gamma_plus = split.gamma_plus;
      cfg.params.gamma_d = split.gamma_d;
    }
    if (app.count("--gz-ratio")) {
      cfg.params.gamma_z = gz_ratio * cfg.params.omega;
    }
    if (app.count("--lambda-ratio")) {
      cfg.params.lambda_disp = lambda_ratio * cfg.params.omega;
    }
    if (app.count("--ntraj")) cfg.params.n_traj = ntraj;
    if (app.count("--dt")) cfg.params.dt = dt;

    run_experiment(cfg);
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "numerical guard: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace gptraj::cli
