#pragma once
// Experiment front end: declarative JSON configuration with flag overrides,
// mode dispatch, and provenance-stamped CSV / manifest output.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "gptraj/types.hpp"

namespace gptraj::cli {

extern const char* const kVersion;

struct SweepSpec {
  std::string axis = "omega";
  std::vector<double> values;  // empty -> mode default grid
};

// Second parameter point for difference curves.
struct PointSpec {
  double omega_ratio = 0.0;
  double gamma_ratio = 0.0;
  double gz_ratio = 0.0;
};

struct ExperimentConfig {
  std::string mode;
  ModelParams params;        // resolved physical parameters (omega = 1)
  double gamma_ratio = 0.0;  // overall dissipation scale / omega (bookkeeping)
  int workers = 0;           // 0 -> GPTRAJ_WORKERS env, then hardware
  int bins = 200;
  double duration_cycles = 1.0;
  std::string out_dir = "out";
  SweepSpec sweep;                             // *-vs-omega, no-jump-gp
  std::array<double, 2> omega_window{4.0e-3, 5.6e-3};  // phase-diagram/sector
  std::array<double, 2> gamma_window{0.02, 0.04};
  int grid_n = 9;
  int theta_grid_n = 25;            // sector-map criticality seed grid
  std::optional<PointSpec> point2;  // delta-theta second point
  int sample_stride = 0;            // lindblad-check; 0 -> auto

  // ConfigError on malformed or mode-incomplete settings.
  void validate() const;
};

// Parse a JSON config document. Unknown keys are rejected (ConfigError).
ExperimentConfig config_from_json_text(const std::string& text);

// Resolved configuration as canonical JSON (the manifest's "config" object).
std::string config_to_json_text(const ExperimentConfig& cfg);

// SHA-256 provenance hash over the resolved config plus code version.
// Fields that cannot affect the numbers (workers, output directory) are
// excluded, so reruns at different parallelism hash identically.
std::string manifest_hash(const ExperimentConfig& cfg);

// Execute a validated config: writes the mode's CSV table(s) plus
// manifest.json into cfg.out_dir. Throws Error subclasses on guard failures.
void run_experiment(const ExperimentConfig& cfg);

// Command-line entry point (flags override the config file). Returns 0 on
// success, 2 on configuration or usage errors, 3 on numerical-guard failure.
int experiment_main(int argc, const char* const* argv);

}  // namespace gptraj::cli
