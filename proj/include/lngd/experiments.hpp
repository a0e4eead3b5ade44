#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lngd/config.hpp"
#include "lngd/theory.hpp"
#include "lngd/trainer.hpp"

namespace lngd {

/// One training arm with the reports attached to it. A failing arm keeps
/// `error` set and the others run regardless.
struct ArmResult {
  std::string name;
  LabelNoiseSpec noise;
  TrainTrace trace;
  std::optional<Network> final_network;
  std::string error;  // non-empty when the run threw
  std::optional<BoundMonitorReport> monitor;
  std::optional<Stage2Report> stage2;
  Verdicts verdicts;

  bool ok() const { return error.empty() && !trace.aborted; }
  double final_test_accuracy() const;
  double final_clean_loss() const;
};

struct ArmOptions {
  bool keep_snapshots = true;   // needed for the bound monitor and CSV export
  bool keep_network = false;
  TrainHooks hooks;
};

/// Trains one arm of `config` with multipliers drawn from `noise` and
/// attaches the monitor, stage-2 check and verdicts.
ArmResult run_arm(const RunConfig& config, const std::string& name,
                  const LabelNoiseSpec& noise, const ArmOptions& opt = {});

struct DynamicsResult {
  RunConfig config;
  StreamSeeds seeds;
  AssumptionReport assumptions;
  StageEstimate stage_gd;
  StageEstimate stage_lngd;
  ArmResult gd;
  ArmResult lngd;
};

/// Standard GD and label-noise GD on the same data, init and test set.
DynamicsResult run_dynamics(const RunConfig& config, const ArmOptions& opt = {});

// ---------------------------------------------------------------------------

struct CellResult {
  std::size_t row = 0;  // index into snr_values
  std::size_t col = 0;  // index into n_values
  double snr = 0.0;
  std::size_t n = 0;
  double mu_scale = 0.0;
  std::vector<std::uint64_t> seeds;
  std::vector<double> gd_accuracy;    // per seed, NaN where missing
  std::vector<double> lngd_accuracy;
  double gd_mean = 0.0, gd_std = 0.0;
  double lngd_mean = 0.0, lngd_std = 0.0;
  bool missing = false;
  std::string reason;
};

struct HeatmapResult {
  SweepConfig grid;
  std::vector<CellResult> cells;  // row-major over (snr, n)

  const CellResult& cell(std::size_t row, std::size_t col) const;
};

/// Seed for replicate `s` of cell (row, col).
std::uint64_t cell_seed(std::uint64_t master, std::size_t row, std::size_t col,
                        std::size_t s);

/// The single-run configuration behind one heatmap replicate; running it
/// through run_dynamics reproduces that replicate.
RunConfig cell_run_config(const SweepConfig& grid, std::size_t row, std::size_t col,
                          std::size_t s);

/// Runs every (snr, n, seed) replicate on a worker pool. Results do not
/// depend on the number of threads.
HeatmapResult run_heatmap(const SweepConfig& grid);

// ---------------------------------------------------------------------------

struct NoiseComparisonResult {
  RunConfig config;
  ArmResult baseline;
  std::vector<ArmResult> arms;
};

/// The noise variants compared against standard GD by default.
std::vector<LabelNoiseSpec> default_noise_variants();

NoiseComparisonResult run_noise_comparison(const RunConfig& config,
                                           const std::vector<LabelNoiseSpec>& noises,
                                           const ArmOptions& opt = {});

struct QSweepEntry {
  int q = 2;
  DynamicsResult result;
};

/// Signal learning with q = 3 from sigma_0 = 0.01 only takes off after
/// roughly 2500 steps, so the q = 3 run is extended to at least this horizon.
inline constexpr std::size_t kQ3MinSteps = 6000;

/// Hyperparameters used for exponent q: q = 3 and q = 4 override eta, n and
/// mu_scale of `base` (q = 3 also raises steps to kQ3MinSteps); q = 2 returns
/// `base` unchanged.
RunConfig q_sweep_config(const RunConfig& base, int q);

std::vector<QSweepEntry> run_q_sweep(const RunConfig& base, const std::vector<int>& qs,
                                     const ArmOptions& opt = {});

nlohmann::json arm_report_json(const ArmResult& arm);
nlohmann::json dynamics_report_json(const DynamicsResult& r);
nlohmann::json heatmap_report_json(const HeatmapResult& r);

}  // namespace lngd
