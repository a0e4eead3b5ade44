#include "lngd/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace lngd {

double ArmResult::final_test_accuracy() const {
  if (trace.rows.empty()) return std::numeric_limits<double>::quiet_NaN();
  return 1.0 - trace.rows.back().test_error_01;
}

double ArmResult::final_clean_loss() const {
  if (trace.rows.empty()) return std::numeric_limits<double>::quiet_NaN();
  return trace.rows.back().clean_train_loss;
}

namespace {

std::optional<double> flip_rate(const LabelNoiseSpec& noise) {
  if (noise.kind() == LabelNoiseSpec::Kind::flip && noise.p() > 0.0 && noise.p() < 0.5)
    return noise.p();
  return std::nullopt;
}

double stage1_horizon(const RunConfig& c) {
  const StageEstimate est = estimate_stage_times(c.spec(), c.n, c.m, c.eta, c.sigma_0,
                                                 c.epsilon, Algorithm::lngd);
  return est.valid ? est.t1 : 0.0;
}

}  // namespace

ArmResult run_arm(const RunConfig& config, const std::string& name,
                  const LabelNoiseSpec& noise, const ArmOptions& opt) {
  ArmResult arm;
  arm.name = name;
  arm.noise = noise;
  try {
    TrainConfig tc = config.train_config(noise);
    tc.record_coefficients = opt.keep_snapshots;
    TrainResult res = train_run(tc, config.spec(), config.n, config.shape(), opt.hooks);
    arm.trace = std::move(res.trace);
    if (opt.keep_network) arm.final_network = std::move(res.network);
  } catch (const std::exception& e) {
    arm.error = e.what();
    return arm;
  }
  if (!arm.trace.snapshots.empty())
    arm.monitor = coefficient_bound_monitor(arm.trace, static_cast<double>(config.steps));
  if (!arm.trace.iota.steps.empty())
    arm.stage2 = stage2_boundedness_check(arm.trace.iota, stage1_horizon(config),
                                          flip_rate(noise));
  VerdictOptions vo;
  vo.epsilon = config.epsilon;
  vo.c_test = config.c_test;
  arm.verdicts = theorem_verdicts(arm.trace, vo);
  return arm;
}

DynamicsResult run_dynamics(const RunConfig& config, const ArmOptions& opt) {
  validate(config);
  DynamicsResult r;
  r.config = config;
  r.seeds = StreamSeeds::from_master(config.seed);
  const SignalSpec spec = config.spec();
  const double p = config.noise.kind() == LabelNoiseSpec::Kind::flip ? config.noise.p() : 0.0;
  r.assumptions = check_assumptions(spec, config.n, config.m, config.eta, config.sigma_0, p);
  r.stage_gd = estimate_stage_times(spec, config.n, config.m, config.eta, config.sigma_0,
                                    config.epsilon, Algorithm::gd);
  r.stage_lngd = estimate_stage_times(spec, config.n, config.m, config.eta, config.sigma_0,
                                      config.epsilon, Algorithm::lngd);
  r.gd = run_arm(config, "gd", LabelNoiseSpec::none(), opt);
  r.lngd = run_arm(config, "lngd", config.noise, opt);
  return r;
}

// ---------------------------------------------------------------------------

const CellResult& HeatmapResult::cell(std::size_t row, std::size_t col) const {
  if (row >= grid.snr_values.size() || col >= grid.n_values.size())
    throw std::out_of_range("heatmap cell index out of range");
  return cells.at(row * grid.n_values.size() + col);
}

std::uint64_t cell_seed(std::uint64_t master, std::size_t row, std::size_t col,
                        std::size_t s) {
  return derive_seed(master, {static_cast<std::uint64_t>(row),
                              static_cast<std::uint64_t>(col),
                              static_cast<std::uint64_t>(s)});
}

RunConfig cell_run_config(const SweepConfig& grid, std::size_t row, std::size_t col,
                          std::size_t s) {
  RunConfig c;
  c.d = grid.d;
  c.n = grid.n_values.at(col);
  c.sigma_p = grid.sigma_p;
  c.mu_scale = grid.snr_values.at(row) * grid.sigma_p * std::sqrt(static_cast<double>(grid.d));
  c.noise = LabelNoiseSpec::flip(grid.p);
  c.eta = grid.eta;
  c.steps = grid.steps;
  c.seed = cell_seed(grid.seed, row, col, s);
  c.m = grid.m;
  c.q = grid.q;
  c.sigma_0 = grid.sigma_0;
  c.log_stride = grid.steps;
  c.n_test = grid.n_test;
  return c;
}

namespace {

void mean_std(const std::vector<double>& v, double& mean, double& sd, std::size_t& count) {
  double s = 0.0;
  count = 0;
  for (double x : v)
    if (std::isfinite(x)) s += x, ++count;
  mean = count ? s / static_cast<double>(count) : std::numeric_limits<double>::quiet_NaN();
  double ss = 0.0;
  for (double x : v)
    if (std::isfinite(x)) ss += (x - mean) * (x - mean);
  sd = count > 1 ? std::sqrt(ss / static_cast<double>(count - 1)) : 0.0;
}

}  // namespace

HeatmapResult run_heatmap(const SweepConfig& grid) {
  validate(grid);
  HeatmapResult out;
  out.grid = grid;
  const std::size_t rows = grid.snr_values.size();
  const std::size_t cols = grid.n_values.size();
  const std::size_t reps = grid.seeds_per_cell;
  out.cells.resize(rows * cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      CellResult& cell = out.cells[r * cols + c];
      cell.row = r;
      cell.col = c;
      cell.snr = grid.snr_values[r];
      cell.n = grid.n_values[c];
      cell.mu_scale = cell_run_config(grid, r, c, 0).mu_scale;
      cell.gd_accuracy.assign(reps, std::numeric_limits<double>::quiet_NaN());
      cell.lngd_accuracy.assign(reps, std::numeric_limits<double>::quiet_NaN());
      for (std::size_t s = 0; s < reps; ++s) cell.seeds.push_back(cell_seed(grid.seed, r, c, s));
    }

  const std::size_t jobs = rows * cols * reps;
  std::vector<std::string> errors(jobs);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    ArmOptions opt;
    opt.keep_snapshots = false;
    for (std::size_t k = next++; k < jobs; k = next++) {
      const std::size_t s = k % reps;
      const std::size_t cell_index = k / reps;
      const std::size_t r = cell_index / cols, c = cell_index % cols;
      CellResult& cell = out.cells[cell_index];
      try {
        const RunConfig rc = cell_run_config(grid, r, c, s);
        const ArmResult gd = run_arm(rc, "gd", LabelNoiseSpec::none(), opt);
        const ArmResult ln = run_arm(rc, "lngd", rc.noise, opt);
        if (gd.ok()) cell.gd_accuracy[s] = gd.final_test_accuracy();
        else errors[k] = "gd: " + (gd.error.empty() ? gd.trace.abort_reason : gd.error);
        if (ln.ok()) cell.lngd_accuracy[s] = ln.final_test_accuracy();
        else errors[k] += (errors[k].empty() ? "" : "; ") + std::string("lngd: ") +
                          (ln.error.empty() ? ln.trace.abort_reason : ln.error);
      } catch (const std::exception& e) {
        errors[k] = e.what();
      }
    }
  };
  std::size_t threads = grid.threads ? grid.threads : std::thread::hardware_concurrency();
  threads = std::max<std::size_t>(1, std::min(threads, jobs));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (std::size_t ci = 0; ci < out.cells.size(); ++ci) {
    CellResult& cell = out.cells[ci];
    for (std::size_t s = 0; s < reps; ++s) {
      const std::string& e = errors[ci * reps + s];
      if (!e.empty()) cell.reason += (cell.reason.empty() ? "" : " | ") +
                                     ("seed " + std::to_string(s) + ": " + e);
    }
    std::size_t ng = 0, nl = 0;
    mean_std(cell.gd_accuracy, cell.gd_mean, cell.gd_std, ng);
    mean_std(cell.lngd_accuracy, cell.lngd_mean, cell.lngd_std, nl);
    cell.missing = ng == 0 || nl == 0;
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<LabelNoiseSpec> default_noise_variants() {
  return {LabelNoiseSpec::flip(0.1),          LabelNoiseSpec::flip(0.3),
          LabelNoiseSpec::flip(0.4),          LabelNoiseSpec::gaussian(1.0, 1.0),
          LabelNoiseSpec::gaussian(0.6, 1.0), LabelNoiseSpec::uniform(-1.0, 2.0),
          LabelNoiseSpec::uniform(-2.0, 3.0)};
}

NoiseComparisonResult run_noise_comparison(const RunConfig& config,
                                           const std::vector<LabelNoiseSpec>& noises,
                                           const ArmOptions& opt) {
  validate(config);
  NoiseComparisonResult r;
  r.config = config;
  r.baseline = run_arm(config, "gd", LabelNoiseSpec::none(), opt);
  for (const auto& nz : noises) r.arms.push_back(run_arm(config, nz.describe(), nz, opt));
  return r;
}

RunConfig q_sweep_config(const RunConfig& base, int q) {
  RunConfig c = base;
  c.q = q;
  if (q == 3) {
    c.eta = 0.5;
    c.m = 20;
    c.n = 200;
    c.mu_scale = 2.0;
    c.sigma_p = 0.5;
    c.steps = std::max<std::size_t>(c.steps, kQ3MinSteps);
  } else if (q == 4) {
    c.eta = 0.1;
    c.m = 20;
    c.n = 50;
    c.mu_scale = 5.0;
    c.sigma_p = 0.5;
  } else if (q != 2) {
    throw std::invalid_argument("q: must be 2, 3 or 4, got " + std::to_string(q));
  }
  return c;
}

std::vector<QSweepEntry> run_q_sweep(const RunConfig& base, const std::vector<int>& qs,
                                     const ArmOptions& opt) {
  std::vector<QSweepEntry> out;
  for (int q : qs) out.push_back({q, run_dynamics(q_sweep_config(base, q), opt)});
  return out;
}

// ---------------------------------------------------------------------------

namespace {

nlohmann::json num_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

}  // namespace

nlohmann::json arm_report_json(const ArmResult& arm) {
  nlohmann::json j = {{"name", arm.name},
                      {"noise", label_noise_to_json(arm.noise)},
                      {"ok", arm.ok()},
                      {"error", arm.error},
                      {"aborted", arm.trace.aborted},
                      {"abort_step", arm.trace.abort_step},
                      {"abort_reason", arm.trace.abort_reason},
                      {"final_test_accuracy", num_or_null(arm.final_test_accuracy())},
                      {"final_clean_train_loss", num_or_null(arm.final_clean_loss())},
                      {"rho_bar_decreases", arm.trace.rho_bar_decreases},
                      {"verdicts", to_json(arm.verdicts)}};
  j["bound_monitor"] = arm.monitor ? to_json(*arm.monitor) : nlohmann::json(nullptr);
  j["stage2"] = arm.stage2 ? to_json(*arm.stage2) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json dynamics_report_json(const DynamicsResult& r) {
  return {{"config", run_config_to_json(r.config)},
          {"assumptions", to_json(r.assumptions)},
          {"stage_times", {{"gd", to_json(r.stage_gd)}, {"lngd", to_json(r.stage_lngd)}}},
          {"arms", {arm_report_json(r.gd), arm_report_json(r.lngd)}}};
}

nlohmann::json heatmap_report_json(const HeatmapResult& r) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : r.cells) {
    nlohmann::json g = nlohmann::json::array(), l = nlohmann::json::array();
    for (double v : c.gd_accuracy) g.push_back(num_or_null(v));
    for (double v : c.lngd_accuracy) l.push_back(num_or_null(v));
    cells.push_back({{"row", c.row}, {"col", c.col}, {"snr", c.snr}, {"n", c.n},
                     {"mu_scale", c.mu_scale}, {"seeds", c.seeds},
                     {"gd_accuracy", g}, {"lngd_accuracy", l},
                     {"gd_mean", num_or_null(c.gd_mean)}, {"gd_std", c.gd_std},
                     {"lngd_mean", num_or_null(c.lngd_mean)}, {"lngd_std", c.lngd_std},
                     {"missing", c.missing}, {"reason", c.reason}});
  }
  return {{"grid", sweep_config_to_json(r.grid)}, {"cells", cells}};
}

}  // namespace lngd
