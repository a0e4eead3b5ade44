#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "lngd/experiments.hpp"

using namespace lngd;

namespace {

RunConfig tiny() {
  RunConfig c;
  c.d = 300;
  c.n = 20;
  c.m = 5;
  c.steps = 40;
  c.log_stride = 10;
  c.n_test = 200;
  c.sigma_0 = 0.05;
  c.seed = 3;
  return c;
}

SweepConfig tiny_grid() {
  SweepConfig g;
  g.snr_values = {0.05, 0.1};
  g.n_values = {10, 20};
  g.steps = 20;
  g.seeds_per_cell = 2;
  g.d = 200;
  g.m = 4;
  g.n_test = 100;
  g.seed = 8;
  return g;
}

}  // namespace

TEST_CASE("paired arms share everything but the noise stream") {
  RunConfig c = tiny();
  c.noise = LabelNoiseSpec::flip(0.0);
  const DynamicsResult r = run_dynamics(c);
  REQUIRE(r.gd.ok());
  REQUIRE(r.lngd.ok());
  REQUIRE(r.gd.trace.rows.size() == r.lngd.trace.rows.size());
  for (std::size_t k = 0; k < r.gd.trace.rows.size(); ++k) {
    CHECK(r.gd.trace.rows[k].clean_train_loss == r.lngd.trace.rows[k].clean_train_loss);
    CHECK(r.gd.trace.rows[k].test_error_01 == r.lngd.trace.rows[k].test_error_01);
  }
  CHECK(r.gd.monitor.has_value());
  CHECK(r.lngd.stage2.has_value());
}

TEST_CASE("re-running a dynamics config is reproducible") {
  const DynamicsResult a = run_dynamics(tiny());
  const DynamicsResult b = run_dynamics(tiny());
  CHECK(a.lngd.trace.rows.back().clean_train_loss == b.lngd.trace.rows.back().clean_train_loss);
  CHECK(a.lngd.trace.rows.back().iota_mean == b.lngd.trace.rows.back().iota_mean);
}

TEST_CASE("an aborting arm does not take the other down") {
  RunConfig c = tiny();
  c.eta = 1e8;
  c.sigma_0 = 1.0;
  c.steps = 100;
  const DynamicsResult r = run_dynamics(c);
  CHECK_FALSE(r.gd.ok());
  CHECK(r.gd.trace.aborted);
  CHECK_FALSE(r.lngd.trace.rows.empty());
}

TEST_CASE("noise comparison: a degenerate gaussian equals the baseline") {
  ArmOptions opt;
  opt.keep_snapshots = false;
  const auto r = run_noise_comparison(
      tiny(), {LabelNoiseSpec::gaussian(1.0, 0.0), LabelNoiseSpec::uniform(-1.0, 2.0)}, opt);
  REQUIRE(r.arms.size() == 2);
  CHECK(r.arms[0].trace.rows.back().clean_train_loss ==
        r.baseline.trace.rows.back().clean_train_loss);
  CHECK(std::isfinite(r.arms[1].final_clean_loss()));
}

TEST_CASE("q sweep hyperparameters") {
  const RunConfig base = tiny();
  CHECK(q_sweep_config(base, 2) == base);
  const RunConfig q3 = q_sweep_config(base, 3);
  CHECK(q3.q == 3);
  CHECK(q3.eta == 0.5);
  CHECK(q3.m == 20);
  CHECK(q3.n == 200);
  CHECK(q3.mu_scale == 2.0);
  CHECK(q3.sigma_p == 0.5);
  CHECK(q3.steps == std::max<std::size_t>(base.steps, kQ3MinSteps));
  const RunConfig q4 = q_sweep_config(base, 4);
  CHECK(q4.eta == 0.1);
  CHECK(q4.m == 20);
  CHECK(q4.n == 50);
  CHECK(q4.mu_scale == 5.0);
  CHECK(q4.sigma_p == 0.5);
  CHECK(q4.steps == base.steps);
  CHECK_THROWS(q_sweep_config(base, 5));
}

TEST_CASE("heatmap cells hit their target SNR") {
  const SweepConfig g = tiny_grid();
  const RunConfig c = cell_run_config(g, 1, 0, 0);
  CHECK(compute_snr(c.spec()) == doctest::Approx(0.1));
  CHECK(c.n == 10);
  CHECK(c.seed == cell_seed(g.seed, 1, 0, 0));
}

TEST_CASE("heatmap results do not depend on the number of threads") {
  SweepConfig g = tiny_grid();
  g.threads = 1;
  const HeatmapResult a = run_heatmap(g);
  g.threads = 3;
  const HeatmapResult b = run_heatmap(g);
  REQUIRE(a.cells.size() == 4);
  for (std::size_t k = 0; k < a.cells.size(); ++k) {
    CHECK(a.cells[k].gd_accuracy == b.cells[k].gd_accuracy);
    CHECK(a.cells[k].lngd_accuracy == b.cells[k].lngd_accuracy);
    CHECK_FALSE(a.cells[k].missing);
    CHECK(a.cells[k].gd_std >= 0.0);
    for (double v : a.cells[k].lngd_accuracy) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("a 1x1 heatmap replicate equals the dynamics run of its cell config") {
  SweepConfig g = tiny_grid();
  g.snr_values = {0.1};
  g.n_values = {20};
  g.seeds_per_cell = 1;
  const HeatmapResult h = run_heatmap(g);
  const DynamicsResult d = run_dynamics(cell_run_config(g, 0, 0, 0));
  CHECK(h.cell(0, 0).gd_accuracy[0] == d.gd.final_test_accuracy());
  CHECK(h.cell(0, 0).lngd_accuracy[0] == d.lngd.final_test_accuracy());
}

TEST_CASE("a failing cell is recorded as missing") {
  SweepConfig g = tiny_grid();
  g.snr_values = {0.05};
  g.n_values = {10};
  g.eta = 1e8;
  g.sigma_0 = 1.0;
  g.steps = 100;
  const HeatmapResult h = run_heatmap(g);
  CHECK(h.cells[0].missing);
  CHECK_FALSE(h.cells[0].reason.empty());
}
