#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lngd/output.hpp"

using namespace lngd;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("lngd_test_" + name);
  fs::remove_all(p);
  return p;
}

TrainTrace small_trace() {
  RunConfig c;
  c.d = 100;
  c.n = 6;
  c.m = 3;
  c.steps = 20;
  c.log_stride = 5;
  c.n_test = 50;
  c.sigma_0 = 0.05;
  TrainConfig tc = c.train_config(c.noise);
  return train_run(tc, c.spec(), c.n, c.shape()).trace;
}

}  // namespace

TEST_CASE("17 significant digits round-trip") {
  for (double v : {0.1, 1.0 / 3.0, 2.0 / 3.0 * 1e-300, 123456789.123456789, -0.0})
    CHECK(std::stod(format_double(v)) == v);
  CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("sha256 known answer") {
  CHECK(sha256_hex("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("run directories are not overwritten without force") {
  const fs::path dir = scratch("overwrite");
  prepare_run_dir(dir, false);
  write_file(dir, "manifest.json", "{}\n");
  CHECK_THROWS_AS(prepare_run_dir(dir, false), OutputExistsError);
  CHECK_NOTHROW(prepare_run_dir(dir, true));
  fs::remove_all(dir);
}

TEST_CASE("trace and coefficient CSVs round-trip") {
  const TrainTrace tr = small_trace();
  const fs::path dir = scratch("csv");
  prepare_run_dir(dir, false);
  const std::string trace = trace_csv({{"lngd", &tr}});
  CHECK(trace.find('\r') == std::string::npos);
  write_file(dir, "trace.csv", trace);
  write_file(dir, "coefficients.csv", coefficients_csv({{"lngd", &tr}}, 10));
  const auto rows = read_trace_csv(dir / "trace.csv").at("lngd");
  REQUIRE(rows.size() == tr.rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    CHECK(rows[k].step == tr.rows[k].step);
    CHECK(rows[k].clean_train_loss == tr.rows[k].clean_train_loss);
    CHECK(rows[k].iota_max == tr.rows[k].iota_max);
    CHECK(rows[k].flip_count == tr.rows[k].flip_count);
  }
  const auto snaps = read_coefficients_csv(dir / "coefficients.csv", 3, 6).at("lngd");
  REQUIRE(snaps.size() == 3);  // steps 0, 10, 20
  CHECK(snaps[1].step == 10);
  CHECK(snaps[2].gamma == tr.snapshots.back().gamma);
  CHECK(snaps[2].rho_bar[0] == tr.snapshots.back().rho_bar[0]);
  CHECK(snaps[2].rho_under[1] == tr.snapshots.back().rho_under[1]);
  fs::remove_all(dir);
}

TEST_CASE("heatmap CSV row count") {
  HeatmapResult h;
  h.grid.snr_values = {0.03, 0.06, 0.09};
  h.grid.n_values = {100, 300};
  h.grid.seeds_per_cell = 3;
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 2; ++c) {
      CellResult cell;
      cell.snr = h.grid.snr_values[r];
      cell.n = h.grid.n_values[c];
      cell.seeds = {1, 2, 3};
      cell.gd_accuracy = {0.5, 0.5, 0.5};
      cell.lngd_accuracy = {0.9, 0.9, std::nan("")};
      h.cells.push_back(cell);
    }
  const std::string csv = heatmap_csv(h);
  const auto lines = std::count(csv.begin(), csv.end(), '\n');
  CHECK(lines == 1 + 3 * 2 * 3 * 2);
  CHECK(csv.rfind("snr,n,seed,algorithm,test_accuracy\n", 0) == 0);
  const std::string summary = heatmap_summary_csv(h);
  CHECK(std::count(summary.begin(), summary.end(), '\n') == 7);
}

TEST_CASE("manifest records seeds and digests") {
  ManifestInput in;
  in.command = "dynamics";
  in.master_seed = 5;
  in.files.push_back({"trace.csv", 3, sha256_hex("abc")});
  const auto m = build_manifest(in);
  CHECK(m.at("seeds").at("stream_ids").at("label_noise") == 3);
  CHECK(m.at("seeds").at("derived").at("data") == StreamSeeds::from_master(5).data);
  CHECK(m.at("files")[0].at("sha256") == sha256_hex("abc"));
  CHECK(m.at("tool_version") == LNGD_VERSION);
}
