#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lngd/experiments.hpp"

namespace lngd {

/// 17 significant digits, enough to round-trip any double.
std::string format_double(double v);

std::string sha256_hex(const std::string& bytes);

/// ISO 8601 UTC, second resolution.
std::string utc_timestamp();

/// Environment variable naming the default output root ("runs" if unset).
inline constexpr const char* kOutRootEnv = "LNGD_OUT_ROOT";

std::filesystem::path default_out_root();

class OutputExistsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FileRecord {
  std::string name;
  std::size_t bytes = 0;
  std::string sha256;
};

/// Creates `dir` and refuses (OutputExistsError) if it already holds a
/// manifest.json, unless `force`.
void prepare_run_dir(const std::filesystem::path& dir, bool force);

/// Writes `content` verbatim (binary mode, so "\n" stays "\n").
FileRecord write_file(const std::filesystem::path& dir, const std::string& name,
                      const std::string& content);

using NamedTrace = std::pair<std::string, const TrainTrace*>;

/// algorithm, step, then the per-step metrics in trace order.
std::string trace_csv(const std::vector<NamedTrace>& traces);

/// algorithm, step, j, r, i, gamma, rho_bar, rho_under for every snapshot
/// whose step is a multiple of `stride` (the final step is always kept).
std::string coefficients_csv(const std::vector<NamedTrace>& traces, std::size_t stride);

/// snr, n, seed, algorithm, test_accuracy; one row per replicate and arm.
std::string heatmap_csv(const HeatmapResult& r);

/// snr, n, mu_scale, gd_mean, gd_std, lngd_mean, lngd_std, replicates, missing.
std::string heatmap_summary_csv(const HeatmapResult& r);

struct ManifestInput {
  std::string command;
  nlohmann::json config;
  nlohmann::json spec;  // may be null
  std::uint64_t master_seed = 0;
  std::string started;
  std::string finished;
  std::vector<FileRecord> files;
  nlohmann::json extra;  // merged in at top level when an object
};

nlohmann::json build_manifest(const ManifestInput& in);

/// Writes trace.csv, coefficients.csv, reports.json and manifest.json for a
/// paired dynamics run. Returns the manifest.
nlohmann::json emit_dynamics_run(const std::filesystem::path& dir, const DynamicsResult& r,
                                 bool force, const std::string& started);

// Readers used for post-hoc analysis of an emitted run directory.

std::map<std::string, std::vector<TraceRow>> read_trace_csv(const std::filesystem::path& path);

/// Rebuilds snapshots (gamma 2 x m, rho arrays m x n) per algorithm.
std::map<std::string, std::vector<CoefficientSnapshot>> read_coefficients_csv(
    const std::filesystem::path& path, std::size_t m, std::size_t n);

}  // namespace lngd
