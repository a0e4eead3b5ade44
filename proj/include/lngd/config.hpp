#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "lngd/data_model.hpp"
#include "lngd/label_noise.hpp"
#include "lngd/trainer.hpp"

namespace lngd {

/// Raised for malformed or out-of-range configuration; `key()` names the
/// offending field ("" for whole-document problems).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::runtime_error(key.empty() ? message : key + ": " + message),
        key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

/// One training configuration. mu = mu_scale * e_1.
struct RunConfig {
  std::size_t d = 2000;
  std::size_t n = 200;
  double mu_scale = 2.0;
  double sigma_p = 0.5;
  LabelNoiseSpec noise = LabelNoiseSpec::flip(0.1);
  double eta = 0.5;
  std::size_t steps = 2000;
  std::uint64_t seed = 0;
  std::size_t m = 20;
  int q = 2;
  double sigma_0 = 0.01;
  std::size_t log_stride = 10;
  std::size_t n_test = 2000;
  std::size_t coef_stride = 500;  // steps between rows of coefficients.csv
  double epsilon = 0.05;          // GD train-loss target
  double c_test = 1.0;

  SignalSpec spec() const;
  NetworkShape shape() const;
  TrainConfig train_config(const LabelNoiseSpec& arm_noise) const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Keys with their defaults, in emission order.
const std::vector<std::string>& run_config_keys();

/// Strict parse: unknown keys, wrong types and out-of-range values throw
/// ConfigError. Either "p" (flip rate) or "noise" (object) may be given,
/// not both.
RunConfig parse_run_config(const nlohmann::json& j);
nlohmann::json run_config_to_json(const RunConfig& c);
/// Throws ConfigError on the first invalid field.
void validate(const RunConfig& c);

struct SweepConfig {
  std::vector<double> snr_values{0.03, 0.06, 0.09};
  std::vector<std::size_t> n_values{100, 300};
  std::size_t steps = 1000;
  double eta = 1.0;
  std::size_t seeds_per_cell = 3;
  std::size_t d = 2000;
  std::size_t m = 20;
  int q = 2;
  double sigma_0 = 0.01;
  double sigma_p = 1.0;
  double p = 0.1;
  std::size_t n_test = 2000;
  std::uint64_t seed = 0;
  std::size_t threads = 0;  // 0: hardware concurrency

  friend bool operator==(const SweepConfig&, const SweepConfig&) = default;
};

SweepConfig parse_sweep_config(const nlohmann::json& j);
nlohmann::json sweep_config_to_json(const SweepConfig& c);
void validate(const SweepConfig& c);

nlohmann::json read_json_file(const std::filesystem::path& path);

/// Applies "key=value" overrides (value parsed as JSON, falling back to a
/// string) on top of a config document.
nlohmann::json apply_overrides(nlohmann::json base,
                               const std::vector<std::string>& overrides);

}  // namespace lngd
