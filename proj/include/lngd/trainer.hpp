#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lngd/decomposition.hpp"
#include "lngd/label_noise.hpp"
#include "lngd/network.hpp"

namespace lngd {

struct TrainConfig {
  double eta = 0.5;
  std::size_t steps = 2000;
  LabelNoiseSpec noise;
  std::size_t log_stride = 10;
  std::uint64_t seed = 0;
  std::size_t n_test = 2000;
  /// Keep a full coefficient snapshot at every logged step (needed by the
  /// bound monitor and coefficient CSV export).
  bool record_coefficients = true;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

/// Throws std::invalid_argument naming the offending field.
void validate(const TrainConfig& config);

struct NetworkShape {
  std::size_t m = 20;
  int q = 2;
  double sigma_0 = 0.01;

  friend bool operator==(const NetworkShape&, const NetworkShape&) = default;
};

struct TraceRow {
  std::size_t step = 0;
  double clean_train_loss = 0.0;
  double noisy_train_loss = 0.0;
  double test_error_01 = 0.0;
  double max_gamma = 0.0;
  double mean_gamma = 0.0;
  double max_rho_bar = 0.0;
  double mean_rho_bar = 0.0;
  double min_rho_under = 0.0;
  double ratio_rho_over_gamma = 0.0;
  double iota_mean = 0.0;
  double iota_max = 0.0;
  std::size_t flip_count = 0;
};

struct CoefficientSnapshot {
  std::size_t step = 0;
  Matrix gamma;
  std::array<Matrix, 2> rho_bar;
  std::array<Matrix, 2> rho_under;
};

struct TrainTrace {
  std::vector<TraceRow> rows;
  IotaSeries iota;
  std::vector<CoefficientSnapshot> snapshots;
  std::vector<int> labels;  // training labels, for index-aware monitors

  std::size_t total_steps = 0;
  double eta = 0.0;
  LabelNoiseSpec noise;
  std::size_t d = 0;
  std::size_t n = 0;
  std::size_t m = 0;

  /// Count of (step, j, r, i) where rho_bar received a negative increment.
  std::size_t rho_bar_decreases = 0;

  bool aborted = false;
  std::size_t abort_step = 0;
  std::string abort_reason;
};

class NonFiniteError : public std::runtime_error {
 public:
  NonFiniteError(std::size_t step, const std::string& what)
      : std::runtime_error(what), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

/// Performs W <- W - eta * grad of the eps-weighted loss and returns the
/// quantities the coefficient recurrences need. `pass`, when given, must be
/// the forward pass of `net` on `data`. Throws NonFiniteError (leaving `net`
/// unchanged) if the gradient is not finite.
StepContext train_step(Network& net, const Dataset& data,
                       std::span<const double> multipliers, double eta,
                       std::size_t step,
                       std::optional<ForwardPass> pass = std::nullopt);

struct TrainHooks {
  /// Called at every logged step, before the update of that step.
  std::function<void(std::size_t step, const Network&, const CoefficientState&,
                     const Dataset& train)>
      on_log;
};

struct TrainResult {
  Network network;
  TrainTrace trace;
  CoefficientState state;
  Dataset train;
  Dataset test;
  StreamSeeds seeds;
};

/// Full-batch (label-noise) gradient descent. Train data, test data, init
/// and label noise come from four sub-streams of config.seed, so changing
/// `steps` or `noise` never perturbs the data or the initialization.
TrainResult train_run(const TrainConfig& config, const SignalSpec& spec,
                      std::size_t n, const NetworkShape& shape,
                      const TrainHooks& hooks = {});

}  // namespace lngd
