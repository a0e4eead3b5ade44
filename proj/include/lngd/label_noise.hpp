#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "lngd/rng.hpp"

namespace lngd {

/// Distribution of the per-sample, per-step label multipliers eps_i^(t).
class LabelNoiseSpec {
 public:
  enum class Kind { none, flip, gaussian, uniform };

  LabelNoiseSpec() = default;

  static LabelNoiseSpec none() { return {}; }
  /// eps = -1 with probability p, +1 otherwise. Requires 0 <= p <= 1.
  static LabelNoiseSpec flip(double p);
  /// eps ~ N(mean, stddev^2). Requires stddev >= 0.
  static LabelNoiseSpec gaussian(double mean, double stddev);
  /// eps ~ U[lo, hi]. Requires lo < hi.
  static LabelNoiseSpec uniform(double lo, double hi);

  Kind kind() const { return kind_; }
  double p() const { return a_; }
  double mean() const { return a_; }
  double stddev() const { return b_; }
  double lo() const { return a_; }
  double hi() const { return b_; }

  /// True when every draw is exactly +1.
  bool is_identity() const;

  /// "none", "flip(0.1)", "gaussian(1,1)", "uniform(-1,2)".
  std::string describe() const;

  friend bool operator==(const LabelNoiseSpec&, const LabelNoiseSpec&) = default;

 private:
  LabelNoiseSpec(Kind k, double a, double b) : kind_(k), a_(a), b_(b) {}

  Kind kind_ = Kind::none;
  double a_ = 0.0;
  double b_ = 0.0;
};

std::vector<double> sample_multipliers(const LabelNoiseSpec& noise,
                                       std::size_t n, Engine& rng);

/// Number of negative multipliers (label flips for flip noise).
std::size_t count_flips(std::span<const double> multipliers);

nlohmann::json label_noise_to_json(const LabelNoiseSpec& noise);
LabelNoiseSpec label_noise_from_json(const nlohmann::json& j);

}  // namespace lngd
