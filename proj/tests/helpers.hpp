#pragma once

#include <cmath>
#include <vector>

#include "lngd/network.hpp"

namespace testutil {

using namespace lngd;

inline Dataset small_dataset(std::size_t d, std::size_t n, std::uint64_t seed,
                             double mu_scale = 2.0, double sigma_p = 0.5) {
  Engine rng = make_engine(seed);
  return generate_dataset(SignalSpec::axis_aligned(d, mu_scale, sigma_p), n, rng, seed);
}

/// Mean eps-weighted loss, evaluated sample by sample through forward().
inline double reference_loss(const Network& net, const Dataset& data,
                             const std::vector<double>& eps) {
  double s = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Sample x = data.sample(i);
    const double f = forward(net, x.patch1, x.patch2);
    const double z = eps[i] * x.label * f;
    s += std::log1p(std::exp(-z));
  }
  return s / static_cast<double>(data.size());
}

}  // namespace testutil
