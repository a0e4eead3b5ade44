#include "lngd/label_noise.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace lngd {

LabelNoiseSpec LabelNoiseSpec::flip(double p) {
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("flip noise: p must lie in [0, 1]");
  return {Kind::flip, p, 0.0};
}

LabelNoiseSpec LabelNoiseSpec::gaussian(double mean, double stddev) {
  if (!std::isfinite(mean) || !(stddev >= 0.0) || !std::isfinite(stddev))
    throw std::invalid_argument("gaussian noise: need finite mean and stddev >= 0");
  return {Kind::gaussian, mean, stddev};
}

LabelNoiseSpec LabelNoiseSpec::uniform(double lo, double hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi))
    throw std::invalid_argument("uniform noise: need finite lo < hi");
  return {Kind::uniform, lo, hi};
}

bool LabelNoiseSpec::is_identity() const {
  switch (kind_) {
    case Kind::none: return true;
    case Kind::flip: return a_ == 0.0;
    case Kind::gaussian: return a_ == 1.0 && b_ == 0.0;
    case Kind::uniform: return false;
  }
  return false;
}

std::string LabelNoiseSpec::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::none: os << "none"; break;
    case Kind::flip: os << "flip(" << a_ << ")"; break;
    case Kind::gaussian: os << "gaussian(" << a_ << "," << b_ << ")"; break;
    case Kind::uniform: os << "uniform(" << a_ << "," << b_ << ")"; break;
  }
  return os.str();
}

std::vector<double> sample_multipliers(const LabelNoiseSpec& noise,
                                       std::size_t n, Engine& rng) {
  std::vector<double> eps(n, 1.0);
  switch (noise.kind()) {
    case LabelNoiseSpec::Kind::none:
      break;
    case LabelNoiseSpec::Kind::flip: {
      std::bernoulli_distribution flip(noise.p());
      for (auto& e : eps) e = flip(rng) ? -1.0 : 1.0;
      break;
    }
    case LabelNoiseSpec::Kind::gaussian: {
      if (noise.stddev() == 0.0) {
        std::fill(eps.begin(), eps.end(), noise.mean());
        break;
      }
      std::normal_distribution<double> normal(noise.mean(), noise.stddev());
      for (auto& e : eps) e = normal(rng);
      break;
    }
    case LabelNoiseSpec::Kind::uniform: {
      std::uniform_real_distribution<double> unif(noise.lo(), noise.hi());
      for (auto& e : eps) e = unif(rng);
      break;
    }
  }
  return eps;
}

std::size_t count_flips(std::span<const double> multipliers) {
  return static_cast<std::size_t>(std::count_if(
      multipliers.begin(), multipliers.end(), [](double e) { return e < 0.0; }));
}

nlohmann::json label_noise_to_json(const LabelNoiseSpec& noise) {
  switch (noise.kind()) {
    case LabelNoiseSpec::Kind::none: return {{"kind", "none"}};
    case LabelNoiseSpec::Kind::flip: return {{"kind", "flip"}, {"p", noise.p()}};
    case LabelNoiseSpec::Kind::gaussian:
      return {{"kind", "gaussian"}, {"mean", noise.mean()}, {"std", noise.stddev()}};
    case LabelNoiseSpec::Kind::uniform:
      return {{"kind", "uniform"}, {"lo", noise.lo()}, {"hi", noise.hi()}};
  }
  return {};
}

namespace {

void expect_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed) {
  for (const auto& [key, _] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(),
                     [&](const char* k) { return key == k; }))
      throw std::invalid_argument("noise: unknown key '" + key + "'");
  }
}

}  // namespace

LabelNoiseSpec label_noise_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("noise: expected an object");
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "none") {
    expect_keys(j, {"kind"});
    return LabelNoiseSpec::none();
  }
  if (kind == "flip") {
    expect_keys(j, {"kind", "p"});
    return LabelNoiseSpec::flip(j.at("p").get<double>());
  }
  if (kind == "gaussian") {
    expect_keys(j, {"kind", "mean", "std"});
    return LabelNoiseSpec::gaussian(j.at("mean").get<double>(), j.at("std").get<double>());
  }
  if (kind == "uniform") {
    expect_keys(j, {"kind", "lo", "hi"});
    return LabelNoiseSpec::uniform(j.at("lo").get<double>(), j.at("hi").get<double>());
  }
  throw std::invalid_argument("noise: unknown kind '" + kind +
                              "' (expected none, flip, gaussian, uniform)");
}

}  // namespace lngd
