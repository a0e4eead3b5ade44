#include "lngd/data_model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace lngd {

SignalSpec::SignalSpec(Vector mu, double sigma_p)
    : mu_(std::move(mu)), sigma_p_(sigma_p), mu_norm_(mu_.norm()) {
  if (mu_.size() < 2)
    throw std::invalid_argument("SignalSpec: d must be at least 2");
  if (!(mu_norm_ > 0.0) || !std::isfinite(mu_norm_))
    throw std::invalid_argument("SignalSpec: mu must have positive finite norm");
  if (!(sigma_p > 0.0) || !std::isfinite(sigma_p))
    throw std::invalid_argument("SignalSpec: sigma_p must be positive");
}

SignalSpec SignalSpec::axis_aligned(std::size_t d, double mu_scale,
                                    double sigma_p) {
  Vector mu = Vector::Zero(static_cast<Eigen::Index>(d));
  if (d > 0) mu[0] = mu_scale;
  return SignalSpec(std::move(mu), sigma_p);
}

Dataset::Dataset(SignalSpec spec, std::vector<int> labels,
                 std::vector<int> signal_patch_index, Matrix noise,
                 std::uint64_t seed_record)
    : spec_(std::move(spec)),
      labels_(std::move(labels)),
      patch_index_(std::move(signal_patch_index)),
      noise_(std::move(noise)),
      seed_record_(seed_record) {
  const auto n = static_cast<Eigen::Index>(labels_.size());
  if (patch_index_.size() != labels_.size() || noise_.rows() != n)
    throw std::invalid_argument("Dataset: inconsistent sample count");
  if (n > 0 && noise_.cols() != static_cast<Eigen::Index>(spec_.d()))
    throw std::invalid_argument("Dataset: noise dimension does not match d");
  for (int y : labels_)
    if (y != 1 && y != -1)
      throw std::invalid_argument("Dataset: labels must be +1 or -1");
  for (int k : patch_index_)
    if (k != 1 && k != 2)
      throw std::invalid_argument("Dataset: signal_patch_index must be 1 or 2");
  noise_norms_sq_ = n > 0 ? Vector(noise_.rowwise().squaredNorm()) : Vector();
}

Sample Dataset::sample(std::size_t i) const {
  Sample s;
  s.label = labels_.at(i);
  s.signal_patch_index = patch_index_[i];
  s.noise_vector = noise_.row(static_cast<Eigen::Index>(i)).transpose();
  Vector signal = static_cast<double>(s.label) * spec_.mu();
  if (s.signal_patch_index == 1) {
    s.patch1 = std::move(signal);
    s.patch2 = s.noise_vector;
  } else {
    s.patch1 = s.noise_vector;
    s.patch2 = std::move(signal);
  }
  return s;
}

Vector project_noise(const SignalSpec& spec, const Vector& z) {
  const Vector& mu = spec.mu();
  return spec.sigma_p() * (z - mu * (mu.dot(z) / spec.mu_norm_sq()));
}

Vector sample_noise_vector(const SignalSpec& spec, Engine& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector z(static_cast<Eigen::Index>(spec.d()));
  for (Eigen::Index k = 0; k < z.size(); ++k) z[k] = normal(rng);
  return project_noise(spec, z);
}

Dataset generate_dataset(const SignalSpec& spec, std::size_t n, Engine& rng,
                         std::uint64_t seed_record) {
  std::vector<int> labels(n);
  std::vector<int> index(n);
  Matrix noise(static_cast<Eigen::Index>(n),
               static_cast<Eigen::Index>(spec.d()));
  std::bernoulli_distribution coin(0.5);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = coin(rng) ? 1 : -1;
    index[i] = coin(rng) ? 2 : 1;
    noise.row(static_cast<Eigen::Index>(i)) =
        sample_noise_vector(spec, rng).transpose();
  }
  return Dataset(spec, std::move(labels), std::move(index), std::move(noise),
                 seed_record);
}

double compute_snr(double mu_norm, double sigma_p, std::size_t d) {
  return mu_norm / (sigma_p * std::sqrt(static_cast<double>(d)));
}

double compute_snr(const SignalSpec& spec) {
  return compute_snr(spec.mu_norm(), spec.sigma_p(), spec.d());
}

namespace {

std::vector<double> to_std(const Vector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Vector from_std(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

nlohmann::json signal_spec_to_json(const SignalSpec& spec) {
  return {{"d", spec.d()}, {"sigma_p", spec.sigma_p()}, {"mu", to_std(spec.mu())}};
}

SignalSpec signal_spec_from_json(const nlohmann::json& j) {
  auto mu = from_std(j.at("mu").get<std::vector<double>>());
  if (j.contains("d") && j.at("d").get<std::size_t>() != static_cast<std::size_t>(mu.size()))
    throw std::invalid_argument("SignalSpec JSON: d does not match length of mu");
  return SignalSpec(std::move(mu), j.at("sigma_p").get<double>());
}

nlohmann::json dataset_to_json(const Dataset& data) {
  nlohmann::json samples = nlohmann::json::array();
  for (std::size_t i = 0; i < data.size(); ++i) {
    samples.push_back(
        {{"label", data.label(i)},
         {"signal_patch_index", data.signal_patch_index()[i]},
         {"noise_vector",
          to_std(data.noise().row(static_cast<Eigen::Index>(i)).transpose())}});
  }
  return {{"format", "lngd.dataset"},
          {"version", 1},
          {"spec", signal_spec_to_json(data.spec())},
          {"seed_record", data.seed_record()},
          {"samples", std::move(samples)}};
}

Dataset dataset_from_json(const nlohmann::json& j) {
  if (j.value("format", std::string{}) != "lngd.dataset")
    throw std::invalid_argument("not an lngd.dataset document");
  if (j.value("version", 0) != 1)
    throw std::invalid_argument("unsupported lngd.dataset version");
  SignalSpec spec = signal_spec_from_json(j.at("spec"));
  const auto& samples = j.at("samples");
  const std::size_t n = samples.size();
  std::vector<int> labels(n), index(n);
  Matrix noise(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(spec.d()));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = samples[i];
    labels[i] = s.at("label").get<int>();
    index[i] = s.at("signal_patch_index").get<int>();
    auto xi = s.at("noise_vector").get<std::vector<double>>();
    if (xi.size() != spec.d())
      throw std::invalid_argument("noise_vector length does not match d");
    noise.row(static_cast<Eigen::Index>(i)) = from_std(xi).transpose();
  }
  return Dataset(std::move(spec), std::move(labels), std::move(index),
                 std::move(noise), j.at("seed_record").get<std::uint64_t>());
}

}  // namespace lngd
