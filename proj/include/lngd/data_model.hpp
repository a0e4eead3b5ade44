#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "lngd/rng.hpp"

namespace lngd {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Two-patch generative model: one patch carries y * mu, the other a
/// Gaussian vector with covariance sigma_p^2 (I - mu mu^T / |mu|^2).
class SignalSpec {
 public:
  /// Throws std::invalid_argument unless d >= 2, |mu| > 0 and sigma_p > 0.
  SignalSpec(Vector mu, double sigma_p);

  /// mu = [mu_scale, 0, ..., 0] in R^d.
  static SignalSpec axis_aligned(std::size_t d, double mu_scale,
                                 double sigma_p);

  const Vector& mu() const { return mu_; }
  double sigma_p() const { return sigma_p_; }
  std::size_t d() const { return static_cast<std::size_t>(mu_.size()); }
  double mu_norm() const { return mu_norm_; }
  double mu_norm_sq() const { return mu_norm_ * mu_norm_; }

 private:
  Vector mu_;
  double sigma_p_;
  double mu_norm_;
};

struct Sample {
  Vector patch1;
  Vector patch2;
  int label = 1;
  Vector noise_vector;
  int signal_patch_index = 1;
};

/// Training or test set. Noise vectors are stored row-wise in an n x d
/// matrix; patches are assembled on demand by sample().
class Dataset {
 public:
  Dataset(SignalSpec spec, std::vector<int> labels,
          std::vector<int> signal_patch_index, Matrix noise,
          std::uint64_t seed_record);

  std::size_t size() const { return labels_.size(); }
  bool empty() const { return labels_.empty(); }
  std::size_t d() const { return spec_.d(); }

  const SignalSpec& spec() const { return spec_; }
  std::uint64_t seed_record() const { return seed_record_; }
  const std::vector<int>& labels() const { return labels_; }
  int label(std::size_t i) const { return labels_[i]; }
  const std::vector<int>& signal_patch_index() const { return patch_index_; }
  /// n x d, row i is xi_i.
  const Matrix& noise() const { return noise_; }
  /// |xi_i|^2 for every sample.
  const Vector& noise_norms_sq() const { return noise_norms_sq_; }

  Sample sample(std::size_t i) const;

 private:
  SignalSpec spec_;
  std::vector<int> labels_;
  std::vector<int> patch_index_;
  Matrix noise_;
  Vector noise_norms_sq_;
  std::uint64_t seed_record_;
};

/// xi = sigma_p * (z - mu <mu, z> / |mu|^2) for a standard Gaussian draw z.
Vector project_noise(const SignalSpec& spec, const Vector& z);

Vector sample_noise_vector(const SignalSpec& spec, Engine& rng);

Dataset generate_dataset(const SignalSpec& spec, std::size_t n, Engine& rng,
                         std::uint64_t seed_record = 0);

/// |mu| / (sigma_p sqrt(d)).
double compute_snr(const SignalSpec& spec);
double compute_snr(double mu_norm, double sigma_p, std::size_t d);

nlohmann::json signal_spec_to_json(const SignalSpec& spec);
SignalSpec signal_spec_from_json(const nlohmann::json& j);

/// {"format": "lngd.dataset", "version": 1, "spec": ..., "seed_record": ...,
///  "samples": [{"label", "signal_patch_index", "noise_vector"}, ...]}
nlohmann::json dataset_to_json(const Dataset& data);
Dataset dataset_from_json(const nlohmann::json& j);

}  // namespace lngd
