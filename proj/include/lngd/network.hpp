#pragma once

#include <cstddef>
#include <span>

#include "lngd/data_model.hpp"

namespace lngd {

/// Two-layer convolutional network with a fixed +1/-1 second layer.
/// Column r of w_plus (w_minus) is the filter w_{+1,r} (w_{-1,r}); both
/// filters are applied to each patch and the activation is max(0, z)^q.
struct Network {
  Matrix w_plus;   // d x m
  Matrix w_minus;  // d x m
  int q = 2;

  std::size_t d() const { return static_cast<std::size_t>(w_plus.rows()); }
  std::size_t m() const { return static_cast<std::size_t>(w_plus.cols()); }

  const Matrix& branch(int j) const { return j > 0 ? w_plus : w_minus; }
  Matrix& branch(int j) { return j > 0 ? w_plus : w_minus; }
};

/// Throws std::invalid_argument on shape mismatch, non-finite entries or q < 2.
void validate(const Network& net);

Network zero_network(std::size_t d, std::size_t m, int q = 2);

/// i.i.d. N(0, sigma_0^2) entries, +1 branch drawn first. Throws on
/// sigma_0 <= 0 or zero dimensions.
Network init_network(std::size_t d, std::size_t m, int q, double sigma_0,
                     Engine& rng);

double activation(double z, int q);
double activation_derivative(double z, int q);

/// f = F_{+1} - F_{-1} for a single input made of two patches.
double forward(const Network& net, const Vector& patch1, const Vector& patch2);

/// log(1 + exp(-z)), overflow free.
double logistic_loss(double z);
/// -1 / (1 + exp(z)).
double loss_derivative(double z);

/// Per-branch inner products for a whole dataset.
struct BranchProjections {
  Vector signal;  // m:     <w_r, mu>
  Matrix noise;   // n x m: <w_r, xi_i>
};

struct ForwardPass {
  BranchProjections plus;
  BranchProjections minus;
  Vector outputs;  // f(W, x_i)

  const BranchProjections& branch(int j) const { return j > 0 ? plus : minus; }
};

ForwardPass forward_pass(const Network& net, const Dataset& data);

struct Gradient {
  Matrix g_plus;
  Matrix g_minus;

  const Matrix& branch(int j) const { return j > 0 ? g_plus : g_minus; }
};

/// Gradient of (1/n) sum_i loss(eps_i y_i f_i) given a precomputed forward
/// pass. `loss_derivs`, when non-empty, receives loss'(eps_i y_i f_i).
Gradient gradient_from_pass(const Network& net, const Dataset& data,
                            const ForwardPass& pass,
                            std::span<const double> multipliers,
                            std::span<double> loss_derivs = {});

/// Mean logistic loss with the true labels. Throws on an empty dataset.
double clean_batch_loss(const Network& net, const Dataset& data);
double clean_batch_loss(const Dataset& data, const ForwardPass& pass);

/// Mean of loss(eps_i y_i f_i).
double noisy_batch_loss(const Dataset& data, const ForwardPass& pass,
                        std::span<const double> multipliers);

Gradient full_batch_gradient(const Network& net, const Dataset& data,
                             std::span<const double> multipliers);

/// Fraction of points with y != sign(f); f == 0 counts as an error.
double zero_one_error(const Network& net, const Dataset& test);
double zero_one_error(const Dataset& test, const ForwardPass& pass);

/// {"format": "lngd.network", "version": 1, "d", "m", "q",
///  "w_plus": row-major d*m numbers, "w_minus": ...}
nlohmann::json network_to_json(const Network& net);
Network network_from_json(const nlohmann::json& j);

}  // namespace lngd
