#include "lngd/network.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace lngd {

void validate(const Network& net) {
  if (net.q < 2) throw std::invalid_argument("Network: q must be at least 2");
  if (net.w_plus.rows() != net.w_minus.rows() ||
      net.w_plus.cols() != net.w_minus.cols())
    throw std::invalid_argument("Network: branch shapes differ");
  if (net.w_plus.rows() < 1 || net.w_plus.cols() < 1)
    throw std::invalid_argument("Network: empty weight matrix");
  if (!net.w_plus.allFinite() || !net.w_minus.allFinite())
    throw std::invalid_argument("Network: non-finite weight");
}

Network zero_network(std::size_t d, std::size_t m, int q) {
  const auto rows = static_cast<Eigen::Index>(d);
  const auto cols = static_cast<Eigen::Index>(m);
  Network net{Matrix::Zero(rows, cols), Matrix::Zero(rows, cols), q};
  validate(net);
  return net;
}

Network init_network(std::size_t d, std::size_t m, int q, double sigma_0,
                     Engine& rng) {
  if (!(sigma_0 > 0.0) || !std::isfinite(sigma_0))
    throw std::invalid_argument("init_network: sigma_0 must be positive");
  Network net = zero_network(d, m, q);
  std::normal_distribution<double> normal(0.0, sigma_0);
  for (Matrix* w : {&net.w_plus, &net.w_minus})
    for (Eigen::Index r = 0; r < w->cols(); ++r)
      for (Eigen::Index k = 0; k < w->rows(); ++k) (*w)(k, r) = normal(rng);
  return net;
}

namespace {

double ipow(double x, int k) {
  double out = 1.0;
  for (int i = 0; i < k; ++i) out *= x;
  return out;
}

}  // namespace

double activation(double z, int q) { return z > 0.0 ? ipow(z, q) : 0.0; }

double activation_derivative(double z, int q) {
  return z > 0.0 ? q * ipow(z, q - 1) : 0.0;
}

double forward(const Network& net, const Vector& patch1,
               const Vector& patch2) {
  const auto d = static_cast<Eigen::Index>(net.d());
  if (patch1.size() != d || patch2.size() != d)
    throw std::invalid_argument("forward: patch dimension " +
                                std::to_string(patch1.size()) + "/" +
                                std::to_string(patch2.size()) +
                                " does not match network d = " +
                                std::to_string(d));
  double f = 0.0;
  for (int j : {1, -1}) {
    const Matrix& w = net.branch(j);
    const Vector a = w.transpose() * patch1;
    const Vector b = w.transpose() * patch2;
    double acc = 0.0;
    for (Eigen::Index r = 0; r < w.cols(); ++r)
      acc += activation(a[r], net.q) + activation(b[r], net.q);
    f += j * acc / static_cast<double>(w.cols());
  }
  return f;
}

double logistic_loss(double z) {
  return std::max(-z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

double loss_derivative(double z) {
  if (z > 0.0) {
    const double e = std::exp(-z);
    return -e / (1.0 + e);
  }
  return -1.0 / (1.0 + std::exp(z));
}

ForwardPass forward_pass(const Network& net, const Dataset& data) {
  if (data.d() != net.d())
    throw std::invalid_argument("forward_pass: dataset d = " +
                                std::to_string(data.d()) +
                                " does not match network d = " +
                                std::to_string(net.d()));
  ForwardPass pass;
  const auto n = static_cast<Eigen::Index>(data.size());
  const auto m = static_cast<Eigen::Index>(net.m());
  const double inv_m = 1.0 / static_cast<double>(m);
  pass.outputs = Vector::Zero(n);
  for (int j : {1, -1}) {
    BranchProjections& proj = j > 0 ? pass.plus : pass.minus;
    const Matrix& w = net.branch(j);
    proj.signal = w.transpose() * data.spec().mu();
    proj.noise = n > 0 ? Matrix(data.noise() * w) : Matrix(0, m);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double y = data.label(static_cast<std::size_t>(i));
      double acc = 0.0;
      for (Eigen::Index r = 0; r < m; ++r)
        acc += activation(y * proj.signal[r], net.q) +
               activation(proj.noise(i, r), net.q);
      pass.outputs[i] += j * acc * inv_m;
    }
  }
  return pass;
}

Gradient gradient_from_pass(const Network& net, const Dataset& data,
                            const ForwardPass& pass,
                            std::span<const double> multipliers,
                            std::span<double> loss_derivs) {
  const std::size_t n = data.size();
  if (multipliers.size() != n)
    throw std::invalid_argument("gradient: expected " + std::to_string(n) +
                                " multipliers, got " +
                                std::to_string(multipliers.size()));
  if (!loss_derivs.empty() && loss_derivs.size() != n)
    throw std::invalid_argument("gradient: loss_derivs has wrong length");
  if (n == 0) throw std::invalid_argument("gradient: empty dataset");

  const auto ni = static_cast<Eigen::Index>(n);
  const auto m = static_cast<Eigen::Index>(net.m());
  const double scale =
      1.0 / (static_cast<double>(n) * static_cast<double>(m));

  // c_i = loss'(eps_i y_i f_i) * eps_i
  Vector c(ni);
  for (std::size_t i = 0; i < n; ++i) {
    const double y = data.label(i);
    const double eps = multipliers[i];
    const double lp = loss_derivative(eps * y * pass.outputs[static_cast<Eigen::Index>(i)]);
    if (!loss_derivs.empty()) loss_derivs[i] = lp;
    c[static_cast<Eigen::Index>(i)] = lp * eps;
  }

  Gradient g;
  for (int j : {1, -1}) {
    const BranchProjections& proj = pass.branch(j);
    Vector a = Vector::Zero(m);
    Matrix b(ni, m);
    for (Eigen::Index i = 0; i < ni; ++i) {
      const double y = data.label(static_cast<std::size_t>(i));
      for (Eigen::Index r = 0; r < m; ++r) {
        a[r] += c[i] * activation_derivative(y * proj.signal[r], net.q);
        b(i, r) = c[i] * y * activation_derivative(proj.noise(i, r), net.q);
      }
    }
    Matrix grad = data.spec().mu() * a.transpose();
    grad.noalias() += data.noise().transpose() * b;
    grad *= j * scale;
    (j > 0 ? g.g_plus : g.g_minus) = std::move(grad);
  }
  return g;
}

double clean_batch_loss(const Dataset& data, const ForwardPass& pass) {
  if (data.empty()) throw std::invalid_argument("clean_batch_loss: empty dataset");
  double acc = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i)
    acc += logistic_loss(data.label(i) * pass.outputs[static_cast<Eigen::Index>(i)]);
  return acc / static_cast<double>(data.size());
}

double clean_batch_loss(const Network& net, const Dataset& data) {
  if (data.empty()) throw std::invalid_argument("clean_batch_loss: empty dataset");
  return clean_batch_loss(data, forward_pass(net, data));
}

double noisy_batch_loss(const Dataset& data, const ForwardPass& pass,
                        std::span<const double> multipliers) {
  if (data.empty()) throw std::invalid_argument("noisy_batch_loss: empty dataset");
  if (multipliers.size() != data.size())
    throw std::invalid_argument("noisy_batch_loss: multiplier length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i)
    acc += logistic_loss(multipliers[i] * data.label(i) *
                         pass.outputs[static_cast<Eigen::Index>(i)]);
  return acc / static_cast<double>(data.size());
}

Gradient full_batch_gradient(const Network& net, const Dataset& data,
                             std::span<const double> multipliers) {
  if (multipliers.size() != data.size())
    throw std::invalid_argument("full_batch_gradient: expected " +
                                std::to_string(data.size()) +
                                " multipliers, got " +
                                std::to_string(multipliers.size()));
  return gradient_from_pass(net, data, forward_pass(net, data), multipliers);
}

double zero_one_error(const Dataset& test, const ForwardPass& pass) {
  if (test.empty()) throw std::invalid_argument("zero_one_error: empty test set");
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const double f = pass.outputs[static_cast<Eigen::Index>(i)];
    const int sign = f > 0.0 ? 1 : (f < 0.0 ? -1 : 0);
    if (sign != test.label(i)) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(test.size());
}

double zero_one_error(const Network& net, const Dataset& test) {
  if (test.empty()) throw std::invalid_argument("zero_one_error: empty test set");
  return zero_one_error(test, forward_pass(net, test));
}

namespace {

std::vector<double> row_major(const Matrix& w) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(w.size()));
  for (Eigen::Index k = 0; k < w.rows(); ++k)
    for (Eigen::Index r = 0; r < w.cols(); ++r) out.push_back(w(k, r));
  return out;
}

Matrix from_row_major(const std::vector<double>& v, std::size_t d,
                      std::size_t m) {
  if (v.size() != d * m)
    throw std::invalid_argument("network JSON: weight array has wrong length");
  Matrix w(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(m));
  std::size_t idx = 0;
  for (Eigen::Index k = 0; k < w.rows(); ++k)
    for (Eigen::Index r = 0; r < w.cols(); ++r) w(k, r) = v[idx++];
  return w;
}

}  // namespace

nlohmann::json network_to_json(const Network& net) {
  return {{"format", "lngd.network"}, {"version", 1},
          {"d", net.d()},             {"m", net.m()},
          {"q", net.q},               {"w_plus", row_major(net.w_plus)},
          {"w_minus", row_major(net.w_minus)}};
}

Network network_from_json(const nlohmann::json& j) {
  if (j.value("format", std::string{}) != "lngd.network")
    throw std::invalid_argument("not an lngd.network document");
  if (j.value("version", 0) != 1)
    throw std::invalid_argument("unsupported lngd.network version");
  const auto d = j.at("d").get<std::size_t>();
  const auto m = j.at("m").get<std::size_t>();
  Network net{from_row_major(j.at("w_plus").get<std::vector<double>>(), d, m),
              from_row_major(j.at("w_minus").get<std::vector<double>>(), d, m),
              j.at("q").get<int>()};
  validate(net);
  return net;
}

}  // namespace lngd
