#include "lngd/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace lngd {

CoefficientState::CoefficientState(const Network& init, const Dataset& data)
    : step(0), xi_norms_sq(data.noise_norms_sq()), w0(init) {
  const auto m = static_cast<Eigen::Index>(init.m());
  const auto n = static_cast<Eigen::Index>(data.size());
  gamma = Matrix::Zero(2, m);
  for (auto& r : rho_bar) r = Matrix::Zero(m, n);
  for (auto& r : rho_under) r = Matrix::Zero(m, n);
}

CoefficientUpdateStats update_coefficients(CoefficientState& state,
                                           const StepContext& ctx, double eta,
                                           const Dataset& data) {
  if (ctx.step != state.step)
    throw std::invalid_argument("update_coefficients: context is for step " +
                                std::to_string(ctx.step) + " but state is at step " +
                                std::to_string(state.step));
  const std::size_t n = state.n();
  if (ctx.multipliers.size() != n || ctx.loss_derivs.size() != n || data.size() != n)
    throw std::invalid_argument("update_coefficients: sample count mismatch");

  const auto m = static_cast<Eigen::Index>(state.m());
  const int q = state.w0.q;
  const double scale = eta / (static_cast<double>(n) * static_cast<double>(m));
  const double mu_sq = data.spec().mu_norm_sq();

  CoefficientUpdateStats stats;
  for (int j : {1, -1}) {
    const auto b = branch_index(j);
    const BranchProjections& proj = ctx.pass.branch(j);
    for (Eigen::Index r = 0; r < m; ++r) {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double y = data.label(i);
        acc += ctx.loss_derivs[i] * activation_derivative(y * proj.signal[r], q) *
               ctx.multipliers[i];
      }
      state.gamma(static_cast<Eigen::Index>(b), r) -= scale * acc * mu_sq;
    }
    for (std::size_t i = 0; i < n; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      const double base = scale * ctx.loss_derivs[i] * state.xi_norms_sq[ii] *
                          ctx.multipliers[i];
      const bool same_class = data.label(i) == j;
      for (Eigen::Index r = 0; r < m; ++r) {
        const double inc = base * activation_derivative(proj.noise(ii, r), q);
        if (same_class) {
          if (-inc < 0.0) ++stats.rho_bar_decreases;
          state.rho_bar[b](r, ii) -= inc;
        } else {
          state.rho_under[b](r, ii) += inc;
        }
      }
    }
  }
  ++state.step;
  return stats;
}

Network reconstruct_weights(const CoefficientState& state, const Dataset& data,
                            const Vector& mu) {
  Network out = state.w0;
  const double mu_sq = mu.squaredNorm();
  const Vector inv_xi = state.xi_norms_sq.cwiseInverse();
  for (int j : {1, -1}) {
    const auto b = branch_index(j);
    Matrix& w = out.branch(j);
    const Vector signal = (static_cast<double>(j) / mu_sq) *
                          state.gamma.row(static_cast<Eigen::Index>(b)).transpose();
    w.noalias() += mu * signal.transpose();
    if (state.n() == 0) continue;
    // n x m: rho_{j,r,i} / |xi_i|^2
    const Matrix coeff =
        ((state.rho_bar[b] + state.rho_under[b]) * inv_xi.asDiagonal()).transpose();
    w.noalias() += data.noise().transpose() * coeff;
  }
  return out;
}

double relative_frobenius_error(const Network& a, const Network& b) {
  const double num = (a.w_plus - b.w_plus).squaredNorm() +
                     (a.w_minus - b.w_minus).squaredNorm();
  const double den = b.w_plus.squaredNorm() + b.w_minus.squaredNorm();
  if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::sqrt(num / den);
}

ProjectionReport projection_check(const Network& net,
                                  const CoefficientState& state,
                                  const Dataset& data, const Vector& mu,
                                  double t_star, double delta) {
  ProjectionReport rep;
  const auto m = static_cast<Eigen::Index>(state.m());
  const auto n = static_cast<Eigen::Index>(state.n());
  const double d = static_cast<double>(data.d());
  rep.alpha = 4.0 * std::log(std::max(t_star, 1.0));
  rep.rho_bound = n > 0 ? 8.0 * std::sqrt(std::log(4.0 * n * n / delta) / d) *
                              static_cast<double>(n) * rep.alpha
                        : 0.0;
  rep.gamma_discrepancy = Matrix::Zero(2, m);
  std::size_t within = 0;
  for (int j : {1, -1}) {
    const auto b = branch_index(j);
    const Matrix diff = net.branch(j) - state.w0.branch(j);
    const Vector along_mu = static_cast<double>(j) * (diff.transpose() * mu);
    for (Eigen::Index r = 0; r < m; ++r) {
      const double g = std::abs(along_mu[r] - state.gamma(static_cast<Eigen::Index>(b), r));
      rep.gamma_discrepancy(static_cast<Eigen::Index>(b), r) = g;
      rep.max_gamma_discrepancy = std::max(rep.max_gamma_discrepancy, g);
    }
    rep.rho_discrepancy[b] = Matrix::Zero(m, n);
    if (n == 0) continue;
    const Matrix along_xi = (data.noise() * diff).transpose();  // m x n
    rep.rho_discrepancy[b] =
        (along_xi - state.rho_bar[b] - state.rho_under[b]).cwiseAbs();
    rep.max_rho_discrepancy =
        std::max(rep.max_rho_discrepancy, rep.rho_discrepancy[b].maxCoeff());
    within += static_cast<std::size_t>(
        (rep.rho_discrepancy[b].array() <= rep.rho_bound).count());
  }
  const double total = 2.0 * static_cast<double>(m) * static_cast<double>(n);
  rep.fraction_within_bound = total > 0.0 ? static_cast<double>(within) / total : 1.0;
  return rep;
}

double iota(const CoefficientState& state, const Dataset& data, std::size_t i) {
  if (i >= state.n())
    throw std::out_of_range("iota: sample index " + std::to_string(i) +
                            " out of range [0, " + std::to_string(state.n()) + ")");
  const auto b = branch_index(data.label(i));
  return state.rho_bar[b].col(static_cast<Eigen::Index>(i)).squaredNorm() /
         static_cast<double>(state.m());
}

Vector iota_all(const CoefficientState& state, const Dataset& data) {
  Vector out(static_cast<Eigen::Index>(state.n()));
  for (std::size_t i = 0; i < state.n(); ++i)
    out[static_cast<Eigen::Index>(i)] = iota(state, data, i);
  return out;
}

namespace {

// Visits rho_bar entries where y_i == j.
template <typename F>
void for_each_rho_bar(const CoefficientState& state, const Dataset& data, F&& f) {
  for (int j : {1, -1}) {
    const auto b = branch_index(j);
    for (std::size_t i = 0; i < state.n(); ++i) {
      if (data.label(i) != j) continue;
      const auto col = state.rho_bar[b].col(static_cast<Eigen::Index>(i));
      for (Eigen::Index r = 0; r < col.size(); ++r) f(col[r]);
    }
  }
}

template <typename F>
void for_each_rho_under(const CoefficientState& state, const Dataset& data, F&& f) {
  for (int j : {1, -1}) {
    const auto b = branch_index(j);
    for (std::size_t i = 0; i < state.n(); ++i) {
      if (data.label(i) != -j) continue;
      const auto col = state.rho_under[b].col(static_cast<Eigen::Index>(i));
      for (Eigen::Index r = 0; r < col.size(); ++r) f(col[r]);
    }
  }
}

}  // namespace

double ratio_summary(const CoefficientState& state, const Dataset& data,
                     RatioAggregation agg) {
  constexpr double floor = 1e-12;
  double num = 0.0;
  double den = 0.0;
  if (agg == RatioAggregation::max_over_max) {
    num = -std::numeric_limits<double>::infinity();
    for_each_rho_bar(state, data, [&](double v) { num = std::max(num, v); });
    if (!std::isfinite(num)) num = 0.0;
    den = state.gamma.size() > 0 ? state.gamma.maxCoeff() : 0.0;
  } else {
    std::size_t count = 0;
    for_each_rho_bar(state, data, [&](double v) { num += v; ++count; });
    if (count > 0) num /= static_cast<double>(count);
    den = state.gamma.size() > 0 ? state.gamma.mean() : 0.0;
  }
  if (num == 0.0 && den == 0.0) return 0.0;
  return num / std::max(den, floor);
}

CoefficientSummary summarize(const CoefficientState& state, const Dataset& data) {
  CoefficientSummary s;
  if (state.gamma.size() > 0) {
    s.max_gamma = state.gamma.maxCoeff();
    s.min_gamma = state.gamma.minCoeff();
    s.mean_gamma = state.gamma.mean();
  }
  constexpr double inf = std::numeric_limits<double>::infinity();
  double lo = inf, hi = -inf, sum = 0.0;
  std::size_t count = 0;
  for_each_rho_bar(state, data, [&](double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    sum += v;
    ++count;
  });
  if (count > 0) {
    s.min_rho_bar = lo;
    s.max_rho_bar = hi;
    s.mean_rho_bar = sum / static_cast<double>(count);
  }
  lo = inf;
  hi = -inf;
  count = 0;
  for_each_rho_under(state, data, [&](double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    ++count;
  });
  if (count > 0) {
    s.min_rho_under = lo;
    s.max_rho_under = hi;
  }
  return s;
}

}  // namespace lngd
