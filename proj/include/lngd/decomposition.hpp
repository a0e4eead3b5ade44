#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "lngd/network.hpp"

namespace lngd {

/// Quantities from one gradient step that the coefficient recurrences
/// consume. Produced by train_step so both sides see identical numbers.
struct StepContext {
  std::size_t step = 0;
  std::vector<double> multipliers;  // eps_i^(t)
  std::vector<double> loss_derivs;  // loss'(eps_i y_i f_i)
  ForwardPass pass;                 // projections at W^(t)
};

inline constexpr std::size_t branch_index(int j) { return j > 0 ? 0 : 1; }

/// Signal coefficients gamma_{j,r} and noise coefficients rho_bar/rho_under
/// with w_{j,r} = w0 + j gamma mu/|mu|^2 + sum_i rho_{j,r,i} xi_i/|xi_i|^2.
/// Row/array index 0 is the +1 branch, 1 the -1 branch. rho arrays are
/// m x n and hold zeros where the coefficient is undefined.
struct CoefficientState {
  std::size_t step = 0;
  Matrix gamma;                       // 2 x m
  std::array<Matrix, 2> rho_bar;      // nonzero only where y_i == j
  std::array<Matrix, 2> rho_under;    // nonzero only where y_i == -j
  Vector xi_norms_sq;
  Network w0;

  CoefficientState() = default;
  CoefficientState(const Network& init, const Dataset& data);

  std::size_t m() const { return static_cast<std::size_t>(gamma.cols()); }
  std::size_t n() const { return static_cast<std::size_t>(xi_norms_sq.size()); }
};

struct CoefficientUpdateStats {
  /// Entries of rho_bar whose increment was negative this step.
  std::size_t rho_bar_decreases = 0;
};

/// Applies the gamma / rho_bar / rho_under recurrences for one step.
/// Throws std::invalid_argument when ctx.step != state.step.
CoefficientUpdateStats update_coefficients(CoefficientState& state,
                                           const StepContext& ctx, double eta,
                                           const Dataset& data);

Network reconstruct_weights(const CoefficientState& state, const Dataset& data,
                            const Vector& mu);

/// |a - b|_F / |b|_F over both branches.
double relative_frobenius_error(const Network& a, const Network& b);

struct ProjectionReport {
  Matrix gamma_discrepancy;               // 2 x m
  std::array<Matrix, 2> rho_discrepancy;  // m x n
  double max_gamma_discrepancy = 0.0;
  double max_rho_discrepancy = 0.0;
  double alpha = 0.0;
  double rho_bound = 0.0;  // 8 sqrt(log(4 n^2/delta)/d) n alpha
  double fraction_within_bound = 1.0;
};

/// Compares the recurrences against direct projections of w - w0 onto
/// j*mu and xi_i. `t_star` sets alpha = 4 log(t_star).
ProjectionReport projection_check(const Network& net,
                                  const CoefficientState& state,
                                  const Dataset& data, const Vector& mu,
                                  double t_star, double delta = 0.01);

/// iota_i = (1/m) sum_r rho_bar_{y_i, r, i}^2. Throws std::out_of_range.
double iota(const CoefficientState& state, const Dataset& data, std::size_t i);
Vector iota_all(const CoefficientState& state, const Dataset& data);

/// iota recorded at each logged step: rows follow `steps`, one column per
/// training sample.
struct IotaSeries {
  std::vector<std::size_t> steps;
  Matrix values;
};

enum class RatioAggregation { max_over_max, mean_over_mean };

/// max rho_bar / max(max gamma, 1e-12); 0 when both are zero.
double ratio_summary(const CoefficientState& state, const Dataset& data,
                     RatioAggregation agg = RatioAggregation::max_over_max);

struct CoefficientSummary {
  double max_gamma = 0.0;
  double mean_gamma = 0.0;
  double min_gamma = 0.0;
  double max_rho_bar = 0.0;
  double mean_rho_bar = 0.0;
  double min_rho_bar = 0.0;
  double min_rho_under = 0.0;
  double max_rho_under = 0.0;
};

/// Extremes and means over the defined entries only.
CoefficientSummary summarize(const CoefficientState& state, const Dataset& data);

}  // namespace lngd
