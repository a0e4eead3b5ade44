#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "lngd/decomposition.hpp"
#include "lngd/label_noise.hpp"
#include "lngd/trainer.hpp"

using namespace lngd;

namespace {

struct Run {
  Dataset data;
  Network net;
  CoefficientState state;
};

Run make_run(std::uint64_t seed, std::size_t d = 400, std::size_t n = 20, std::size_t m = 5) {
  Dataset data = testutil::small_dataset(d, n, seed);
  Engine rng = make_engine(seed + 1);
  Network net = init_network(d, m, 2, 0.05, rng);
  CoefficientState st(net, data);
  return {std::move(data), std::move(net), std::move(st)};
}

void advance(Run& r, const LabelNoiseSpec& noise, std::size_t steps, double eta, Engine& rng,
             std::size_t* decreases = nullptr) {
  for (std::size_t t = 0; t < steps; ++t) {
    const auto eps = sample_multipliers(noise, r.data.size(), rng);
    const StepContext ctx = train_step(r.net, r.data, eps, eta, r.state.step);
    const auto stats = update_coefficients(r.state, ctx, eta, r.data);
    if (decreases) *decreases += stats.rho_bar_decreases;
  }
}

}  // namespace

TEST_CASE("fresh state: zero coefficients, iota zero, ratio zero") {
  Run r = make_run(1);
  CHECK(r.state.gamma.norm() == 0.0);
  for (std::size_t i = 0; i < r.data.size(); ++i) CHECK(iota(r.state, r.data, i) == 0.0);
  CHECK(ratio_summary(r.state, r.data) == 0.0);
  CHECK_THROWS_AS(iota(r.state, r.data, r.data.size()), std::out_of_range);
  CHECK(relative_frobenius_error(reconstruct_weights(r.state, r.data, r.data.spec().mu()),
                                 r.net) == 0.0);
}

TEST_CASE("iota of a constant coefficient block is its square") {
  Run r = make_run(2);
  for (std::size_t i = 0; i < r.data.size(); ++i)
    r.state.rho_bar[branch_index(r.data.label(i))].col(static_cast<Eigen::Index>(i)).setConstant(1.5);
  for (std::size_t i = 0; i < r.data.size(); ++i)
    CHECK(iota(r.state, r.data, i) == doctest::Approx(2.25));
}

TEST_CASE("recurrences reproduce the trained weights") {
  for (auto noise : {LabelNoiseSpec::none(), LabelNoiseSpec::flip(0.2),
                     LabelNoiseSpec::uniform(-1.0, 2.0)}) {
    Run r = make_run(3);
    Engine rng = make_engine(77);
    for (int chunk = 0; chunk < 4; ++chunk) {
      advance(r, noise, 15, 0.5, rng);
      const Network rec = reconstruct_weights(r.state, r.data, r.data.spec().mu());
      CHECK(relative_frobenius_error(rec, r.net) <= 1e-8);
      const ProjectionReport pr = projection_check(r.net, r.state, r.data, r.data.spec().mu(), 60);
      CHECK(pr.max_gamma_discrepancy <= 1e-9);
      CHECK(pr.fraction_within_bound == 1.0);
    }
  }
}

TEST_CASE("standard GD never decreases rho_bar; flips can") {
  Run gd = make_run(4);
  Engine rng = make_engine(5);
  std::size_t dec = 0;
  advance(gd, LabelNoiseSpec::none(), 40, 0.5, rng, &dec);
  CHECK(dec == 0);
  const CoefficientSummary s = summarize(gd.state, gd.data);
  CHECK(s.min_rho_bar >= 0.0);
  CHECK(s.max_rho_under <= 0.0);
  CHECK(s.min_gamma >= 0.0);
  CHECK(ratio_summary(gd.state, gd.data) > 0.0);

  Run ln = make_run(4);
  Engine rng2 = make_engine(5);
  std::size_t dec2 = 0;
  advance(ln, LabelNoiseSpec::flip(0.3), 40, 0.5, rng2, &dec2);
  CHECK(dec2 > 0);
}

TEST_CASE("step mismatch is rejected") {
  Run r = make_run(6);
  const std::vector<double> ones(r.data.size(), 1.0);
  const StepContext ctx = train_step(r.net, r.data, ones, 0.5, 3);
  CHECK_THROWS_AS(update_coefficients(r.state, ctx, 0.5, r.data), std::invalid_argument);
}

TEST_CASE("ratio aggregations") {
  Run r = make_run(7);
  Engine rng = make_engine(1);
  advance(r, LabelNoiseSpec::none(), 20, 0.5, rng);
  const CoefficientSummary s = summarize(r.state, r.data);
  CHECK(ratio_summary(r.state, r.data) ==
        doctest::Approx(s.max_rho_bar / std::max(s.max_gamma, 1e-12)));
  CHECK(ratio_summary(r.state, r.data, RatioAggregation::mean_over_mean) ==
        doctest::Approx(s.mean_rho_bar / std::max(s.mean_gamma, 1e-12)));
}
