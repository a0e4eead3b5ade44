#include <doctest.h>

#include <cmath>
#include <limits>

#include "helpers.hpp"
#include "lngd/trainer.hpp"

using namespace lngd;

namespace {

TrainConfig small_config(const LabelNoiseSpec& noise, std::uint64_t seed = 1) {
  TrainConfig c;
  c.eta = 0.5;
  c.steps = 60;
  c.noise = noise;
  c.log_stride = 10;
  c.seed = seed;
  c.n_test = 200;
  return c;
}

const SignalSpec kSpec = SignalSpec::axis_aligned(300, 2.0, 0.5);
const NetworkShape kShape{6, 2, 0.05};

}  // namespace

TEST_CASE("config validation") {
  TrainConfig c = small_config(LabelNoiseSpec::none());
  CHECK_NOTHROW(validate(c));
  c.eta = 0.0;
  CHECK_THROWS_AS(validate(c), std::invalid_argument);
  c = small_config(LabelNoiseSpec::none());
  c.log_stride = 61;
  CHECK_THROWS_AS(validate(c), std::invalid_argument);
  c.log_stride = 0;
  CHECK_THROWS_AS(validate(c), std::invalid_argument);
  c = small_config(LabelNoiseSpec::none());
  c.steps = 0;
  CHECK_THROWS_AS(validate(c), std::invalid_argument);
}

TEST_CASE("trace layout and row invariants") {
  const TrainResult r = train_run(small_config(LabelNoiseSpec::flip(0.2)), kSpec, 20, kShape);
  const TrainTrace& tr = r.trace;
  REQUIRE(tr.rows.size() == 7);  // 0, 10, ..., 60
  CHECK(tr.rows.front().step == 0);
  CHECK(tr.rows.back().step == 60);
  CHECK(tr.snapshots.size() == 7);
  CHECK(tr.iota.values.rows() == 7);
  CHECK(tr.iota.values.cols() == 20);
  CHECK(tr.labels == r.train.labels());
  CHECK_FALSE(tr.aborted);
  for (const auto& row : tr.rows) {
    CHECK(row.clean_train_loss >= 0.0);
    CHECK(row.noisy_train_loss >= 0.0);
    CHECK(row.test_error_01 >= 0.0);
    CHECK(row.test_error_01 <= 1.0);
    CHECK(row.flip_count <= 20);
  }
  CHECK(tr.rows.front().max_gamma == 0.0);
  CHECK(tr.rows.front().ratio_rho_over_gamma == 0.0);
  CHECK(tr.rows.front().iota_max == 0.0);
}

TEST_CASE("reconstruction holds at every logged step") {
  for (auto noise : {LabelNoiseSpec::none(), LabelNoiseSpec::flip(0.1)}) {
    double worst = 0.0;
    std::size_t calls = 0;
    TrainHooks hooks;
    hooks.on_log = [&](std::size_t, const Network& net, const CoefficientState& st,
                       const Dataset& train) {
      ++calls;
      worst = std::max(worst, relative_frobenius_error(
                                  reconstruct_weights(st, train, train.spec().mu()), net));
    };
    train_run(small_config(noise), kSpec, 20, kShape, hooks);
    CHECK(calls == 7);
    CHECK(worst <= 1e-8);
  }
}

TEST_CASE("identical config gives identical traces") {
  const auto a = train_run(small_config(LabelNoiseSpec::flip(0.2), 5), kSpec, 20, kShape);
  const auto b = train_run(small_config(LabelNoiseSpec::flip(0.2), 5), kSpec, 20, kShape);
  REQUIRE(a.trace.rows.size() == b.trace.rows.size());
  for (std::size_t k = 0; k < a.trace.rows.size(); ++k) {
    CHECK(a.trace.rows[k].clean_train_loss == b.trace.rows[k].clean_train_loss);
    CHECK(a.trace.rows[k].test_error_01 == b.trace.rows[k].test_error_01);
  }
  CHECK(a.network.w_plus == b.network.w_plus);
}

TEST_CASE("degenerate noise reduces to standard GD") {
  const auto gd = train_run(small_config(LabelNoiseSpec::none()), kSpec, 20, kShape);
  for (auto noise : {LabelNoiseSpec::flip(0.0), LabelNoiseSpec::gaussian(1.0, 0.0)}) {
    const auto other = train_run(small_config(noise), kSpec, 20, kShape);
    CHECK(other.network.w_plus == gd.network.w_plus);
    CHECK(other.network.w_minus == gd.network.w_minus);
  }
}

TEST_CASE("the noise stream does not perturb data, init or test set") {
  const auto a = train_run(small_config(LabelNoiseSpec::none()), kSpec, 20, kShape);
  const auto b = train_run(small_config(LabelNoiseSpec::flip(0.4)), kSpec, 20, kShape);
  CHECK(a.train.noise() == b.train.noise());
  CHECK(a.test.noise() == b.test.noise());
  CHECK(a.state.w0.w_plus == b.state.w0.w_plus);
}

TEST_CASE("train_step refuses non-finite gradients and leaves the network untouched") {
  const Dataset data = testutil::small_dataset(10, 4, 2);
  Network net = zero_network(10, 2);
  net.w_plus.setConstant(1e200);
  net.w_minus.setConstant(1e200);
  const Network before = net;
  const std::vector<double> ones(4, 1.0);
  CHECK_THROWS_AS(train_step(net, data, ones, 0.5, 0), NonFiniteError);
  CHECK(net.w_plus == before.w_plus);
}

TEST_CASE("divergent runs are recorded as aborted") {
  TrainConfig c = small_config(LabelNoiseSpec::none());
  c.eta = 1e8;
  c.steps = 200;
  const auto r = train_run(c, kSpec, 20, NetworkShape{6, 2, 1.0});
  CHECK(r.trace.aborted);
  CHECK_FALSE(r.trace.abort_reason.empty());
}
