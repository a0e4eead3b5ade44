#include "lngd/trainer.hpp"

#include <algorithm>
#include <cmath>

namespace lngd {

void validate(const TrainConfig& config) {
  if (!(config.eta > 0.0) || !std::isfinite(config.eta))
    throw std::invalid_argument("eta: must be a finite positive number");
  if (config.steps == 0) throw std::invalid_argument("steps: must be at least 1");
  if (config.log_stride == 0)
    throw std::invalid_argument("log_stride: must be at least 1");
  if (config.log_stride > config.steps)
    throw std::invalid_argument("log_stride: must not exceed steps");
  if (config.n_test == 0) throw std::invalid_argument("n_test: must be at least 1");
}

StepContext train_step(Network& net, const Dataset& data,
                       std::span<const double> multipliers, double eta,
                       std::size_t step, std::optional<ForwardPass> pass) {
  StepContext ctx;
  ctx.step = step;
  ctx.multipliers.assign(multipliers.begin(), multipliers.end());
  ctx.loss_derivs.assign(data.size(), 0.0);
  ctx.pass = pass ? std::move(*pass) : forward_pass(net, data);
  const Gradient g =
      gradient_from_pass(net, data, ctx.pass, multipliers, ctx.loss_derivs);
  if (!g.g_plus.allFinite() || !g.g_minus.allFinite())
    throw NonFiniteError(step, "non-finite gradient at step " + std::to_string(step));
  net.w_plus.noalias() -= eta * g.g_plus;
  net.w_minus.noalias() -= eta * g.g_minus;
  return ctx;
}

namespace {

TraceRow make_row(std::size_t step, const Network& net, const Dataset& train,
                  const Dataset& test, const ForwardPass& pass,
                  std::span<const double> eps, const CoefficientState& state,
                  const Vector& iotas) {
  TraceRow row;
  row.step = step;
  row.clean_train_loss = clean_batch_loss(train, pass);
  row.noisy_train_loss = noisy_batch_loss(train, pass, eps);
  row.test_error_01 = zero_one_error(test, forward_pass(net, test));
  const CoefficientSummary s = summarize(state, train);
  row.max_gamma = s.max_gamma;
  row.mean_gamma = s.mean_gamma;
  row.max_rho_bar = s.max_rho_bar;
  row.mean_rho_bar = s.mean_rho_bar;
  row.min_rho_under = s.min_rho_under;
  row.ratio_rho_over_gamma = ratio_summary(state, train);
  if (iotas.size() > 0) {
    row.iota_mean = iotas.mean();
    row.iota_max = iotas.maxCoeff();
  }
  row.flip_count = count_flips(eps);
  return row;
}

CoefficientSnapshot snapshot(const CoefficientState& state) {
  return {state.step, state.gamma, state.rho_bar, state.rho_under};
}

}  // namespace

TrainResult train_run(const TrainConfig& config, const SignalSpec& spec,
                      std::size_t n, const NetworkShape& shape,
                      const TrainHooks& hooks) {
  validate(config);
  if (n == 0) throw std::invalid_argument("n: must be at least 1");

  const StreamSeeds seeds = StreamSeeds::from_master(config.seed);
  Engine data_rng = make_engine(seeds.data);
  Engine init_rng = make_engine(seeds.init);
  Engine noise_rng = make_engine(seeds.label_noise);
  Engine test_rng = make_engine(seeds.test);

  Dataset train = generate_dataset(spec, n, data_rng, seeds.data);
  Dataset test = generate_dataset(spec, config.n_test, test_rng, seeds.test);
  Network net = init_network(spec.d(), shape.m, shape.q, shape.sigma_0, init_rng);
  CoefficientState state(net, train);

  TrainTrace trace;
  trace.total_steps = config.steps;
  trace.eta = config.eta;
  trace.noise = config.noise;
  trace.d = spec.d();
  trace.n = n;
  trace.m = shape.m;
  trace.labels = train.labels();

  std::vector<Vector> iota_rows;
  auto log_step = [&](std::size_t t, const ForwardPass& pass,
                      std::span<const double> eps) {
    Vector iotas = iota_all(state, train);
    trace.rows.push_back(make_row(t, net, train, test, pass, eps, state, iotas));
    trace.iota.steps.push_back(t);
    iota_rows.push_back(std::move(iotas));
    if (config.record_coefficients) trace.snapshots.push_back(snapshot(state));
    if (hooks.on_log) hooks.on_log(t, net, state, train);
  };

  std::size_t t = 0;
  try {
    for (; t < config.steps; ++t) {
      ForwardPass pass = forward_pass(net, train);
      const std::vector<double> eps = sample_multipliers(config.noise, n, noise_rng);
      if (t % config.log_stride == 0) log_step(t, pass, eps);
      const StepContext ctx =
          train_step(net, train, eps, config.eta, t, std::move(pass));
      trace.rho_bar_decreases +=
          update_coefficients(state, ctx, config.eta, train).rho_bar_decreases;
    }
    const ForwardPass pass = forward_pass(net, train);
    const std::vector<double> eps = sample_multipliers(config.noise, n, noise_rng);
    log_step(t, pass, eps);
  } catch (const NonFiniteError& e) {
    trace.aborted = true;
    trace.abort_step = e.step();
    trace.abort_reason = e.what();
  }

  trace.iota.values = Matrix(static_cast<Eigen::Index>(iota_rows.size()),
                             static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < iota_rows.size(); ++k)
    trace.iota.values.row(static_cast<Eigen::Index>(k)) = iota_rows[k].transpose();

  return TrainResult{std::move(net), std::move(trace), std::move(state),
                     std::move(train), std::move(test), seeds};
}

}  // namespace lngd
