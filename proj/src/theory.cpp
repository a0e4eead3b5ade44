#include "lngd/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "lngd/label_noise.hpp"
#include "lngd/network.hpp"

namespace lngd {

std::string to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::borderline: return "borderline";
    case CheckStatus::fail: return "fail";
  }
  return "fail";
}

std::string to_string(Algorithm a) { return a == Algorithm::gd ? "gd" : "lngd"; }

namespace {

enum class Slack { lower_strict, upper_loose, lower_loose, exact_lower, exact_upper };

double safe_ratio(double lhs, double rhs) {
  if (!std::isfinite(lhs) || !std::isfinite(rhs) || rhs <= 0.0) return 0.0;
  const double r = lhs / rhs;
  return std::isfinite(r) ? r : 0.0;
}

AssumptionItem make_item(std::string id, std::string description, double lhs,
                         double rhs, double constant, Slack slack,
                         double log_factor) {
  AssumptionItem it;
  it.id = std::move(id);
  it.description = std::move(description);
  it.lhs = lhs;
  it.rhs = rhs;
  it.hidden_constant = constant;
  it.ratio = safe_ratio(lhs, rhs);
  const bool usable = std::isfinite(lhs) && std::isfinite(rhs) && rhs > 0.0;
  const double r = it.ratio;
  const double L = std::max(log_factor, 1.0);
  switch (slack) {
    case Slack::lower_strict:
      it.relation = ">=";
      it.status = !usable ? CheckStatus::fail
                 : r >= L ? CheckStatus::pass
                 : r >= 1.0 ? CheckStatus::borderline
                            : CheckStatus::fail;
      break;
    case Slack::upper_loose:
      it.relation = "<=";
      it.status = !usable ? CheckStatus::fail
                 : r <= 1.0 ? CheckStatus::pass
                 : r <= L ? CheckStatus::borderline
                          : CheckStatus::fail;
      break;
    case Slack::lower_loose:
      it.relation = ">=";
      it.status = !usable ? CheckStatus::fail
                 : r >= 1.0 ? CheckStatus::pass
                 : r >= 1.0 / L ? CheckStatus::borderline
                                : CheckStatus::fail;
      break;
    case Slack::exact_lower:
      it.relation = ">";
      it.status = usable && lhs > rhs ? CheckStatus::pass : CheckStatus::fail;
      break;
    case Slack::exact_upper:
      it.relation = "<";
      it.status = usable && lhs < rhs ? CheckStatus::pass : CheckStatus::fail;
      break;
  }
  it.passed = it.status == CheckStatus::pass;
  return it;
}

}  // namespace

const AssumptionItem& AssumptionReport::item(const std::string& id) const {
  for (const auto& it : items)
    if (it.id == id) return it;
  throw std::out_of_range("no assumption item '" + id + "'");
}

AssumptionReport check_assumptions(const SignalSpec& spec, std::size_t n,
                                   std::size_t m, double eta, double sigma_0,
                                   double p, const HiddenConstants& c) {
  AssumptionReport rep;
  const double d = static_cast<double>(spec.d());
  const double nn = static_cast<double>(n);
  const double mm = static_cast<double>(m);
  const double sp = spec.sigma_p();
  const double mu = spec.mu_norm();
  const double L = std::log(d);
  rep.log_factor = L;

  const double dim_bound = c.dimension * std::max(nn * nn, nn * mu * mu / (sp * sp));
  rep.items.push_back(make_item("dimension", "d >= max{n^2, n |mu|^2 / sigma_p^2}",
                                d, dim_bound, c.dimension, Slack::lower_strict, L));
  rep.items.push_back(make_item("snr", "SNR <= 1/sqrt(n)", compute_snr(spec),
                                c.snr / std::sqrt(nn), c.snr, Slack::upper_loose, L));
  rep.items.push_back(make_item("width", "m >= polylog(d)", mm, c.width, c.width,
                                Slack::lower_strict, L));
  rep.items.push_back(make_item("sample_size", "n >= polylog(d)", nn, c.sample_size,
                                c.sample_size, Slack::lower_strict, L));
  rep.items.push_back(make_item("learning_rate", "eta <= 1/(sigma_p^2 d)", eta,
                                c.learning_rate / (sp * sp * d), c.learning_rate,
                                Slack::upper_loose, L));
  rep.items.push_back(make_item("init_scale_lower", "sigma_0 >= n / (sigma_p d^{3/4})",
                                sigma_0, c.init_lower * nn / (sp * std::pow(d, 0.75)),
                                c.init_lower, Slack::lower_loose, L));
  const double init_up =
      c.init_upper * std::min(1.0 / (mu * std::pow(d, 0.625)), 1.0 / (sp * std::sqrt(d)));
  rep.items.push_back(make_item("init_scale_upper",
                                "sigma_0 <= min{|mu|^-1 d^{-5/8}, sigma_p^-1 d^{-1/2}}",
                                sigma_0, init_up, c.init_upper, Slack::upper_loose, L));
  rep.items.push_back(make_item("flip_rate_lower", "p > C log(d) / sqrt(m n)", p,
                                c.flip * L / std::sqrt(mm * nn), c.flip,
                                Slack::exact_lower, L));
  rep.items.push_back(make_item("flip_rate_upper", "p < 1/C", p, 1.0 / c.flip, c.flip,
                                Slack::exact_upper, L));

  rep.all_passed = std::all_of(rep.items.begin(), rep.items.end(),
                               [](const AssumptionItem& it) { return it.passed; });
  return rep;
}

StageEstimate estimate_stage_times(const SignalSpec& spec, std::size_t n,
                                   std::size_t m, double eta, double sigma_0,
                                   double epsilon, Algorithm which,
                                   const StageConstants& c) {
  if (!(eta > 0.0)) throw std::invalid_argument("estimate_stage_times: eta must be positive");
  if (!(sigma_0 > 0.0))
    throw std::invalid_argument("estimate_stage_times: sigma_0 must be positive");
  if (which == Algorithm::gd && !(epsilon > 0.0 && epsilon < 1.0))
    throw std::invalid_argument("estimate_stage_times: epsilon must lie in (0, 1)");

  StageEstimate est;
  est.which = which;
  est.constants_used = c;
  const double d = static_cast<double>(spec.d());
  const double nn = static_cast<double>(n);
  const double mm = static_cast<double>(m);
  const double sp2d = spec.sigma_p() * spec.sigma_p() * d;
  const double init_noise = sigma_0 * spec.sigma_p() * std::sqrt(d);
  if (init_noise >= 1.0) {
    est.diagnostic = "sigma_0 sigma_p sqrt(d) = " + std::to_string(init_noise) +
                     " >= 1: stage-1 logarithm is not positive";
    return est;
  }
  est.t1 = c.stage1 * nn * mm * std::log(1.0 / init_noise) / (eta * sp2d);
  if (which == Algorithm::gd) {
    est.t2 = est.t1 + c.stage2 * mm * mm * mm * nn / (eta * epsilon * sp2d);
  } else {
    const double init_signal = sigma_0 * spec.mu_norm();
    if (init_signal >= 6.0) {
      est.diagnostic = "sigma_0 |mu| = " + std::to_string(init_signal) +
                       " >= 6: stage-2 logarithm is not positive";
      return est;
    }
    est.t2 = est.t1 + c.stage2 * mm * std::log(6.0 / init_signal) /
                          (eta * spec.mu_norm_sq());
  }
  est.valid = est.t1 > 0.0 && est.t2 >= est.t1;
  if (!est.valid) est.diagnostic = "non-positive horizon";
  return est;
}

BoundMonitorReport coefficient_bound_monitor(const TrainTrace& trace,
                                             double t_star,
                                             std::size_t max_listed) {
  if (trace.snapshots.empty() && !trace.rows.empty())
    throw std::invalid_argument(
        "coefficient_bound_monitor: trace carries no coefficient snapshots");
  BoundMonitorReport rep;
  rep.t_star = t_star;
  rep.alpha = 4.0 * std::log(t_star);
  const double alpha = rep.alpha;

  auto record = [&](std::size_t step, const char* what, int j, std::size_t r,
                    long i, double v, double lo, double hi) {
    if (v >= lo && v <= hi) return;
    ++rep.violation_count;
    if (rep.violations.size() < max_listed)
      rep.violations.push_back({step, what, j, r, i, v, lo, hi});
  };

  for (const auto& snap : trace.snapshots) {
    ++rep.steps_checked;
    const auto m = static_cast<std::size_t>(snap.gamma.cols());
    for (int j : {1, -1}) {
      const auto b = static_cast<Eigen::Index>(branch_index(j));
      for (std::size_t r = 0; r < m; ++r) {
        const double g = snap.gamma(b, static_cast<Eigen::Index>(r));
        rep.worst_gamma_low = std::min(rep.worst_gamma_low, g);
        rep.worst_upper = std::max(rep.worst_upper, g);
        record(snap.step, "gamma", j, r, -1, g, 0.0, alpha);
      }
      for (std::size_t i = 0; i < trace.labels.size(); ++i) {
        const bool same = trace.labels[i] == j;
        const Matrix& arr = same ? snap.rho_bar[static_cast<std::size_t>(b)]
                                 : snap.rho_under[static_cast<std::size_t>(b)];
        for (std::size_t r = 0; r < m; ++r) {
          const double v = arr(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i));
          if (same) {
            rep.worst_rho_bar_low = std::min(rep.worst_rho_bar_low, v);
            rep.worst_upper = std::max(rep.worst_upper, v);
            record(snap.step, "rho_bar", j, r, static_cast<long>(i), v, 0.0, alpha);
          } else {
            rep.worst_rho_under_high = std::max(rep.worst_rho_under_high, v);
            rep.worst_upper = std::max(rep.worst_upper, -v);
            record(snap.step, "rho_under", j, r, static_cast<long>(i), v, -alpha, 0.0);
          }
        }
      }
    }
  }
  return rep;
}

double iota_fixed_point(double p) {
  if (!(p > 0.0 && p < 0.5))
    throw std::invalid_argument("iota_fixed_point: p must lie in (0, 0.5)");
  return std::log((1.0 - p) / p);
}

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t k = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
  const double hi = v[k];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k));
  return 0.5 * (lo + hi);
}

}  // namespace

Stage2Report stage2_boundedness_check(const IotaSeries& series, double t1,
                                      std::optional<double> p,
                                      const Stage2Options& opt) {
  Stage2Report rep;
  rep.t1 = t1;
  const auto it = std::find_if(series.steps.begin(), series.steps.end(),
                               [&](std::size_t s) { return static_cast<double>(s) >= t1; });
  if (it == series.steps.end()) return rep;
  const auto k0 = static_cast<Eigen::Index>(it - series.steps.begin());
  rep.t1_logged = *it;
  const Eigen::Index rows = series.values.rows();
  const Eigen::Index n = series.values.cols();

  std::vector<double> medians;
  medians.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    Stage2Sample s;
    s.start = series.values(k0, i);
    std::vector<double> tail;
    tail.reserve(static_cast<std::size_t>(rows - k0));
    for (Eigen::Index k = k0; k < rows; ++k) tail.push_back(series.values(k, i));
    s.sup = *std::max_element(tail.begin(), tail.end());
    s.median = median(tail);
    s.bound = opt.band_multiplier * s.start + opt.band_offset;
    s.passed = s.sup <= s.bound;
    if (!s.passed) ++rep.failures;
    medians.push_back(s.median);
    rep.samples.push_back(s);
  }
  rep.all_passed = rep.failures == 0 && n > 0;
  rep.median_of_medians = median(medians);
  if (p && *p > 0.0 && *p < 0.5) {
    rep.fixed_point = iota_fixed_point(*p);
    rep.relative_deviation =
        std::abs(rep.median_of_medians - *rep.fixed_point) / *rep.fixed_point;
    rep.fixed_point_ok = *rep.relative_deviation <= opt.fixed_point_tolerance;
  }
  return rep;
}

const ConcentrationCheck& ConcentrationReport::check(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return c;
  throw std::out_of_range("no concentration check '" + name + "'");
}

namespace {

enum : std::uint64_t {
  kNoiseGeometry = 11,
  kInitProjection = 12,
  kFlipCount = 13,
  kFlipHistory = 14,
};

Matrix draw_noise(const SignalSpec& spec, std::size_t n, Engine& rng) {
  Matrix xi(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(spec.d()));
  for (std::size_t i = 0; i < n; ++i)
    xi.row(static_cast<Eigen::Index>(i)) = sample_noise_vector(spec, rng).transpose();
  return xi;
}

ConcentrationCheck finish(ConcentrationCheck c) {
  c.pass_rate = c.trials > 0 ? static_cast<double>(c.passes) / static_cast<double>(c.trials) : 0.0;
  return c;
}

}  // namespace

ConcentrationReport concentration_suite(const SignalSpec& spec,
                                        const ConcentrationOptions& opt) {
  if (opt.trials < 100)
    throw std::invalid_argument("concentration_suite: need at least 100 trials");
  if (opt.n < 2) throw std::invalid_argument("concentration_suite: n must be at least 2");
  static const std::vector<std::string> names{"noise_geometry", "init_projection", "flip_count",
                                              "flip_history", "flip_history_interval"};
  for (const auto& o : opt.only)
    if (std::find(names.begin(), names.end(), o) == names.end())
      throw std::invalid_argument("concentration_suite: unknown check '" + o + "'");
  auto wanted = [&](const char* name) {
    return opt.only.empty() ||
           std::find(opt.only.begin(), opt.only.end(), name) != opt.only.end();
  };
  ConcentrationReport rep;
  rep.delta = opt.delta;
  const double d = static_cast<double>(spec.d());
  const double nn = static_cast<double>(opt.n);
  const double sp = spec.sigma_p();
  const double delta = opt.delta;

  if (wanted("noise_geometry")) {
    ConcentrationCheck c;
    c.name = "noise_geometry";
    c.statement = "sp^2 d/2 <= |xi_i|^2 <= 3 sp^2 d/2 and |<xi_i,xi_k>| <= 2 sp^2 sqrt(d log(4n^2/delta))";
    const double lo = sp * sp * d / 2.0;
    const double hi = 3.0 * sp * sp * d / 2.0;
    const double cross = 2.0 * sp * sp * std::sqrt(d * std::log(4.0 * nn * nn / delta));
    std::size_t norm_fail = 0, cross_fail = 0;
    for (std::size_t t = 0; t < opt.trials; ++t) {
      Engine rng = make_engine(derive_seed(opt.seed, {kNoiseGeometry, t}));
      const Matrix xi = draw_noise(spec, opt.n, rng);
      const Matrix gram = xi * xi.transpose();
      bool ok_norm = true, ok_cross = true;
      for (Eigen::Index i = 0; i < gram.rows(); ++i) {
        const double v = gram(i, i);
        if (v < lo || v > hi) ok_norm = false;
        for (Eigen::Index k = 0; k < i; ++k)
          if (std::abs(gram(i, k)) > cross) ok_cross = false;
      }
      norm_fail += !ok_norm;
      cross_fail += !ok_cross;
      c.passes += ok_norm && ok_cross;
      ++c.trials;
    }
    c.details = {{"norm_band", {lo, hi}}, {"cross_bound", cross},
                 {"norm_failures", norm_fail}, {"cross_failures", cross_fail}};
    rep.checks.push_back(finish(std::move(c)));
  }

  if (wanted("init_projection")) {
    ConcentrationCheck c;
    c.name = "init_projection";
    c.statement = "|<w0,mu>| <= sqrt(2 log(8m/delta)) s0 |mu|, |<w0,xi>| <= 2 sqrt(log(8mn/delta)) s0 sp sqrt(d), "
                  "max_r j<w0_{j,r},mu> >= s0|mu|/2, max_r j<w0_{j,r},xi_i> >= s0 sp sqrt(d)/4";
    const double mm = static_cast<double>(opt.m);
    const double mu_hi = std::sqrt(2.0 * std::log(8.0 * mm / delta)) * opt.sigma_0 * spec.mu_norm();
    const double mu_lo = opt.sigma_0 * spec.mu_norm() / 2.0;
    const double xi_hi = 2.0 * std::sqrt(std::log(8.0 * mm * nn / delta)) * opt.sigma_0 * sp * std::sqrt(d);
    const double xi_lo = opt.sigma_0 * sp * std::sqrt(d) / 4.0;
    std::size_t upper_fail = 0, anti_fail = 0;
    for (std::size_t t = 0; t < opt.trials; ++t) {
      Engine rng = make_engine(derive_seed(opt.seed, {kInitProjection, t}));
      const Matrix xi = draw_noise(spec, opt.n, rng);
      const Network net = init_network(spec.d(), opt.m, 2, opt.sigma_0, rng);
      bool ok_upper = true, ok_anti = true;
      for (int j : {1, -1}) {
        const Matrix& w = net.branch(j);
        const Vector on_mu = static_cast<double>(j) * (w.transpose() * spec.mu());
        const Matrix on_xi = static_cast<double>(j) * (xi * w);  // n x m
        if (on_mu.cwiseAbs().maxCoeff() > mu_hi) ok_upper = false;
        if (on_xi.cwiseAbs().maxCoeff() > xi_hi) ok_upper = false;
        if (on_mu.maxCoeff() < mu_lo) ok_anti = false;
        if (on_xi.rowwise().maxCoeff().minCoeff() < xi_lo) ok_anti = false;
      }
      upper_fail += !ok_upper;
      anti_fail += !ok_anti;
      c.passes += ok_upper && ok_anti;
      ++c.trials;
    }
    c.details = {{"mu_band", {mu_lo, mu_hi}}, {"xi_band", {xi_lo, xi_hi}},
                 {"upper_failures", upper_fail}, {"anti_concentration_failures", anti_fail}};
    rep.checks.push_back(finish(std::move(c)));
  }

  const LabelNoiseSpec flips = LabelNoiseSpec::flip(opt.p);
  if (wanted("flip_count")) {
    ConcentrationCheck c;
    c.name = "flip_count";
    c.statement = "||S_-| - np| <= sqrt(n/2 log(4/delta)), ||S_- cap S_j| - pn/2| <= sqrt(n/2 log(8/delta))";
    const double band = std::sqrt(nn / 2.0 * std::log(4.0 / delta));
    const double class_band = std::sqrt(nn / 2.0 * std::log(8.0 / delta));
    std::size_t class_fail = 0;
    for (std::size_t t = 0; t < opt.trials; ++t) {
      Engine rng = make_engine(derive_seed(opt.seed, {kFlipCount, t}));
      std::bernoulli_distribution coin(0.5);
      std::vector<int> y(opt.n);
      for (auto& v : y) v = coin(rng) ? 1 : -1;
      const auto eps = sample_multipliers(flips, opt.n, rng);
      const double minus = static_cast<double>(count_flips(eps));
      const double plus = nn - minus;
      bool ok = std::abs(minus - nn * opt.p) <= band &&
                std::abs(plus - nn * (1.0 - opt.p)) <= band;
      bool ok_class = true;
      for (int j : {1, -1}) {
        double sm = 0.0, sp_ = 0.0;
        for (std::size_t i = 0; i < opt.n; ++i) {
          if (y[i] != j) continue;
          (eps[i] < 0.0 ? sm : sp_) += 1.0;
        }
        if (std::abs(sm - opt.p * nn / 2.0) > class_band ||
            std::abs(sp_ - (1.0 - opt.p) * nn / 2.0) > class_band)
          ok_class = false;
      }
      class_fail += !ok_class;
      c.passes += ok && ok_class;
      ++c.trials;
    }
    c.details = {{"band", band}, {"class_band", class_band}, {"class_failures", class_fail}};
    rep.checks.push_back(finish(std::move(c)));
  }

  if (wanted("flip_history") || wanted("flip_history_interval")) {
    const double t = static_cast<double>(opt.horizon);
    const double band = std::sqrt(t / 2.0 * std::log(4.0 * nn / delta));
    const double threshold =
        opt.p > 0.0 ? 2.0 * std::log(4.0 * nn / delta) / (opt.p * opt.p)
                    : std::numeric_limits<double>::infinity();
    ConcentrationCheck hoeff, interval;
    hoeff.name = "flip_history";
    hoeff.statement = "||S_{i,-}| - pt| <= sqrt(t/2 log(4n/delta)) for all i";
    interval.name = "flip_history_interval";
    interval.statement = "|S_{i,-}| in [pt/2, 3pt/2] and |S_{i,+}| in [(2-3p)t/2, (2-p)t/2] for all i";
    interval.applicable = t >= threshold;
    for (std::size_t trial = 0; trial < opt.trials; ++trial) {
      Engine rng = make_engine(derive_seed(opt.seed, {kFlipHistory, trial}));
      std::vector<double> minus(opt.n, 0.0);
      for (std::size_t s = 0; s < opt.horizon; ++s) {
        const auto eps = sample_multipliers(flips, opt.n, rng);
        for (std::size_t i = 0; i < opt.n; ++i) minus[i] += eps[i] < 0.0;
      }
      bool ok_h = true, ok_i = true;
      for (double sm : minus) {
        const double sp_ = t - sm;
        if (std::abs(sm - opt.p * t) > band || std::abs(sp_ - (1.0 - opt.p) * t) > band)
          ok_h = false;
        if (sm < opt.p * t / 2.0 || sm > 1.5 * opt.p * t ||
            sp_ < (2.0 - 3.0 * opt.p) * t / 2.0 || sp_ > (2.0 - opt.p) * t / 2.0)
          ok_i = false;
      }
      hoeff.passes += ok_h;
      ++hoeff.trials;
      if (interval.applicable) {
        interval.passes += ok_i;
        ++interval.trials;
      }
    }
    hoeff.details = {{"t", opt.horizon}, {"band", band}};
    interval.details = {{"t", opt.horizon},
                        {"threshold", std::isfinite(threshold) ? nlohmann::json(threshold)
                                                               : nlohmann::json(nullptr)},
                        {"interval", {opt.p * t / 2.0, 1.5 * opt.p * t}}};
    if (wanted("flip_history")) rep.checks.push_back(finish(std::move(hoeff)));
    if (wanted("flip_history_interval")) rep.checks.push_back(finish(std::move(interval)));
  }
  return rep;
}

Verdicts theorem_verdicts(const TrainTrace& trace, const VerdictOptions& opt) {
  Verdicts v;
  if (trace.rows.empty()) return v;
  const TraceRow& last = trace.rows.back();

  v.gd.final_train_loss = last.clean_train_loss;
  v.gd.final_test_error = last.test_error_01;
  v.gd.error_floor = 0.24 - opt.slack;
  v.gd.train_loss_converged = last.clean_train_loss <= opt.epsilon;
  v.gd.test_error_large = last.test_error_01 >= v.gd.error_floor;
  v.gd.passed = v.gd.train_loss_converged && v.gd.test_error_large;

  const double d = static_cast<double>(trace.d);
  const double n = static_cast<double>(trace.n);
  v.lngd.final_train_loss = last.clean_train_loss;
  v.lngd.final_test_error = last.test_error_01;
  v.lngd.error_bound = n > 0.0 ? 2.0 * std::exp(-opt.c_test * d / (n * n)) : 2.0;
  v.lngd.bound_vacuous = v.lngd.error_bound >= 1.0;
  v.lngd.train_loss_constant_order = last.clean_train_loss >= opt.loss_band_lo &&
                                     last.clean_train_loss <= opt.loss_band_hi;
  v.lngd.test_error_small = last.test_error_01 <= v.lngd.error_bound;
  v.lngd.passed = v.lngd.train_loss_constant_order && v.lngd.test_error_small;
  return v;
}

double c_test_for_bound(double target, std::size_t d, std::size_t n) {
  const double nn = static_cast<double>(n);
  return -(nn * nn / static_cast<double>(d)) * std::log(target / 2.0);
}

nlohmann::json to_json(const AssumptionReport& r) {
  nlohmann::json items = nlohmann::json::array();
  for (const auto& it : r.items)
    items.push_back({{"id", it.id},
                     {"description", it.description},
                     {"lhs", it.lhs},
                     {"rhs", it.rhs},
                     {"relation", it.relation},
                     {"hidden_constant", it.hidden_constant},
                     {"ratio", it.ratio},
                     {"status", to_string(it.status)},
                     {"passed", it.passed}});
  return {{"log_factor", r.log_factor}, {"all_passed", r.all_passed}, {"items", items}};
}

nlohmann::json to_json(const StageEstimate& s) {
  return {{"which", to_string(s.which)},
          {"t1", s.t1},
          {"t2", s.t2},
          {"valid", s.valid},
          {"diagnostic", s.diagnostic},
          {"constants_used", {{"stage1", s.constants_used.stage1},
                              {"stage2", s.constants_used.stage2}}}};
}

nlohmann::json to_json(const BoundMonitorReport& r) {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& v : r.violations)
    list.push_back({{"step", v.step}, {"coefficient", v.coefficient}, {"j", v.j},
                    {"r", v.r}, {"i", v.i}, {"value", v.value},
                    {"lower", v.lower}, {"upper", v.upper}});
  return {{"t_star", r.t_star},
          {"alpha", r.alpha},
          {"steps_checked", r.steps_checked},
          {"violation_count", r.violation_count},
          {"worst_gamma_low", r.worst_gamma_low},
          {"worst_rho_bar_low", r.worst_rho_bar_low},
          {"worst_rho_under_high", r.worst_rho_under_high},
          {"worst_upper", r.worst_upper},
          {"violations", list}};
}

nlohmann::json to_json(const Stage2Report& r, bool include_samples) {
  nlohmann::json j = {{"t1", r.t1},
                      {"t1_logged", r.t1_logged},
                      {"sample_count", r.samples.size()},
                      {"failures", r.failures},
                      {"all_passed", r.all_passed},
                      {"median_of_medians", r.median_of_medians}};
  double worst = 0.0;
  for (const auto& s : r.samples) worst = std::max(worst, s.sup - s.bound);
  j["worst_excess"] = worst;
  j["fixed_point"] = r.fixed_point ? nlohmann::json(*r.fixed_point) : nlohmann::json(nullptr);
  j["relative_deviation"] =
      r.relative_deviation ? nlohmann::json(*r.relative_deviation) : nlohmann::json(nullptr);
  j["fixed_point_ok"] = r.fixed_point_ok ? nlohmann::json(*r.fixed_point_ok) : nlohmann::json(nullptr);
  if (include_samples) {
    nlohmann::json s = nlohmann::json::array();
    for (const auto& x : r.samples)
      s.push_back({{"start", x.start}, {"sup", x.sup}, {"median", x.median},
                   {"bound", x.bound}, {"passed", x.passed}});
    j["samples"] = s;
  }
  return j;
}

nlohmann::json to_json(const ConcentrationReport& r) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : r.checks)
    checks.push_back({{"name", c.name}, {"statement", c.statement},
                      {"trials", c.trials}, {"passes", c.passes},
                      {"pass_rate", c.pass_rate}, {"applicable", c.applicable},
                      {"details", c.details}});
  return {{"delta", r.delta}, {"checks", checks}};
}

nlohmann::json to_json(const Verdicts& v) {
  return {{"gd", {{"final_train_loss", v.gd.final_train_loss},
                  {"final_test_error", v.gd.final_test_error},
                  {"error_floor", v.gd.error_floor},
                  {"train_loss_converged", v.gd.train_loss_converged},
                  {"test_error_large", v.gd.test_error_large},
                  {"passed", v.gd.passed}}},
          {"lngd", {{"final_train_loss", v.lngd.final_train_loss},
                    {"final_test_error", v.lngd.final_test_error},
                    {"error_bound", v.lngd.error_bound},
                    {"bound_vacuous", v.lngd.bound_vacuous},
                    {"train_loss_constant_order", v.lngd.train_loss_constant_order},
                    {"test_error_small", v.lngd.test_error_small},
                    {"passed", v.lngd.passed}}}};
}

}  // namespace lngd
