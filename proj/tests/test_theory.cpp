#include <doctest.h>

#include <cmath>

#include "lngd/theory.hpp"

using namespace lngd;

namespace {

const SignalSpec kBaseline = SignalSpec::axis_aligned(2000, 2.0, 0.5);

TrainTrace synthetic_trace(std::size_t steps, double gamma, double rho_bar, double rho_under) {
  TrainTrace tr;
  tr.labels = {1, -1, 1};
  tr.n = 3;
  tr.m = 2;
  for (std::size_t t = 0; t <= steps; t += 10) {
    CoefficientSnapshot s;
    s.step = t;
    const double f = steps ? static_cast<double>(t) / static_cast<double>(steps) : 0.0;
    s.gamma = Matrix::Constant(2, 2, gamma * f);
    for (int b = 0; b < 2; ++b) {
      s.rho_bar[b] = Matrix::Zero(2, 3);
      s.rho_under[b] = Matrix::Zero(2, 3);
    }
    for (std::size_t i = 0; i < 3; ++i) {
      const auto own = branch_index(tr.labels[i]);
      const auto other = 1 - own;
      s.rho_bar[own].col(static_cast<Eigen::Index>(i)).setConstant(rho_bar * f);
      s.rho_under[other].col(static_cast<Eigen::Index>(i)).setConstant(rho_under * f);
    }
    tr.snapshots.push_back(s);
    tr.rows.push_back(TraceRow{t});
  }
  return tr;
}

}  // namespace

TEST_CASE("assumption report at the default configuration") {
  const auto rep = check_assumptions(kBaseline, 200, 20, 0.5, 0.01, 0.1);
  const auto& snr = rep.item("snr");
  CHECK(snr.ratio == doctest::Approx((2.0 / (0.5 * std::sqrt(2000.0))) * std::sqrt(200.0)));
  CHECK(snr.ratio == doctest::Approx(1.26).epsilon(0.01));
  CHECK(snr.status == CheckStatus::borderline);
  CHECK(rep.log_factor == doctest::Approx(std::log(2000.0)));
  for (const auto& it : rep.items) CHECK(std::isfinite(it.ratio));
  CHECK_THROWS(rep.item("nope"));
}

TEST_CASE("assumption failures") {
  CHECK(check_assumptions(kBaseline, 200, 20, 0.5, 0.01, 0.0).item("flip_rate_lower").status ==
        CheckStatus::fail);
  const auto low = check_assumptions(SignalSpec::axis_aligned(10, 2.0, 0.5), 200, 20, 0.5, 0.01, 0.1);
  const auto& dim = low.item("dimension");
  CHECK(dim.status == CheckStatus::fail);
  CHECK(dim.ratio == doctest::Approx(10.0 / (200.0 * 200.0)));
  CHECK(dim.ratio == doctest::Approx(2.5e-4));
  // nonsense inputs still produce a finite report
  const auto bad = check_assumptions(kBaseline, 0, 0, -1.0, -1.0, -1.0);
  for (const auto& it : bad.items) CHECK(std::isfinite(it.ratio));
  CHECK_FALSE(bad.all_passed);
}

TEST_CASE("stage horizons") {
  const auto est = estimate_stage_times(kBaseline, 200, 20, 0.5, 0.01, 0.05, Algorithm::lngd);
  const double t1 = 200.0 * 20.0 * std::log(1.0 / (0.01 * 0.5 * std::sqrt(2000.0))) /
                    (0.5 * 0.25 * 2000.0);
  CHECK(est.valid);
  CHECK(est.t1 == doctest::Approx(t1));
  CHECK(est.t1 == doctest::Approx(24.0).epsilon(0.01));
  CHECK(est.t2 - est.t1 == doctest::Approx(20.0 * std::log(6.0 / 0.02) / (0.5 * 4.0)));
  CHECK(est.t2 - est.t1 == doctest::Approx(57.0).epsilon(0.01));
  const auto fast = estimate_stage_times(kBaseline, 200, 20, 1.0, 0.01, 0.05, Algorithm::lngd);
  CHECK(fast.t1 == doctest::Approx(est.t1 / 2.0));
  const auto gd = estimate_stage_times(kBaseline, 200, 20, 0.5, 0.01, 0.05, Algorithm::gd);
  CHECK(gd.t2 - gd.t1 == doctest::Approx(8000.0 * 200.0 / (0.5 * 0.05 * 500.0)));
  CHECK(gd.t2 >= gd.t1);
  const auto invalid = estimate_stage_times(kBaseline, 200, 20, 0.5, 1.0, 0.05, Algorithm::gd);
  CHECK_FALSE(invalid.valid);
  CHECK_FALSE(invalid.diagnostic.empty());
  CHECK_THROWS(estimate_stage_times(kBaseline, 200, 20, 0.5, 0.01, 1.5, Algorithm::gd));
}

TEST_CASE("bound monitor") {
  const TrainTrace inside = synthetic_trace(100, 3.0, 2.0, -1.0);
  const auto rep = coefficient_bound_monitor(inside, 2000.0);
  CHECK(rep.alpha == doctest::Approx(4.0 * std::log(2000.0)));
  CHECK(rep.alpha == doctest::Approx(30.40).epsilon(1e-3));
  CHECK(rep.violation_count == 0);
  CHECK(rep.steps_checked == inside.snapshots.size());

  const TrainTrace outside = synthetic_trace(100, 3.0, -0.5, 0.2);
  const auto bad = coefficient_bound_monitor(outside, 2000.0);
  CHECK(bad.violation_count > 0);
  CHECK(bad.violations.front().step == 10);  // step 0 is all zeros
  CHECK(bad.worst_rho_bar_low == doctest::Approx(-0.5));
  CHECK(bad.worst_rho_under_high == doctest::Approx(0.2));

  const TrainTrace big = synthetic_trace(100, 20.0, 26.0, -1.0);
  const auto tight = coefficient_bound_monitor(big, 500.0);   // alpha ~ 24.9
  const auto loose = coefficient_bound_monitor(big, 5000.0);  // alpha ~ 34.1
  CHECK(tight.violation_count > 0);
  CHECK(loose.violation_count <= tight.violation_count);
  CHECK(loose.violation_count == 0);

  TrainTrace no_snap = inside;
  no_snap.snapshots.clear();
  CHECK_THROWS_AS(coefficient_bound_monitor(no_snap, 2000.0), std::invalid_argument);
}

TEST_CASE("iota fixed point") {
  CHECK(iota_fixed_point(0.1) == doctest::Approx(std::log(9.0)));
  CHECK(iota_fixed_point(0.1) == doctest::Approx(2.1972).epsilon(1e-4));
  CHECK(iota_fixed_point(0.25) == doctest::Approx(std::log(3.0)));
  CHECK(iota_fixed_point(0.4999999) == doctest::Approx(0.0).epsilon(1e-5));
  // drift balance: (1-p)/(1+e^x) == p/(1+e^-x) at the fixed point
  for (double p : {0.05, 0.1, 0.3, 0.45}) {
    const double x = iota_fixed_point(p);
    CHECK((1 - p) / (1 + std::exp(x)) == doctest::Approx(p / (1 + std::exp(-x))));
    // the formula is antisymmetric under p -> 1 - p
    CHECK(std::log(p / (1 - p)) == doctest::Approx(-x));
  }
  CHECK_THROWS(iota_fixed_point(0.0));
  CHECK_THROWS(iota_fixed_point(0.5));
}

TEST_CASE("stage-2 boundedness") {
  IotaSeries s;
  s.values = Matrix::Constant(5, 3, 2.0);
  for (std::size_t k = 0; k < 5; ++k) s.steps.push_back(k * 10);
  const auto rep = stage2_boundedness_check(s, 15.0, 0.1);
  CHECK(rep.t1_logged == 20);
  CHECK(rep.all_passed);
  CHECK(rep.samples.at(0).sup == 2.0);
  CHECK(rep.samples.at(0).bound == 11.0);
  REQUIRE(rep.fixed_point);
  CHECK(*rep.relative_deviation == doctest::Approx(std::abs(2.0 - std::log(9.0)) / std::log(9.0)));
  CHECK(*rep.fixed_point_ok);
  const auto gd = stage2_boundedness_check(s, 15.0);
  CHECK_FALSE(gd.fixed_point.has_value());
  s.values(4, 1) = 100.0;
  const auto bad = stage2_boundedness_check(s, 15.0, 0.1);
  CHECK(bad.failures == 1);
  CHECK_FALSE(bad.all_passed);
}

TEST_CASE("concentration suite on a small instance") {
  ConcentrationOptions o;
  o.trials = 200;
  o.n = 10;
  o.m = 10;
  o.horizon = 2000;
  o.seed = 3;
  const auto rep = concentration_suite(SignalSpec::axis_aligned(500, 2.0, 0.5), o);
  REQUIRE(rep.checks.size() == 5);
  CHECK(rep.check("noise_geometry").pass_rate >= 0.97);
  CHECK(rep.check("flip_count").pass_rate >= 0.95);
  CHECK(rep.check("flip_history").pass_rate >= 0.95);
  // threshold 2 log(4n/delta)/p^2 = 2 log(4000)/0.01 ~ 1659
  CHECK(rep.check("flip_history_interval").applicable);
  o.trials = 99;
  CHECK_THROWS(concentration_suite(SignalSpec::axis_aligned(500, 2.0, 0.5), o));
  o.trials = 100;
  o.only = {"bogus"};
  CHECK_THROWS(concentration_suite(SignalSpec::axis_aligned(500, 2.0, 0.5), o));
}

TEST_CASE("flip history interval threshold") {
  const double threshold = 2.0 * std::log(4.0 * 200.0 / 0.05) / (0.1 * 0.1);
  CHECK(threshold == doctest::Approx(1937.0).epsilon(1e-3));
  ConcentrationOptions o;
  o.trials = 100;
  o.n = 200;
  o.delta = 0.05;
  o.horizon = 2000;
  o.only = {"flip_history_interval"};
  const auto rep = concentration_suite(kBaseline, o);
  const auto& c = rep.check("flip_history_interval");
  CHECK(c.applicable);
  CHECK(c.details.at("threshold").get<double>() == doctest::Approx(threshold));
  CHECK(c.details.at("interval")[0].get<double>() == doctest::Approx(100.0));
  CHECK(c.details.at("interval")[1].get<double>() == doctest::Approx(300.0));
  o.horizon = 1500;
  CHECK_FALSE(concentration_suite(kBaseline, o).check("flip_history_interval").applicable);

  ConcentrationOptions z;
  z.trials = 100;
  z.p = 0.0;
  z.only = {"flip_count"};
  CHECK(concentration_suite(kBaseline, z).check("flip_count").trials == 100);
}

TEST_CASE("verdicts") {
  CHECK(c_test_for_bound(0.05, 2000, 200) == doctest::Approx(-20.0 * std::log(0.025)));
  CHECK(2.0 * std::exp(-c_test_for_bound(0.05, 2000, 200) * 2000.0 / 40000.0) ==
        doctest::Approx(0.05));

  TrainTrace tr;
  tr.d = 2000;
  tr.n = 200;
  TraceRow last;
  last.step = 2000;
  last.clean_train_loss = 0.5;
  last.test_error_01 = 0.0;
  tr.rows.push_back(last);
  const Verdicts v = theorem_verdicts(tr);
  CHECK(v.lngd.error_bound == doctest::Approx(2.0 * std::exp(-0.05)));
  CHECK(v.lngd.error_bound == doctest::Approx(1.90).epsilon(1e-3));
  CHECK(v.lngd.bound_vacuous);
  CHECK(v.lngd.test_error_small);
  CHECK(v.lngd.passed);
  CHECK_FALSE(v.gd.passed);

  tr.rows.back().clean_train_loss = 0.01;
  tr.rows.back().test_error_01 = 0.3;
  const Verdicts g = theorem_verdicts(tr);
  CHECK(g.gd.error_floor == doctest::Approx(0.20));
  CHECK(g.gd.passed);
  CHECK_FALSE(g.lngd.train_loss_constant_order);

  VerdictOptions strict;
  strict.c_test = c_test_for_bound(0.05, 2000, 200);
  tr.rows.back().clean_train_loss = 0.5;
  tr.rows.back().test_error_01 = 0.06;
  CHECK_FALSE(theorem_verdicts(tr, strict).lngd.test_error_small);
}

TEST_CASE("validators are pure") {
  const TrainTrace tr = synthetic_trace(100, 3.0, -0.5, 0.2);
  CHECK(to_json(coefficient_bound_monitor(tr, 2000.0)) ==
        to_json(coefficient_bound_monitor(tr, 2000.0)));
}
