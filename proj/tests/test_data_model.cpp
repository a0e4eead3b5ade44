#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "lngd/data_model.hpp"

using namespace lngd;

TEST_CASE("noise projection removes the signal component") {
  const SignalSpec spec(Vector{{2.0, 0.0}}, 0.5);
  const Vector xi = project_noise(spec, Vector{{1.0, 1.0}});
  CHECK(xi(0) == doctest::Approx(0.0));
  CHECK(xi(1) == doctest::Approx(0.5));
  CHECK(project_noise(spec, Vector::Zero(2)).norm() == 0.0);
}

TEST_CASE("noise norm concentrates in [sp^2 d/2, 3 sp^2 d/2]") {
  const auto spec = SignalSpec::axis_aligned(2000, 2.0, 0.5);
  Engine rng = make_engine(11);
  int inside = 0;
  for (int t = 0; t < 1000; ++t) {
    const double v = sample_noise_vector(spec, rng).squaredNorm();
    inside += v >= 250.0 && v <= 750.0;
  }
  CHECK(inside >= 990);
}

TEST_CASE("every sample has one signal patch y*mu and one orthogonal noise patch") {
  const auto spec = SignalSpec::axis_aligned(2000, 2.0, 0.5);
  Engine rng = make_engine(3);
  const Dataset data = generate_dataset(spec, 200, rng);
  REQUIRE(data.size() == 200);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Sample s = data.sample(i);
    CHECK((s.label == 1 || s.label == -1));
    const Vector& sig = s.signal_patch_index == 1 ? s.patch1 : s.patch2;
    const Vector& noi = s.signal_patch_index == 1 ? s.patch2 : s.patch1;
    CHECK((sig - s.label * spec.mu()).norm() == 0.0);
    CHECK((noi - s.noise_vector).norm() == 0.0);
    CHECK(std::abs(s.noise_vector.dot(spec.mu())) <=
          1e-9 * spec.mu_norm() * s.noise_vector.norm());
  }
}

TEST_CASE("empty dataset") {
  const auto spec = SignalSpec::axis_aligned(5, 1.0, 1.0);
  Engine rng = make_engine(0);
  CHECK(generate_dataset(spec, 0, rng).empty());
}

TEST_CASE("labels are Rademacher and patch index uniform") {
  const auto spec = SignalSpec::axis_aligned(2, 1.0, 1.0);
  Engine rng = make_engine(5);
  const Dataset data = generate_dataset(spec, 10000, rng);
  double ly = 0.0, lp = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    ly += data.label(i);
    lp += data.signal_patch_index()[i];
  }
  CHECK(std::abs(ly / 10000.0) <= 0.05);
  CHECK(std::abs(lp / 10000.0 - 1.5) <= 0.05);
}

TEST_CASE("identical seed gives a bit-identical dataset") {
  const auto a = testutil::small_dataset(300, 50, 9);
  const auto b = testutil::small_dataset(300, 50, 9);
  CHECK(a.labels() == b.labels());
  CHECK(a.signal_patch_index() == b.signal_patch_index());
  CHECK(a.noise() == b.noise());
}

TEST_CASE("compute_snr") {
  const auto spec = SignalSpec::axis_aligned(2000, 2.0, 0.5);
  CHECK(compute_snr(spec) == doctest::Approx(2.0 / (0.5 * std::sqrt(2000.0))).epsilon(1e-14));
  CHECK(compute_snr(spec) == doctest::Approx(0.08944).epsilon(1e-4));
  CHECK(compute_snr(3.0, 3.0, 1) == 1.0);
  const auto doubled = SignalSpec::axis_aligned(2000, 2.0, 1.0);
  CHECK(compute_snr(doubled) == doctest::Approx(compute_snr(spec) / 2.0));
}

TEST_CASE("invalid specs are rejected") {
  CHECK_THROWS_AS(SignalSpec(Vector{{1.0}}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(SignalSpec(Vector::Zero(3), 1.0), std::invalid_argument);
  CHECK_THROWS_AS(SignalSpec(Vector::Ones(3), 0.0), std::invalid_argument);
}

TEST_CASE("dataset JSON round trip") {
  const auto a = testutil::small_dataset(20, 7, 1);
  const Dataset b = dataset_from_json(nlohmann::json::parse(dataset_to_json(a).dump()));
  CHECK(b.labels() == a.labels());
  CHECK(b.signal_patch_index() == a.signal_patch_index());
  CHECK(b.noise() == a.noise());
  CHECK(b.seed_record() == a.seed_record());
  CHECK(b.spec().mu() == a.spec().mu());
}
