#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lngd/data_model.hpp"
#include "lngd/trainer.hpp"

namespace lngd {

// ---------------------------------------------------------------------------
// Assumption checks
//
// The assumptions are asymptotic (tilde-O / tilde-Omega with unspecified
// constants), so each item is evaluated with an explicit hidden constant,
// polylog factors instantiated as log(d), and reported as a ratio together
// with a three-way status:
//   lower bound (tilde-Omega): pass if ratio >= log d, borderline if >= 1
//   upper bound (tilde-O):     pass if ratio <= 1, borderline if <= log d
//   relaxed lower (tilde-O on the small side): pass if >= 1, borderline if
//                              >= 1/log d
//   exact:                     pass or fail only
// ---------------------------------------------------------------------------

enum class CheckStatus { pass, borderline, fail };
std::string to_string(CheckStatus s);

struct AssumptionItem {
  std::string id;
  std::string description;
  double lhs = 0.0;
  double rhs = 0.0;  // bound, hidden constant included
  std::string relation;  // ">=", "<=", ">" or "<"
  double hidden_constant = 1.0;
  double ratio = 0.0;  // lhs / rhs, always finite
  CheckStatus status = CheckStatus::fail;
  bool passed = false;
};

struct AssumptionReport {
  std::vector<AssumptionItem> items;
  double log_factor = 0.0;
  bool all_passed = false;

  const AssumptionItem& item(const std::string& id) const;
};

struct HiddenConstants {
  double dimension = 1.0;
  double snr = 1.0;
  double width = 1.0;
  double sample_size = 1.0;
  double learning_rate = 1.0;
  double init_lower = 1.0;
  double init_upper = 1.0;
  double flip = 1.0;
};

/// Never throws; invalid inputs yield failing items with ratio 0.
AssumptionReport check_assumptions(const SignalSpec& spec, std::size_t n,
                                   std::size_t m, double eta, double sigma_0,
                                   double p, const HiddenConstants& c = {});

// ---------------------------------------------------------------------------
// Stage horizons
// ---------------------------------------------------------------------------

enum class Algorithm { gd, lngd };
std::string to_string(Algorithm a);

struct StageConstants {
  double stage1 = 1.0;
  double stage2 = 1.0;
};

struct StageEstimate {
  Algorithm which = Algorithm::gd;
  double t1 = 0.0;
  double t2 = 0.0;
  StageConstants constants_used;
  bool valid = false;
  std::string diagnostic;
};

/// T1 = n m log(1/(sigma_0 sigma_p sqrt d)) / (eta sigma_p^2 d)
/// GD:   T2 = T1 + m^3 n / (eta eps sigma_p^2 d)
/// LNGD: T2 = T1 + m log(6/(sigma_0 |mu|)) / (eta |mu|^2)
/// Throws std::invalid_argument on eta <= 0, sigma_0 <= 0 or (for GD)
/// epsilon outside (0, 1). A non-positive logarithm yields valid == false.
StageEstimate estimate_stage_times(const SignalSpec& spec, std::size_t n,
                                   std::size_t m, double eta, double sigma_0,
                                   double epsilon, Algorithm which,
                                   const StageConstants& c = {});

// ---------------------------------------------------------------------------
// Coefficient bound monitor: 0 <= gamma <= alpha, 0 <= rho_bar <= alpha,
// -alpha <= rho_under <= 0 with alpha = 4 log(T*).
// ---------------------------------------------------------------------------

struct BoundViolation {
  std::size_t step = 0;
  std::string coefficient;  // "gamma", "rho_bar", "rho_under"
  int j = 0;
  std::size_t r = 0;
  long i = -1;  // -1 for gamma
  double value = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

struct BoundMonitorReport {
  double t_star = 0.0;
  double alpha = 0.0;
  std::size_t steps_checked = 0;
  std::size_t violation_count = 0;
  /// First `max_listed` violations in step order.
  std::vector<BoundViolation> violations;
  /// Most negative gamma / rho_bar and most positive rho_under seen.
  double worst_gamma_low = 0.0;
  double worst_rho_bar_low = 0.0;
  double worst_rho_under_high = 0.0;
  double worst_upper = 0.0;
};

/// Requires coefficient snapshots in the trace; throws std::invalid_argument
/// otherwise.
BoundMonitorReport coefficient_bound_monitor(const TrainTrace& trace,
                                             double t_star,
                                             std::size_t max_listed = 200);

// ---------------------------------------------------------------------------
// Stage-2 memorization behaviour
// ---------------------------------------------------------------------------

/// log((1-p)/p): where (1-p)/(1+e^x) = p/(1+e^-x), i.e. the margin at which
/// the expected noise-memorization drift vanishes. Requires 0 < p < 0.5.
double iota_fixed_point(double p);

struct Stage2Options {
  double band_multiplier = 3.0;
  double band_offset = 5.0;
  double fixed_point_tolerance = 0.5;  // relative
};

struct Stage2Sample {
  double start = 0.0;  // iota at the first logged step >= T1
  double sup = 0.0;
  double median = 0.0;
  double bound = 0.0;
  bool passed = false;
};

struct Stage2Report {
  double t1 = 0.0;
  std::size_t t1_logged = 0;
  std::vector<Stage2Sample> samples;
  std::size_t failures = 0;
  bool all_passed = false;
  double median_of_medians = 0.0;
  std::optional<double> fixed_point;
  std::optional<double> relative_deviation;
  std::optional<bool> fixed_point_ok;
};

/// `p` enables the fixed-point comparison when it lies in (0, 0.5).
Stage2Report stage2_boundedness_check(const IotaSeries& series, double t1,
                                      std::optional<double> p = std::nullopt,
                                      const Stage2Options& opt = {});

// ---------------------------------------------------------------------------
// Monte Carlo concentration suite
// ---------------------------------------------------------------------------

struct ConcentrationOptions {
  std::size_t n = 20;
  std::size_t m = 20;
  double sigma_0 = 0.01;
  double p = 0.1;
  std::size_t trials = 1000;
  double delta = 0.01;
  std::size_t horizon = 2000;  // t for the per-sample flip history checks
  std::uint64_t seed = 0;
  /// Names of the checks to run; empty runs all of them.
  std::vector<std::string> only;
};

struct ConcentrationCheck {
  std::string name;
  std::string statement;
  std::size_t trials = 0;
  std::size_t passes = 0;
  double pass_rate = 0.0;
  bool applicable = true;
  nlohmann::json details;
};

struct ConcentrationReport {
  double delta = 0.0;
  std::vector<ConcentrationCheck> checks;

  const ConcentrationCheck& check(const std::string& name) const;
};

/// Checks, per trial:
///   noise_geometry        |xi|^2 in [sp^2 d/2, 3 sp^2 d/2] and
///                         |<xi_i, xi_k>| <= 2 sp^2 sqrt(d log(4n^2/delta))
///   init_projection       initial filter projections on mu and xi_i within
///                         their anti-concentration / concentration bands
///   flip_count            | |S_-| - np | <= sqrt(n/2 log(4/delta)) and the
///                         per-class version with log(8/delta)
///   flip_history          per-sample flip count after `horizon` steps within
///                         sqrt(t/2 log(4n/delta)) of pt
///   flip_history_interval |S_{i,-}| in [pt/2, 3pt/2], applicable when
///                         t >= 2 log(4n/delta)/p^2
/// Throws std::invalid_argument if trials < 100 or `only` names an unknown
/// check.
ConcentrationReport concentration_suite(const SignalSpec& spec,
                                        const ConcentrationOptions& opt);

// ---------------------------------------------------------------------------
// Verdicts on a finished trace
// ---------------------------------------------------------------------------

struct VerdictOptions {
  double epsilon = 0.05;       // GD train-loss target
  double c_test = 1.0;         // constant in 2 exp(-C d / n^2)
  double slack = 0.04;         // subtracted from the 0.24 error floor
  double loss_band_lo = 0.1;
  double loss_band_hi = 1.5;
};

struct GdVerdict {
  double final_train_loss = 0.0;
  double final_test_error = 0.0;
  double error_floor = 0.0;
  bool train_loss_converged = false;
  bool test_error_large = false;
  bool passed = false;
};

struct LngdVerdict {
  double final_train_loss = 0.0;
  double final_test_error = 0.0;
  double error_bound = 0.0;
  bool bound_vacuous = false;
  bool train_loss_constant_order = false;
  bool test_error_small = false;
  bool passed = false;
};

struct Verdicts {
  GdVerdict gd;
  LngdVerdict lngd;
};

Verdicts theorem_verdicts(const TrainTrace& trace, const VerdictOptions& opt = {});

/// C such that 2 exp(-C d / n^2) equals `target`.
double c_test_for_bound(double target, std::size_t d, std::size_t n);

nlohmann::json to_json(const AssumptionReport& r);
nlohmann::json to_json(const StageEstimate& s);
nlohmann::json to_json(const BoundMonitorReport& r);
nlohmann::json to_json(const Stage2Report& r, bool include_samples = false);
nlohmann::json to_json(const ConcentrationReport& r);
nlohmann::json to_json(const Verdicts& v);

}  // namespace lngd
