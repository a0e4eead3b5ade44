#include "lngd/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace lngd {

SignalSpec RunConfig::spec() const {
  return SignalSpec::axis_aligned(d, mu_scale, sigma_p);
}

NetworkShape RunConfig::shape() const { return NetworkShape{m, q, sigma_0}; }

TrainConfig RunConfig::train_config(const LabelNoiseSpec& arm_noise) const {
  TrainConfig t;
  t.eta = eta;
  t.steps = steps;
  t.noise = arm_noise;
  t.log_stride = log_stride;
  t.seed = seed;
  t.n_test = n_test;
  return t;
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void reject_unknown(const nlohmann::json& j, const std::vector<std::string>& allowed) {
  if (!j.is_object()) throw ConfigError("", "configuration must be a JSON object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items()) {
    (void)v;
    if (!ok.count(k)) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      throw ConfigError(k, "unknown key (allowed: " + list + ")");
    }
  }
}

std::uint64_t get_uint(const nlohmann::json& j, const std::string& key,
                       std::uint64_t dflt, std::uint64_t lo,
                       std::uint64_t hi = std::numeric_limits<std::uint64_t>::max()) {
  if (!j.contains(key)) return dflt;
  const auto& v = j.at(key);
  std::uint64_t x = 0;
  if (v.is_number_unsigned()) {
    x = v.get<std::uint64_t>();
  } else if (v.is_number_integer()) {
    const auto sx = v.get<std::int64_t>();
    if (sx < 0)
      throw ConfigError(key, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) +
                                 "], got " + v.dump());
    x = static_cast<std::uint64_t>(sx);
  } else {
    throw ConfigError(key, "expected an integer, got " + v.dump());
  }
  if (x < lo || x > hi)
    throw ConfigError(key, "must lie in [" + std::to_string(lo) + ", " +
                               std::to_string(hi) + "], got " + std::to_string(x));
  return x;
}

double get_real(const nlohmann::json& j, const std::string& key, double dflt) {
  if (!j.contains(key)) return dflt;
  const auto& v = j.at(key);
  if (!v.is_number()) throw ConfigError(key, "expected a number, got " + v.dump());
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(key, "must be finite");
  return x;
}

void require(bool ok, const std::string& key, const std::string& range, double got) {
  if (!ok) throw ConfigError(key, "must lie in " + range + ", got " + fmt(got));
}

}  // namespace

const std::vector<std::string>& run_config_keys() {
  static const std::vector<std::string> keys{
      "d",     "n",       "mu_scale",   "sigma_p", "p",           "noise",
      "eta",   "steps",   "seed",       "m",       "q",           "sigma_0",
      "log_stride", "n_test", "coef_stride", "epsilon", "c_test"};
  return keys;
}

void validate(const RunConfig& c) {
  require(c.d >= 2, "d", "[2, inf)", static_cast<double>(c.d));
  require(c.n >= 1, "n", "[1, inf)", static_cast<double>(c.n));
  require(c.mu_scale > 0.0 && std::isfinite(c.mu_scale), "mu_scale", "(0, inf)", c.mu_scale);
  require(c.sigma_p > 0.0 && std::isfinite(c.sigma_p), "sigma_p", "(0, inf)", c.sigma_p);
  require(c.eta > 0.0 && std::isfinite(c.eta), "eta", "(0, inf)", c.eta);
  require(c.steps >= 1, "steps", "[1, inf)", static_cast<double>(c.steps));
  require(c.m >= 1, "m", "[1, inf)", static_cast<double>(c.m));
  require(c.q >= 2 && c.q <= 8, "q", "[2, 8]", c.q);
  require(c.sigma_0 > 0.0 && std::isfinite(c.sigma_0), "sigma_0", "(0, inf)", c.sigma_0);
  require(c.log_stride >= 1 && c.log_stride <= c.steps, "log_stride", "[1, steps]",
          static_cast<double>(c.log_stride));
  require(c.n_test >= 1, "n_test", "[1, inf)", static_cast<double>(c.n_test));
  require(c.coef_stride >= 1, "coef_stride", "[1, inf)", static_cast<double>(c.coef_stride));
  require(c.epsilon > 0.0 && c.epsilon < 1.0, "epsilon", "(0, 1)", c.epsilon);
  require(c.c_test > 0.0 && std::isfinite(c.c_test), "c_test", "(0, inf)", c.c_test);
}

RunConfig parse_run_config(const nlohmann::json& j) {
  reject_unknown(j, run_config_keys());
  RunConfig c;
  c.d = get_uint(j, "d", c.d, 2);
  c.n = get_uint(j, "n", c.n, 1);
  c.mu_scale = get_real(j, "mu_scale", c.mu_scale);
  c.sigma_p = get_real(j, "sigma_p", c.sigma_p);
  if (j.contains("p") && j.contains("noise"))
    throw ConfigError("noise", "give either p or noise, not both");
  if (j.contains("p")) {
    const double p = get_real(j, "p", 0.0);
    require(p >= 0.0 && p <= 1.0, "p", "[0, 1]", p);
    c.noise = LabelNoiseSpec::flip(p);
  } else if (j.contains("noise")) {
    try {
      c.noise = label_noise_from_json(j.at("noise"));
    } catch (const std::exception& e) {
      throw ConfigError("noise", e.what());
    }
  }
  c.eta = get_real(j, "eta", c.eta);
  c.steps = get_uint(j, "steps", c.steps, 1);
  c.seed = get_uint(j, "seed", c.seed, 0);
  c.m = get_uint(j, "m", c.m, 1);
  c.q = static_cast<int>(get_uint(j, "q", static_cast<std::uint64_t>(c.q), 2, 8));
  c.sigma_0 = get_real(j, "sigma_0", c.sigma_0);
  c.log_stride = get_uint(j, "log_stride", c.log_stride, 1);
  c.n_test = get_uint(j, "n_test", c.n_test, 1);
  c.coef_stride = get_uint(j, "coef_stride", c.coef_stride, 1);
  c.epsilon = get_real(j, "epsilon", c.epsilon);
  c.c_test = get_real(j, "c_test", c.c_test);
  validate(c);
  return c;
}

nlohmann::json run_config_to_json(const RunConfig& c) {
  return {{"d", c.d},           {"n", c.n},
          {"mu_scale", c.mu_scale}, {"sigma_p", c.sigma_p},
          {"noise", label_noise_to_json(c.noise)},
          {"eta", c.eta},       {"steps", c.steps},
          {"seed", c.seed},     {"m", c.m},
          {"q", c.q},           {"sigma_0", c.sigma_0},
          {"log_stride", c.log_stride}, {"n_test", c.n_test},
          {"coef_stride", c.coef_stride}, {"epsilon", c.epsilon},
          {"c_test", c.c_test}};
}

void validate(const SweepConfig& c) {
  if (c.snr_values.empty()) throw ConfigError("snr_values", "must be nonempty");
  for (double s : c.snr_values) require(s > 0.0 && std::isfinite(s), "snr_values", "(0, inf)", s);
  if (c.n_values.empty()) throw ConfigError("n_values", "must be nonempty");
  for (auto n : c.n_values) require(n >= 1, "n_values", "[1, inf)", static_cast<double>(n));
  require(c.steps >= 1, "steps", "[1, inf)", static_cast<double>(c.steps));
  require(c.eta > 0.0 && std::isfinite(c.eta), "eta", "(0, inf)", c.eta);
  require(c.seeds_per_cell >= 1, "seeds_per_cell", "[1, inf)", static_cast<double>(c.seeds_per_cell));
  require(c.d >= 2, "d", "[2, inf)", static_cast<double>(c.d));
  require(c.m >= 1, "m", "[1, inf)", static_cast<double>(c.m));
  require(c.q >= 2 && c.q <= 8, "q", "[2, 8]", c.q);
  require(c.sigma_0 > 0.0 && std::isfinite(c.sigma_0), "sigma_0", "(0, inf)", c.sigma_0);
  require(c.sigma_p > 0.0 && std::isfinite(c.sigma_p), "sigma_p", "(0, inf)", c.sigma_p);
  require(c.p >= 0.0 && c.p <= 1.0, "p", "[0, 1]", c.p);
  require(c.n_test >= 1, "n_test", "[1, inf)", static_cast<double>(c.n_test));
}

SweepConfig parse_sweep_config(const nlohmann::json& j) {
  reject_unknown(j, {"snr_values", "n_values", "steps", "eta", "seeds_per_cell", "d", "m",
                     "q", "sigma_0", "sigma_p", "p", "n_test", "seed", "threads"});
  SweepConfig c;
  if (j.contains("snr_values")) {
    const auto& a = j.at("snr_values");
    if (!a.is_array()) throw ConfigError("snr_values", "expected an array of numbers");
    c.snr_values.clear();
    for (const auto& v : a) {
      if (!v.is_number()) throw ConfigError("snr_values", "expected numbers, got " + v.dump());
      c.snr_values.push_back(v.get<double>());
    }
  }
  if (j.contains("n_values")) {
    const auto& a = j.at("n_values");
    if (!a.is_array()) throw ConfigError("n_values", "expected an array of integers");
    c.n_values.clear();
    for (const auto& v : a) {
      if (!v.is_number_integer() || v.get<std::int64_t>() < 1)
        throw ConfigError("n_values", "expected positive integers, got " + v.dump());
      c.n_values.push_back(v.get<std::size_t>());
    }
  }
  c.steps = get_uint(j, "steps", c.steps, 1);
  c.eta = get_real(j, "eta", c.eta);
  c.seeds_per_cell = get_uint(j, "seeds_per_cell", c.seeds_per_cell, 1);
  c.d = get_uint(j, "d", c.d, 2);
  c.m = get_uint(j, "m", c.m, 1);
  c.q = static_cast<int>(get_uint(j, "q", static_cast<std::uint64_t>(c.q), 2, 8));
  c.sigma_0 = get_real(j, "sigma_0", c.sigma_0);
  c.sigma_p = get_real(j, "sigma_p", c.sigma_p);
  c.p = get_real(j, "p", c.p);
  c.n_test = get_uint(j, "n_test", c.n_test, 1);
  c.seed = get_uint(j, "seed", c.seed, 0);
  c.threads = get_uint(j, "threads", c.threads, 0, 1024);
  validate(c);
  return c;
}

nlohmann::json sweep_config_to_json(const SweepConfig& c) {
  return {{"snr_values", c.snr_values}, {"n_values", c.n_values},
          {"steps", c.steps},           {"eta", c.eta},
          {"seeds_per_cell", c.seeds_per_cell},
          {"d", c.d},                   {"m", c.m},
          {"q", c.q},                   {"sigma_0", c.sigma_0},
          {"sigma_p", c.sigma_p},       {"p", c.p},
          {"n_test", c.n_test},         {"seed", c.seed},
          {"threads", c.threads}};
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("", path.string() + ": malformed JSON: " + e.what());
  }
}

nlohmann::json apply_overrides(nlohmann::json base,
                               const std::vector<std::string>& overrides) {
  if (base.is_null()) base = nlohmann::json::object();
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ConfigError("", "override '" + o + "' is not of the form key=value");
    const std::string key = o.substr(0, eq);
    const std::string val = o.substr(eq + 1);
    nlohmann::json parsed = nlohmann::json::parse(val, nullptr, false);
    base[key] = parsed.is_discarded() ? nlohmann::json(val) : parsed;
    // "p" and "noise" are alternatives; an override of one replaces the other
    if (key == "p") base.erase("noise");
    if (key == "noise") base.erase("p");
  }
  return base;
}

}  // namespace lngd
