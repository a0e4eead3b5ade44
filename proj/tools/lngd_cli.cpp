// Command-line front end: lngd <subcommand> [options]
#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "lngd/config.hpp"
#include "lngd/experiments.hpp"
#include "lngd/output.hpp"
#include "lngd/theory.hpp"

namespace fs = std::filesystem;
using namespace lngd;

namespace {

enum Exit { kOk = 0, kUsage = 1, kAborted = 2, kAssertFailed = 3 };

struct Common {
  std::string config;
  std::vector<std::string> set;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool assert_ = false;
  bool force = false;
};

void add_common(CLI::App* sub, Common& c, bool with_config = true) {
  if (with_config) {
    sub->add_option("--config", c.config, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--set", c.set, "override a config key (key=value), repeatable");
  }
  sub->add_option("--seed", c.seed, "master seed (overrides the config)");
  sub->add_option("--out", c.out, std::string("output directory (default $") + kOutRootEnv +
                                       "/<command>-seed<seed>)");
  sub->add_flag("--assert", c.assert_, "exit 3 when the acceptance verdict fails");
  sub->add_flag("--force", c.force, "overwrite an existing run directory");
}

nlohmann::json load_doc(const Common& c) {
  nlohmann::json doc = c.config.empty() ? nlohmann::json::object() : read_json_file(c.config);
  doc = apply_overrides(std::move(doc), c.set);
  if (c.seed) doc["seed"] = *c.seed;
  return doc;
}

fs::path out_dir(const Common& c, const std::string& command, std::uint64_t seed) {
  if (!c.out.empty()) return c.out;
  return default_out_root() / (command + "-seed" + std::to_string(seed));
}

void emit(const fs::path& dir, const Common& c, const std::string& command,
          const nlohmann::json& config, const nlohmann::json& spec, std::uint64_t seed,
          const std::string& started,
          const std::vector<std::pair<std::string, std::string>>& files,
          const nlohmann::json& extra = nullptr) {
  prepare_run_dir(dir, c.force);
  ManifestInput m;
  m.command = command;
  m.config = config;
  m.spec = spec;
  m.master_seed = seed;
  m.started = started;
  for (const auto& [name, content] : files) m.files.push_back(write_file(dir, name, content));
  m.finished = utc_timestamp();
  m.extra = extra;
  write_file(dir, "manifest.json", build_manifest(m).dump(2) + "\n");
  std::cout << "wrote " << dir.string() << "\n";
}

nlohmann::json spec_json(const RunConfig& rc) { return signal_spec_to_json(rc.spec()); }

const char* yn(bool b) { return b ? "yes" : "no"; }

void print_arm(const ArmResult& a) {
  std::printf("  %-16s acc=%.4f  clean_loss=%.4g", a.name.c_str(), a.final_test_accuracy(),
              a.final_clean_loss());
  if (a.monitor) std::printf("  bound_violations=%zu", a.monitor->violation_count);
  if (!a.ok())
    std::printf("  FAILED: %s", (a.error.empty() ? a.trace.abort_reason : a.error).c_str());
  std::printf("\n");
}

bool any_failed(std::initializer_list<const ArmResult*> arms) {
  for (auto* a : arms)
    if (!a->ok()) return true;
  return false;
}

// ---------------------------------------------------------------------------

int cmd_check(const Common& c) {
  const RunConfig rc = parse_run_config(load_doc(c));
  const double p = rc.noise.kind() == LabelNoiseSpec::Kind::flip ? rc.noise.p() : 0.0;
  const AssumptionReport rep = check_assumptions(rc.spec(), rc.n, rc.m, rc.eta, rc.sigma_0, p);
  std::printf("assumption report (log factor log d = %.4g)\n", rep.log_factor);
  for (const auto& it : rep.items)
    std::printf("  %-18s %-11s lhs=%-12.6g %s rhs=%-12.6g ratio=%.6g  [%s]\n", it.id.c_str(),
                to_string(it.status).c_str(), it.lhs, it.relation.c_str(), it.rhs, it.ratio,
                it.description.c_str());
  const StageEstimate gd = estimate_stage_times(rc.spec(), rc.n, rc.m, rc.eta, rc.sigma_0,
                                                rc.epsilon, Algorithm::gd);
  const StageEstimate ln = estimate_stage_times(rc.spec(), rc.n, rc.m, rc.eta, rc.sigma_0,
                                                rc.epsilon, Algorithm::lngd);
  std::printf("stage horizons: T1=%.6g  T2(gd)=%.6g  T2(lngd)=%.6g%s\n", gd.t1, gd.t2, ln.t2,
              gd.valid ? "" : ("  (" + gd.diagnostic + ")").c_str());
  std::printf("SNR=%.6g\n", compute_snr(rc.spec()));
  if (!c.out.empty()) {
    nlohmann::json reports = {{"assumptions", to_json(rep)},
                              {"stage_times", {{"gd", to_json(gd)}, {"lngd", to_json(ln)}}}};
    emit(c.out, c, "check", run_config_to_json(rc), spec_json(rc), rc.seed, utc_timestamp(),
         {{"reports.json", reports.dump(2) + "\n"}});
  }
  return kOk;  // report-only
}

int cmd_dynamics(const Common& c) {
  const RunConfig rc = parse_run_config(load_doc(c));
  const fs::path dir = out_dir(c, "dynamics", rc.seed);
  if (fs::exists(dir / "manifest.json") && !c.force)
    throw OutputExistsError("refusing to overwrite " + (dir / "manifest.json").string() +
                            " (use --force)");
  const std::string started = utc_timestamp();
  const DynamicsResult r = run_dynamics(rc);
  std::printf("dynamics d=%zu n=%zu steps=%zu noise=%s\n", rc.d, rc.n, rc.steps,
              rc.noise.describe().c_str());
  print_arm(r.gd);
  print_arm(r.lngd);
  std::printf("  gd verdict: %s   lngd verdict: %s (error bound %.4g%s)\n",
              r.gd.verdicts.gd.passed ? "pass" : "fail",
              r.lngd.verdicts.lngd.passed ? "pass" : "fail", r.lngd.verdicts.lngd.error_bound,
              r.lngd.verdicts.lngd.bound_vacuous ? ", vacuous" : "");
  emit_dynamics_run(dir, r, c.force, started);
  std::cout << "wrote " << dir.string() << "\n";
  if (any_failed({&r.gd, &r.lngd})) return kAborted;
  if (c.assert_ && !(r.gd.verdicts.gd.passed && r.lngd.verdicts.lngd.passed)) return kAssertFailed;
  return kOk;
}

int cmd_heatmap(const Common& c) {
  const SweepConfig grid = parse_sweep_config(load_doc(c));
  const fs::path dir = out_dir(c, "heatmap", grid.seed);
  if (fs::exists(dir / "manifest.json") && !c.force)
    throw OutputExistsError("refusing to overwrite " + (dir / "manifest.json").string() +
                            " (use --force)");
  const std::string started = utc_timestamp();
  const HeatmapResult r = run_heatmap(grid);
  std::printf("%8s %6s %10s %10s\n", "snr", "n", "gd_acc", "lngd_acc");
  bool ok = true, missing = false;
  for (const auto& cell : r.cells) {
    std::printf("%8.4g %6zu %10.4f %10.4f%s\n", cell.snr, cell.n, cell.gd_mean, cell.lngd_mean,
                cell.missing ? "  MISSING" : "");
    missing |= cell.missing;
    if (!cell.missing && cell.lngd_mean < cell.gd_mean - 0.02) ok = false;
  }
  nlohmann::json cells = nlohmann::json::array();
  for (std::size_t row = 0; row < grid.snr_values.size(); ++row)
    for (std::size_t col = 0; col < grid.n_values.size(); ++col)
      for (std::size_t s = 0; s < grid.seeds_per_cell; ++s)
        cells.push_back({{"row", row}, {"col", col}, {"replicate", s},
                         {"run_config", run_config_to_json(cell_run_config(grid, row, col, s))}});
  emit(dir, c, "heatmap", sweep_config_to_json(grid), nullptr, grid.seed, started,
       {{"heatmap.csv", heatmap_csv(r)},
        {"heatmap_summary.csv", heatmap_summary_csv(r)},
        {"reports.json", heatmap_report_json(r).dump(2) + "\n"}},
       {{"cells", cells},
        {"cell_seed", "seed = derive(master, [row, col, replicate])"},
        {"snr_policy", "mu_scale = snr * sigma_p * sqrt(d), sigma_p and d fixed"}});
  if (missing) return kAborted;
  if (c.assert_ && !ok) return kAssertFailed;
  return kOk;
}

int cmd_noise_compare(const Common& c) {
  const RunConfig rc = parse_run_config(load_doc(c));
  const fs::path dir = out_dir(c, "noise-compare", rc.seed);
  if (fs::exists(dir / "manifest.json") && !c.force)
    throw OutputExistsError("refusing to overwrite " + (dir / "manifest.json").string() +
                            " (use --force)");
  const std::string started = utc_timestamp();
  ArmOptions opt;
  opt.keep_snapshots = false;
  const NoiseComparisonResult r = run_noise_comparison(rc, default_noise_variants(), opt);
  print_arm(r.baseline);
  bool ok = r.baseline.ok(), failed = !r.baseline.ok();
  std::vector<NamedTrace> traces{{r.baseline.name, &r.baseline.trace}};
  nlohmann::json arms = nlohmann::json::array({arm_report_json(r.baseline)});
  for (const auto& a : r.arms) {
    print_arm(a);
    failed |= !a.ok();
    if (!a.ok() || a.final_test_accuracy() < r.baseline.final_test_accuracy() - 0.02) ok = false;
    traces.push_back({a.name, &a.trace});
    arms.push_back(arm_report_json(a));
  }
  emit(dir, c, "noise-compare", run_config_to_json(rc), spec_json(rc), rc.seed, started,
       {{"trace.csv", trace_csv(traces)},
        {"reports.json", nlohmann::json{{"arms", arms}}.dump(2) + "\n"}});
  if (failed) return kAborted;
  if (c.assert_ && !ok) return kAssertFailed;
  return kOk;
}

int cmd_q_sweep(const Common& c, const std::vector<int>& qs) {
  const RunConfig base = parse_run_config(load_doc(c));
  const fs::path dir = out_dir(c, "q-sweep", base.seed);
  if (fs::exists(dir / "manifest.json") && !c.force)
    throw OutputExistsError("refusing to overwrite " + (dir / "manifest.json").string() +
                            " (use --force)");
  const std::string started = utc_timestamp();
  ArmOptions opt;
  opt.keep_snapshots = false;
  const auto entries = run_q_sweep(base, qs, opt);
  bool ok = true, failed = false;
  std::vector<std::string> names;
  names.reserve(2 * entries.size());
  std::vector<NamedTrace> traces;
  nlohmann::json reports = nlohmann::json::array();
  for (const auto& e : entries) {
    std::printf("q=%d\n", e.q);
    print_arm(e.result.gd);
    print_arm(e.result.lngd);
    failed |= any_failed({&e.result.gd, &e.result.lngd});
    if (e.result.lngd.final_test_accuracy() < e.result.gd.final_test_accuracy()) ok = false;
    names.push_back("q" + std::to_string(e.q) + "_gd");
    traces.push_back({names.back(), &e.result.gd.trace});
    names.push_back("q" + std::to_string(e.q) + "_lngd");
    traces.push_back({names.back(), &e.result.lngd.trace});
    nlohmann::json j = dynamics_report_json(e.result);
    j["q"] = e.q;
    reports.push_back(j);
  }
  emit(dir, c, "q-sweep", run_config_to_json(base), spec_json(base), base.seed, started,
       {{"trace.csv", trace_csv(traces)},
        {"reports.json", nlohmann::json{{"entries", reports}}.dump(2) + "\n"}});
  if (failed) return kAborted;
  if (c.assert_ && !ok) return kAssertFailed;
  return kOk;
}

struct ConcentrationArgs {
  std::size_t d = 2000;
  double mu_scale = 2.0;
  double sigma_p = 0.5;
  ConcentrationOptions opt;
  double min_pass_rate = 0.95;
};

int cmd_concentration(const Common& c, ConcentrationArgs a) {
  if (c.seed) a.opt.seed = *c.seed;
  const SignalSpec spec = SignalSpec::axis_aligned(a.d, a.mu_scale, a.sigma_p);
  const std::string started = utc_timestamp();
  const ConcentrationReport rep = concentration_suite(spec, a.opt);
  bool ok = true;
  for (const auto& ch : rep.checks) {
    std::printf("  %-22s %s pass_rate=%.4f (%zu/%zu)\n", ch.name.c_str(),
                ch.applicable ? "         " : "(n/a)    ", ch.pass_rate, ch.passes, ch.trials);
    if (ch.applicable && ch.pass_rate < a.min_pass_rate) ok = false;
  }
  {
    const fs::path dir = out_dir(c, "concentration", a.opt.seed);
    nlohmann::json cfg = {{"d", a.d}, {"mu_scale", a.mu_scale}, {"sigma_p", a.sigma_p},
                          {"n", a.opt.n}, {"m", a.opt.m}, {"sigma_0", a.opt.sigma_0},
                          {"p", a.opt.p}, {"trials", a.opt.trials}, {"delta", a.opt.delta},
                          {"horizon", a.opt.horizon}, {"seed", a.opt.seed},
                          {"min_pass_rate", a.min_pass_rate}};
    emit(dir, c, "concentration", cfg, signal_spec_to_json(spec), a.opt.seed, started,
         {{"reports.json", to_json(rep).dump(2) + "\n"}});
  }
  if (c.assert_ && !ok) return kAssertFailed;
  return kOk;
}

int cmd_decompose(const Common& c, const std::string& run) {
  const fs::path dir = run;
  const nlohmann::json manifest = read_json_file(dir / "manifest.json");
  const std::string command = manifest.value("command", "");
  if (command != "dynamics")
    throw ConfigError("run", "decompose needs a dynamics run directory, got '" + command + "'");
  const RunConfig rc = parse_run_config(manifest.at("config"));
  if (fs::exists(dir / "decompose.json") && !c.force)
    throw OutputExistsError("refusing to overwrite " + (dir / "decompose.json").string() +
                            " (use --force)");
  // Labels come from regenerating the training set from its recorded stream.
  const StreamSeeds seeds = StreamSeeds::from_master(rc.seed);
  Engine data_rng = make_engine(seeds.data);
  const Dataset train = generate_dataset(rc.spec(), rc.n, data_rng, seeds.data);
  const auto rows = read_trace_csv(dir / "trace.csv");
  const auto snaps = read_coefficients_csv(dir / "coefficients.csv", rc.m, rc.n);
  const double t1 = estimate_stage_times(rc.spec(), rc.n, rc.m, rc.eta, rc.sigma_0, rc.epsilon,
                                         Algorithm::lngd).t1;
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [name, list] : snaps) {
    TrainTrace tr;
    tr.snapshots = list;
    tr.labels = train.labels();
    tr.total_steps = rc.steps;
    tr.d = rc.d;
    tr.n = rc.n;
    tr.m = rc.m;
    if (rows.count(name)) tr.rows = rows.at(name);
    IotaSeries series;
    series.values = Matrix(static_cast<Eigen::Index>(list.size()), static_cast<Eigen::Index>(rc.n));
    nlohmann::json ratios = nlohmann::json::array();
    for (std::size_t k = 0; k < list.size(); ++k) {
      series.steps.push_back(list[k].step);
      double max_rho = 0.0, max_gamma = 0.0;
      for (std::size_t i = 0; i < rc.n; ++i) {
        const auto b = branch_index(train.label(i));
        const auto col = list[k].rho_bar[b].col(static_cast<Eigen::Index>(i));
        series.values(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) =
            col.squaredNorm() / static_cast<double>(rc.m);
        max_rho = std::max(max_rho, col.maxCoeff());
      }
      max_gamma = list[k].gamma.maxCoeff();
      ratios.push_back({{"step", list[k].step},
                        {"ratio", (max_rho == 0.0 && max_gamma <= 0.0)
                                      ? 0.0
                                      : max_rho / std::max(max_gamma, 1e-12)}});
    }
    const std::optional<double> p =
        name == "lngd" && rc.noise.kind() == LabelNoiseSpec::Kind::flip && rc.noise.p() > 0.0 &&
                rc.noise.p() < 0.5
            ? std::optional<double>(rc.noise.p())
            : std::nullopt;
    VerdictOptions vo;
    vo.epsilon = rc.epsilon;
    vo.c_test = rc.c_test;
    out[name] = {{"snapshots", list.size()},
                 {"bound_monitor", to_json(coefficient_bound_monitor(tr, static_cast<double>(rc.steps)))},
                 {"stage2_on_snapshots", to_json(stage2_boundedness_check(series, t1, p))},
                 {"ratio_rho_over_gamma", ratios},
                 {"verdicts", to_json(theorem_verdicts(tr, vo))}};
    std::printf("  %-6s snapshots=%zu\n", name.c_str(), list.size());
  }
  write_file(dir, "decompose.json", out.dump(2) + "\n");
  std::cout << "wrote " << (dir / "decompose.json").string() << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Signal/noise feature-learning laboratory: GD vs label-noise GD"};
  app.set_version_flag("--version", std::string(LNGD_VERSION));
  app.require_subcommand(1);

  Common common;
  auto* check = app.add_subcommand("check", "evaluate the assumption report for a config");
  add_common(check, common);
  auto* dynamics = app.add_subcommand("dynamics", "paired GD / label-noise GD training run");
  add_common(dynamics, common);
  auto* heatmap = app.add_subcommand("heatmap", "SNR x n test-accuracy sweep");
  add_common(heatmap, common);
  auto* noise = app.add_subcommand("noise-compare", "label-noise variants against standard GD");
  add_common(noise, common);
  auto* qsweep = app.add_subcommand("q-sweep", "higher activation exponents");
  add_common(qsweep, common);
  std::vector<int> qs{3, 4};
  qsweep->add_option("--q", qs, "exponents to run")->check(CLI::IsMember({2, 3, 4}));
  auto* conc = app.add_subcommand("concentration", "Monte Carlo concentration checks");
  add_common(conc, common, false);
  ConcentrationArgs ca;
  conc->add_option("--d", ca.d)->check(CLI::Range(2ul, 1000000ul));
  conc->add_option("--mu-scale", ca.mu_scale)->check(CLI::PositiveNumber);
  conc->add_option("--sigma-p", ca.sigma_p)->check(CLI::PositiveNumber);
  conc->add_option("--n", ca.opt.n)->check(CLI::Range(2ul, 100000ul));
  conc->add_option("--m", ca.opt.m)->check(CLI::Range(1ul, 100000ul));
  conc->add_option("--sigma-0", ca.opt.sigma_0)->check(CLI::PositiveNumber);
  conc->add_option("--p", ca.opt.p)->check(CLI::Range(0.0, 1.0));
  conc->add_option("--trials", ca.opt.trials)->check(CLI::Range(100ul, 100000000ul));
  conc->add_option("--delta", ca.opt.delta)->check(CLI::Range(1e-12, 1.0));
  conc->add_option("--horizon", ca.opt.horizon);
  conc->add_option("--min-pass-rate", ca.min_pass_rate)->check(CLI::Range(0.0, 1.0));
  auto* decomp = app.add_subcommand("decompose", "post-hoc reports from a saved dynamics run");
  add_common(decomp, common, false);
  std::string run_dir;
  decomp->add_option("run", run_dir, "dynamics run directory")->required()->check(CLI::ExistingDirectory);

  if (argc <= 1) {
    std::cerr << app.help();
    return kUsage;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kUsage;
  }

  try {
    if (*check) return cmd_check(common);
    if (*dynamics) return cmd_dynamics(common);
    if (*heatmap) return cmd_heatmap(common);
    if (*noise) return cmd_noise_compare(common);
    if (*qsweep) return cmd_q_sweep(common, qs);
    if (*conc) return cmd_concentration(common, ca);
    if (*decomp) return cmd_decompose(common, run_dir);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const OutputExistsError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
