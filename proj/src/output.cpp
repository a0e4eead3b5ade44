#include "lngd/output.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>

namespace lngd {

namespace fs = std::filesystem;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 0xF]);
  }
  return out;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

fs::path default_out_root() {
  const char* env = std::getenv(kOutRootEnv);
  return env && *env ? fs::path(env) : fs::path("runs");
}

void prepare_run_dir(const fs::path& dir, bool force) {
  if (fs::exists(dir / "manifest.json") && !force)
    throw OutputExistsError("refusing to overwrite " + (dir / "manifest.json").string() +
                            " (use --force)");
  fs::create_directories(dir);
}

FileRecord write_file(const fs::path& dir, const std::string& name, const std::string& content) {
  std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
  out << content;
  out.close();
  if (!out) throw std::runtime_error("write failed for " + (dir / name).string());
  return {name, content.size(), sha256_hex(content)};
}

std::string trace_csv(const std::vector<NamedTrace>& traces) {
  std::string s =
      "algorithm,step,clean_train_loss,noisy_train_loss,test_error_01,max_gamma,mean_gamma,"
      "max_rho_bar,mean_rho_bar,min_rho_under,ratio_rho_over_gamma,iota_mean,iota_max,"
      "flip_count\n";
  for (const auto& [name, tr] : traces) {
    for (const auto& r : tr->rows) {
      s += name + ',' + std::to_string(r.step);
      for (double v : {r.clean_train_loss, r.noisy_train_loss, r.test_error_01, r.max_gamma,
                       r.mean_gamma, r.max_rho_bar, r.mean_rho_bar, r.min_rho_under,
                       r.ratio_rho_over_gamma, r.iota_mean, r.iota_max})
        s += ',' + format_double(v);
      s += ',' + std::to_string(r.flip_count) + '\n';
    }
  }
  return s;
}

std::string coefficients_csv(const std::vector<NamedTrace>& traces, std::size_t stride) {
  if (stride == 0) throw std::invalid_argument("coefficients_csv: stride must be positive");
  std::string s = "algorithm,step,j,r,i,gamma,rho_bar,rho_under\n";
  for (const auto& [name, tr] : traces) {
    for (std::size_t k = 0; k < tr->snapshots.size(); ++k) {
      const auto& snap = tr->snapshots[k];
      const bool last = k + 1 == tr->snapshots.size();
      if (snap.step % stride != 0 && !last) continue;
      const auto m = snap.gamma.cols();
      for (int j : {1, -1}) {
        const auto b = branch_index(j);
        for (Eigen::Index r = 0; r < m; ++r) {
          const std::string head = name + ',' + std::to_string(snap.step) + ',' +
                                   std::to_string(j) + ',' + std::to_string(r) + ',';
          const std::string g = format_double(snap.gamma(static_cast<Eigen::Index>(b), r));
          for (Eigen::Index i = 0; i < snap.rho_bar[b].cols(); ++i) {
            s += head + std::to_string(i) + ',' + g + ',' +
                 format_double(snap.rho_bar[b](r, i)) + ',' +
                 format_double(snap.rho_under[b](r, i)) + '\n';
          }
        }
      }
    }
  }
  return s;
}

std::string heatmap_csv(const HeatmapResult& r) {
  std::string s = "snr,n,seed,algorithm,test_accuracy\n";
  for (const auto& c : r.cells) {
    for (std::size_t k = 0; k < c.seeds.size(); ++k) {
      const std::string head =
          format_double(c.snr) + ',' + std::to_string(c.n) + ',' + std::to_string(c.seeds[k]) + ',';
      s += head + "gd," + format_double(c.gd_accuracy[k]) + '\n';
      s += head + "lngd," + format_double(c.lngd_accuracy[k]) + '\n';
    }
  }
  return s;
}

std::string heatmap_summary_csv(const HeatmapResult& r) {
  std::string s = "snr,n,mu_scale,gd_mean,gd_std,lngd_mean,lngd_std,replicates,missing\n";
  for (const auto& c : r.cells)
    s += format_double(c.snr) + ',' + std::to_string(c.n) + ',' + format_double(c.mu_scale) +
         ',' + format_double(c.gd_mean) + ',' + format_double(c.gd_std) + ',' +
         format_double(c.lngd_mean) + ',' + format_double(c.lngd_std) + ',' +
         std::to_string(c.seeds.size()) + ',' + (c.missing ? "1" : "0") + '\n';
  return s;
}

nlohmann::json build_manifest(const ManifestInput& in) {
  const StreamSeeds seeds = StreamSeeds::from_master(in.master_seed);
  nlohmann::json files = nlohmann::json::array();
  for (const auto& f : in.files)
    files.push_back({{"name", f.name}, {"bytes", f.bytes}, {"sha256", f.sha256}});
  nlohmann::json j = {
      {"format", "lngd.manifest"},
      {"format_version", 1},
      {"tool", "lngd"},
      {"tool_version", LNGD_VERSION},
      {"command", in.command},
      {"config", in.config},
      {"spec", in.spec},
      {"seeds",
       {{"master", in.master_seed},
        {"derivation",
         "sm(x) = one SplitMix64 step from state x; seed(master, id) = "
         "sm(sm(master) xor id * 0xD1B54A32D192ED03); paths fold left; "
         "engine = mt19937_64(seed)"},
        {"stream_ids",
         {{"data", static_cast<std::uint64_t>(Stream::data)},
          {"init", static_cast<std::uint64_t>(Stream::init)},
          {"label_noise", static_cast<std::uint64_t>(Stream::label_noise)},
          {"test", static_cast<std::uint64_t>(Stream::test)}}},
        {"derived",
         {{"data", seeds.data},
          {"init", seeds.init},
          {"label_noise", seeds.label_noise},
          {"test", seeds.test}}}}},
      {"started", in.started},
      {"finished", in.finished},
      {"files", files}};
  if (in.extra.is_object())
    for (const auto& [k, v] : in.extra.items()) j[k] = v;
  return j;
}

nlohmann::json emit_dynamics_run(const fs::path& dir, const DynamicsResult& r, bool force,
                                 const std::string& started) {
  prepare_run_dir(dir, force);
  const std::vector<NamedTrace> traces{{"gd", &r.gd.trace}, {"lngd", &r.lngd.trace}};
  ManifestInput m;
  m.command = "dynamics";
  m.config = run_config_to_json(r.config);
  m.spec = signal_spec_to_json(r.config.spec());
  m.master_seed = r.config.seed;
  m.started = started;
  m.files.push_back(write_file(dir, "trace.csv", trace_csv(traces)));
  m.files.push_back(
      write_file(dir, "coefficients.csv", coefficients_csv(traces, r.config.coef_stride)));
  m.files.push_back(write_file(dir, "reports.json", dynamics_report_json(r).dump(2) + "\n"));
  m.finished = utc_timestamp();
  nlohmann::json manifest = build_manifest(m);
  write_file(dir, "manifest.json", manifest.dump(2) + "\n");
  return manifest;
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, ',')) out.push_back(cur);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::ifstream open_csv(const fs::path& path, const std::string& expected_header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string header;
  std::getline(in, header);
  if (header != expected_header)
    throw std::runtime_error(path.string() + ": unexpected header '" + header + "'");
  return in;
}

}  // namespace

std::map<std::string, std::vector<TraceRow>> read_trace_csv(const fs::path& path) {
  std::ifstream in = open_csv(
      path,
      "algorithm,step,clean_train_loss,noisy_train_loss,test_error_01,max_gamma,mean_gamma,"
      "max_rho_bar,mean_rho_bar,min_rho_under,ratio_rho_over_gamma,iota_mean,iota_max,"
      "flip_count");
  std::map<std::string, std::vector<TraceRow>> out;
  std::string line;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 14)
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": expected 14 fields");
    TraceRow r;
    r.step = std::stoull(f[1]);
    double* dst[] = {&r.clean_train_loss, &r.noisy_train_loss, &r.test_error_01, &r.max_gamma,
                     &r.mean_gamma,       &r.max_rho_bar,      &r.mean_rho_bar,  &r.min_rho_under,
                     &r.ratio_rho_over_gamma, &r.iota_mean,    &r.iota_max};
    for (std::size_t k = 0; k < 11; ++k) *dst[k] = std::stod(f[2 + k]);
    r.flip_count = std::stoull(f[13]);
    out[f[0]].push_back(r);
  }
  return out;
}

std::map<std::string, std::vector<CoefficientSnapshot>> read_coefficients_csv(
    const fs::path& path, std::size_t m, std::size_t n) {
  std::ifstream in = open_csv(path, "algorithm,step,j,r,i,gamma,rho_bar,rho_under");
  std::map<std::string, std::vector<CoefficientSnapshot>> out;
  const auto M = static_cast<Eigen::Index>(m), N = static_cast<Eigen::Index>(n);
  std::string line;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 8)
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": expected 8 fields");
    auto& list = out[f[0]];
    const std::size_t step = std::stoull(f[1]);
    if (list.empty() || list.back().step != step) {
      CoefficientSnapshot s;
      s.step = step;
      s.gamma = Matrix::Zero(2, M);
      for (auto& a : s.rho_bar) a = Matrix::Zero(M, N);
      for (auto& a : s.rho_under) a = Matrix::Zero(M, N);
      list.push_back(std::move(s));
    }
    auto& s = list.back();
    const int j = std::stoi(f[2]);
    const auto r = static_cast<Eigen::Index>(std::stoull(f[3]));
    const auto i = static_cast<Eigen::Index>(std::stoull(f[4]));
    if ((j != 1 && j != -1) || r >= M || i >= N)
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": index out of range");
    const auto b = branch_index(j);
    s.gamma(static_cast<Eigen::Index>(b), r) = std::stod(f[5]);
    s.rho_bar[b](r, i) = std::stod(f[6]);
    s.rho_under[b](r, i) = std::stod(f[7]);
  }
  return out;
}

}  // namespace lngd
