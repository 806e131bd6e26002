#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "lss/cli.hpp"
#include "lss/format.hpp"
#include "lss/rmt.hpp"
#include "lss/sim.hpp"

namespace lss::cli {

namespace {

namespace fs = std::filesystem;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class VerifyFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raw option values as parsed; resolved into an ExperimentConfig per command.
struct Options {
  int antennas = 30;
  int samples = 30;
  std::vector<double> snr_db;
  std::vector<double> pfa;
  int trials = 1000;
  std::uint64_t seed = 1;
  std::string channel = "uncorrelated";
  std::string noise = "calibrated:1";
  std::string out_dir = ".";
  std::vector<std::string> detectors = {"HDL", "HDS", "HDQ"};
  std::string hd_form = "lss";
  int nodes = 1024;
  bool inject_fault = false;
};

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

sim::ExperimentConfig resolve_config(const Options& o) {
  sim::ExperimentConfig cfg;
  cfg.antennas = o.antennas;
  cfg.samples = o.samples;
  cfg.trials = o.trials;
  cfg.seed = o.seed;
  cfg.channel = sim::parse_channel(o.channel);
  cfg.noise = sim::parse_noise(o.noise);
  cfg.detectors.clear();
  for (const auto& name : o.detectors) cfg.detectors.push_back(parse_detector(name));
  if (o.hd_form == "lss") {
    cfg.form = StatisticForm::Lss;
  } else if (o.hd_form == "cross-term") {
    cfg.form = StatisticForm::CrossTerm;
  } else {
    throw std::invalid_argument("--hd-form must be 'lss' or 'cross-term'");
  }
  if (!o.pfa.empty()) cfg.pfa_grid = o.pfa;
  return cfg;
}

// Output files are collected so the run manifest can list them.
class OutputDir {
 public:
  explicit OutputDir(const std::string& path) : root_(path) {
    std::error_code ec;
    fs::create_directories(root_, ec);
    if (ec || !fs::is_directory(root_)) {
      throw IoError("cannot create output directory '" + path + "'");
    }
  }

  void write(const std::string& name, const std::string& contents) {
    const auto path = root_ / name;
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    file << contents;
    file.close();
    if (!file) throw IoError("cannot write '" + path.string() + "'");
    written_.push_back(path.string());
  }

  const std::vector<std::string>& written() const { return written_; }

 private:
  fs::path root_;
  std::vector<std::string> written_;
};

void write_manifest(OutputDir& dir, const sim::ExperimentConfig& cfg, const std::string& command,
                    const std::string& started, nlohmann::json extra = nlohmann::json::object()) {
  nlohmann::json manifest = {
      {"tool", kToolName},
      {"version", kToolVersion},
      {"command", command},
      {"config_digest", cfg.digest()},
      {"config", cfg.canonical()},
      {"seed", cfg.seed},
      {"started_utc", started},
      {"finished_utc", utc_timestamp()},
      {"outputs", dir.written()},
  };
  for (auto& [key, value] : extra.items()) manifest[key] = value;
  dir.write("run_manifest.json", manifest.dump(2) + "\n");
}

std::string fmt(double v) { return format_double(v); }

void require_hd(const sim::ExperimentConfig& cfg, const char* command) {
  for (auto kind : cfg.detectors) {
    if (!has_closed_form_null(kind)) {
      throw std::invalid_argument(std::string(command) + ": detector " +
                                  std::string(to_string(kind)) + " has no closed-form null law");
    }
  }
}

int cmd_null_dist(const Options& o, std::ostream& out) {
  const auto started = utc_timestamp();
  auto cfg = resolve_config(o);
  require_hd(cfg, "null-dist");
  cfg.validate();
  OutputDir dir(o.out_dir);

  sim::RunOptions run;
  run.simulate_h1 = false;
  const auto result = sim::run_monte_carlo(cfg, run);

  std::string summary = "detector,M,L,theory_mean,theory_var,sample_mean,sample_var,ks_stat,n\n";
  for (const auto& stream : result.streams) {
    const std::string name(to_string(stream.detector));
    std::string csv = "trial,statistic\n";
    for (std::size_t t = 0; t < stream.h0.size(); ++t) {
      csv += std::to_string(t) + "," + fmt(stream.h0[t]) + "\n";
    }
    std::string lower = name;
    for (auto& ch : lower) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    dir.write("nulldist_" + lower + ".csv", csv);

    const auto null = null_distribution(stream.detector, cfg.antennas, cfg.samples);
    std::string row = name + "," + std::to_string(cfg.antennas) + "," +
                      std::to_string(cfg.samples) + "," + fmt(null.mean) + "," +
                      fmt(null.variance) + ",";
    if (stream.h0.size() >= 100) {
      const auto h = sim::null_histogram_check(stream.h0, null);
      row += fmt(h.sample_mean) + "," + fmt(h.sample_variance) + "," + fmt(h.ks_statistic);
    } else {
      row += ",,";  // too few trials for meaningful moments and KS
    }
    summary += row + "," + std::to_string(stream.h0.size()) + "\n";
  }
  dir.write("nulldist_summary.csv", summary);
  write_manifest(dir, cfg, "null-dist", started);
  out << "wrote " << dir.written().size() << " files to " << o.out_dir << "\n";
  return kExitOk;
}

int cmd_roc(const Options& o, std::ostream& out) {
  const auto started = utc_timestamp();
  auto cfg = resolve_config(o);
  if (o.snr_db.size() > 1) throw std::invalid_argument("roc takes a single --snr-db value");
  if (!o.snr_db.empty()) cfg.snr_db = o.snr_db.front();
  cfg.validate();
  OutputDir dir(o.out_dir);

  const auto result = sim::run_monte_carlo(cfg);
  const auto curves = sim::estimate_rocs(cfg, result);
  std::string csv = "detector,pfa_target,threshold,pd_hat,pfa_hat,ci_halfwidth,trials,seed\n";
  for (const auto& curve : curves) {
    for (const auto& p : curve.points) {
      csv += std::string(to_string(curve.detector)) + "," + fmt(p.pfa_target) + "," +
             fmt(p.threshold) + "," + fmt(p.pd_hat) + "," + fmt(p.pfa_hat) + "," +
             fmt(p.ci_halfwidth) + "," + std::to_string(cfg.trials) + "," +
             std::to_string(cfg.seed) + "\n";
    }
  }
  dir.write("roc.csv", csv);
  write_manifest(dir, cfg, "roc", started);
  out << "wrote " << dir.written().size() << " files to " << o.out_dir << "\n";
  return kExitOk;
}

int cmd_pd_vs_snr(const Options& o, std::ostream& out) {
  const auto started = utc_timestamp();
  auto cfg = resolve_config(o);
  if (o.snr_db.empty()) throw std::invalid_argument("pd-vs-snr needs at least one --snr-db value");
  if (o.pfa.size() > 1) throw std::invalid_argument("pd-vs-snr takes a single --pfa value");
  const double pfa = o.pfa.empty() ? 0.01 : o.pfa.front();
  cfg.pfa_grid = {pfa};
  cfg.snr_db = o.snr_db.front();
  cfg.validate();
  OutputDir dir(o.out_dir);

  const auto rows = sim::pd_vs_snr_sweep(cfg, o.snr_db, pfa);
  std::string csv = "detector,snr_db,pd_hat,ci_halfwidth\n";
  for (const auto& r : rows) {
    csv += std::string(to_string(r.detector)) + "," + fmt(r.snr_db) + "," + fmt(r.pd_hat) + "," +
           fmt(r.ci_halfwidth) + "\n";
  }
  dir.write("pd_vs_snr.csv", csv);
  nlohmann::json snrs = nlohmann::json::array();
  for (double s : o.snr_db) snrs.push_back(fmt(s));
  write_manifest(dir, cfg, "pd-vs-snr", started, {{"snr_db", snrs}});
  out << "wrote " << dir.written().size() << " files to " << o.out_dir << "\n";
  return kExitOk;
}

int cmd_threshold(const Options& o, std::ostream& out) {
  auto cfg = resolve_config(o);
  require_hd(cfg, "threshold");
  if (o.pfa.empty()) throw std::invalid_argument("threshold needs --pfa");
  if (cfg.antennas < 1 || cfg.samples < 1) throw std::invalid_argument("M and L must be >= 1");
  for (double p : o.pfa) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("--pfa values must lie in (0, 1)");
  }
  out << "detector,M,L,pfa,mean,variance,threshold\n";
  for (auto kind : cfg.detectors) {
    const auto null = null_distribution(kind, cfg.antennas, cfg.samples);
    for (double p : o.pfa) {
      out << to_string(kind) << "," << cfg.antennas << "," << cfg.samples << "," << fmt(p) << ","
          << fmt(null.mean) << "," << fmt(null.variance) << ","
          << fmt(np_threshold(kind, cfg.antennas, cfg.samples, p)) << "\n";
    }
  }
  return kExitOk;
}

int cmd_verify(const Options& o, std::ostream& out) {
  VerifyOptions vo;
  vo.nodes = o.nodes;
  vo.seed = o.seed;
  vo.inject_fault = o.inject_fault;
  const auto checks = run_verify_suite(vo);

  std::string failed;
  for (const auto& c : checks) {
    out << (c.passed ? "PASS" : "FAIL") << "  " << c.name << "  deviation=" << fmt(c.measured)
        << "  tolerance=" << fmt(c.tolerance);
    if (!c.detail.empty()) out << "  " << c.detail;
    out << "\n";
    if (!c.passed) failed += (failed.empty() ? "" : ", ") + c.name;
  }
  if (!failed.empty()) throw VerifyFailed("failed checks: " + failed);
  out << "all " << checks.size() << " checks passed\n";
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Trace-based spectrum sensing detectors: thresholds, Monte Carlo and oracle checks",
               kToolName};
  app.set_version_flag("--version", kToolVersion);
  app.set_config("--config", "", "Key-value config file; command-line flags take precedence");
  app.require_subcommand(1);
  app.fallthrough();

  Options o;
  app.add_option("--M", o.antennas, "Number of antennas")->capture_default_str();
  app.add_option("--L", o.samples, "Number of samples per sensing period")->capture_default_str();
  app.add_option("--snr-db", o.snr_db, "Average SNR in dB (list for pd-vs-snr; -inf allowed)")
      ->delimiter(',');
  app.add_option("--pfa", o.pfa, "False-alarm probability target(s)")->delimiter(',');
  app.add_option("--trials", o.trials, "Monte Carlo trials per hypothesis")->capture_default_str();
  app.add_option("--seed", o.seed, "Master seed")->capture_default_str();
  app.add_option("--channel", o.channel, "uncorrelated | exp:<rho>")->capture_default_str();
  app.add_option("--noise", o.noise, "calibrated:<var> | uncalibrated:<lo>:<hi>")
      ->capture_default_str();
  app.add_option("--out", o.out_dir, "Output directory")->capture_default_str();
  app.add_option("--detectors", o.detectors, "Detectors: HDL,HDS,HDQ,GLR,FN,RAO")
      ->delimiter(',')
      ->capture_default_str();
  app.add_option("--hd-form", o.hd_form, "HD decision statistic: lss | cross-term")
      ->capture_default_str();
  app.add_option("--nodes", o.nodes, "Contour quadrature nodes for verify")->capture_default_str();
  app.add_flag("--inject-fault", o.inject_fault)->group("");

  auto* null_dist = app.add_subcommand("null-dist", "H0 statistic samples and moment summary");
  auto* roc = app.add_subcommand("roc", "ROC points over the pfa grid");
  auto* pd_snr = app.add_subcommand("pd-vs-snr", "Detection probability versus SNR");
  auto* threshold = app.add_subcommand("threshold", "Closed-form NP thresholds");
  auto* verify = app.add_subcommand("verify", "Run the oracle verification suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (null_dist->parsed()) return cmd_null_dist(o, out);
    if (roc->parsed()) return cmd_roc(o, out);
    if (pd_snr->parsed()) return cmd_pd_vs_snr(o, out);
    if (threshold->parsed()) return cmd_threshold(o, out);
    if (verify->parsed()) return cmd_verify(o, out);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const VerifyFailed& e) {
    err << "verify: " << e.what() << "\n";
    return kExitVerifyFailed;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitUsage;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back(kToolName);
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace lss::cli
