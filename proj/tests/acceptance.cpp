// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Expected values are written out literally here rather
// than taken from the library, so the library is checked against them.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "lss/cli.hpp"
#include "lss/detectors.hpp"
#include "lss/format.hpp"
#include "lss/oracle.hpp"
#include "lss/random.hpp"
#include "lss/rmt.hpp"
#include "lss/sim.hpp"

namespace fs = std::filesystem;
using namespace lss;

namespace {

constexpr DetectorKind kHd[] = {DetectorKind::HDL, DetectorKind::HDS, DetectorKind::HDQ};

std::string num(double v, int digits = 6) { return format_double(v, digits); }

struct Outcome {
  bool passed = true;
  std::vector<std::string> notes;

  void expect(bool ok, const std::string& what) {
    passed = passed && ok;
    notes.push_back((ok ? "ok " : "MISS ") + what);
  }
};

struct Criterion {
  int id;
  std::string title;
  std::function<Outcome()> run;
};

ObservationMatrix white_block(int m, int l, std::uint64_t seed, std::uint64_t index) {
  RandomStream rng(seed, index, StreamTag::Oracle);
  std::vector<std::complex<double>> v(static_cast<std::size_t>(m) * l);
  for (auto& x : v) x = rng.complex_normal();
  return ObservationMatrix(m, l, std::move(v));
}

// H0 statistic streams shared by criteria 1 and 9 at (90, 30).
const sim::MonteCarloResult& null_run(int m, int l) {
  static std::vector<std::pair<std::pair<int, int>, sim::MonteCarloResult>> cache;
  for (const auto& [key, value] : cache) {
    if (key == std::pair{m, l}) return value;
  }
  sim::ExperimentConfig cfg;
  cfg.antennas = m;
  cfg.samples = l;
  cfg.trials = 100000;
  cfg.seed = 20240607;
  sim::RunOptions options;
  options.simulate_h1 = false;
  cache.emplace_back(std::pair{m, l}, sim::run_monte_carlo(cfg, options));
  return cache.back().second;
}

Outcome null_reproduction() {
  struct Expect {
    DetectorKind kind;
    double mean;
    double mean_tol;
    double var;
  };
  const Expect expects[] = {{DetectorKind::HDL, 90.0, 3.0 * std::sqrt(3.0 / 1e5), 3.0},
                            {DetectorKind::HDS, 360.0, 0.15, 210.0},
                            {DetectorKind::HDQ, 270.0, 0.12, 126.0}};
  const auto& run = null_run(90, 30);
  const double ks_crit = sim::ks_critical_value(0.01, 100000);
  Outcome o;
  for (const auto& e : expects) {
    const auto h = sim::null_histogram_check(run[e.kind].h0, NullDistribution{e.mean, e.var, e.kind});
    const std::string name(to_string(e.kind));
    o.expect(std::abs(h.sample_mean - e.mean) <= e.mean_tol,
             name + " mean " + num(h.sample_mean, 8) + " vs " + num(e.mean) + " +- " + num(e.mean_tol, 3));
    o.expect(std::abs(h.sample_variance / e.var - 1.0) <= 0.10,
             name + " var " + num(h.sample_variance) + " vs " + num(e.var) + " +-10%");
    o.expect(h.ks_statistic < ks_crit,
             name + " KS " + num(h.ks_statistic, 4) + " < " + num(ks_crit, 4) + " (skew " +
                 num(h.sample_skewness, 3) + ")");
  }
  return o;
}

std::vector<sim::SweepRow> sweep(int m, int l, double pfa, std::vector<double> snrs,
                                 sim::ChannelModel channel, int trials, std::uint64_t seed) {
  sim::ExperimentConfig cfg;
  cfg.antennas = m;
  cfg.samples = l;
  cfg.trials = trials;
  cfg.seed = seed;
  cfg.channel = channel;
  cfg.snr_db = snrs.front();
  return sim::pd_vs_snr_sweep(cfg, snrs, pfa);
}

Outcome growth_in_m() {
  std::vector<double> snrs;
  for (double s = -20.0; s <= 0.0; s += 2.0) snrs.push_back(s);
  const auto big = sweep(70, 30, 0.01, snrs, sim::Uncorrelated{}, 10000, 101);
  const auto small = sweep(15, 30, 0.01, snrs, sim::Uncorrelated{}, 10000, 102);
  Outcome o;
  for (std::size_t i = 0; i < big.size(); ++i) {
    if (big[i].snr_db == -10.0) {
      o.expect(big[i].pd_hat >= 0.97, std::string(to_string(big[i].detector)) + " Pd(M=70, -10 dB) " +
                                          num(big[i].pd_hat, 4) + " >= 0.97");
    }
  }
  int inversions = 0;
  for (std::size_t i = 0; i < big.size(); ++i) {
    if (!(big[i].pd_hat >= small[i].pd_hat)) {
      ++inversions;
      o.expect(false, std::string(to_string(big[i].detector)) + " at " + num(big[i].snr_db) +
                          " dB: Pd(M=70) " + num(big[i].pd_hat, 4) + " < Pd(M=15) " + num(small[i].pd_hat, 4));
    }
  }
  if (inversions == 0) o.expect(true, "Pd(M=70) >= Pd(M=15) at all " + std::to_string(snrs.size()) + " SNRs");
  return o;
}

Outcome wide_sample_headline() {
  const auto rows = sweep(30, 50, 0.01, {-10.0}, sim::Uncorrelated{}, 10000, 105);
  Outcome o;
  for (const auto& r : rows) {
    o.expect(r.pd_hat >= 0.88, std::string(to_string(r.detector)) + " Pd " + num(r.pd_hat, 4) + " >= 0.88");
  }
  return o;
}

Outcome diminishing_returns() {
  const int ls[] = {30, 60, 90, 120};
  std::vector<std::vector<sim::SweepRow>> by_l;
  for (int l : ls) by_l.push_back(sweep(30, l, 0.1, {-15.0}, sim::ExponentialCorrelated{0.5}, 10000, 104));
  Outcome o;
  for (std::size_t d = 0; d < 3; ++d) {
    const std::string name(to_string(kHd[d]));
    std::string pds;
    bool monotone = true;
    for (std::size_t i = 0; i < by_l.size(); ++i) {
      pds += (i ? " " : "") + num(by_l[i][d].pd_hat, 4);
      if (i > 0 && by_l[i][d].pd_hat < by_l[i - 1][d].pd_hat) monotone = false;
    }
    o.expect(monotone, name + " Pd over L=30,60,90,120: " + pds + " nondecreasing");
    const double gain = by_l[3][d].pd_hat - by_l[2][d].pd_hat;
    o.expect(gain < 0.05, name + " gain 90->120 " + num(gain, 4) + " < 0.05");
  }
  return o;
}

Outcome oracle_equivalence() {
  double worst_rel[3] = {0, 0, 0};
  double worst_refine[3] = {0, 0, 0};
  for (int i = 0; i < 100; ++i) {
    RandomStream dims(55, static_cast<std::uint64_t>(i), StreamTag::Oracle);
    const int m = 2 + static_cast<int>(dims.uniform() * 11);
    const int l = 2 + static_cast<int>(dims.uniform() * 11);
    const auto spec = oracle::hermitian_eigenvalues(white_block(m, l, 56, i).sample_covariance(), m);
    double s1 = 0.0;
    double s2 = 0.0;
    for (double v : spec.eigenvalues) {
      s1 += v;
      s2 += v * v;
    }
    // Closed forms of the three statistics written out from the eigenvalue sums.
    const double closed[3] = {s1 / m, s2 / m + s1 * s1 / (double(l) * m),
                              s2 / m - 2.0 * s1 / m + s1 * s1 / (double(l) * m)};
    const oracle::LssFunction gs[3] = {oracle::LssFunction::Linear, oracle::LssFunction::Square,
                                       oracle::LssFunction::Quadratic};
    for (int g = 0; g < 3; ++g) {
      const double v = oracle::lss_contour(gs[g], spec, m, l, oracle::make_contour(spec, l, 1024)).value;
      const double v2 = oracle::lss_contour(gs[g], spec, m, l, oracle::make_contour(spec, l, 2048)).value;
      worst_rel[g] = std::max(worst_rel[g], std::abs(v - closed[g]) / std::max(1.0, std::abs(closed[g])));
      worst_refine[g] = std::max(worst_refine[g], std::abs(v2 - v));
    }
  }
  Outcome o;
  const char* names[3] = {"HDL", "HDS", "HDQ"};
  for (int g = 0; g < 3; ++g) {
    o.expect(worst_rel[g] <= 1e-6, std::string(names[g]) + " worst rel " + num(worst_rel[g], 3) + " <= 1e-6");
    o.expect(worst_refine[g] < 1e-7,
             std::string(names[g]) + " doubling delta " + num(worst_refine[g], 3) + " < 1e-7");
  }
  return o;
}

Outcome mean_corrections() {
  Outcome o;
  double worst[3] = {0, 0, 0};
  std::string where[3];
  for (double c : {0.1, 0.5, 1.0, 2.0, 3.0}) {
    const AspectRatio ar(c);
    const double expected[3] = {1.0, 1.0 + c, c};
    const oracle::LssFunction gs[3] = {oracle::LssFunction::Linear, oracle::LssFunction::Square,
                                       oracle::LssFunction::Quadratic};
    for (int g = 0; g < 3; ++g) {
      const double got = oracle::mean_correction_numeric(gs[g], ar);
      const double err = std::abs(got - expected[g]);
      if (err > worst[g]) {
        worst[g] = err;
        where[g] = " (c=" + num(c) + ": " + num(got, 10) + ")";
      }
    }
  }
  o.expect(worst[0] <= 1e-8, "F(z) = 1, worst " + num(worst[0], 3) + where[0]);
  o.expect(worst[1] <= 1e-8, "F(z^2) = 1+c, worst " + num(worst[1], 3) + where[1]);
  o.expect(worst[2] <= 1e-8, "F((z-1)^2) = c, worst " + num(worst[2], 3) + where[2]);

  // Marchenko-Pastur moments as the plain Narayana sum, evaluated here independently.
  auto binom = [](int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
  };
  double worst_moment = 0.0;
  for (double c : {0.1, 0.5, 1.0, 2.0, 3.0}) {
    for (int k = 1; k <= 5; ++k) {
      double beta = 0.0;
      for (int r = 0; r < k; ++r) beta += binom(k, r) * binom(k - 1, r) * std::pow(c, r) / (r + 1);
      worst_moment = std::max(worst_moment, std::abs(oracle::mp_moment_numeric(k, AspectRatio(c)) - beta) / beta);
    }
  }
  o.expect(worst_moment <= 1e-8, "MP moments k<=5 worst rel " + num(worst_moment, 3));
  return o;
}

Outcome edge_law() {
  double top = 0.0;
  double bottom = 0.0;
  constexpr int kTrials = 50;
  for (int t = 0; t < kTrials; ++t) {
    const auto spec = oracle::hermitian_eigenvalues(white_block(50, 200, 7, t).sample_covariance(), 50);
    top += spec.eigenvalues.back();
    bottom += spec.eigenvalues.front();
  }
  top /= kTrials;
  bottom /= kTrials;
  Outcome o;
  o.expect(std::abs(top / 2.25 - 1.0) <= 0.05, "mean lambda_max " + num(top, 5) + " vs 2.25 +-5%");
  o.expect(std::abs(bottom / 0.25 - 1.0) <= 0.10, "mean lambda_min " + num(bottom, 5) + " vs 0.25 +-10%");
  return o;
}

Outcome inverse_scm() {
  const double alpha = sim::inverse_scm_bias_check(4, 10, 10000, 8);
  Outcome o;
  o.expect(std::abs(alpha / 2.5 - 1.0) <= 0.05, "alpha " + num(alpha, 5) + " vs 10/4 = 2.5 +-5%");
  return o;
}

Outcome empirical_false_alarm() {
  struct Setting {
    int m;
    int l;
  };
  Outcome o;
  for (const auto [m, l] : {Setting{90, 30}, Setting{30, 30}, Setting{45, 50}}) {
    const auto& run = null_run(m, l);
    for (auto kind : kHd) {
      for (double pfa : {0.1, 0.01}) {
        const double tau = np_threshold(kind, m, l, pfa);
        const auto& h0 = run[kind].h0;
        std::size_t hits = 0;
        for (double v : h0) hits += decide(v, tau).declared == Hypothesis::H1 ? 1 : 0;
        // 95% Wilson interval around the target itself, as if the target
        // proportion had been observed in the same number of trials.
        const auto ci = sim::wilson_interval(
            static_cast<std::size_t>(std::llround(pfa * static_cast<double>(h0.size()))), h0.size());
        const double rate = static_cast<double>(hits) / static_cast<double>(h0.size());
        o.expect(ci.contains(rate), std::string(to_string(kind)) + " (" + std::to_string(m) + "," +
                                       std::to_string(l) + ") pfa " + num(pfa) + ": rate " +
                                       num(rate, 4) + " CI [" + num(ci.lower, 4) +
                                       ", " + num(ci.upper, 4) + "]");
      }
    }
  }
  return o;
}

Outcome algebraic_identity() {
  Outcome o;
  RandomStream rng(12, 0, StreamTag::Oracle);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const int m = 1 + static_cast<int>(rng.uniform() * 200);
    const int l = 1 + static_cast<int>(rng.uniform() * 200);
    const double tr = rng.uniform(0.0, 500.0);
    const ScmSummary s{tr, tr * tr * rng.uniform(1.0 / m, 1.0), m, l};
    const double scale = std::max({std::abs(t_hds(s)), std::abs(t_hdl(s)), 1.0});
    worst = std::max(worst, std::abs(t_hdq(s) - (t_hds(s) - 2.0 * t_hdl(s))) / scale);
  }
  o.expect(worst <= 4 * std::numeric_limits<double>::epsilon(),
           "T_HDQ - (T_HDS - 2 T_HDL) worst scaled " + num(worst, 3));

  double worst_eig = 0.0;
  for (int i = 0; i < 200; ++i) {
    RandomStream dims(13, static_cast<std::uint64_t>(i), StreamTag::Oracle);
    const int m = 1 + static_cast<int>(dims.uniform() * 12);
    const int l = 1 + static_cast<int>(dims.uniform() * 12);
    const auto y = white_block(m, l, 14, i);
    const auto s = compute_scm_summary(y);
    const auto lam = oracle::hermitian_eigenvalues(y.sample_covariance(), m).eigenvalues;
    double s1 = 0.0;
    double s2 = 0.0;
    for (double v : lam) {
      s1 += v;
      s2 += v * v;
    }
    const double eig[3] = {s1 / m, s2 / m + s1 * s1 / (double(l) * m),
                           s2 / m - 2.0 * s1 / m + s1 * s1 / (double(l) * m)};
    const double trace[3] = {t_hdl(s), t_hds(s), t_hdq(s)};
    for (int k = 0; k < 3; ++k) {
      worst_eig = std::max(worst_eig, std::abs(trace[k] - eig[k]) / std::max(1.0, std::abs(eig[k])));
    }
  }
  o.expect(worst_eig <= 1e-9, "trace vs eigenvalue forms worst " + num(worst_eig, 3));
  return o;
}

Outcome partials() {
  Outcome o;
  constexpr double h = 1e-5;
  // Null laws written out directly.
  auto sd = [](DetectorKind k, double c) {
    if (k == DetectorKind::HDL) return std::sqrt(c);
    if (k == DetectorKind::HDS) return std::sqrt(4 * c * c * c + 10 * c * c + 4 * c);
    return std::sqrt(2 * c * c * (1 + 2 * c));
  };
  auto mu = [](DetectorKind k, double m, double l) {
    if (k == DetectorKind::HDL) return m;
    if (k == DetectorKind::HDS) return m * (1 + m / l);
    return m * m / l;
  };
  double worst = 0.0;
  std::string where;
  for (auto k : kHd) {
    for (double c : {0.5, 1.0, 3.0}) {
      const double l = 40.0;
      const double m = c * l;
      const auto p = sensitivity_partials(k, static_cast<int>(m), static_cast<int>(l));
      const double fd[3] = {(sd(k, c + h) - sd(k, c - h)) / (2 * h),
                            (mu(k, m, l + h) - mu(k, m, l - h)) / (2 * h),
                            (mu(k, m + h, l) - mu(k, m - h, l)) / (2 * h)};
      const double got[3] = {p.dsigma_dc, p.dmu_dL, p.dmu_dM};
      for (int i = 0; i < 3; ++i) {
        const double rel = std::abs(got[i] - fd[i]) / std::max(std::abs(fd[i]), 1e-6);
        if (rel > worst) {
          worst = rel;
          where = std::string(to_string(k)) + " c=" + num(c);
        }
      }
    }
  }
  o.expect(worst <= 1e-6, "worst rel " + num(worst, 3) + (where.empty() ? "" : " at " + where));
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

Outcome determinism() {
  const auto root = fs::temp_directory_path() / "lss_acceptance_determinism";
  fs::remove_all(root);
  const std::vector<std::vector<std::string>> commands = {
      {"null-dist", "--M", "30", "--L", "30", "--trials", "3000", "--seed", "5"},
      {"roc", "--M", "20", "--L", "40", "--trials", "2000", "--seed", "6", "--snr-db", "-12",
       "--channel", "exp:0.5", "--noise", "uncalibrated:0.5:1.5", "--detectors", "HDL,HDS,HDQ,GLR,FN,RAO"},
      {"pd-vs-snr", "--M", "15", "--L", "30", "--trials", "2000", "--seed", "9", "--pfa", "0.01",
       "--snr-db=-20,-15,-10,-5,0"}};
  const std::vector<std::string> files = {"nulldist_hdl.csv", "nulldist_hds.csv", "nulldist_hdq.csv",
                                          "nulldist_summary.csv", "roc.csv", "pd_vs_snr.csv"};
  Outcome o;
  std::vector<std::string> reference;
  int runs = 0;
  for (const char* workers : {"1", "4", "2", "1"}) {
    ::setenv("LSS_SENSE_WORKERS", workers, 1);
    const auto dir = root / ("run" + std::to_string(runs++));
    std::ostringstream out;
    std::ostringstream err;
    for (auto args : commands) {
      args.insert(args.end(), {"--out", dir.string()});
      if (cli::run_cli(args, out, err) != 0) o.expect(false, "command " + args[0] + " failed: " + err.str());
    }
    std::vector<std::string> contents;
    for (const auto& f : files) contents.push_back(slurp(dir / f));
    if (reference.empty()) {
      reference = contents;
    } else {
      for (std::size_t i = 0; i < files.size(); ++i) {
        if (contents[i] != reference[i] || contents[i].empty()) {
          o.expect(false, files[i] + " differs with LSS_SENSE_WORKERS=" + workers);
        }
      }
    }
  }
  ::unsetenv("LSS_SENSE_WORKERS");
  fs::remove_all(root);
  if (o.passed) o.expect(true, std::to_string(files.size()) + " CSVs identical over 4 runs (workers 1,4,2,1)");
  return o;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "null-distribution reproduction (M=90, L=30, 1e5 trials)", null_reproduction},
      {2, "Pd headline and growth in M (M=70 vs 15, L=30, pfa 0.01)", growth_in_m},
      {3, "Pd headline with L > M (M=30, L=50, -10 dB, pfa 0.01)", wide_sample_headline},
      {4, "diminishing returns in L (M=30, -15 dB, rho 0.5, pfa 0.1)", diminishing_returns},
      {5, "contour oracle equals the closed forms", oracle_equivalence},
      {6, "mean-correction integrals and MP moments", mean_corrections},
      {7, "edge law (M=50, L=200)", edge_law},
      {8, "inverse-SCM bias (M=4, L=10)", inverse_scm},
      {9, "empirical false alarm inside Wilson intervals", empirical_false_alarm},
      {10, "algebraic identity and eigenvalue forms", algebraic_identity},
      {11, "sensitivity partials vs central differences", partials},
      {12, "byte-identical CSVs across worker counts", determinism},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.expect(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s criterion %2d: %s [%.1fs]\n", o.passed ? "PASS" : "FAIL", c.id, c.title.c_str(), secs);
    for (const auto& note : o.notes) std::printf("      %s\n", note.c_str());
    std::fflush(stdout);
    failures += o.passed ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
