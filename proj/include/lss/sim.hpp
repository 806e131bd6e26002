#pragma once

// Monte Carlo harness: H0/H1 observation generators for the multi-antenna
// sensing model, a deterministic parallel trial runner, and the ROC, Pd-vs-SNR
// and null-histogram summaries built on top of it.

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "lss/detectors.hpp"
#include "lss/random.hpp"
#include "lss/rmt.hpp"

namespace lss::sim {

/// Raised when a Monte Carlo run cannot complete (allocation failure, worker
/// start-up failure). No partial results are returned alongside it.
class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Uncorrelated {};
/// Sigma_H[i][j] = rho^|i - j|; unit diagonal, so tr(Sigma_H) = M.
struct ExponentialCorrelated {
  double rho = 0.5;
};
using ChannelModel = std::variant<Uncorrelated, ExponentialCorrelated>;

/// Sigma_N = variance * I.
struct Calibrated {
  double variance = 1.0;
};
/// Sigma_N diagonal with entries i.i.d. uniform on [lo, hi], redrawn per trial.
struct Uncalibrated {
  double lo = 0.5;
  double hi = 1.5;
};
using NoiseModel = std::variant<Calibrated, Uncalibrated>;

void validate(const ChannelModel& channel);
void validate(const NoiseModel& noise);
std::string describe(const ChannelModel& channel);
std::string describe(const NoiseModel& noise);
/// Inverse of describe(): "uncorrelated" or "exp:<rho>".
ChannelModel parse_channel(std::string_view text);
/// Inverse of describe(): "calibrated:<var>" or "uncalibrated:<lo>:<hi>".
NoiseModel parse_noise(std::string_view text);

/// Dense Sigma_H, row-major M x M (for inspection and tests).
std::vector<double> channel_covariance(const ChannelModel& channel, int antennas);

struct ExperimentConfig {
  int antennas = 30;
  int samples = 30;
  double snr_db = -10.0;  // -inf disables the primary user
  ChannelModel channel = Uncorrelated{};
  NoiseModel noise = Calibrated{};
  int trials = 1000;
  std::uint64_t seed = 1;
  std::vector<DetectorKind> detectors = {DetectorKind::HDL, DetectorKind::HDS, DetectorKind::HDQ};
  std::vector<double> pfa_grid = default_pfa_grid();
  StatisticForm form = StatisticForm::Lss;

  /// 20 log-spaced points on [1e-3, 0.5].
  static std::vector<double> default_pfa_grid();

  /// Throws std::invalid_argument on any violated invariant.
  void validate() const;
  /// Canonical one-line rendering of every field; the basis of digest().
  std::string canonical() const;
  /// 16-hex-digit FNV-1a digest of canonical().
  std::string digest() const;
};

/// Circular complex Gaussian noise with column covariance Sigma_N. The
/// noise profile (per-antenna variances) is drawn from `profile_stream` for
/// uncalibrated noise.
ObservationMatrix sample_h0(int antennas, int samples, const NoiseModel& noise,
                            RandomStream& noise_stream, RandomStream& profile_stream);

/// y_l = h s_l + n_l with one channel draw h ~ CN(0, Sigma_H) held over all L
/// snapshots, s_l ~ CN(0, E_s) and E_s = gamma * tr(Sigma_N) / tr(Sigma_H).
struct H1Streams {
  RandomStream& noise;
  RandomStream& profile;
  RandomStream& channel;
  RandomStream& signal;
};
ObservationMatrix sample_h1(int antennas, int samples, double snr_db, const ChannelModel& channel,
                            const NoiseModel& noise, H1Streams streams);

struct StatisticStream {
  DetectorKind detector;
  std::vector<double> h0;
  std::vector<double> h1;
};

struct MonteCarloResult {
  std::vector<StatisticStream> streams;  // one per cfg.detectors entry, same order

  const StatisticStream& operator[](DetectorKind kind) const;
};

struct RunOptions {
  /// 0 selects std::thread::hardware_concurrency(). The LSS_SENSE_WORKERS
  /// environment variable caps the count. Results never depend on it.
  unsigned workers = 0;
  bool simulate_h0 = true;
  bool simulate_h1 = true;
};

unsigned resolve_workers(unsigned requested);

/// Exactly cfg.trials statistics per simulated hypothesis per detector. Trial
/// t of hypothesis H draws only from substreams keyed by (seed, t, tag), so
/// the output is bitwise independent of the worker count.
MonteCarloResult run_monte_carlo(const ExperimentConfig& cfg, const RunOptions& options = {});

/// Statistics of every configured detector for one observation, under the
/// config's statistic form and calibrated-noise normalization.
std::vector<double> compute_statistics(const ExperimentConfig& cfg, const ObservationMatrix& y);

struct RateInterval {
  double lower;
  double upper;

  double halfwidth() const { return 0.5 * (upper - lower); }
  bool contains(double p) const { return p >= lower && p <= upper; }
};

/// Wilson score interval for `successes` out of `n` at the given z.
RateInterval wilson_interval(std::size_t successes, std::size_t n, double z = 1.959963984540054);

struct RocPoint {
  double pfa_target;
  double threshold;
  double pd_hat;
  double pfa_hat;
  double ci_halfwidth;  // 95% Wilson half-width of pd_hat
};

struct RocCurve {
  DetectorKind detector;
  std::vector<RocPoint> points;
  std::string config_digest;
};

/// Thresholds come from np_threshold(null) when a null law is given, else
/// from the empirical H0 upper quantile (at most floor(pfa * n) exceedances).
RocCurve estimate_roc(DetectorKind detector, std::span<const double> h0_stats,
                      std::span<const double> h1_stats, std::span<const double> pfa_grid,
                      const std::optional<NullDistribution>& null, std::string config_digest = {});

/// Uses closed-form thresholds for HD detectors under calibrated noise with
/// the Lss statistic form, and empirical H0 quantiles otherwise.
std::optional<NullDistribution> threshold_null(const ExperimentConfig& cfg, DetectorKind kind);

std::vector<RocCurve> estimate_rocs(const ExperimentConfig& cfg, const MonteCarloResult& result);

struct HistogramSummary {
  double sample_mean;
  double sample_variance;
  double sample_skewness;
  double ks_statistic;  // sup |F_n - Phi((x - mean) / sd)| against the null
  std::size_t n;
};

/// Sample moments and the one-sample Kolmogorov-Smirnov distance to
/// N(null.mean, null.variance). Requires at least 100 statistics.
HistogramSummary null_histogram_check(std::span<const double> stats, const NullDistribution& null);

/// Asymptotic one-sample KS critical value sqrt(-log(alpha / 2) / 2) / sqrt(n).
double ks_critical_value(double alpha, std::size_t n);

struct SweepRow {
  double snr_db;
  DetectorKind detector;
  double pd_hat;
  double ci_halfwidth;
};

/// One ROC point per SNR at a fixed pfa. H0 is simulated once; every SNR
/// reuses the same per-trial substreams, so curves are smooth in SNR.
std::vector<SweepRow> pd_vs_snr_sweep(const ExperimentConfig& cfg, std::span<const double> snr_db,
                                      double pfa, const RunOptions& options = {});

/// Monte Carlo average of R^{-1} under calibrated unit-variance H0 noise,
/// reduced to the scalar alpha minimizing ||avg - alpha I||_F (= Re tr(avg) / M).
/// Requires L > M + 2.
double inverse_scm_bias_check(int antennas, int samples, int trials, std::uint64_t seed);

}  // namespace lss::sim
