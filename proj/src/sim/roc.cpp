#include <algorithm>
#include <cmath>
#include <string>

#include "lss/sim.hpp"

namespace lss::sim {

namespace {

// Number of entries of an ascending array strictly greater than x.
std::size_t count_above(const std::vector<double>& ascending, double x) {
  return static_cast<std::size_t>(ascending.end() -
                                  std::upper_bound(ascending.begin(), ascending.end(), x));
}

void require_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument(std::string(what) + " contains non-finite values");
  }
}

}  // namespace

RateInterval wilson_interval(std::size_t successes, std::size_t n, double z) {
  if (n == 0) throw std::invalid_argument("wilson_interval: n must be positive");
  if (successes > n) throw std::invalid_argument("wilson_interval: successes exceed n");
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  // The exact interval ends at 0 (or 1) when no (or every) trial succeeds.
  return {successes == 0 ? 0.0 : std::max(0.0, center - half),
          successes == n ? 1.0 : std::min(1.0, center + half)};
}

RocCurve estimate_roc(DetectorKind detector, std::span<const double> h0_stats,
                      std::span<const double> h1_stats, std::span<const double> pfa_grid,
                      const std::optional<NullDistribution>& null, std::string config_digest) {
  if (h0_stats.empty() || h1_stats.empty()) {
    throw std::invalid_argument("estimate_roc: statistic streams must be nonempty");
  }
  require_finite(h0_stats, "H0 statistics");
  require_finite(h1_stats, "H1 statistics");

  std::vector<double> h0(h0_stats.begin(), h0_stats.end());
  std::vector<double> h1(h1_stats.begin(), h1_stats.end());
  std::sort(h0.begin(), h0.end());
  std::sort(h1.begin(), h1.end());

  RocCurve curve{detector, {}, std::move(config_digest)};
  curve.points.reserve(pfa_grid.size());
  for (const double pfa : pfa_grid) {
    if (!(pfa > 0.0 && pfa < 1.0)) throw std::invalid_argument("pfa targets must lie in (0, 1)");
    double threshold;
    if (null) {
      threshold = null->stddev() * q_inverse(pfa) + null->mean;
    } else {
      // Upper quantile: at most floor(pfa * n) H0 statistics exceed it.
      const auto k = static_cast<std::size_t>(std::floor(pfa * static_cast<double>(h0.size())));
      threshold = h0[h0.size() - 1 - std::min(k, h0.size() - 1)];
    }
    const std::size_t detections = count_above(h1, threshold);
    const std::size_t alarms = count_above(h0, threshold);
    const auto ci = wilson_interval(detections, h1.size());
    curve.points.push_back({pfa, threshold,
                            static_cast<double>(detections) / static_cast<double>(h1.size()),
                            static_cast<double>(alarms) / static_cast<double>(h0.size()),
                            ci.halfwidth()});
  }
  return curve;
}

std::optional<NullDistribution> threshold_null(const ExperimentConfig& cfg, DetectorKind kind) {
  if (!has_closed_form_null(kind)) return std::nullopt;
  if (!std::holds_alternative<Calibrated>(cfg.noise)) return std::nullopt;
  if (cfg.form != StatisticForm::Lss) return std::nullopt;
  return null_distribution(kind, cfg.antennas, cfg.samples);
}

std::vector<RocCurve> estimate_rocs(const ExperimentConfig& cfg, const MonteCarloResult& result) {
  const auto digest = cfg.digest();
  std::vector<RocCurve> curves;
  curves.reserve(result.streams.size());
  for (const auto& s : result.streams) {
    curves.push_back(
        estimate_roc(s.detector, s.h0, s.h1, cfg.pfa_grid, threshold_null(cfg, s.detector), digest));
  }
  return curves;
}

HistogramSummary null_histogram_check(std::span<const double> stats, const NullDistribution& null) {
  if (stats.size() < 100) throw std::invalid_argument("null_histogram_check needs >= 100 statistics");
  require_finite(stats, "statistics");
  const double n = static_cast<double>(stats.size());

  double mean = 0.0;
  for (double v : stats) mean += v;
  mean /= n;
  double m2 = 0.0;
  double m3 = 0.0;
  for (double v : stats) {
    const double d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  const double pop_var = m2 / n;
  const double skew = pop_var > 0.0 ? (m3 / n) / std::pow(pop_var, 1.5) : 0.0;

  std::vector<double> sorted(stats.begin(), stats.end());
  std::sort(sorted.begin(), sorted.end());
  const double sd = null.stddev();
  double ks = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double cdf = 0.5 * std::erfc(-(sorted[i] - null.mean) / (sd * std::sqrt(2.0)));
    const double lo = static_cast<double>(i) / n;
    const double hi = static_cast<double>(i + 1) / n;
    ks = std::max({ks, cdf - lo, hi - cdf});
  }
  return {mean, m2 / (n - 1.0), skew, std::min(ks, 1.0), stats.size()};
}

double ks_critical_value(double alpha, std::size_t n) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  if (n == 0) throw std::invalid_argument("n must be positive");
  return std::sqrt(-std::log(alpha / 2.0) / 2.0) / std::sqrt(static_cast<double>(n));
}

}  // namespace lss::sim
