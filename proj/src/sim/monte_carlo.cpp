#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <new>
#include <string>
#include <thread>

#include <Eigen/Dense>

#include "lss/sim.hpp"

namespace lss::sim {

namespace {

bool needs_spectrum(const ExperimentConfig& cfg) {
  return std::any_of(cfg.detectors.begin(), cfg.detectors.end(),
                     [](DetectorKind k) { return !has_closed_form_null(k); });
}

// Eigenvalues of R = Y Y^H / L, computed from the smaller Gram matrix and
// padded with zeros up to M entries.
std::vector<double> scm_eigenvalues(const ObservationMatrix& y) {
  const int m = y.antennas();
  const int l = y.samples();
  const int n = std::min(m, l);
  Eigen::MatrixXcd gram(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      std::complex<double> acc = 0.0;
      if (m <= l) {
        for (int k = 0; k < l; ++k) acc += y(i, k) * std::conj(y(j, k));
      } else {
        for (int k = 0; k < m; ++k) acc += std::conj(y(k, i)) * y(k, j);
      }
      gram(i, j) = acc / static_cast<double>(l);
      gram(j, i) = std::conj(gram(i, j));
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(gram, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw SimulationError("eigenvalue computation did not converge");
  }
  std::vector<double> values(static_cast<std::size_t>(m), 0.0);
  for (int i = 0; i < n; ++i) values[i] = std::max(0.0, solver.eigenvalues()[i]);
  return values;
}

}  // namespace

const StatisticStream& MonteCarloResult::operator[](DetectorKind kind) const {
  for (const auto& s : streams) {
    if (s.detector == kind) return s;
  }
  throw std::out_of_range("no statistics recorded for detector " + std::string(to_string(kind)));
}

unsigned resolve_workers(unsigned requested) {
  unsigned workers = requested != 0 ? requested : std::thread::hardware_concurrency();
  if (workers == 0) workers = 1;
  if (const char* env = std::getenv("LSS_SENSE_WORKERS"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && cap >= 1) {
      workers = std::min(workers, static_cast<unsigned>(cap));
    }
  }
  return workers;
}

std::vector<double> compute_statistics(const ExperimentConfig& cfg, const ObservationMatrix& y) {
  ScmSummary summary = compute_scm_summary(y);
  double scale = 1.0;
  if (const auto* cal = std::get_if<Calibrated>(&cfg.noise)) scale = 1.0 / cal->variance;
  summary.trace_r *= scale;
  summary.trace_r2 *= scale * scale;

  std::vector<double> spectrum;
  if (needs_spectrum(cfg)) {
    spectrum = scm_eigenvalues(y);
    for (auto& v : spectrum) v *= scale;
  }

  std::vector<double> out;
  out.reserve(cfg.detectors.size());
  for (const auto kind : cfg.detectors) {
    switch (kind) {
      case DetectorKind::BaselineGLR: out.push_back(baseline_glr(spectrum)); break;
      case DetectorKind::BaselineFN: out.push_back(baseline_fn(spectrum)); break;
      case DetectorKind::BaselineRao: out.push_back(baseline_rao(spectrum)); break;
      default: out.push_back(decision_statistic(kind, summary, cfg.form)); break;
    }
  }
  return out;
}

namespace {

ObservationMatrix draw_trial(const ExperimentConfig& cfg, Hypothesis hyp, std::uint64_t trial,
                             double snr_db) {
  if (hyp == Hypothesis::H0) {
    RandomStream noise(cfg.seed, trial, StreamTag::H0Noise);
    RandomStream profile(cfg.seed, trial, StreamTag::H0NoiseProfile);
    return sample_h0(cfg.antennas, cfg.samples, cfg.noise, noise, profile);
  }
  RandomStream noise(cfg.seed, trial, StreamTag::H1Noise);
  RandomStream profile(cfg.seed, trial, StreamTag::H1NoiseProfile);
  RandomStream channel(cfg.seed, trial, StreamTag::H1Channel);
  RandomStream signal(cfg.seed, trial, StreamTag::H1Signal);
  return sample_h1(cfg.antennas, cfg.samples, snr_db, cfg.channel, cfg.noise,
                   H1Streams{noise, profile, channel, signal});
}

// Fills out[d][t] for every trial t. Workers claim trial indices from a
// shared counter; every result lands in its own slot, so the buffer contents
// do not depend on scheduling.
void run_trials(const ExperimentConfig& cfg, Hypothesis hyp, double snr_db, unsigned workers,
                std::vector<std::vector<double>>& out) {
  const auto trials = static_cast<std::size_t>(cfg.trials);
  for (auto& column : out) column.assign(trials, 0.0);

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto work = [&] {
    try {
      for (std::size_t t = next.fetch_add(1); t < trials && !failed.load();
           t = next.fetch_add(1)) {
        const auto y = draw_trial(cfg, hyp, t, snr_db);
        const auto stats = compute_statistics(cfg, y);
        for (std::size_t d = 0; d < stats.size(); ++d) out[d][t] = stats[d];
      }
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
      failed = true;
    }
  };

  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(trials)));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    try {
      for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    } catch (const std::system_error& e) {
      failed = true;
      for (auto& th : pool) th.join();
      throw SimulationError(std::string("cannot start worker threads: ") + e.what());
    }
    for (auto& th : pool) th.join();
  }

  if (error) {
    try {
      std::rethrow_exception(error);
    } catch (const std::bad_alloc&) {
      throw SimulationError("out of memory during Monte Carlo run");
    }
  }
}

}  // namespace

MonteCarloResult run_monte_carlo(const ExperimentConfig& cfg, const RunOptions& options) {
  cfg.validate();
  const unsigned workers = resolve_workers(options.workers);
  try {
    std::vector<std::vector<double>> h0(cfg.detectors.size());
    std::vector<std::vector<double>> h1(cfg.detectors.size());
    if (options.simulate_h0) run_trials(cfg, Hypothesis::H0, cfg.snr_db, workers, h0);
    if (options.simulate_h1) run_trials(cfg, Hypothesis::H1, cfg.snr_db, workers, h1);

    MonteCarloResult result;
    result.streams.reserve(cfg.detectors.size());
    for (std::size_t d = 0; d < cfg.detectors.size(); ++d) {
      result.streams.push_back({cfg.detectors[d], std::move(h0[d]), std::move(h1[d])});
    }
    return result;
  } catch (const std::bad_alloc&) {
    throw SimulationError("out of memory allocating Monte Carlo buffers");
  }
}

std::vector<SweepRow> pd_vs_snr_sweep(const ExperimentConfig& cfg, std::span<const double> snr_db,
                                      double pfa, const RunOptions& options) {
  cfg.validate();
  if (snr_db.empty()) throw std::invalid_argument("SNR list must not be empty");
  if (!(pfa > 0.0 && pfa < 1.0)) throw std::invalid_argument("pfa must lie in (0, 1)");
  const unsigned workers = resolve_workers(options.workers);

  std::vector<std::vector<double>> h0(cfg.detectors.size());
  run_trials(cfg, Hypothesis::H0, cfg.snr_db, workers, h0);

  std::vector<std::vector<SweepRow>> per_detector(cfg.detectors.size());
  const std::vector<double> grid{pfa};
  for (const double snr : snr_db) {
    ExperimentConfig point = cfg;
    point.snr_db = snr;
    point.validate();
    std::vector<std::vector<double>> h1(cfg.detectors.size());
    run_trials(point, Hypothesis::H1, snr, workers, h1);
    for (std::size_t d = 0; d < cfg.detectors.size(); ++d) {
      const auto roc = estimate_roc(cfg.detectors[d], h0[d], h1[d], grid,
                                    threshold_null(cfg, cfg.detectors[d]));
      per_detector[d].push_back(
          {snr, cfg.detectors[d], roc.points[0].pd_hat, roc.points[0].ci_halfwidth});
    }
  }

  std::vector<SweepRow> rows;
  for (auto& block : per_detector) rows.insert(rows.end(), block.begin(), block.end());
  return rows;
}

double inverse_scm_bias_check(int antennas, int samples, int trials, std::uint64_t seed) {
  if (antennas < 1 || trials < 1) throw std::invalid_argument("M and trials must be >= 1");
  if (samples <= antennas + 2) {
    throw std::invalid_argument("inverse-SCM bias needs L > M + 2");
  }
  const NoiseModel unit = Calibrated{1.0};
  Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(antennas, antennas);
  for (int t = 0; t < trials; ++t) {
    RandomStream noise(seed, static_cast<std::uint64_t>(t), StreamTag::InverseScm);
    RandomStream profile(seed, static_cast<std::uint64_t>(t), StreamTag::H0NoiseProfile);
    const auto y = sample_h0(antennas, samples, unit, noise, profile);
    const auto r = y.sample_covariance();
    Eigen::MatrixXcd scm(antennas, antennas);
    for (int i = 0; i < antennas; ++i) {
      for (int j = 0; j < antennas; ++j) scm(i, j) = r[static_cast<std::size_t>(i) * antennas + j];
    }
    Eigen::LLT<Eigen::MatrixXcd> llt(scm);
    if (llt.info() != Eigen::Success) throw SimulationError("singular sample covariance");
    sum += llt.solve(Eigen::MatrixXcd::Identity(antennas, antennas));
  }
  return sum.trace().real() / (static_cast<double>(trials) * antennas);
}

}  // namespace lss::sim
