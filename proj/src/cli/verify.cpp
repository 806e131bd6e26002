#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "lss/cli.hpp"
#include "lss/detectors.hpp"
#include "lss/format.hpp"
#include "lss/oracle.hpp"
#include "lss/random.hpp"
#include "lss/rmt.hpp"
#include "lss/sim.hpp"

namespace lss::cli {

namespace {

using oracle::LssFunction;

constexpr double kAspectRatios[] = {0.1, 0.25, 0.5, 1.0, 2.0, 3.0};

struct Worst {
  double value = 0.0;
  std::string where;

  void update(double v, std::string at) {
    if (!(v <= value)) {  // also captures NaN
      value = v;
      where = std::move(at);
    }
  }
};

VerifyCheck make_check(std::string name, const Worst& worst, double tolerance) {
  const bool ok = worst.value <= tolerance;
  return {std::move(name), ok, worst.value, tolerance,
          worst.where.empty() ? std::string() : "worst at " + worst.where};
}

ObservationMatrix random_observation(int antennas, int samples, RandomStream& rng) {
  std::vector<std::complex<double>> y(static_cast<std::size_t>(antennas) * samples);
  for (auto& v : y) v = rng.complex_normal();
  return ObservationMatrix(antennas, samples, std::move(y));
}

// Gram matrix Y^H Y / L, the L x L partner of R.
std::vector<std::complex<double>> column_gram(const ObservationMatrix& y) {
  const int m = y.antennas();
  const int l = y.samples();
  std::vector<std::complex<double>> g(static_cast<std::size_t>(l) * l);
  for (int i = 0; i < l; ++i) {
    for (int j = 0; j < l; ++j) {
      std::complex<double> acc = 0.0;
      for (int k = 0; k < m; ++k) acc += std::conj(y(k, i)) * y(k, j);
      g[static_cast<std::size_t>(i) * l + j] = acc / static_cast<double>(l);
    }
  }
  return g;
}

std::vector<VerifyCheck> eigensolver_checks(std::uint64_t seed) {
  Worst traces;
  Worst partner;
  for (int trial = 0; trial < 24; ++trial) {
    RandomStream rng(seed, static_cast<std::uint64_t>(trial), StreamTag::Oracle);
    const int m = 1 + static_cast<int>(rng.uniform() * 16.0);
    const int l = 1 + static_cast<int>(rng.uniform() * 16.0);
    const auto y = random_observation(m, l, rng);
    const auto r = y.sample_covariance();
    const auto spec = oracle::hermitian_eigenvalues(r, m);
    const auto s = compute_scm_summary(y);
    const std::string at = "M=" + std::to_string(m) + ",L=" + std::to_string(l);
    traces.update(std::abs(spec.sum() - s.trace_r) / std::max(1.0, s.trace_r), at);
    traces.update(std::abs(spec.sum_of_squares() - s.trace_r2) / std::max(1.0, s.trace_r2), at);

    // Y Y^H and Y^H Y share their nonzero eigenvalues (scaled by the same 1/L).
    const auto other = oracle::hermitian_eigenvalues(column_gram(y), l);
    const int rank = std::min(m, l);
    for (int i = 0; i < rank; ++i) {
      const double a = spec.eigenvalues[spec.size() - 1 - i];
      const double b = other.eigenvalues[other.size() - 1 - i];
      partner.update(std::abs(a - b) / std::max(1.0, std::abs(a)), at);
    }
  }
  return {make_check("eigensolver.trace_identities", traces, 1e-9),
          make_check("eigensolver.gram_partner_spectrum", partner, 1e-8)};
}

std::vector<VerifyCheck> quadrature_checks() {
  Worst mass;
  Worst moments;
  Worst fc[3];
  Worst stieltjes;
  for (double cv : kAspectRatios) {
    const AspectRatio c(cv);
    const std::string at_c = "c=" + format_double(cv);
    mass.update(std::abs(oracle::mp_mass_numeric(c) - (1.0 - mp_law(c).mass_at_zero)), at_c);
    for (int k = 1; k <= 5; ++k) {
      const double exact = mp_moment(k, c);
      moments.update(std::abs(oracle::mp_moment_numeric(k, c) - exact) / exact,
                     at_c + ",k=" + std::to_string(k));
    }
    fc[0].update(std::abs(oracle::mean_correction_numeric(LssFunction::Linear, c) - 1.0), at_c);
    fc[1].update(std::abs(oracle::mean_correction_numeric(LssFunction::Square, c) - (1.0 + cv)),
                 at_c);
    fc[2].update(std::abs(oracle::mean_correction_numeric(LssFunction::Quadratic, c) - cv), at_c);
    for (const std::complex<double> z : {std::complex<double>(0.5, 0.7), {2.0, 0.3}, {-1.0, 1.5},
                                         {3.0, -0.4}}) {
      const auto m = oracle::companion_stieltjes_numeric(z, c);
      stieltjes.update(std::abs(stieltjes_inverse(m, cv) - z),
                       at_c + ",z=" + format_double(z.real()) + "+" + format_double(z.imag()) + "j");
    }
  }
  return {make_check("mp.mass", mass, 1e-8),
          make_check("mp.moments", moments, 1e-8),
          make_check("mean_correction.linear", fc[0], 1e-8),
          make_check("mean_correction.square", fc[1], 1e-8),
          make_check("mean_correction.quadratic", fc[2], 1e-8),
          make_check("stieltjes.inverse_roundtrip", stieltjes, 1e-8)};
}

double closed_form(LssFunction g, const ScmSummary& s) {
  switch (g) {
    case LssFunction::Linear: return t_hdl(s);
    case LssFunction::Square: return t_hds(s);
    case LssFunction::Quadratic: return t_hdq(s);
  }
  return 0.0;
}

std::vector<VerifyCheck> contour_checks(std::uint64_t seed, int nodes) {
  constexpr std::pair<LssFunction, const char*> kFunctions[] = {
      {LssFunction::Linear, "linear"},
      {LssFunction::Square, "square"},
      {LssFunction::Quadratic, "quadratic"}};
  std::vector<VerifyCheck> checks;
  for (const auto& [g, label] : kFunctions) {
    Worst agreement;
    Worst refinement;
    Worst imaginary;
    for (int trial = 0; trial < 30; ++trial) {
      RandomStream rng(seed + 1, static_cast<std::uint64_t>(trial), StreamTag::Oracle);
      const int m = 2 + static_cast<int>(rng.uniform() * 11.0);
      const int l = 2 + static_cast<int>(rng.uniform() * 11.0);
      const auto y = random_observation(m, l, rng);
      const auto spec = oracle::hermitian_eigenvalues(y.sample_covariance(), m);
      const ScmSummary s{spec.sum(), spec.sum_of_squares(), m, l};
      const std::string at = "M=" + std::to_string(m) + ",L=" + std::to_string(l);

      const auto coarse = oracle::lss_contour(g, spec, m, l, oracle::make_contour(spec, l, nodes));
      const auto fine = oracle::lss_contour(g, spec, m, l, oracle::make_contour(spec, l, 2 * nodes));
      const double exact = closed_form(g, s);
      agreement.update(std::abs(coarse.value - exact) / std::max(1.0, std::abs(exact)), at);
      refinement.update(std::abs(fine.value - coarse.value), at);
      imaginary.update(std::abs(coarse.imaginary), at);
    }
    const std::string base = std::string("contour.") + label;
    checks.push_back(make_check(base + ".closed_form", agreement, 1e-6));
    checks.push_back(make_check(base + ".node_doubling", refinement, 1e-7));
    checks.push_back(make_check(base + ".imaginary_residue", imaginary, 1e-8));
  }
  return checks;
}

VerifyCheck null_moment_check(std::uint64_t seed, bool inject_fault) {
  sim::ExperimentConfig cfg;
  cfg.antennas = 90;
  cfg.samples = 30;
  cfg.trials = 20000;
  cfg.seed = seed;
  sim::RunOptions options;
  options.simulate_h1 = false;
  const auto result = sim::run_monte_carlo(cfg, options);

  // Standardized deviations: |mean error| in standard errors and relative
  // variance error scaled so both share one tolerance of 1.
  Worst worst;
  const double n = cfg.trials;
  for (const auto& stream : result.streams) {
    auto null = null_distribution(stream.detector, cfg.antennas, cfg.samples);
    if (inject_fault && stream.detector == DetectorKind::HDL) null.variance *= 1.5;
    const auto h = sim::null_histogram_check(stream.h0, null);
    const std::string label(to_string(stream.detector));
    worst.update(std::abs(h.sample_mean - null.mean) / (4.0 * null.stddev() / std::sqrt(n)),
                 label + " mean");
    worst.update(std::abs(h.sample_variance / null.variance - 1.0) / 0.05, label + " variance");
  }
  return make_check("null_moments.monte_carlo", worst, 1.0);
}

VerifyCheck inverse_scm_check(std::uint64_t seed) {
  constexpr int kM = 4;
  constexpr int kL = 10;
  const double alpha = sim::inverse_scm_bias_check(kM, kL, 10000, seed);
  const double expected = static_cast<double>(kL) / (kL - kM - 2);
  Worst worst;
  worst.update(std::abs(alpha - expected) / expected, "M=4,L=10");
  auto check = make_check("inverse_scm.bias", worst, 0.05);
  check.detail = "alpha=" + format_double(alpha, 6) + " expected L/(L-M-2)=" +
                 format_double(expected, 6) + " complex-Wishart L/(L-M)=" +
                 format_double(static_cast<double>(kL) / (kL - kM), 6);
  return check;
}

}  // namespace

std::vector<VerifyCheck> run_verify_suite(const VerifyOptions& options) {
  if (options.nodes < 256) throw std::invalid_argument("--nodes must be at least 256");
  std::vector<VerifyCheck> checks;
  auto append = [&checks](std::vector<VerifyCheck> more) {
    checks.insert(checks.end(), more.begin(), more.end());
  };
  append(eigensolver_checks(options.seed));
  append(quadrature_checks());
  append(contour_checks(options.seed, options.nodes));
  checks.push_back(null_moment_check(options.seed, options.inject_fault));
  checks.push_back(inverse_scm_check(options.seed));
  return checks;
}

}  // namespace lss::cli
