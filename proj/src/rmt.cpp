#include "lss/rmt.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

namespace lss {

namespace {

void require_dims(int antennas, int samples) {
  if (antennas < 1 || samples < 1) {
    throw std::invalid_argument("antenna and sample counts must be >= 1");
  }
}

void require_probability(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("probability must lie in (0, 1), got " + std::to_string(p));
  }
}

std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) {
    r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  }
  return r;
}

// Acklam's rational approximation of the standard normal lower-tail quantile,
// relative error ~1.15e-9 before refinement.
double acklam_quantile(double p) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - p_low) {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

std::string_view to_string(DetectorKind kind) {
  switch (kind) {
    case DetectorKind::HDL: return "HDL";
    case DetectorKind::HDS: return "HDS";
    case DetectorKind::HDQ: return "HDQ";
    case DetectorKind::BaselineGLR: return "GLR";
    case DetectorKind::BaselineFN: return "FN";
    case DetectorKind::BaselineRao: return "RAO";
  }
  return "?";
}

DetectorKind parse_detector(std::string_view name) {
  std::string upper(name);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::toupper(ch)); });
  if (upper == "HDL") return DetectorKind::HDL;
  if (upper == "HDS") return DetectorKind::HDS;
  if (upper == "HDQ") return DetectorKind::HDQ;
  if (upper == "GLR") return DetectorKind::BaselineGLR;
  if (upper == "FN") return DetectorKind::BaselineFN;
  if (upper == "RAO") return DetectorKind::BaselineRao;
  throw std::invalid_argument("unknown detector '" + std::string(name) + "'");
}

AspectRatio::AspectRatio(double c) : c_(c) {
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw std::invalid_argument("aspect ratio must be positive and finite");
  }
}

AspectRatio AspectRatio::from_dims(int antennas, int samples) {
  require_dims(antennas, samples);
  return AspectRatio(static_cast<double>(antennas) / static_cast<double>(samples));
}

SupportEdges mp_support(AspectRatio c) {
  const double s = std::sqrt(c.value());
  return {(1.0 - s) * (1.0 - s), (1.0 + s) * (1.0 + s)};
}

MpLaw mp_law(AspectRatio c) {
  const auto [a, b] = mp_support(c);
  return {c, a, b, std::max(0.0, 1.0 - 1.0 / c.value())};
}

double mp_pdf(double x, AspectRatio c) {
  const auto [a, b] = mp_support(c);
  if (!(x > a) || !(x < b) || x <= 0.0) return 0.0;
  return std::sqrt((x - a) * (b - x)) / (2.0 * std::numbers::pi * c.value() * x);
}

double mp_moment(int k, AspectRatio c) {
  if (k < 1 || k > 30) {
    throw std::invalid_argument("mp_moment supports 1 <= k <= 30");
  }
  // (1/(r+1)) C(k,r) C(k-1,r) = C(k,r) C(k,r+1) / k, an exact integer.
  double acc = 0.0;
  for (int r = k - 1; r >= 0; --r) {
    const double coeff = static_cast<double>(binomial(k, r) * binomial(k, r + 1) /
                                             static_cast<std::uint64_t>(k));
    acc = acc * c.value() + coeff;
  }
  return acc;
}

std::complex<double> stieltjes_inverse(std::complex<double> m, double c) {
  if (!(c >= 0.0) || !std::isfinite(c)) {
    throw std::invalid_argument("stieltjes_inverse requires finite c >= 0");
  }
  if (m == std::complex<double>(0.0, 0.0) || m == std::complex<double>(-1.0, 0.0)) {
    throw std::domain_error("stieltjes_inverse is singular at m = 0 and m = -1");
  }
  return -1.0 / m + c / (1.0 + m);
}

double NullDistribution::stddev() const { return std::sqrt(variance); }

NullDistribution null_distribution(DetectorKind kind, int antennas, int samples) {
  const double c = AspectRatio::from_dims(antennas, samples).value();
  const double m = antennas;
  switch (kind) {
    case DetectorKind::HDL: return {m, c, kind};
    case DetectorKind::HDS: return {m * (1.0 + c), 4.0 * c * c * c + 10.0 * c * c + 4.0 * c, kind};
    case DetectorKind::HDQ: return {m * c, 2.0 * c * c * (1.0 + 2.0 * c), kind};
    default:
      throw std::invalid_argument("detector " + std::string(to_string(kind)) +
                                  " has no closed-form null distribution");
  }
}

double q_function(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double q_inverse(double p) {
  require_probability(p);
  // Q^{-1}(p) = -Phi^{-1}(p); one Halley step on Q restores full precision.
  double x = -acklam_quantile(p);
  const double e = q_function(x) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  x += u / (1.0 - 0.5 * x * u);
  return x;
}

double np_threshold(DetectorKind kind, int antennas, int samples, double pfa) {
  const auto null = null_distribution(kind, antennas, samples);
  return null.stddev() * q_inverse(pfa) + null.mean;
}

SensitivityPartials sensitivity_partials(DetectorKind kind, int antennas, int samples) {
  const double c = AspectRatio::from_dims(antennas, samples).value();
  switch (kind) {
    case DetectorKind::HDL: return {1.0 / (2.0 * std::sqrt(c)), 0.0, 1.0};
    case DetectorKind::HDS:
      return {(6.0 * c * c + 10.0 * c + 2.0) / std::sqrt(4.0 * c * c * c + 10.0 * c * c + 4.0 * c),
              -c * c, 1.0 + 2.0 * c};
    case DetectorKind::HDQ:
      // d/dc of sqrt(2 c^2 (1 + 2c)), the HDQ null standard deviation.
      return {(3.0 * c + 1.0) * std::numbers::sqrt2 / std::sqrt(1.0 + 2.0 * c), -c * c, 2.0 * c};
    default:
      throw std::invalid_argument("detector " + std::string(to_string(kind)) +
                                  " has no closed-form null distribution");
  }
}

ThresholdSlopeRates threshold_slope_rates(DetectorKind kind, int antennas, int samples,
                                          double pfa) {
  const auto partials = sensitivity_partials(kind, antennas, samples);
  const double q = q_inverse(pfa);
  const double c = static_cast<double>(antennas) / samples;
  const double inv_l = 1.0 / samples;
  return {-c * inv_l * partials.dsigma_dc * q + partials.dmu_dL,
          inv_l * partials.dsigma_dc * q + partials.dmu_dM};
}

}  // namespace lss
