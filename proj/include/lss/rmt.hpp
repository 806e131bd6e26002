#pragma once

// Closed-form random-matrix results for white-noise sample covariance
// matrices: Marcenko-Pastur law, its moments, the companion Stieltjes
// inverse, the Gaussian null laws of the trace detectors and the
// Neyman-Pearson thresholds derived from them.
//
// All closed forms assume unit noise variance. Observations with a known
// calibrated variance s2 must be scaled by 1/sqrt(s2) first.

#include <complex>
#include <string_view>

namespace lss {

enum class DetectorKind { HDL, HDS, HDQ, BaselineGLR, BaselineFN, BaselineRao };

/// True for the three high-dimensional trace detectors, which have
/// closed-form Gaussian nulls.
constexpr bool has_closed_form_null(DetectorKind kind) {
  return kind == DetectorKind::HDL || kind == DetectorKind::HDS || kind == DetectorKind::HDQ;
}

std::string_view to_string(DetectorKind kind);
/// Accepts "HDL", "HDS", "HDQ", "GLR", "FN", "RAO" (case-insensitive).
DetectorKind parse_detector(std::string_view name);

/// c = M / L, antennas over samples. Always positive and finite.
class AspectRatio {
 public:
  explicit AspectRatio(double c);
  static AspectRatio from_dims(int antennas, int samples);

  double value() const { return c_; }

 private:
  double c_;
};

struct MpLaw {
  AspectRatio c;
  double a;             // lower support edge (1 - sqrt c)^2
  double b;             // upper support edge (1 + sqrt c)^2
  double mass_at_zero;  // max(0, 1 - 1/c)
};

MpLaw mp_law(AspectRatio c);

struct SupportEdges {
  double a;
  double b;
};

SupportEdges mp_support(AspectRatio c);

/// Continuous part of the Marcenko-Pastur density. The atom at zero (c > 1)
/// is reported by MpLaw::mass_at_zero and is never folded in here; the
/// density is exactly 0 at and outside the support edges.
double mp_pdf(double x, AspectRatio c);

/// k-th moment of the MP law via the exact Narayana-type sum. k in [1, 30].
double mp_moment(int k, AspectRatio c);

/// z = -1/m + c/(1+m): inverse of the Stieltjes transform of the companion
/// law (1-c) delta_0 + c F_MP. c >= 0 is accepted here so the c -> 0 limit
/// can be evaluated. Throws std::domain_error at the poles m = 0, m = -1.
std::complex<double> stieltjes_inverse(std::complex<double> m, double c);

struct NullDistribution {
  double mean;
  double variance;
  DetectorKind detector;

  double stddev() const;
};

/// Gaussian null law of the trace statistic of an HD detector at unit noise
/// variance. Baseline kinds have no closed form and are rejected.
NullDistribution null_distribution(DetectorKind kind, int antennas, int samples);

/// Standard normal upper tail.
double q_function(double x);
/// Inverse of q_function on (0, 1).
double q_inverse(double p);

/// tau = sigma * Q^{-1}(pfa) + mu under the closed-form null.
double np_threshold(DetectorKind kind, int antennas, int samples, double pfa);

struct SensitivityPartials {
  double dsigma_dc;
  double dmu_dL;
  double dmu_dM;
};

/// Partial derivatives of the null standard deviation w.r.t. c and of the
/// null mean w.r.t. L and M (both treated as continuous).
SensitivityPartials sensitivity_partials(DetectorKind kind, int antennas, int samples);

struct ThresholdSlopeRates {
  double d_dL;
  double d_dM;
};

/// Rate of change of the NP threshold (the ROC tangent slope) with L and M.
ThresholdSlopeRates threshold_slope_rates(DetectorKind kind, int antennas, int samples, double pfa);

}  // namespace lss
