#pragma once

#include <complex>
#include <span>
#include <vector>

#include "lss/rmt.hpp"

namespace lss {

/// M x L block of complex snapshots; row m is the time series of antenna m,
/// column l is the array snapshot y_l. Immutable after construction.
class ObservationMatrix {
 public:
  using value_type = std::complex<double>;

  /// Takes row-major entries; throws if dimensions are < 1, the size does not
  /// match, or any entry is non-finite.
  ObservationMatrix(int antennas, int samples, std::vector<value_type> row_major);

  static ObservationMatrix zeros(int antennas, int samples);

  int antennas() const { return antennas_; }
  int samples() const { return samples_; }

  const value_type& operator()(int m, int l) const {
    return data_[static_cast<std::size_t>(m) * samples_ + l];
  }
  std::span<const value_type> row(int m) const {
    return {data_.data() + static_cast<std::size_t>(m) * samples_,
            static_cast<std::size_t>(samples_)};
  }
  std::span<const value_type> data() const { return data_; }

  /// R = Y Y^H / L, dense M x M row-major.
  std::vector<value_type> sample_covariance() const;

 private:
  int antennas_;
  int samples_;
  std::vector<value_type> data_;
};

/// Sufficient statistics for every HD detector: tr R and tr R^2.
struct ScmSummary {
  double trace_r;
  double trace_r2;
  int antennas;
  int samples;

  /// Throws if the Cauchy-Schwarz bounds tr(R)^2/M <= tr(R^2) <= tr(R)^2
  /// are violated beyond rounding, or if either trace is negative.
  void validate() const;
};

/// tr R and ||R||_F^2 without forming eigenvalues. Uses the Gram matrix on
/// the smaller side (YY^H or Y^H Y share their nonzero spectrum), so the cost
/// is O(min(M,L)^2 max(M,L)).
ScmSummary compute_scm_summary(const ObservationMatrix& y);

// Trace forms of the high-dimensional statistics, each carrying the 1/M
// prefactor of its LSS definition.
double t_hdl(const ScmSummary& s);  // tr R / M
double t_hds(const ScmSummary& s);  // tr R^2 / M + (tr R)^2 / (L M)
double t_hdq(const ScmSummary& s);  // tr R^2 / M - 2 tr R / M + (tr R)^2 / (L M)

/// Which statistic an HD detector thresholds.
enum class StatisticForm {
  /// tr g(R) = sum_i g(lambda_i) for g(z) = z, z^2, (z-1)^2. This is the
  /// quantity whose H0 law is null_distribution(), so NP thresholds apply.
  Lss,
  /// M * t_hd*(): the trace forms above including the (tr R)^2 / L cross
  /// term. Its H0 mean is shifted by about M c for HDS and HDQ, so it needs
  /// empirical thresholds.
  CrossTerm,
};

/// Unnormalized decision statistic of an HD detector.
double decision_statistic(DetectorKind kind, const ScmSummary& s, StatisticForm form);

// Eigenvalue-based baselines. The eigenvalues are supplied by the caller
// (any order); the eigensolver lives in the oracle module.
double baseline_glr(std::span<const double> eigenvalues);  // lambda_max / sum lambda
double baseline_fn(std::span<const double> eigenvalues);   // sum lambda^2 / M
double baseline_rao(std::span<const double> eigenvalues);  // sum (lambda - 1)^2

enum class Hypothesis { H0, H1 };

struct Decision {
  double statistic;
  double threshold;
  Hypothesis declared;
};

/// H1 iff statistic > threshold; ties go to H0.
Decision decide(double statistic, double threshold);

}  // namespace lss
