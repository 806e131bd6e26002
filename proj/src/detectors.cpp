#include "lss/detectors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace lss {

namespace {

// Real-arithmetic conj(a) . b accumulation; std::complex multiplication goes
// through the NaN-recovering library path at -O2.
struct ComplexAccumulator {
  double re = 0.0;
  double im = 0.0;

  void add_conj_product(const std::complex<double>& a, const std::complex<double>& b) {
    re += a.real() * b.real() + a.imag() * b.imag();
    im += a.real() * b.imag() - a.imag() * b.real();
  }
  double norm() const { return re * re + im * im; }
};

}  // namespace

ObservationMatrix::ObservationMatrix(int antennas, int samples, std::vector<value_type> row_major)
    : antennas_(antennas), samples_(samples), data_(std::move(row_major)) {
  if (antennas < 1 || samples < 1) {
    throw std::invalid_argument("observation matrix needs M >= 1 and L >= 1");
  }
  if (data_.size() != static_cast<std::size_t>(antennas) * static_cast<std::size_t>(samples)) {
    throw std::invalid_argument("observation matrix: entry count does not match M x L");
  }
  for (const auto& v : data_) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw std::invalid_argument("observation matrix contains a non-finite entry");
    }
  }
}

ObservationMatrix ObservationMatrix::zeros(int antennas, int samples) {
  if (antennas < 1 || samples < 1) {
    throw std::invalid_argument("observation matrix needs M >= 1 and L >= 1");
  }
  return ObservationMatrix(
      antennas, samples,
      std::vector<value_type>(static_cast<std::size_t>(antennas) * static_cast<std::size_t>(samples)));
}

std::vector<ObservationMatrix::value_type> ObservationMatrix::sample_covariance() const {
  const auto m = static_cast<std::size_t>(antennas_);
  std::vector<value_type> r(m * m);
  const double inv_l = 1.0 / samples_;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i; j < m; ++j) {
      ComplexAccumulator acc;
      const auto ri = row(static_cast<int>(i));
      const auto rj = row(static_cast<int>(j));
      // (Y Y^H)_{ij} = sum_l y_il conj(y_jl)
      for (int l = 0; l < samples_; ++l) acc.add_conj_product(rj[l], ri[l]);
      r[i * m + j] = {acc.re * inv_l, acc.im * inv_l};
      r[j * m + i] = std::conj(r[i * m + j]);
    }
  }
  return r;
}

void ScmSummary::validate() const {
  if (antennas < 1 || samples < 1) throw std::invalid_argument("summary needs M, L >= 1");
  if (!std::isfinite(trace_r) || !std::isfinite(trace_r2) || trace_r < 0.0 || trace_r2 < 0.0) {
    throw std::invalid_argument("summary traces must be finite and nonnegative");
  }
  const double sq = trace_r * trace_r;
  const double slack = 1e-9 * std::max(sq, 1e-300);
  if (trace_r2 + slack < sq / antennas || trace_r2 > sq + slack) {
    throw std::invalid_argument("summary violates tr(R)^2/M <= tr(R^2) <= tr(R)^2");
  }
}

ScmSummary compute_scm_summary(const ObservationMatrix& y) {
  const int m = y.antennas();
  const int l = y.samples();
  const auto data = y.data();

  double energy = 0.0;
  for (const auto& v : data) energy += v.real() * v.real() + v.imag() * v.imag();

  // ||Y Y^H||_F^2 = ||Y^H Y||_F^2; accumulate the Gram matrix on the smaller
  // side, counting each off-diagonal entry twice.
  double frob = 0.0;
  if (m <= l) {
    for (int i = 0; i < m; ++i) {
      const auto ri = y.row(i);
      for (int j = i; j < m; ++j) {
        const auto rj = y.row(j);
        ComplexAccumulator acc;
        for (int t = 0; t < l; ++t) acc.add_conj_product(ri[t], rj[t]);
        frob += (i == j ? 1.0 : 2.0) * acc.norm();
      }
    }
  } else {
    // Upper triangle of Y^H Y, filled by rank-one row updates so the inner
    // loop stays contiguous in the row-major layout.
    const auto n = static_cast<std::size_t>(l);
    std::vector<double> re(n * n, 0.0);
    std::vector<double> im(n * n, 0.0);
    for (int row = 0; row < m; ++row) {
      const auto r = y.row(row);
      for (std::size_t a = 0; a < n; ++a) {
        const double ar = r[a].real();
        const double ai = r[a].imag();
        double* pre = re.data() + a * n;
        double* pim = im.data() + a * n;
        for (std::size_t b = a; b < n; ++b) {
          pre[b] += ar * r[b].real() + ai * r[b].imag();
          pim[b] += ar * r[b].imag() - ai * r[b].real();
        }
      }
    }
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a; b < n; ++b) {
        const double v = re[a * n + b] * re[a * n + b] + im[a * n + b] * im[a * n + b];
        frob += (a == b ? 1.0 : 2.0) * v;
      }
    }
  }

  const double inv_l = 1.0 / l;
  return {energy * inv_l, frob * inv_l * inv_l, m, l};
}

double t_hdl(const ScmSummary& s) { return s.trace_r / s.antennas; }

double t_hds(const ScmSummary& s) {
  return s.trace_r2 / s.antennas +
         s.trace_r * s.trace_r / (static_cast<double>(s.samples) * s.antennas);
}

double t_hdq(const ScmSummary& s) {
  return s.trace_r2 / s.antennas - 2.0 * s.trace_r / s.antennas +
         s.trace_r * s.trace_r / (static_cast<double>(s.samples) * s.antennas);
}

double decision_statistic(DetectorKind kind, const ScmSummary& s, StatisticForm form) {
  const double m = s.antennas;
  if (form == StatisticForm::CrossTerm) {
    switch (kind) {
      case DetectorKind::HDL: return m * t_hdl(s);
      case DetectorKind::HDS: return m * t_hds(s);
      case DetectorKind::HDQ: return m * t_hdq(s);
      default: break;
    }
  } else {
    switch (kind) {
      case DetectorKind::HDL: return s.trace_r;
      case DetectorKind::HDS: return s.trace_r2;
      case DetectorKind::HDQ: return s.trace_r2 - 2.0 * s.trace_r + m;
      default: break;
    }
  }
  throw std::invalid_argument("decision_statistic: " + std::string(to_string(kind)) +
                              " is not a trace detector");
}

double baseline_glr(std::span<const double> eigenvalues) {
  if (eigenvalues.empty()) throw std::invalid_argument("baseline_glr: empty spectrum");
  double total = 0.0;
  double top = 0.0;
  for (double v : eigenvalues) {
    if (v < 0.0) throw std::invalid_argument("baseline_glr: negative eigenvalue");
    total += v;
    top = std::max(top, v);
  }
  if (total == 0.0) throw std::invalid_argument("baseline_glr: all-zero spectrum");
  return top / total;
}

double baseline_fn(std::span<const double> eigenvalues) {
  if (eigenvalues.empty()) throw std::invalid_argument("baseline_fn: empty spectrum");
  double sum_sq = 0.0;
  for (double v : eigenvalues) {
    if (v < 0.0) throw std::invalid_argument("baseline_fn: negative eigenvalue");
    sum_sq += v * v;
  }
  return sum_sq / static_cast<double>(eigenvalues.size());
}

double baseline_rao(std::span<const double> eigenvalues) {
  if (eigenvalues.empty()) throw std::invalid_argument("baseline_rao: empty spectrum");
  return std::accumulate(eigenvalues.begin(), eigenvalues.end(), 0.0,
                         [](double acc, double v) { return acc + (v - 1.0) * (v - 1.0); });
}

Decision decide(double statistic, double threshold) {
  if (!std::isfinite(statistic) || !std::isfinite(threshold)) {
    throw std::invalid_argument("decide: statistic and threshold must be finite");
  }
  return {statistic, threshold, statistic > threshold ? Hypothesis::H1 : Hypothesis::H0};
}

}  // namespace lss
