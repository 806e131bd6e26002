#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "lss/oracle.hpp"

namespace lss::oracle {

double Spectrum::sum() const {
  double s = 0.0;
  for (double v : eigenvalues) s += v;
  return s;
}

double Spectrum::sum_of_squares() const {
  double s = 0.0;
  for (double v : eigenvalues) s += v * v;
  return s;
}

Spectrum hermitian_eigenvalues(std::span<const std::complex<double>> matrix, int n) {
  if (n < 1 || n > 512) throw std::invalid_argument("hermitian_eigenvalues: need 1 <= n <= 512");
  const auto dim = static_cast<std::size_t>(n);
  if (matrix.size() != dim * dim) {
    throw std::invalid_argument("hermitian_eigenvalues: matrix is not n x n");
  }

  std::vector<std::complex<double>> a(matrix.begin(), matrix.end());
  auto at = [&](std::size_t i, std::size_t j) -> std::complex<double>& { return a[i * dim + j]; };

  double frob2 = 0.0;
  for (const auto& v : a) frob2 += std::norm(v);
  const double frob = std::sqrt(frob2);
  if (!std::isfinite(frob)) throw std::invalid_argument("hermitian_eigenvalues: non-finite entry");

  const double herm_tol = 1e-10 * std::max(1.0, frob);
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = i; j < dim; ++j) {
      if (std::abs(at(i, j) - std::conj(at(j, i))) > herm_tol) {
        throw std::invalid_argument("hermitian_eigenvalues: matrix is not Hermitian");
      }
      const auto avg = 0.5 * (at(i, j) + std::conj(at(j, i)));
      at(i, j) = avg;
      at(j, i) = std::conj(avg);
    }
  }

  constexpr int kMaxSweeps = 100;
  const double target = 1e-12 * frob;
  bool converged = false;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double off2 = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      for (std::size_t j = 0; j < dim; ++j) {
        if (i != j) off2 += std::norm(at(i, j));
      }
    }
    if (std::sqrt(off2) <= target) {
      converged = true;
      break;
    }

    for (std::size_t p = 0; p + 1 < dim; ++p) {
      for (std::size_t q = p + 1; q < dim; ++q) {
        const std::complex<double> apq = at(p, q);
        const double r = std::abs(apq);
        if (r == 0.0) continue;
        const double app = at(p, p).real();
        const double aqq = at(q, q).real();

        // Real rotation on the phase-aligned block [[app, r], [r, aqq]].
        const double theta = (aqq - app) / (2.0 * r);
        double t;
        if (std::abs(theta) > 1e150) {
          t = 0.5 / theta;
        } else {
          t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const std::complex<double> e = apq / r;
        const std::complex<double> e_bar = std::conj(e);

        // A <- A U with U = [[c, s], [-s conj(e), c conj(e)]] on (p, q).
        for (std::size_t k = 0; k < dim; ++k) {
          const auto akp = at(k, p);
          const auto akq = at(k, q);
          at(k, p) = c * akp - s * e_bar * akq;
          at(k, q) = s * akp + c * e_bar * akq;
        }
        // A <- U^H A.
        for (std::size_t k = 0; k < dim; ++k) {
          const auto apk = at(p, k);
          const auto aqk = at(q, k);
          at(p, k) = c * apk - s * e * aqk;
          at(q, k) = s * apk + c * e * aqk;
        }
        at(p, p) = app - t * r;
        at(q, q) = aqq + t * r;
        at(p, q) = 0.0;
        at(q, p) = 0.0;
      }
    }
  }
  if (!converged) {
    throw ConvergenceError("hermitian_eigenvalues: no convergence after " +
                           std::to_string(kMaxSweeps) + " sweeps");
  }

  Spectrum out;
  out.eigenvalues.reserve(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    double v = at(i, i).real();
    if (v < 0.0 && v >= -1e-9) v = 0.0;
    out.eigenvalues.push_back(v);
  }
  std::sort(out.eigenvalues.begin(), out.eigenvalues.end());
  return out;
}

}  // namespace lss::oracle
