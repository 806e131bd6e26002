#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>

#include "lss/oracle.hpp"

namespace lss::oracle {

namespace {

using cplx = std::complex<double>;

struct Pieces {
  cplx second;  // sum of w_k g(z_p) / omega psi_p
  cplx first;   // sum of w_k g(z_p) / z_p psi_p
};

class Integrand {
 public:
  Integrand(LssFunction g, std::span<const double> eigenvalues, int samples)
      : g_(g), lambda_(eigenvalues), inv_n_(1.0 / samples) {}

  void accumulate(cplx omega, cplx weight, Pieces& acc) const {
    cplx s1 = 0.0;
    cplx s2 = 0.0;
    for (double lam : lambda_) {
      if (lam == 0.0) continue;
      const cplx r = lam / (lam - omega);
      s1 += r;
      s2 += r * r;
    }
    const cplx z = omega * (1.0 - inv_n_ * s1);
    const cplx psi = 1.0 - inv_n_ * s2;
    const cplx gz = evaluate(g_, z);
    acc.second += weight * gz / omega * psi;
    acc.first += weight * gz / z * psi;
  }

 private:
  LssFunction g_;
  std::span<const double> lambda_;
  double inv_n_;
};

}  // namespace

std::complex<double> evaluate(LssFunction g, std::complex<double> z) {
  switch (g) {
    case LssFunction::Linear: return z;
    case LssFunction::Square: return z * z;
    case LssFunction::Quadratic: return (z - 1.0) * (z - 1.0);
  }
  return 0.0;
}

double evaluate(LssFunction g, double x) { return evaluate(g, cplx(x, 0.0)).real(); }

GaussLegendreRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  GaussLegendreRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged node for the weight.
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[static_cast<std::size_t>(i)] = -x;
    rule.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
    rule.weights[static_cast<std::size_t>(i)] = w;
    rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
  }
  if (n % 2 == 1) rule.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
  return rule;
}

namespace {

struct NonzeroRange {
  double lo;
  double hi;
};

NonzeroRange nonzero_range(std::span<const double> eigenvalues) {
  double hi = 0.0;
  for (double v : eigenvalues) hi = std::max(hi, v);
  if (!(hi > 0.0)) throw std::invalid_argument("contour: spectrum has no positive eigenvalue");
  double lo = hi;
  for (double v : eigenvalues) {
    if (v > kNullEigenvalueFraction * hi) lo = std::min(lo, v);
  }
  return {lo, hi};
}

std::vector<double> zero_null_eigenvalues(const Spectrum& spectrum) {
  std::vector<double> lam = spectrum.eigenvalues;
  double hi = 0.0;
  for (double v : lam) hi = std::max(hi, v);
  for (double& v : lam) {
    if (v < 0.0) throw std::invalid_argument("contour: negative eigenvalue");
    if (v <= kNullEigenvalueFraction * hi) v = 0.0;
  }
  return lam;
}

}  // namespace

std::optional<double> image_zero(const Spectrum& spectrum, int samples) {
  if (samples < 1) throw std::invalid_argument("image_zero: need L >= 1");
  const std::vector<double> lambda = zero_null_eigenvalues(spectrum);
  const auto [lo, hi] = nonzero_range(lambda);
  std::size_t rank = 0;
  for (double v : lambda) rank += v > 0.0 ? 1 : 0;
  if (rank >= static_cast<std::size_t>(samples)) return std::nullopt;

  // (1/L) sum lambda / (lambda - w) rises from rank/L < 1 at w = 0 to +inf
  // at lambda_min, so the crossing of 1 is unique and bisection is safe.
  const double inv_n = 1.0 / samples;
  auto excess = [&](double w) {
    double s = 0.0;
    for (double v : lambda) {
      if (v > 0.0) s += v / (v - w);
    }
    return inv_n * s - 1.0;
  };
  double a = 0.0;
  double b = lo;
  for (int iter = 0; iter < 200 && b - a > 1e-15 * lo; ++iter) {
    const double m = 0.5 * (a + b);
    (excess(m) < 0.0 ? a : b) = m;
  }
  return 0.5 * (a + b);
}

Contour make_contour(const Spectrum& spectrum, int samples, int nodes) {
  const auto [lo, hi] = nonzero_range(spectrum.eigenvalues);
  const double span = hi - lo;
  const double margin = 0.1 * (span > 0.0 ? span : hi);
  double left = std::max(lo - margin, 0.5 * lo);
  if (const auto w0 = image_zero(spectrum, samples)) left = std::min(left, 0.5 * *w0);
  const double right = hi + margin;
  const double height = std::max(0.5 * span, 0.1);
  return {0.5 * (left + right), 0.5 * (right - left), height, nodes};
}

ContourResult lss_contour(LssFunction g, const Spectrum& spectrum, int antennas, int samples,
                          const Contour& contour) {
  if (antennas < 1 || samples < 1) throw std::invalid_argument("lss_contour: need M, L >= 1");
  if (spectrum.size() != static_cast<std::size_t>(antennas)) {
    throw std::invalid_argument("lss_contour: spectrum must hold M eigenvalues");
  }
  if (contour.nodes < 256) throw std::invalid_argument("lss_contour: need at least 256 nodes");
  if (!(contour.half_width > 0.0) || !(contour.half_height > 0.0)) {
    throw std::invalid_argument("lss_contour: degenerate contour");
  }

  const std::vector<double> lambda = zero_null_eigenvalues(spectrum);
  const auto [lo, hi] = nonzero_range(lambda);
  const double left = contour.left();
  const double right = contour.right();
  const double scale = std::max(hi - lo, hi);
  if (!(left > 0.0)) throw std::invalid_argument("lss_contour: contour must exclude the origin");
  if (!(left < lo) || !(right > hi)) {
    throw std::invalid_argument("lss_contour: contour must enclose every nonzero eigenvalue");
  }
  const auto w0 = image_zero(spectrum, samples);
  if (w0 && !(left < *w0)) {
    throw std::invalid_argument("lss_contour: contour must enclose the positive zero of z_p");
  }
  const double left_gap = std::min(left, (w0 ? *w0 : lo) - left);
  const double right_gap = right - hi;
  if (left_gap < 1e-6 * scale || right_gap < 1e-6 * scale) {
    throw std::invalid_argument("lss_contour: contour passes too close to an eigenvalue");
  }

  const int per_side = contour.nodes / 4;
  const GaussLegendreRule rule = gauss_legendre(per_side);
  const Integrand f(g, lambda, samples);
  const double h = contour.half_height;
  Pieces acc;

  // Horizontal sides: bottom runs left -> right, top right -> left.
  const double half = 0.5 * (right - left);
  const double mid = 0.5 * (right + left);
  for (int k = 0; k < per_side; ++k) {
    const double x = mid + half * rule.nodes[k];
    const double w = half * rule.weights[k];
    f.accumulate(cplx(x, -h), cplx(w, 0.0), acc);
    f.accumulate(cplx(x, h), cplx(-w, 0.0), acc);
  }

  // Vertical sides: y = d sinh(u) clusters nodes near the real-axis crossing,
  // where the nearest poles sit at distance d.
  auto vertical = [&](double x, double gap, double direction) {
    const double umax = std::asinh(h / gap);
    for (int k = 0; k < per_side; ++k) {
      const double u = umax * rule.nodes[k];
      const double y = gap * std::sinh(u);
      const double dy = gap * std::cosh(u) * umax * rule.weights[k];
      f.accumulate(cplx(x, y), cplx(0.0, direction * dy), acc);
    }
  };
  vertical(right, right_gap, 1.0);
  vertical(left, left_gap, -1.0);

  // 1 / (2 pi j)
  const cplx inv_2pi_j(0.0, -0.5 / std::numbers::pi);
  const double ratio = static_cast<double>(samples) / antennas;
  const cplx first = (1.0 - ratio) * inv_2pi_j * acc.first;
  const cplx second = ratio * inv_2pi_j * acc.second;
  const cplx total = first + second;
  return {total.real(), total.imag(), first.real(), second.real()};
}

}  // namespace lss::oracle
