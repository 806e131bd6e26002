#pragma once

// Independent numerical machinery used to check the closed forms: a dense
// Hermitian eigensolver, numerical evaluation of the LSS contour integral,
// and real-axis quadrature against the Marcenko-Pastur density.

#include <complex>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "lss/rmt.hpp"

namespace lss::oracle {

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Eigenvalues in ascending order. For PSD input, values in [-1e-9, 0) are
/// clamped to 0.
struct Spectrum {
  std::vector<double> eigenvalues;

  std::size_t size() const { return eigenvalues.size(); }
  double sum() const;
  double sum_of_squares() const;
};

/// Cyclic complex Jacobi. `matrix` is dense row-major n x n, n <= 512.
/// Iterates until the off-diagonal Frobenius norm is <= 1e-12 ||A||_F.
/// Throws std::invalid_argument for non-Hermitian input and
/// ConvergenceError if the sweep budget runs out.
Spectrum hermitian_eigenvalues(std::span<const std::complex<double>> matrix, int n);

enum class LssFunction { Linear, Square, Quadratic };

std::complex<double> evaluate(LssFunction g, std::complex<double> z);
double evaluate(LssFunction g, double x);

/// Axis-aligned rectangle [center - half_width, center + half_width] x
/// [-half_height, half_height], traversed counter-clockwise.
struct Contour {
  double center;
  double half_width;
  double half_height;
  int nodes = 1024;

  double left() const { return center - half_width; }
  double right() const { return center + half_width; }
};

/// Eigenvalues at or below this fraction of lambda_max are treated as exact
/// null-space eigenvalues (the M > L case). Their terms in z_p and psi_p are
/// proportional to lambda and vanish identically, so they are zeroed and the
/// contour need not enclose them.
inline constexpr double kNullEigenvalueFraction = 1e-10;

/// When the SCM has fewer nonzero eigenvalues than samples, z_p(w) has one
/// zero w0 in (0, lambda_min). g(z_p)/z_p is singular there, so every valid
/// contour must enclose it; returns nullopt when no such zero exists.
std::optional<double> image_zero(const Spectrum& spectrum, int samples);

/// 10% margin around the nonzero eigenvalues, height max(span/2, 0.1), left
/// edge clipped to stay right of lambda_min / 2 so the origin is excluded,
/// then moved to w0 / 2 when image_zero() exists.
Contour make_contour(const Spectrum& spectrum, int samples, int nodes = 1024);

struct ContourResult {
  double value;           // real part of the full expression
  double imaginary;       // imaginary residue, a reality diagnostic
  double first_term;      // (1 - L/M) (1/2 pi j) int g(z)/z dz over the image contour
  double second_term;     // (L/M) (1/2 pi j) int g(z_p(w))/w psi_p(w) dw
};

/// Numerically evaluates the limiting LSS contour expression for g over the
/// given spectrum (the eigenvalues of a p x p SCM built from n samples).
/// Each side of the rectangle uses Gauss-Legendre nodes; the vertical sides
/// are sinh-mapped so nodes cluster where the contour passes closest to the
/// poles on the real axis. Throws std::invalid_argument if the contour does
/// not separate the nonzero eigenvalues (and image_zero()) from the origin
/// or passes within 1e-6 * span of an eigenvalue.
ContourResult lss_contour(LssFunction g, const Spectrum& spectrum, int antennas, int samples,
                          const Contour& contour);

/// F^c(g) = int_a^b g(z) sqrt((b-z)(z-a)) / (2 pi c z) dz by tanh-sinh
/// quadrature (absolute tolerance ~1e-12).
double mean_correction_numeric(LssFunction g, AspectRatio c);

/// int x^k dF_MP(x) over the continuous part, 1 <= k <= 8.
double mp_moment_numeric(int k, AspectRatio c);

/// int of the continuous MP density over its support (1 - mass_at_zero).
double mp_mass_numeric(AspectRatio c);

/// Stieltjes transform of the companion law (1-c) delta_0 + c F_MP at z off
/// the real axis, by quadrature. Inverse of stieltjes_inverse().
std::complex<double> companion_stieltjes_numeric(std::complex<double> z, AspectRatio c);

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussLegendreRule gauss_legendre(int n);

}  // namespace lss::oracle
